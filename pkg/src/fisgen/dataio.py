"""Dataset loading/writing and the synthetic stand-in data generator."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, EmptyFile, InvalidSpec, MissingColumn, NonNumericCell, RaggedRow
from .fcm import UINT64_MASK

SYNTHETIC_COLUMNS = ("Attrib", "Nonmenu", "Size")
BUNDLED_DATASET = Path(__file__).parent / "data" / "synthetic_size.csv"


@dataclass(frozen=True)
class Dataset:
    column_names: tuple[str, ...]
    rows: np.ndarray
    row_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "column_names", tuple(self.column_names))
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(self.column_names):
            raise DataError(f"rows of shape {rows.shape} do not match {len(self.column_names)} columns")
        if len(set(self.column_names)) != len(self.column_names):
            raise DataError("column names must be unique")
        if not np.all(np.isfinite(rows)):
            raise DataError("dataset contains non-finite values")
        if self.row_ids is not None and len(self.row_ids) != rows.shape[0]:
            raise DataError("row_ids length does not match the row count")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise MissingColumn(name, self.column_names) from None

    def columns(self, names: Sequence[str]) -> np.ndarray:
        return self.rows[:, [self.column_index(c) for c in names]]

    def select(self, names: Sequence[str]) -> "Dataset":
        return Dataset(tuple(names), self.columns(names), self.row_ids)


def _cell(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise NonNumericCell(row, column, text) from None
    if not math.isfinite(value):
        raise NonNumericCell(row, column, text)
    return value


def parse_dataset(text: str, predictors: Sequence[str] | None = None, target: str | None = None) -> Dataset:
    """Parse CSV text. With ``predictors``/``target`` only those columns are kept (and checked)."""
    lines = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not lines:
        raise EmptyFile("file is empty")
    header = [h.strip() for h in lines[0]]
    body = lines[1:]
    if not body:
        raise EmptyFile("file has a header but no data rows")
    wanted = list(header)
    if predictors is not None or target is not None:
        wanted = list(predictors or []) + ([target] if target is not None else [])
        for name in wanted:
            if name not in header:
                raise MissingColumn(name, header)
    idx = [header.index(c) for c in wanted]
    rows = []
    for r, line in enumerate(body, start=1):
        if len(line) != len(header):
            raise RaggedRow(f"row {r} has {len(line)} cells, header has {len(header)}")
        rows.append([_cell(line[i].strip(), r, header[i]) for i in idx])
    return Dataset(tuple(wanted), np.array(rows, dtype=float))


def load_dataset(path, predictors: Sequence[str] | None = None, target: str | None = None) -> Dataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    return parse_dataset(text, predictors, target)


def format_number(value: float) -> str:
    """Shortest text that round-trips the float; integral values print without a fraction."""
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def dataset_to_csv(dataset: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset.column_names)
    for row in dataset.rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(dataset_to_csv(dataset), encoding="utf-8")


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


DEFAULT_CENTERS = (
    (20.0, 8.0, 300.0),
    (35.0, 14.0, 500.0),
    (50.0, 20.0, 700.0),
    (70.0, 28.0, 950.0),
    (95.0, 38.0, 1250.0),
    (125.0, 50.0, 1600.0),
    (160.0, 64.0, 2000.0),
)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic size dataset.

    Row ``i`` is drawn around ``centers[i % len(centers)]`` with Gaussian
    noise whose standard deviation is ``noise`` times each coordinate.
    """

    n: int = 70
    centers: tuple = DEFAULT_CENTERS
    noise: float = 0.12
    seed: int = 2011
    columns: tuple = SYNTHETIC_COLUMNS
    integer: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpec(f"n must be >= 1, got {self.n}")
        if not self.centers:
            raise InvalidSpec("at least one center is required")
        width = len(self.columns)
        for c in self.centers:
            if len(c) != width or not all(math.isfinite(v) for v in c):
                raise InvalidSpec(f"center {c!r} must hold {width} finite values")
        if not math.isfinite(self.noise) or self.noise < 0:
            raise InvalidSpec(f"noise must be >= 0, got {self.noise}")
        if not 0 <= int(self.seed) <= UINT64_MASK:
            raise InvalidSpec(f"seed must fit in 64 unsigned bits, got {self.seed}")


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec()) -> Dataset:
    centers = np.asarray(spec.centers, dtype=float)
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    base = centers[np.arange(spec.n) % len(centers)]
    noise = rng.standard_normal(base.shape) * spec.noise * np.abs(base)
    rows = base + noise
    if spec.integer:
        rows = np.rint(rows)
    rows = np.maximum(rows, 0.0) if np.all(centers >= 0) else rows
    return Dataset(tuple(spec.columns), rows + 0.0)
