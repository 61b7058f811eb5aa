"""Triangular membership partitions built from one-dimensional FCM centers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, DuplicateCenters, TooFewPoints
from .fcm import FCMConfig, fcm_cluster

LEFT = "left_shoulder"
INTERIOR = "interior"
RIGHT = "right_shoulder"
SHAPES = (LEFT, INTERIOR, RIGHT)

DEFAULT_LABELS = (
    "VerySmall",
    "Small",
    "SmallMedium",
    "Medium",
    "MediumLarge",
    "Large",
    "VeryLarge",
)

DUPLICATE_EPS = 1e-9


@dataclass(frozen=True)
class TriangularMF:
    a: float
    b: float
    c: float
    shape: str = INTERIOR

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DataError(f"unknown membership shape {self.shape!r}")
        if not (self.a <= self.b <= self.c):
            raise DataError(f"triangle points must satisfy a <= b <= c, got {self.a}, {self.b}, {self.c}")
        if self.shape == INTERIOR and not (self.a < self.b < self.c):
            raise DataError("interior triangles need a < b < c")

    def __call__(self, x: float) -> float:
        return eval_mf(self, x)


def eval_mf(mf: TriangularMF, x: float) -> float:
    a, b, c = mf.a, mf.b, mf.c
    if x <= b:
        if mf.shape == LEFT or x == b:
            return 1.0
        return max(0.0, (x - a) / (b - a))
    if mf.shape == RIGHT:
        return 1.0
    return max(0.0, (c - x) / (c - b))


def _eval_mf_array(mf: TriangularMF, x: np.ndarray) -> np.ndarray:
    a, b, c = mf.a, mf.b, mf.c
    out = np.ones_like(x, dtype=float)
    left = x < b
    right = x > b
    if mf.shape != LEFT:
        out[left] = np.maximum(0.0, (x[left] - a) / (b - a))
    if mf.shape != RIGHT:
        out[right] = np.maximum(0.0, (c - x[right]) / (c - b))
    return out


@dataclass(frozen=True)
class Partition:
    variable_name: str
    mfs: tuple[TriangularMF, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "mfs", tuple(self.mfs))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.mfs) < 2:
            raise DataError("a partition needs at least two membership functions")
        if len(self.labels) != len(self.mfs):
            raise DataError(f"{len(self.labels)} labels for {len(self.mfs)} membership functions")
        centers = self.centers
        if np.any(np.diff(centers) <= 0):
            raise DataError("membership centers must be strictly increasing")
        if self.mfs[0].shape != LEFT or self.mfs[-1].shape != RIGHT:
            raise DataError("partition must start with a left shoulder and end with a right shoulder")
        for j, mf in enumerate(self.mfs):
            if 0 < j < len(self.mfs) - 1 and mf.shape != INTERIOR:
                raise DataError(f"membership function {j + 1} must be interior")
            if j > 0 and mf.a != centers[j - 1]:
                raise DataError(f"membership function {j + 1} must start at the previous center")
            if j < len(self.mfs) - 1 and mf.c != centers[j + 1]:
                raise DataError(f"membership function {j + 1} must end at the next center")

    @property
    def size(self) -> int:
        return len(self.mfs)

    @property
    def centers(self) -> np.ndarray:
        return np.array([mf.b for mf in self.mfs])

    def to_dict(self) -> dict:
        return {
            "variable": self.variable_name,
            "labels": list(self.labels),
            "mfs": [{"a": mf.a, "b": mf.b, "c": mf.c, "shape": mf.shape} for mf in self.mfs],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Partition":
        try:
            mfs = [TriangularMF(float(d["a"]), float(d["b"]), float(d["c"]), d["shape"]) for d in doc["mfs"]]
            return cls(doc["variable"], tuple(mfs), tuple(doc["labels"]))
        except KeyError as exc:
            raise DataError(f"partition document lacks field {exc.args[0]!r}") from None


def partition_from_centers(variable_name: str, centers: Sequence[float], labels: Sequence[str]) -> Partition:
    """Triangles whose feet sit on the neighbouring centers; shoulders at both ends."""
    b = [float(v) for v in centers]
    last = len(b) - 1
    mfs = []
    for j, bj in enumerate(b):
        if j == 0:
            mfs.append(TriangularMF(bj, bj, b[1], LEFT))
        elif j == last:
            mfs.append(TriangularMF(b[j - 1], bj, bj, RIGHT))
        else:
            mfs.append(TriangularMF(b[j - 1], bj, b[j + 1], INTERIOR))
    return Partition(variable_name, tuple(mfs), tuple(labels))


def build_partition(
    values,
    mf_count: int,
    labels: Sequence[str] | None = None,
    fcm_config: FCMConfig | None = None,
    variable_name: str = "x",
) -> Partition:
    """Cluster ``values`` in one dimension and turn the sorted centers into a partition.

    ``fcm_config`` supplies the clustering hyperparameters; its cluster count
    is overridden by ``mf_count``.
    """
    if mf_count < 2:
        raise DataError(f"mf_count must be >= 2, got {mf_count}")
    labels = tuple(labels) if labels is not None else default_labels(mf_count)
    if len(labels) != mf_count:
        raise DataError(f"{len(labels)} labels supplied for {mf_count} membership functions")
    x = np.asarray(values, dtype=float).reshape(-1)
    if x.size < mf_count:
        raise TooFewPoints(f"{x.size} values cannot support {mf_count} membership functions")

    base = fcm_config or FCMConfig(cluster_count=mf_count)
    config = FCMConfig(
        cluster_count=mf_count,
        m=base.m,
        tolerance=base.tolerance,
        max_iterations=base.max_iterations,
        seed=base.seed,
        scale=base.scale,
    )
    centers = np.sort(fcm_cluster(x, config).centers[:, 0])
    gaps = np.diff(centers)
    if np.any(gaps < DUPLICATE_EPS):
        j = int(np.argmin(gaps))
        raise DuplicateCenters(
            f"{variable_name}: centers {j + 1} and {j + 2} coincide ({centers[j]:.6g}); "
            f"use fewer than {mf_count} membership functions"
        )
    return partition_from_centers(variable_name, centers, labels)


def default_labels(mf_count: int) -> tuple[str, ...]:
    if mf_count == len(DEFAULT_LABELS):
        return DEFAULT_LABELS
    return tuple(f"MF{j}" for j in range(1, mf_count + 1))


def eval_partition(partition: Partition, x: float) -> np.ndarray:
    return np.array([eval_mf(mf, x) for mf in partition.mfs])


def eval_partition_many(partition: Partition, xs) -> np.ndarray:
    """Degrees for many inputs at once, shape (len(xs), partition.size)."""
    x = np.asarray(xs, dtype=float).reshape(-1)
    return np.stack([_eval_mf_array(mf, x) for mf in partition.mfs], axis=1)


def argmax_label(partition: Partition, x: float) -> int:
    """1-based index of the best-matching function; ties go to the smaller index."""
    return int(np.argmax(eval_partition(partition, x))) + 1
