"""Residual accuracy measures, best-model selection and approach comparison."""

from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

from .errors import DataError, EmptyRecords, InvalidConfig, MisalignedRecords, NoPredictionsMade

MEASURES = ("abs_sum", "mean", "median")
COVERAGE_MODES = ("ignore", "max_coverage")
RECORD_FIELDS = {"abs_sum": "abs_residual_sum", "mean": "mean_abs_residual", "median": "median_abs_residual"}
RECORDS_CSV_HEADER = ("sample", "approach", "rule_count", "coverage", "abs_res", "ave_res", "med_res", "predictions_made")


def round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


@dataclass(frozen=True)
class ResidualStats:
    abs_residual_sum: float
    mean_abs_residual: float
    median_abs_residual: float
    count: int


@dataclass(frozen=True)
class AccuracyRecord:
    """Accuracy of one FIS on one test subset.

    Residual fields are ``None`` when the model made no predictions.
    """

    rule_count: int
    coverage: float
    abs_residual_sum: float | None
    mean_abs_residual: float | None
    median_abs_residual: float | None
    predictions_made: int

    def measure(self, name: str) -> float | None:
        return getattr(self, RECORD_FIELDS[name])

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "AccuracyRecord":
        return cls(**doc)


def residual_metrics(predictions: Sequence[float | None], actuals: Sequence[float], mean_denominator: int | None = None) -> ResidualStats:
    """Sum, mean and median of |prediction - actual| over present predictions.

    ``mean_denominator`` overrides the divisor of the mean (e.g. the full
    test-set size); by default it is the number of predictions made.
    """
    if len(predictions) != len(actuals):
        raise DataError(f"{len(predictions)} predictions for {len(actuals)} actual values")
    residuals = [abs(float(p) - float(a)) for p, a in zip(predictions, actuals) if p is not None]
    if not residuals:
        raise NoPredictionsMade("no predictions were made")
    total = math.fsum(residuals)
    denom = mean_denominator if mean_denominator is not None else len(residuals)
    return ResidualStats(total, total / denom, float(statistics.median(residuals)), len(residuals))


def accuracy_record(rule_count: int, predictions: Sequence[float | None], actuals: Sequence[float], ave_denominator: str = "predictions") -> AccuracyRecord:
    """Build the record for one model evaluated on one test subset."""
    if ave_denominator not in ("predictions", "test_size"):
        raise InvalidConfig(f"ave_denominator must be 'predictions' or 'test_size', got {ave_denominator!r}")
    n = len(actuals)
    if n == 0:
        raise DataError("empty test subset")
    made = sum(p is not None for p in predictions)
    coverage = made / n
    if made == 0:
        return AccuracyRecord(rule_count, 0.0, None, None, None, 0)
    stats = residual_metrics(predictions, actuals, n if ave_denominator == "test_size" else None)
    return AccuracyRecord(rule_count, coverage, stats.abs_residual_sum, stats.mean_abs_residual, stats.median_abs_residual, made)


def _measure_vector(r: AccuracyRecord) -> tuple[float, float, float]:
    return tuple(math.inf if r.measure(m) is None else r.measure(m) for m in MEASURES)


def select_best(records: Sequence[AccuracyRecord], measure: str = "abs_sum", coverage_mode: str = "ignore") -> AccuracyRecord:
    """Most accurate record; ties go to fewer rules, then the smaller measure vector."""
    if measure not in MEASURES:
        raise InvalidConfig(f"measure must be one of {MEASURES}, got {measure!r}")
    if coverage_mode not in COVERAGE_MODES:
        raise InvalidConfig(f"coverage_mode must be one of {COVERAGE_MODES}, got {coverage_mode!r}")
    if not records:
        raise EmptyRecords("no records to choose from")
    pool = list(records)
    if coverage_mode == "max_coverage":
        top = max(r.coverage for r in pool)
        pool = [r for r in pool if r.coverage == top]

    def key(r: AccuracyRecord):
        value = r.measure(measure)
        return (math.inf if value is None else value, r.rule_count, _measure_vector(r))

    return min(pool, key=key)


@dataclass(frozen=True)
class ComparisonResult:
    measure: str
    pct_best_a: float
    pct_best_b: float
    rule_counts: int

    @property
    def display(self) -> tuple[int, int]:
        return round_half_up(self.pct_best_a), round_half_up(self.pct_best_b)


def compare_approaches(records_a: Sequence[AccuracyRecord], records_b: Sequence[AccuracyRecord], measure: str = "abs_sum") -> ComparisonResult:
    """Share of aligned rule counts at which each approach is at least as accurate.

    A record with no predictions is worse than any record with predictions;
    two such records tie.
    """
    if measure not in MEASURES:
        raise InvalidConfig(f"measure must be one of {MEASURES}, got {measure!r}")
    counts_a = [r.rule_count for r in records_a]
    counts_b = [r.rule_count for r in records_b]
    if counts_a != counts_b or not counts_a:
        raise MisalignedRecords("record sequences must cover the same, non-empty rule counts in the same order")
    best_a = best_b = 0
    for ra, rb in zip(records_a, records_b):
        va = ra.measure(measure)
        vb = rb.measure(measure)
        va = math.inf if va is None else va
        vb = math.inf if vb is None else vb
        if va <= vb:
            best_a += 1
        if vb <= va:
            best_b += 1
    total = len(counts_a)
    return ComparisonResult(measure, 100.0 * best_a / total, 100.0 * best_b / total, total)


@dataclass(frozen=True)
class ComparisonSummary:
    per_sample: dict
    overall: dict


def summarize_comparison(per_sample: Mapping[int, Mapping[str, ComparisonResult]]) -> ComparisonSummary:
    """Mean and median of the per-sample percentages, per measure and approach."""
    if not per_sample:
        raise DataError("no samples to summarise")
    measures = sorted({m for row in per_sample.values() for m in row}, key=MEASURES.index)
    table = {
        s: {m: {"a": res.pct_best_a, "b": res.pct_best_b} for m, res in row.items()}
        for s, row in per_sample.items()
    }
    overall = {}
    for m in measures:
        a = [row[m].pct_best_a for row in per_sample.values() if m in row]
        b = [row[m].pct_best_b for row in per_sample.values() if m in row]
        overall[m] = {
            "mean": {"a": statistics.fmean(a), "b": statistics.fmean(b)},
            "median": {"a": float(statistics.median(a)), "b": float(statistics.median(b))},
        }
    return ComparisonSummary(table, overall)


def record_csv_row(sample: int | str, approach: str, record: AccuracyRecord) -> list:
    """Display row: coverage as an integer percentage, residuals rounded to integers."""

    def rounded(v):
        return "" if v is None else round_half_up(v)

    return [
        sample,
        approach,
        record.rule_count,
        round_half_up(100 * record.coverage),
        rounded(record.abs_residual_sum),
        rounded(record.mean_abs_residual),
        rounded(record.median_abs_residual),
        record.predictions_made,
    ]
