"""Build/test splits and Welch t-tests between samples."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, InvalidSizes, TooFewObservations, ZeroVariance
from .fcm import UINT64_MASK

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
ALPHAS = (0.01, 0.05, 0.10)


@dataclass(frozen=True)
class SplitPlan:
    sample_index: int
    build_indices: tuple[int, ...]
    test_indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"index": self.sample_index, "build": list(self.build_indices), "test": list(self.test_indices)}


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    significant_at: dict = field(default_factory=dict)


def child_seed(seed: int, sample_index: int) -> int:
    return (int(seed) ^ (sample_index * GOLDEN_GAMMA)) & UINT64_MASK


def make_splits(n: int, build_size: int, sample_count: int, seed: int = 0) -> list[SplitPlan]:
    """Independent uniform random build/test partitions of ``range(n)``.

    Sample ``s`` (1-based) draws from PCG64 seeded with
    ``seed XOR (s * 0x9E3779B97F4A7C15)`` modulo 2**64.
    """
    if not 0 < build_size < n:
        raise InvalidSizes(f"build_size must satisfy 0 < build_size < n, got {build_size} with n={n}")
    if sample_count < 1:
        raise InvalidSizes(f"sample_count must be >= 1, got {sample_count}")
    plans = []
    for s in range(1, sample_count + 1):
        rng = np.random.Generator(np.random.PCG64(child_seed(seed, s)))
        order = rng.permutation(n)
        build = tuple(sorted(int(i) for i in order[:build_size]))
        test = tuple(sorted(int(i) for i in order[build_size:]))
        plans.append(SplitPlan(s, build, test))
    return plans


def splits_to_dict(plans: Sequence[SplitPlan], seed: int) -> dict:
    return {"seed": int(seed), "samples": [p.to_dict() for p in plans]}


def splits_from_dict(doc: dict) -> list[SplitPlan]:
    try:
        return [SplitPlan(int(s["index"]), tuple(s["build"]), tuple(s["test"])) for s in doc["samples"]]
    except KeyError as exc:
        raise DataError(f"split document lacks field {exc.args[0]!r}") from None


# Regularised incomplete beta via the modified Lentz continued fraction.
_CF_TINY = 1e-300
_CF_EPS = 1e-15
_CF_MAX_ITER = 10_000


def _beta_cf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return min(1.0, max(0.0, regularized_incomplete_beta(df / 2.0, 0.5, x)))


def _mean_var(values: Sequence[float]) -> tuple[float, float, int]:
    v = [float(x) for x in values]
    n = len(v)
    mean = math.fsum(v) / n
    var = math.fsum((x - mean) ** 2 for x in v) / (n - 1)
    return mean, var, n


def welch_t_test(x: Sequence[float], y: Sequence[float], alphas: Sequence[float] = ALPHAS) -> TTestResult:
    """Two-sided Welch (unequal variance) t-test."""
    if len(x) < 2 or len(y) < 2:
        raise TooFewObservations(f"each sample needs >= 2 observations, got {len(x)} and {len(y)}")
    if not all(math.isfinite(float(v)) for v in itertools.chain(x, y)):
        raise DataError("t-test input contains non-finite values")
    mx, vx, nx = _mean_var(x)
    my, vy, ny = _mean_var(y)
    if vx == 0.0 and vy == 0.0:
        raise ZeroVariance("both samples are constant; the t statistic is undefined")
    sx, sy = vx / nx, vy / ny
    se2 = sx + sy
    t = (mx - my) / math.sqrt(se2)
    # shares of se2 keep the df ratio clear of underflow for tiny variances
    a, b = sx / se2, sy / se2
    df = 1.0 / (a * a / (nx - 1) + b * b / (ny - 1))
    p = student_t_two_sided_p(t, df)
    return TTestResult(t, df, p, {float(a): p < a for a in alphas})


def pairwise_uniformity(
    splits: Sequence[SplitPlan],
    data,
    column: int = -1,
    subset: str = "build",
) -> list[list[TTestResult | None]]:
    """Welch tests of one column between every pair of samples.

    ``subset`` picks which side of each split is compared ("build" or
    "test"). The result is a symmetric matrix with ``None`` on the diagonal;
    the lower triangle holds the swapped tests (t negated).
    """
    if len(splits) < 2:
        raise DataError("need at least two splits to compare")
    if subset not in ("build", "test"):
        raise DataError(f"subset must be 'build' or 'test', got {subset!r}")
    values = np.asarray(data, dtype=float)
    col = values[:, column] if values.ndim == 2 else values
    groups = [col[list(p.build_indices if subset == "build" else p.test_indices)] for p in splits]
    s = len(splits)
    matrix: list[list[TTestResult | None]] = [[None] * s for _ in range(s)]
    for i, j in itertools.combinations(range(s), 2):
        res = welch_t_test(groups[i], groups[j])
        matrix[i][j] = res
        matrix[j][i] = TTestResult(-res.t_statistic, res.degrees_of_freedom, res.p_value, dict(res.significant_at))
    return matrix
