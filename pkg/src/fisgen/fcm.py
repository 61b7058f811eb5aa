"""Fuzzy c-means clustering.

Plain alternating optimisation of the usual objective
``J = sum_i sum_k U[i, k]**m * ||x_i - c_k||**2``.

Random initialisation draws a membership matrix from numpy's PCG64 bit
generator (``numpy.random.Generator(numpy.random.PCG64(seed))``), taking
``Generator.random`` doubles and normalising each row to sum to one.
PCG64 is a fixed, platform-independent algorithm, so runs are reproducible
everywhere for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateCluster,
    DimensionMismatch,
    EmptyInput,
    InvalidConfig,
    NonFiniteInput,
    TooFewPoints,
)

UINT64_MASK = (1 << 64) - 1
COINCIDENCE_EPS = 1e-12
MAX_REINIT = 3


@dataclass(frozen=True)
class FCMConfig:
    """Hyperparameters for one clustering run.

    ``tolerance`` bounds the largest change of any membership entry between
    successive iterations. ``scale`` min-max normalises each dimension before
    clustering (centers are reported in the original units).
    """

    cluster_count: int
    m: float = 2.0
    tolerance: float = 1e-6
    max_iterations: int = 300
    seed: int = 0
    scale: bool = False

    def __post_init__(self):
        if not isinstance(self.cluster_count, (int, np.integer)) or self.cluster_count < 1:
            raise InvalidConfig(f"cluster_count must be a positive integer, got {self.cluster_count!r}")
        if not np.isfinite(self.m) or self.m <= 1.0:
            raise InvalidConfig(f"fuzzifier m must be > 1, got {self.m!r}")
        if not np.isfinite(self.tolerance) or self.tolerance <= 0.0:
            raise InvalidConfig(f"tolerance must be > 0, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise InvalidConfig(f"max_iterations must be >= 1, got {self.max_iterations!r}")
        if not 0 <= int(self.seed) <= UINT64_MASK:
            raise InvalidConfig(f"seed must fit in 64 unsigned bits, got {self.seed!r}")


@dataclass
class FCMResult:
    centers: np.ndarray
    memberships: np.ndarray
    objective_history: list[float] = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise DimensionMismatch(f"points must be an n x d matrix, got shape {x.shape}")
    return x


def _distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    if points.shape[1] != centers.shape[1]:
        raise DimensionMismatch(
            f"points have dimension {points.shape[1]} but centers have {centers.shape[1]}"
        )
    diff = points[:, None, :] - centers[None, :, :]
    return np.sqrt(np.einsum("nkd,nkd->nk", diff, diff))


def fcm_objective(points, centers, U, m: float) -> float:
    x = _as_points(points)
    c = _as_points(centers)
    U = np.asarray(U, dtype=float)
    if U.shape != (x.shape[0], c.shape[0]):
        raise DimensionMismatch(f"U has shape {U.shape}, expected {(x.shape[0], c.shape[0])}")
    d = _distances(x, c)
    return float(np.sum(U**m * d**2))


def update_memberships(points, centers, m: float) -> np.ndarray:
    """Membership matrix for fixed centers.

    A point lying on one or more centers (distance below 1e-12) gives those
    centers equal shares of its unit mass and every other center zero.
    """
    x = _as_points(points)
    c = _as_points(centers)
    if c.shape[0] == 0:
        raise DimensionMismatch("at least one center is required")
    d = _distances(x, c)
    power = 2.0 / (m - 1.0)

    coincident = d < COINCIDENCE_EPS
    hit = coincident.any(axis=1)

    U = np.empty_like(d)
    if np.any(~hit):
        # log domain keeps d**-power finite for fuzzifiers close to 1
        logs = -power * np.log(d[~hit])
        logs -= logs.max(axis=1, keepdims=True)
        w = np.exp(logs)
        U[~hit] = w / w.sum(axis=1, keepdims=True)
    if np.any(hit):
        mask = coincident[hit].astype(float)
        U[hit] = mask / mask.sum(axis=1, keepdims=True)
    return U


def update_centers(points, U, m: float) -> np.ndarray:
    x = _as_points(points)
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"U has shape {U.shape}, expected ({x.shape[0]}, k)")
    w = U**m
    totals = w.sum(axis=0)
    if np.any(totals <= 0.0):
        bad = np.flatnonzero(totals <= 0.0).tolist()
        raise DegenerateCluster(f"clusters {bad} carry zero total weight")
    return (w.T @ x) / totals[:, None]


def random_memberships(n: int, k: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(int(seed) & UINT64_MASK))
    U = rng.random((n, k))
    return U / U.sum(axis=1, keepdims=True)


def _validate_points(points) -> np.ndarray:
    x = _as_points(points)
    if x.shape[0] == 0:
        raise EmptyInput("no points to cluster")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("points contain NaN or infinite coordinates")
    return x


def _run(x: np.ndarray, U: np.ndarray, config: FCMConfig, on_iteration=None) -> FCMResult:
    m = config.m
    history: list[float] = []
    converged = False
    it = 0
    centers = update_centers(x, U, m)
    history.append(fcm_objective(x, centers, U, m))
    for it in range(1, config.max_iterations + 1):
        U_new = update_memberships(x, centers, m)
        if on_iteration is not None:
            on_iteration(it, centers, U_new)
        history.append(fcm_objective(x, centers, U_new, m))
        delta = float(np.max(np.abs(U_new - U)))
        U = U_new
        if delta < config.tolerance:
            converged = True
            break
        centers = update_centers(x, U, m)
        history.append(fcm_objective(x, centers, U, m))
    return FCMResult(centers, U, history, it, converged)


def fcm_cluster(points, config: FCMConfig, init_memberships=None, on_iteration=None) -> FCMResult:
    """Cluster ``points`` (n x d) into ``config.cluster_count`` fuzzy clusters.

    Parameters
    ----------
    points : array_like, shape (n, d) or (n,)
        Observations; a 1-D array is treated as n one-dimensional points.
    config : FCMConfig
    init_memberships : array_like, optional
        Starting membership matrix (n x k). When omitted a seeded random
        matrix is drawn. A degenerate start is retried with seed+1, up to
        three times, before ``DegenerateCluster`` propagates.
    on_iteration : callable, optional
        Called as ``on_iteration(iteration, centers, memberships)`` after
        every membership update (coordinates in the clustering space).

    Returns
    -------
    FCMResult
        ``objective_history`` records J after every half-step (center update
        and membership update), so it is non-increasing.
    """
    x = _validate_points(points)
    n, k = x.shape[0], config.cluster_count
    if n < k:
        raise TooFewPoints(f"{n} points cannot form {k} clusters")

    lo = hi = None
    if config.scale:
        lo = x.min(axis=0)
        span = x.max(axis=0) - lo
        hi = np.where(span > 0.0, span, 1.0)
        x = (x - lo) / hi

    if init_memberships is not None:
        U0 = np.asarray(init_memberships, dtype=float)
        if U0.shape != (n, k):
            raise DimensionMismatch(f"init_memberships has shape {U0.shape}, expected {(n, k)}")
        result = _run(x, U0, config, on_iteration)
    else:
        seed = int(config.seed)
        for attempt in range(MAX_REINIT + 1):
            try:
                result = _run(x, random_memberships(n, k, seed), config, on_iteration)
                break
            except DegenerateCluster:
                if attempt == MAX_REINIT:
                    raise
                seed = (seed + 1) & UINT64_MASK

    if config.scale:
        result.centers = result.centers * hi + lo
    return result
