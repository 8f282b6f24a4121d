"""Parameter sweeps, period detection and the period-doubling cascade."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import MapParams, as_bloch, random_bloch_state

FEIGENBAUM_DELTA = 4.669201609102990
DEFAULT_MAX_PERIOD = 64
DEFAULT_TOL = 1e-6
DEFAULT_TRANSIENT = 5_000
DEFAULT_SAMPLES = 256
# bisection probes r arbitrarily close to a doubling point, where the
# approach to the cycle is slow (multiplier close to -1)
BISECTION_TRANSIENT = 200_000


class InsufficientDataError(ValueError):
    pass


class BadBracketError(ValueError):
    pass


@dataclass(frozen=True)
class PeriodResult:
    period: int | None  # None: aperiodic up to max_period
    cluster_centers: tuple = ()  # z-values of the cycle points, ascending
    residual: float = float("nan")

    @property
    def is_periodic(self) -> bool:
        return self.period is not None


def detect_period(orbit, max_period: int = DEFAULT_MAX_PERIOD, tol: float = DEFAULT_TOL) -> PeriodResult:
    """Smallest ``k`` with ``|v[t+k] - v[t]| < tol`` for every sampled ``t``.

    Distances are full 3D Euclidean distances.  The orbit must be
    post-transient and hold at least ``4 * max_period`` points.
    """
    pts = np.asarray(orbit, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("orbit must have shape (n, 3)")
    if len(pts) < 4 * max_period:
        raise InsufficientDataError(f"need at least {4 * max_period} points, got {len(pts)}")
    for k in range(1, max_period + 1):
        diff = pts[k:] - pts[:-k]
        res = float(np.sqrt(np.max(np.einsum("ij,ij->i", diff, diff))))
        if res < tol:
            centers = tuple(sorted(float(zz) for zz in pts[-k:, 2]))
            return PeriodResult(k, centers, res)
    return PeriodResult(None)


@dataclass
class BifurcationDiagram:
    r_grid: np.ndarray
    points: np.ndarray  # (len(r_grid), n_sample, 3)
    params: MapParams
    n_transient: int
    n_sample: int
    seed: int
    warm_start: bool
    _periods: list | None = field(default=None, repr=False)

    def periods(self, max_period: int = DEFAULT_MAX_PERIOD, tol: float = DEFAULT_TOL) -> list[PeriodResult]:
        mp = min(max_period, self.n_sample // 4)
        return [detect_period(pts, mp, tol) for pts in self.points]

    def rows(self):
        """``(r, x, y, z)`` rows, one per sampled point."""
        for r, pts in zip(self.r_grid, self.points):
            for x, y, z in pts:
                yield float(r), float(x), float(y), float(z)


def _sample(v0, p, r, n_transient, n_sample):
    return _kernels.orbit(v0, p.alpha, p.beta, float(r), int(n_transient), int(n_sample))


def sweep(r_grid, p_template: MapParams, n_transient: int = DEFAULT_TRANSIENT,
          n_sample: int = DEFAULT_SAMPLES, seed: int = 0, warm_start: bool = True,
          threads: int = 1) -> BifurcationDiagram:
    """Sample the post-transient orbit at every ``r`` in ``r_grid``.

    Cold start: each ``r`` starts from ``random_bloch_state(seed)``; this is
    embarrassingly parallel over ``threads``.  Warm start: each ``r`` starts
    from the state reached at the previous grid value, which follows one
    attractor branch and is necessarily sequential.
    """
    grid = np.asarray(r_grid, dtype=np.float64)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("r_grid must be a non-empty 1D sequence")
    if np.any(np.diff(grid) < 0):
        raise ValueError("r_grid must be sorted")
    if n_transient < 0 or n_sample <= 0:
        raise ValueError("n_transient must be >= 0 and n_sample > 0")
    for r in (grid[0], grid[-1]):
        p_template.with_r(r)
    v0 = random_bloch_state(seed)
    out = np.empty((len(grid), n_sample, 3))
    if warm_start:
        v = v0
        for i, r in enumerate(grid):
            pts = _sample(v, p_template, r, n_transient, n_sample)
            out[i] = pts
            v = np.array(_kernels.step_xyz(*pts[-1], p_template.alpha, p_template.beta, float(r)))
    else:
        def job(r):
            return _sample(v0, p_template, r, n_transient, n_sample)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(job, grid))
        else:
            results = [job(r) for r in grid]
        for i, pts in enumerate(results):
            out[i] = pts
    return BifurcationDiagram(grid, out, p_template, int(n_transient), int(n_sample),
                              int(seed), bool(warm_start))


def _probe_period(v, p, r, n_transient, max_period, tol):
    pts = _sample(v, p, r, n_transient, 4 * max_period)
    return detect_period(pts, max_period, tol), pts[-1]


def locate_doubling_point(k: int, p_template: MapParams, r_bracket, v0=None, seed: int = 0,
                          width: float = 1e-5, n_transient: int = BISECTION_TRANSIENT,
                          max_period: int = 128, tol: float = DEFAULT_TOL) -> float:
    """Onset ``r_k`` of the period-``2**k`` orbit, by bisection on the detected period.

    The period must be ``2**(k-1)`` at the lower bracket end and either
    aperiodic or at least ``2**k`` at the upper end.  Every probe starts
    from the attractor state of the current lower end, so the bisection
    follows the principal branch even where other attractors coexist.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lo, hi = map(float, r_bracket)
    if not lo < hi:
        raise BadBracketError("bracket must be increasing")
    target = 2 ** (k - 1)
    v = as_bloch(v0) if v0 is not None else random_bloch_state(seed)
    res_lo, v_lo = _probe_period(v, p_template, lo, n_transient, max_period, tol)
    if res_lo.period != target:
        raise BadBracketError(f"period at r={lo} is {res_lo.period}, expected {target}")
    res_hi, _ = _probe_period(v_lo, p_template, hi, n_transient, max_period, tol)
    if res_hi.period is not None and res_hi.period < 2 * target:
        raise BadBracketError(f"period at r={hi} is {res_hi.period}, expected >= {2 * target}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        res, v_end = _probe_period(v_lo, p_template, mid, n_transient, max_period, tol)
        if res.period == target:
            lo, v_lo = mid, v_end
        else:
            hi = mid
    return 0.5 * (lo + hi)


# brackets for the principal cascade at alpha = pi/2, beta = 6
CHAOTIC_CASCADE_BRACKETS = (
    (0.25, 0.40),
    (0.50, 0.55),
    (0.56, 0.57),
    (0.5700, 0.5735),
    (0.5735, 0.5745),
)


@dataclass(frozen=True)
class DoublingCascade:
    r_values: tuple  # r_1, r_2, ... (onset of period 2**k)

    def __post_init__(self):
        rv = self.r_values
        if any(b <= a for a, b in zip(rv, rv[1:])):
            raise ValueError("doubling points must be strictly increasing")

    @property
    def ratios(self) -> list[float]:
        r = self.r_values
        return [(r[i + 1] - r[i]) / (r[i + 2] - r[i + 1]) for i in range(len(r) - 2)]

    @property
    def next_estimate(self) -> float:
        """Next doubling point, assuming the last gap shrinks by the Feigenbaum constant."""
        r = self.r_values
        return r[-1] + (r[-1] - r[-2]) / FEIGENBAUM_DELTA

    @property
    def r_inf_bound(self) -> float:
        """Accumulation point of a geometric tail with ratio equal to the Feigenbaum constant."""
        r = self.r_values
        return r[-1] + (r[-1] - r[-2]) / (FEIGENBAUM_DELTA - 1.0)


def locate_cascade(p_template: MapParams, brackets=CHAOTIC_CASCADE_BRACKETS, seed: int = 0,
                   **kwargs) -> DoublingCascade:
    return DoublingCascade(tuple(
        locate_doubling_point(k, p_template, br, seed=seed, **kwargs)
        for k, br in enumerate(brackets, start=1)))


def feigenbaum_ratios(cascade: DoublingCascade) -> tuple[list[float], float]:
    """Consecutive gap ratios and the extrapolated accumulation-point bound."""
    if len(cascade.r_values) < 3:
        raise InsufficientDataError("need at least three doubling points")
    return cascade.ratios, cascade.r_inf_bound


@dataclass(frozen=True)
class PeriodicWindow:
    r_low: float
    r_high: float
    dominant_period: int
    periods: tuple = ()

    @property
    def width(self) -> float:
        return self.r_high - self.r_low


def _doubling_family(base: int, period: int) -> bool:
    while period > base and period % 2 == 0:
        period //= 2
    return period == base


def find_windows(diagram: BifurcationDiagram, min_width: float = 1e-3,
                 max_period: int = DEFAULT_MAX_PERIOD, tol: float = DEFAULT_TOL,
                 periods: list[PeriodResult] | None = None) -> list[PeriodicWindow]:
    """Maximal runs of periodic grid points bounded by aperiodic points on both sides.

    The dominant period is the most frequent period in the run; the run
    is kept when it spans at least ``min_width`` and at least 80% of its
    points lie in the dominant period's doubling family (``p * 2**j``).
    """
    if periods is None:
        periods = diagram.periods(max_period, tol)
    per = [pr.period for pr in periods]
    r = diagram.r_grid
    windows = []
    i = 0
    n = len(per)
    while i < n:
        if per[i] is None:
            i += 1
            continue
        j = i
        while j + 1 < n and per[j + 1] is not None:
            j += 1
        bounded = i > 0 and j < n - 1
        if bounded and r[j] - r[i] >= min_width:
            run = per[i:j + 1]
            counts = Counter(run)
            dominant = min(counts, key=lambda q: (-counts[q], q))
            share = sum(1 for q in run if _doubling_family(dominant, q)) / len(run)
            if share >= 0.8:
                windows.append(PeriodicWindow(float(r[i]), float(r[j]), int(dominant), tuple(run)))
        i = j + 1
    return windows
