"""Attractor point clouds and Grassberger-Procaccia correlation dimension."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MapParams, random_bloch_state, trajectory

DEFAULT_EPS = np.logspace(-3, 0, 40)


class EmptyBallRangeError(ValueError):
    """No radius in the grid encloses enough neighbours to fit."""


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    r_value: float = float("nan")
    seed: int = 0

    def __len__(self):
        return len(self.points)

    @property
    def diameter(self) -> float:
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(np.linalg.norm(hi - lo))


@dataclass(frozen=True)
class CorrelationFit:
    eps_values: np.ndarray
    counts: np.ndarray  # mean neighbours within eps, C(eps)
    slope: float
    intercept: float  # natural-log units
    fit_range: tuple  # [start, stop) indices into eps_values
    fit_rms: float
    local_slopes: np.ndarray

    @property
    def log_counts(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.counts)

    @property
    def dimension(self) -> float:
        return self.slope


def generate_attractor(p: MapParams, n_points: int = 10_000, seed: int = 0,
                       n_transient: int = 1_000) -> PointCloud:
    traj = trajectory(random_bloch_state(seed), p, n_transient, n_points)
    return PointCloud(traj.points, p.r, seed)


def correlation_counts(points, centers, eps) -> np.ndarray:
    """Mean number of ``points`` within distance ``eps`` of each center, center excluded.

    ``centers`` are row indices into ``points``.
    """
    pts = np.asarray(points, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    idx = np.asarray(centers)
    totals = np.zeros(len(eps))
    for chunk in np.array_split(idx, -(-len(idx) // 128)):
        diff = pts[chunk][:, None, :] - pts[None, :, :]
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        d.sort(axis=1)
        for row in d:
            totals += np.searchsorted(row, eps, side="right") - 1
    return totals / len(idx)


def _longest_flat_run(slopes, spread):
    best = (0, 0, -1)
    n = len(slopes)
    for i in range(n):
        if not np.isfinite(slopes[i]):
            continue
        lo = hi = slopes[i]
        j = i
        while j + 1 < n and np.isfinite(slopes[j + 1]):
            nlo, nhi = min(lo, slopes[j + 1]), max(hi, slopes[j + 1])
            if nhi - nlo >= spread:
                break
            lo, hi, j = nlo, nhi, j + 1
        if j - i + 1 > best[0]:
            best = (j - i + 1, i, j)
    return best


def correlation_dimension(cloud, n_centers: int = 1000, eps_grid=None, seed: int = 0,
                          window: int = 5, spread: float = 0.15,
                          min_count: float = 10.0) -> CorrelationFit:
    """Slope of ``log C(eps)`` against ``log eps`` over the most linear range.

    Local slopes are least-squares fits over ``window`` consecutive radii
    where every ``C >= min_count``; the fit range is the longest run of
    windows whose local slopes differ by less than ``spread``.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    eps = DEFAULT_EPS if eps_grid is None else np.asarray(eps_grid, dtype=np.float64)
    if len(pts) < 1000:
        raise ValueError("need at least 1000 points")
    if n_centers < 10:
        raise ValueError("need at least 10 centers")
    if np.any(np.diff(eps) <= 0) or eps[-1] / eps[0] < 100.0:
        raise ValueError("eps grid must be increasing and span at least two decades")
    rng = np.random.default_rng(seed)
    n_centers = min(n_centers, len(pts))
    centers = rng.choice(len(pts), size=n_centers, replace=False)
    counts = correlation_counts(pts, centers, eps)

    usable = counts >= min_count
    if not usable.any():
        raise EmptyBallRangeError("no radius holds at least %g neighbours on average" % min_count)
    le = np.log(eps)
    with np.errstate(divide="ignore"):
        lc = np.log(counts)
    slopes = np.full(len(eps) - window + 1, np.nan)
    for i in range(len(slopes)):
        sl = slice(i, i + window)
        if usable[sl].all():
            slopes[i] = np.polyfit(le[sl], lc[sl], 1)[0]
    length, i, j = _longest_flat_run(slopes, spread)
    if length == 0:
        raise EmptyBallRangeError("fewer than %d consecutive usable radii" % window)
    start, stop = i, j + window
    slope, intercept = np.polyfit(le[start:stop], lc[start:stop], 1)
    resid = lc[start:stop] - (slope * le[start:stop] + intercept)
    return CorrelationFit(eps, counts, float(slope), float(intercept), (start, stop),
                          float(np.sqrt(np.mean(resid ** 2))), slopes)
