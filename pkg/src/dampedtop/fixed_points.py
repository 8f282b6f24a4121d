"""Fixed points of the damped kicked-top map and their stability.

Fixed points are reduced to a scalar equation in ``z``: for a candidate
height ``z`` the remaining coordinates follow in closed form, and
substituting them back into the z-update leaves a residual ``f(z)`` whose
roots are the fixed points.  Roots are bracketed on a uniform grid and
polished with Brent's method.

At ``r = 1`` the residual vanishes identically (the undamped map is a
rotation and has a whole curve of fixed points).  There the scan uses the
first-order coefficient ``df/dr`` at ``r = 1`` instead, i.e. it reports the
``r -> 1-`` limits of the fixed-point branches.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .core import MapParams, as_bloch, step

TOL_ROOT = 1e-10
TOL_STEP = 1e-8
TOL_MARGINAL = 1e-6
POLE_EPS = 1e-14
POLE_HALF_WIDTH = 1e-6
DEFAULT_WINDOW = (-1.2, 1.2)
DEFAULT_GRID_N = 4000


class PoleError(ArithmeticError):
    """The residual's denominator vanishes at the requested height."""


class NotAFixedPointError(ValueError):
    pass


class BifurcationError(ValueError):
    pass


class NoCrossingError(BifurcationError):
    """Bracket endpoints do not differ in the monitored quantity."""


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


class BifurcationKind(enum.Enum):
    FLIP = "flip"
    SADDLE_NODE = "saddle-node"


@dataclass(frozen=True)
class FixedPoint:
    z_star: float
    x_star: float
    y_star: float
    params: MapParams
    eigenvalues: tuple  # complex, sorted by descending modulus
    stability: Stability
    residual: float = 0.0
    step_residual: float = 0.0

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x_star, self.y_star, self.z_star])

    @property
    def eigenvalue_moduli(self) -> tuple:
        return tuple(abs(e) for e in self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "x": self.x_star,
            "y": self.y_star,
            "z": self.z_star,
            "r": self.params.r,
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "eigenvalues": [[e.real, e.imag] for e in self.eigenvalues],
            "eigenvalue_moduli": list(self.eigenvalue_moduli),
            "stability": self.stability.value,
            "residual": self.residual,
            "step_residual": self.step_residual,
        }


@dataclass(frozen=True)
class BifurcationPoint:
    kind: BifurcationKind
    r_value: float
    bracket_width: float
    crossing_eigenvalue: complex | None = field(default=None)


def _denominator(z, r, alpha, beta):
    return 1.0 + r * np.cos(alpha) - np.sqrt(r) * (np.cos(alpha) + 1.0) * np.cos(beta * z)


def _residual(z, r, alpha, beta):
    c = np.cos(beta * z)
    sr = np.sqrt(r)
    den = 1.0 + r * np.cos(alpha) - sr * (np.cos(alpha) + 1.0) * c
    val = (-z + 1.0 + r * z * np.cos(alpha) - r
           + r * z * np.sin(alpha) ** 2 * (r - sr * c) / den)
    return val, den


def _limit_residual(z, alpha, beta):
    # df/dr at r = 1; same denominator as f at r = 1
    ca = np.cos(alpha)
    den = (1.0 + ca) * (1.0 - np.cos(beta * z))
    return z - 1.0 + z * (1.0 - ca) / den, den


def f_residual(z: float, r: float, alpha: float = math.pi / 2, beta: float = 6.0) -> float:
    """Scalar fixed-point residual; its roots are the fixed-point heights.

    Raises :class:`PoleError` where the denominator vanishes.
    """
    MapParams(r=r, alpha=alpha, beta=beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        val, den = _residual(float(z), r, alpha, beta)
    if abs(den) < POLE_EPS:
        raise PoleError(f"residual denominator vanishes at z={z}, r={r}")
    return float(val)


def limit_residual(z: float, alpha: float = math.pi / 2, beta: float = 6.0) -> float:
    """``df/dr`` at ``r = 1``, whose roots are the ``r -> 1-`` branch limits."""
    with np.errstate(divide="ignore", invalid="ignore"):
        val, den = _limit_residual(float(z), alpha, beta)
    if abs(den) < POLE_EPS:
        raise PoleError(f"limit residual denominator vanishes at z={z}")
    return float(val)


def pole_locations(p: MapParams, z_window=DEFAULT_WINDOW) -> np.ndarray:
    """Heights inside ``z_window`` where the residual's denominator is zero."""
    ca = math.cos(p.alpha)
    amp = math.sqrt(p.r) * (ca + 1.0)
    if amp == 0.0 or p.beta == 0.0:
        return np.empty(0)
    c0 = (1.0 + p.r * ca) / amp
    if abs(c0) > 1.0:
        return np.empty(0)
    phi = math.acos(c0)
    beta = abs(p.beta)
    lo, hi = z_window
    period = 2.0 * math.pi / beta
    k_lo = math.floor(lo / period) - 1
    k_hi = math.ceil(hi / period) + 1
    poles = set()
    for k in range(k_lo, k_hi + 1):
        for base in (phi, -phi):
            zp = (base + 2.0 * math.pi * k) / beta
            if lo - POLE_HALF_WIDTH <= zp <= hi + POLE_HALF_WIDTH:
                poles.add(round(zp, 15))
    return np.array(sorted(poles))


def recover_xy(z_star: float, p: MapParams) -> tuple[float, float]:
    """In-plane coordinates of the fixed point at height ``z_star``."""
    c = math.cos(p.beta * z_star)
    s = math.sin(p.beta * z_star)
    sr = math.sqrt(p.r)
    den = float(_denominator(z_star, p.r, p.alpha, p.beta))
    if abs(den) < POLE_EPS:
        raise PoleError(f"fixed-point denominator vanishes at z={z_star}")
    x = sr * math.sin(p.alpha) * (1.0 - sr * c) * z_star / den
    y = p.r * math.sin(p.alpha) * s * z_star / den
    return x, y


def jacobian(v, p: MapParams) -> np.ndarray:
    """Analytic 3x3 Jacobian ``d step_i / d v_j`` at ``v``."""
    x, y, z = np.asarray(v, dtype=np.float64)
    return _kernels.jacobian(x, y, z, p.alpha, p.beta, p.r)


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def eigenvalues_3x3(m) -> tuple[complex, complex, complex]:
    """Eigenvalues of a real 3x3 matrix from its characteristic cubic.

    Closed-form (Cardano / trigonometric) roots, each polished by Newton
    steps that are kept only when they reduce the polynomial residual.
    Sorted by descending modulus.
    """
    m = np.asarray(m, dtype=np.float64)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    minors = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
              + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
              + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    det = (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))
    # lambda^3 + a2 lambda^2 + a1 lambda + a0
    a2, a1, a0 = -tr, minors, -det
    shift = -a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2 ** 3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if disc > 0.0:
        sq = math.sqrt(disc)
        u = _cbrt(-q / 2.0 - math.copysign(sq, q)) if q != 0.0 else _cbrt(sq)
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        t1 = u + v
        re = -t1 / 2.0
        im = math.sqrt(3.0) / 2.0 * (u - v)
        roots = [complex(t1 + shift), complex(re + shift, im), complex(re + shift, -im)]
    elif p == 0.0:
        roots = [complex(shift)] * 3
    else:
        rad = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)
        phi = math.acos(max(-1.0, min(1.0, arg)))
        roots = [complex(rad * math.cos(phi / 3.0 - 2.0 * math.pi * k / 3.0) + shift)
                 for k in range(3)]

    def poly(lam):
        return ((lam + a2) * lam + a1) * lam + a0

    def dpoly(lam):
        return (3.0 * lam + 2.0 * a2) * lam + a1

    polished = []
    for lam in roots:
        for _ in range(3):
            d = dpoly(lam)
            if d == 0:
                break
            cand = lam - poly(lam) / d
            if abs(poly(cand)) < abs(poly(lam)):
                lam = cand
            else:
                break
        if abs(lam.imag) < 1e-300:
            lam = complex(lam.real, 0.0)
        polished.append(lam)
    # a conjugate pair must stay conjugate after polishing
    if disc > 0.0:
        pair = polished[1]
        polished[2] = pair.conjugate()
    return tuple(sorted(polished, key=lambda e: (-abs(e), -e.real, -e.imag)))


def _stability_from_moduli(moduli) -> Stability:
    if all(mod < 1.0 - TOL_MARGINAL for mod in moduli):
        return Stability.STABLE
    if any(mod > 1.0 + TOL_MARGINAL for mod in moduli):
        return Stability.UNSTABLE
    return Stability.MARGINAL


def classify_stability(v, p: MapParams) -> tuple[Stability, tuple[float, float, float]]:
    """Stability class and descending eigenvalue moduli at a fixed point."""
    v = np.asarray(v, dtype=np.float64)
    if np.linalg.norm(step(v, p) - v) > TOL_STEP:
        raise NotAFixedPointError(f"{v} is not a fixed point at r={p.r}")
    eig = eigenvalues_3x3(jacobian(v, p))
    moduli = tuple(abs(e) for e in eig)
    return _stability_from_moduli(moduli), moduli


def _build_fixed_point(z: float, p: MapParams, residual: float) -> FixedPoint | None:
    x, y = recover_xy(z, p)
    v = np.array([x, y, z])
    try:
        as_bloch(v)
    except ValueError:
        return None
    eig = eigenvalues_3x3(jacobian(v, p))
    step_res = float(np.linalg.norm(step(v, p) - v))
    return FixedPoint(
        z_star=z, x_star=x, y_star=y, params=p, eigenvalues=eig,
        stability=_stability_from_moduli([abs(e) for e in eig]),
        residual=residual, step_residual=step_res,
    )


def find_fixed_points(p: MapParams, z_window=DEFAULT_WINDOW,
                      grid_n: int = DEFAULT_GRID_N) -> list[FixedPoint]:
    """All fixed points with heights in ``z_window``, sorted by ascending ``z``.

    Sign changes of the residual on a ``grid_n``-cell grid are refined by
    Brent's method.  Cells within ``POLE_HALF_WIDTH`` of a pole of the
    residual are skipped, so sign flips through a pole never count as roots.
    """
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100")
    lo, hi = map(float, z_window)
    if not lo < hi:
        raise ValueError("z_window must be an increasing interval")

    if p.r == 1.0:
        def fn(zz):
            return _limit_residual(zz, p.alpha, p.beta)
    else:
        def fn(zz):
            return _residual(zz, p.r, p.alpha, p.beta)

    grid = np.linspace(lo, hi, grid_n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals, den = fn(grid)
    vals = np.where(np.abs(den) < POLE_EPS, np.nan, vals)
    poles = pole_locations(p, (lo, hi))

    def near_pole(a, b):
        return any(a - POLE_HALF_WIDTH <= zp <= b + POLE_HALF_WIDTH for zp in poles)

    def scalar(zz):
        return float(fn(zz)[0])

    roots = []
    for i in range(grid_n):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)) or near_pole(a, b):
            continue
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0.0:
            roots.append(brentq(scalar, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    if np.isfinite(vals[-1]) and vals[-1] == 0.0 and not near_pole(grid[-1], grid[-1]):
        roots.append(grid[-1])

    out = []
    for z in sorted(set(roots)):
        if abs(z) > 1.0:
            continue
        res = abs(scalar(z))
        if res > TOL_ROOT:
            continue
        fp = _build_fixed_point(float(z), p, res)
        if fp is not None:
            out.append(fp)
    return out


def principal_fixed_point(p: MapParams, **kwargs) -> FixedPoint:
    """The branch continuing the ``z = 1`` fixed point of full damping (largest ``z``)."""
    fps = find_fixed_points(p, **kwargs)
    if not fps:
        raise NotAFixedPointError(f"no fixed point found at r={p.r}")
    return fps[-1]


def locate_flip_bifurcation(p_template: MapParams, r_bracket, tol: float = 1e-6) -> BifurcationPoint:
    """Bisect on the stability of the principal fixed point.

    The located crossing must be a flip: the critical eigenvalue is real and
    within 0.01 of -1.
    """
    lo, hi = map(float, r_bracket)
    s_lo = principal_fixed_point(p_template.with_r(lo)).stability
    s_hi = principal_fixed_point(p_template.with_r(hi)).stability
    if s_lo == s_hi:
        raise NoCrossingError(f"principal fixed point is {s_lo.value} at both r={lo} and r={hi}")
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if principal_fixed_point(p_template.with_r(mid)).stability == s_lo:
            lo = mid
        else:
            hi = mid
    r_c = 0.5 * (lo + hi)
    fp = principal_fixed_point(p_template.with_r(r_c))
    crit = min(fp.eigenvalues, key=lambda e: abs(abs(e) - 1.0))
    if abs(crit.imag) > 0.01 or abs(crit.real + 1.0) > 0.01:
        raise BifurcationError(f"critical eigenvalue {crit} at r={r_c} is not a flip")
    return BifurcationPoint(BifurcationKind.FLIP, r_c, hi - lo, crit)


def root_count(p: MapParams, **kwargs) -> int:
    return len(find_fixed_points(p, **kwargs))


def locate_saddle_node(p_template: MapParams, r_bracket, tol: float = 1e-5) -> BifurcationPoint:
    """Bisect on the number of fixed points until the bracket is narrower than ``tol``."""
    lo, hi = map(float, r_bracket)
    n_lo = root_count(p_template.with_r(lo))
    n_hi = root_count(p_template.with_r(hi))
    if abs(n_hi - n_lo) != 2:
        raise NoCrossingError(f"root count {n_lo} at r={lo} and {n_hi} at r={hi}")
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if root_count(p_template.with_r(mid)) == n_lo:
            lo = mid
        else:
            hi = mid
    return BifurcationPoint(BifurcationKind.SADDLE_NODE, 0.5 * (lo + hi), hi - lo)
