"""Lyapunov spectrum (Benettin) and Kolmogorov-Sinai entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import MapParams, as_bloch

DEFAULT_STEPS = 100_000
DEFAULT_TRANSIENT = 1_000


class CollapseError(ArithmeticError):
    """At r = 0 the Jacobian vanishes and every exponent is -inf."""


@dataclass(frozen=True)
class LyapunovSpectrum:
    lambda1: float
    lambda2: float
    lambda3: float
    n_steps: int
    r_value: float
    # |full-run estimate - first-half estimate| per exponent
    errors: tuple = (0.0, 0.0, 0.0)

    @property
    def exponents(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3])

    @property
    def ks_entropy(self) -> float:
        return ks_entropy(self)


def lyapunov_spectrum(v0, p: MapParams, n_steps: int = DEFAULT_STEPS,
                      reortho_interval: int = 1, n_transient: int = DEFAULT_TRANSIENT,
                      frame=None) -> LyapunovSpectrum:
    """All three exponents along the orbit of ``v0`` (nats per step).

    An orthonormal tangent frame (identity unless ``frame`` is given) is
    pushed through the analytic Jacobian and re-orthonormalised by
    Gram-Schmidt every ``reortho_interval`` steps.
    """
    if p.r == 0.0:
        raise CollapseError("r = 0: the map collapses the ball to a point, exponents are -inf")
    if n_steps < 2 or reortho_interval < 1:
        raise ValueError("need n_steps >= 2 and reortho_interval >= 1")
    v0 = as_bloch(v0)
    if frame is None:
        frame = np.eye(3)
    frame = np.ascontiguousarray(frame, dtype=np.float64)
    if not np.allclose(frame.T @ frame, np.eye(3), atol=1e-10):
        raise ValueError("frame must be orthonormal")
    logs, half_logs, half_steps = _kernels.benettin(
        v0, p.alpha, p.beta, p.r, int(n_transient), int(n_steps), int(reortho_interval), frame)
    full = logs / n_steps
    # Gram-Schmidt yields the exponents in descending order only on average
    order = np.argsort(-full)
    full = full[order]
    half = (half_logs / half_steps)[order]
    err = tuple(float(e) for e in np.abs(full - half))
    return LyapunovSpectrum(float(full[0]), float(full[1]), float(full[2]),
                            int(n_steps), float(p.r), err)


def ks_entropy(spectrum) -> float:
    """Sum of the strictly positive exponents (Pesin)."""
    ex = spectrum.exponents if isinstance(spectrum, LyapunovSpectrum) else np.asarray(spectrum, float)
    if not np.all(np.isfinite(ex)):
        raise ValueError("spectrum must be finite")
    return float(ex[ex > 0].sum())
