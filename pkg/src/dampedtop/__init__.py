"""Reduced single-qubit dynamics of the damped quantum kicked top."""

__version__ = "0.1.0"

from .core import MapParams, Trajectory, random_bloch_state, step, trajectory  # noqa: E402
from .fixed_points import FixedPoint, Stability, find_fixed_points, jacobian  # noqa: E402
from .lyapunov import LyapunovSpectrum, ks_entropy, lyapunov_spectrum  # noqa: E402

__all__ = [
    "MapParams",
    "Trajectory",
    "random_bloch_state",
    "step",
    "trajectory",
    "FixedPoint",
    "Stability",
    "find_fixed_points",
    "jacobian",
    "LyapunovSpectrum",
    "ks_entropy",
    "lyapunov_spectrum",
]
