"""Damped kicked-top map on the Bloch ball.

A Bloch vector is represented as a float64 array of shape ``(3,)`` holding
``(x, y, z)``.  One application of the map performs the state-dependent
twist about z by ``beta * z``, the rotation by ``alpha`` about y, and the
amplitude-damping contraction towards the north pole ``(0, 0, 1)``::

    x' = sqrt(r) * ((x cos(bz) - y sin(bz)) cos(a) + z sin(a))
    y' = sqrt(r) * (x sin(bz) + y cos(bz))
    z' = 1 + r * ((y sin(bz) - x cos(bz)) sin(a) + z cos(a) - 1)

``r = 1`` is the undamped (unitary) kicked top, ``r = 0`` collapses every
state onto ``(0, 0, 1)`` in a single step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels

BALL_SLACK = 1e-12


class InvalidStateError(ValueError):
    """A Bloch vector lies outside the closed unit ball."""


class InvalidParamsError(ValueError):
    """Map parameters outside their admissible range."""


@dataclass(frozen=True)
class MapParams:
    """Rotation angle ``alpha``, kick strength ``beta`` and damping parameter ``r``.

    ``1 - r`` is the damping strength.  The default ``alpha = pi/2,
    beta = 6`` puts the undamped top in its chaotic regime.
    """

    r: float
    alpha: float = math.pi / 2
    beta: float = 6.0

    def __post_init__(self):
        for name in ("r", "alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParamsError(f"{name} must be finite, got {getattr(self, name)!r}")
        if not 0.0 <= self.r <= 1.0:
            raise InvalidParamsError(f"r must lie in [0, 1], got {self.r!r}")

    @classmethod
    def chaotic(cls, r: float) -> MapParams:
        return cls(r=r)

    def with_r(self, r: float) -> MapParams:
        return replace(self, r=float(r))

    @property
    def damping_strength(self) -> float:
        return 1.0 - self.r


@dataclass(frozen=True)
class Trajectory:
    params: MapParams
    initial: np.ndarray
    points: np.ndarray  # (n_sample, 3)
    transient_discarded: int

    def __len__(self):
        return len(self.points)

    @property
    def z(self) -> np.ndarray:
        return self.points[:, 2]

    def final_state(self) -> np.ndarray:
        """State one step after the last recorded point (for continuation)."""
        if len(self.points) == 0:
            return _kernels.advance(self.initial, self.params.alpha, self.params.beta,
                                    self.params.r, self.transient_discarded)
        return step(self.points[-1], self.params)


def as_bloch(v) -> np.ndarray:
    """Validate ``v`` as a Bloch vector and return it as a float64 array."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (3,):
        raise InvalidStateError(f"Bloch vector must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError("Bloch vector has non-finite components")
    if float(arr @ arr) > (1.0 + BALL_SLACK) ** 2:
        raise InvalidStateError(f"Bloch vector {arr} lies outside the unit ball")
    return arr


def step(v, p: MapParams) -> np.ndarray:
    """Apply the damped kicked-top map once."""
    x, y, z = as_bloch(v)
    return np.array(_kernels.step_xyz(x, y, z, p.alpha, p.beta, p.r))


def step_many(points, p: MapParams) -> np.ndarray:
    """Apply the map to each row of an ``(n, 3)`` array (no ball validation)."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    return _kernels.step_batch(pts, p.alpha, p.beta, p.r)


def trajectory(v0, p: MapParams, n_transient: int = 0, n_sample: int = 100) -> Trajectory:
    """Discard ``n_transient`` iterates of ``v0``, then record ``n_sample`` points.

    The first recorded point is the state after the transient.
    """
    if n_transient < 0 or n_sample < 0:
        raise ValueError("n_transient and n_sample must be non-negative")
    v0 = as_bloch(v0)
    pts = _kernels.orbit(v0, p.alpha, p.beta, p.r, int(n_transient), int(n_sample))
    return Trajectory(params=p, initial=v0, points=pts, transient_discarded=int(n_transient))


def random_bloch_state(seed: int, in_ball: bool = False) -> np.ndarray:
    """Seeded random Bloch vector, uniform on the unit sphere.

    With ``in_ball=True`` the vector is uniform in the volume of the ball
    instead (a mixed state).
    """
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(3)
    v = g / np.linalg.norm(g)
    if in_ball:
        v = v * rng.random() ** (1.0 / 3.0)
    return v


def density_matrix(v) -> np.ndarray:
    """2x2 density matrix ``(I + x X + y Y + z Z) / 2`` of a Bloch vector."""
    x, y, z = np.asarray(v, dtype=np.float64)
    return 0.5 * np.array([[1.0 + z, x - 1j * y], [x + 1j * y, 1.0 - z]])


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return np.array([2.0 * rho[1, 0].real, 2.0 * rho[1, 0].imag, (rho[0, 0] - rho[1, 1]).real])
