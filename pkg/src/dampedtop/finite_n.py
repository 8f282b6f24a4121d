"""Reduced single-qudit dynamics of N qudits coupled through a collective observable.

For ``N`` copies of a qudit state ``rho`` evolving under ``H = g (sum_n A_n)^2``
with diagonal ``A = diag(a)``, tracing out all but one qudit multiplies each
coherence ``rho[j, k]`` by ``gamma[j, k] ** (N - 1)`` where::

    gamma[j, k] = sum_m p_m exp(1j * chi * a_m * (a_j - a_k)),   p_m = rho[m, m]

followed by the local diagonal phase ``exp(1j * chi / 2 * A^2)``.  With
``chi = theta / (N - 1)`` and ``N -> oo`` this becomes the state-dependent
unitary ``exp(1j * theta * <A> * A)``; for a qubit with ``A = sigma_z`` and
``theta = -beta / 2`` it is the kick of the damped kicked top.

The environment qudits are taken to be in the current reduced state at
every kick, which is what iterating the single-qudit map assumes.
"""

from __future__ import annotations

import numpy as np

from .core import MapParams, as_bloch, bloch_vector, density_matrix, step

QUBIT_A = np.array([1.0, -1.0])
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10


class InvalidQuditStateError(ValueError):
    pass


def check_state(rho, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, pos_tol=POSITIVITY_TOL) -> np.ndarray:
    """Validate a density matrix (Hermitian, unit trace, positive semidefinite)."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidQuditStateError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise InvalidQuditStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise InvalidQuditStateError(f"trace {np.trace(rho)} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < pos_tol:
        raise InvalidQuditStateError("density matrix is not positive semidefinite")
    return rho


def expectation(rho, a) -> float:
    return float(np.real(np.diag(rho)) @ np.asarray(a, dtype=np.float64))


def gamma_matrix(rho, a, chi: float) -> np.ndarray:
    """Dephasing factors picked up by the coherences from one environment qudit."""
    rho = np.asarray(rho, dtype=np.complex128)
    a = np.asarray(a, dtype=np.float64)
    pops = np.real(np.diag(rho))
    diff = a[:, None] - a[None, :]  # a_j - a_k
    phases = np.exp(1j * chi * a[:, None, None] * diff[None, :, :])
    gam = np.tensordot(pops, phases, axes=1)
    np.fill_diagonal(gam, 1.0)
    return gam


def _power(gam: np.ndarray, n: int) -> np.ndarray:
    # principal log is exact for integer exponents; zero entries stay zero
    with np.errstate(divide="ignore"):
        return np.exp(n * np.log(gam))


def interaction_step_finite_n(rho, a, theta: float, n: int) -> np.ndarray:
    """Reduced state of one qudit after the collective interaction among ``n`` copies."""
    if n < 2:
        raise ValueError(f"need at least two qudits, got N={n}")
    rho = np.asarray(rho, dtype=np.complex128)
    a = np.asarray(a, dtype=np.float64)
    chi = theta / (n - 1)
    out = rho * _power(gamma_matrix(rho, a, chi), n - 1)
    local = np.exp(0.5j * chi * a ** 2)
    return local[:, None] * out * local.conj()[None, :]


def limit_step(rho, a, theta: float) -> np.ndarray:
    """Conjugation by ``exp(1j * theta * <A> * A)``."""
    rho = np.asarray(rho, dtype=np.complex128)
    a = np.asarray(a, dtype=np.float64)
    ph = np.exp(1j * theta * expectation(rho, a) * a)
    return ph[:, None] * rho * ph.conj()[None, :]


def rotation_y(alpha: float) -> np.ndarray:
    """``exp(-1j * alpha / 2 * sigma_y)``."""
    c, s = np.cos(alpha / 2), np.sin(alpha / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def damping_kraus(r: float) -> tuple[np.ndarray, np.ndarray]:
    k1 = np.array([[1.0, 0.0], [0.0, np.sqrt(r)]], dtype=np.complex128)
    k2 = np.array([[0.0, np.sqrt(1.0 - r)], [0.0, 0.0]], dtype=np.complex128)
    return k1, k2


def rotate_and_damp(rho, p: MapParams) -> np.ndarray:
    u = rotation_y(p.alpha)
    rho = u @ rho @ u.conj().T
    k1, k2 = damping_kraus(p.r)
    return k1 @ rho @ k1.conj().T + k2 @ rho @ k2.conj().T


def full_step_finite_n(rho, p: MapParams, n: int) -> np.ndarray:
    """One damped kicked-top step of a qubit coupled to ``n - 1`` identical copies."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (2, 2):
        raise ValueError("the damped kicked top is defined for qubits only")
    rho = interaction_step_finite_n(rho, QUBIT_A, -p.beta / 2.0, n)
    return rotate_and_damp(rho, p)


def full_step_limit(rho, p: MapParams) -> np.ndarray:
    """Density-matrix form of the infinite-N step."""
    rho = limit_step(np.asarray(rho, dtype=np.complex128), QUBIT_A, -p.beta / 2.0)
    return rotate_and_damp(rho, p)


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def convergence_error(v0, p: MapParams, n_list, n_steps: int = 1) -> list[tuple[int, float]]:
    """Largest Bloch distance between the finite-N and infinite-N trajectories.

    Both start from ``v0``; the distance is maximised over ``n_steps`` steps.
    Keep ``n_steps`` small: in chaotic regimes the two trajectories separate
    exponentially.
    """
    v0 = as_bloch(v0)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    out = []
    for n in n_list:
        rho = density_matrix(v0)
        v = v0
        worst = 0.0
        for _ in range(n_steps):
            rho = full_step_finite_n(rho, p, int(n))
            v = step(v, p)
            worst = max(worst, float(np.linalg.norm(bloch_vector(rho) - v)))
        out.append((int(n), worst))
    return out
