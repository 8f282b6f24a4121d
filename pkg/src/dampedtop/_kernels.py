"""Compiled inner loops shared by the analysis modules.

Everything here works on plain floats and float64 arrays so it can be
jitted with ``nogil=True`` and driven from a thread pool.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def step_xyz(x, y, z, alpha, beta, r):
    # sin/cos of the kick angle evaluated once, in this order, for bitwise reproducibility
    s = math.sin(beta * z)
    c = math.cos(beta * z)
    sr = math.sqrt(r)
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    xn = sr * ((x * c - y * s) * ca + z * sa)
    yn = sr * (x * s + y * c)
    zn = 1.0 + r * ((y * s - x * c) * sa + z * ca - 1.0)
    return xn, yn, zn


@njit(cache=True, nogil=True)
def step_batch(points, alpha, beta, r):
    out = np.empty_like(points)
    for i in range(points.shape[0]):
        xn, yn, zn = step_xyz(points[i, 0], points[i, 1], points[i, 2], alpha, beta, r)
        out[i, 0] = xn
        out[i, 1] = yn
        out[i, 2] = zn
    return out


@njit(cache=True, nogil=True)
def step_each(points, alpha, beta, r):
    """One step per row with per-row parameters."""
    out = np.empty_like(points)
    for i in range(points.shape[0]):
        xn, yn, zn = step_xyz(points[i, 0], points[i, 1], points[i, 2], alpha[i], beta[i], r[i])
        out[i, 0] = xn
        out[i, 1] = yn
        out[i, 2] = zn
    return out


@njit(cache=True, nogil=True)
def orbit(v0, alpha, beta, r, n_transient, n_sample):
    x, y, z = v0[0], v0[1], v0[2]
    for _ in range(n_transient):
        x, y, z = step_xyz(x, y, z, alpha, beta, r)
    out = np.empty((n_sample, 3))
    for i in range(n_sample):
        out[i, 0] = x
        out[i, 1] = y
        out[i, 2] = z
        x, y, z = step_xyz(x, y, z, alpha, beta, r)
    return out


@njit(cache=True, nogil=True)
def advance(v0, alpha, beta, r, n):
    x, y, z = v0[0], v0[1], v0[2]
    for _ in range(n):
        x, y, z = step_xyz(x, y, z, alpha, beta, r)
    return np.array([x, y, z])


@njit(cache=True, nogil=True)
def jacobian_into(out, x, y, z, alpha, beta, r):
    s = math.sin(beta * z)
    c = math.cos(beta * z)
    sr = math.sqrt(r)
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    out[0, 0] = sr * c * ca
    out[0, 1] = -sr * s * ca
    out[0, 2] = sr * (sa - beta * (x * s + y * c) * ca)
    out[1, 0] = sr * s
    out[1, 1] = sr * c
    out[1, 2] = sr * beta * (x * c - y * s)
    out[2, 0] = -r * c * sa
    out[2, 1] = r * s * sa
    out[2, 2] = r * (beta * (y * c + x * s) * sa + ca)


@njit(cache=True, nogil=True)
def jacobian(x, y, z, alpha, beta, r):
    out = np.empty((3, 3))
    jacobian_into(out, x, y, z, alpha, beta, r)
    return out


@njit(cache=True, nogil=True)
def _gram_schmidt(m, logs):
    # modified Gram-Schmidt on the columns of m, in place; adds log norms to logs
    for k in range(3):
        for j in range(k):
            d = m[0, j] * m[0, k] + m[1, j] * m[1, k] + m[2, j] * m[2, k]
            m[0, k] -= d * m[0, j]
            m[1, k] -= d * m[1, j]
            m[2, k] -= d * m[2, j]
        nrm = math.sqrt(m[0, k] * m[0, k] + m[1, k] * m[1, k] + m[2, k] * m[2, k])
        logs[k] += math.log(nrm)
        m[0, k] /= nrm
        m[1, k] /= nrm
        m[2, k] /= nrm


@njit(cache=True, nogil=True)
def benettin(v0, alpha, beta, r, n_transient, n_steps, reortho, frame):
    """Return (log-sum over all steps, log-sum at the half-way block, steps at half)."""
    x, y, z = v0[0], v0[1], v0[2]
    for _ in range(n_transient):
        x, y, z = step_xyz(x, y, z, alpha, beta, r)
    q = frame.copy()
    jac = np.empty((3, 3))
    logs = np.zeros(3)
    half_logs = np.zeros(3)
    half_steps = 0
    since = 0
    for i in range(n_steps):
        jacobian_into(jac, x, y, z, alpha, beta, r)
        q = jac @ q
        x, y, z = step_xyz(x, y, z, alpha, beta, r)
        since += 1
        if since == reortho or i == n_steps - 1:
            _gram_schmidt(q, logs)
            since = 0
            if half_steps == 0 and 2 * (i + 1) >= n_steps:
                half_logs[:] = logs
                half_steps = i + 1
    return logs, half_logs, half_steps
