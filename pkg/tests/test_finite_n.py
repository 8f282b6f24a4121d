import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampedtop import MapParams, step
from dampedtop.core import bloch_vector, density_matrix
from dampedtop.finite_n import (QUBIT_A, InvalidQuditStateError, check_state, convergence_error,
                                full_step_finite_n, full_step_limit, gamma_matrix,
                                interaction_step_finite_n, limit_step, purity)


def random_density(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def brute_force_reduced(rho, a, theta, n):
    """Evolve rho^{(x)n} under exp(i chi/2 (sum a)^2) and trace out all but the first factor."""
    d = len(a)
    chi = theta / (n - 1)
    total = reduce(np.add.outer, [a] * n).ravel()
    phase = np.exp(0.5j * chi * total ** 2)
    big = reduce(np.kron, [rho] * n)
    big = phase[:, None] * big * phase.conj()[None, :]
    big = big.reshape(d, d ** (n - 1), d, d ** (n - 1))
    return np.einsum("ajbj->ab", big)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), n=st.integers(2, 5), d=st.sampled_from([2, 3]),
       theta=st.floats(-6.0, 6.0))
def test_closed_form_matches_tensor_product(seed, n, d, theta):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, d)
    a = QUBIT_A if d == 2 else rng.uniform(-2.0, 2.0, d)
    ours = interaction_step_finite_n(rho, a, theta, n)
    ref = brute_force_reduced(rho, a, theta, n)
    assert np.abs(ours - ref).max() < 1e-10


def test_gamma_examples():
    chi = 0.3
    up = density_matrix((0.0, 0.0, 1.0))
    g = gamma_matrix(up, QUBIT_A, chi)
    assert g[0, 1] == pytest.approx(np.exp(2j * chi))
    assert abs(g[0, 1]) == pytest.approx(1.0)
    mixed = np.eye(2) / 2
    assert gamma_matrix(mixed, QUBIT_A, chi)[0, 1] == pytest.approx(math.cos(2 * chi))
    np.testing.assert_array_equal(np.diag(g), 1.0)


def test_limit_is_the_kick_of_the_map():
    # with theta = -beta/2 the limit interaction followed by rotation and damping is the map
    rng = np.random.default_rng(2)
    for _ in range(50):
        v = rng.standard_normal(3)
        v *= rng.random() / np.linalg.norm(v)
        p = MapParams(rng.random(), rng.uniform(-3, 3), rng.uniform(-8, 8))
        np.testing.assert_allclose(bloch_vector(full_step_limit(density_matrix(v), p)),
                                   step(v, p), atol=1e-13)


def test_limit_step_is_unitary():
    rho = random_density(np.random.default_rng(0), 3)
    out = limit_step(rho, np.array([1.0, 0.0, -1.0]), 0.7)
    assert purity(out) == pytest.approx(purity(rho))
    check_state(out)


def test_large_n_approaches_limit():
    rho = random_density(np.random.default_rng(5), 2)
    a = interaction_step_finite_n(rho, QUBIT_A, -3.0, 10 ** 8)
    b = limit_step(rho, QUBIT_A, -3.0)
    assert np.abs(a - b).max() < 1e-6


def test_purity_matches_exact_dephasing_formula():
    v = np.array([0.6, 0.0, 0.8])
    p = MapParams.chaotic(1.0)
    for n in (10, 100, 10_000):
        chi = -p.beta / 2 / (n - 1)
        g2 = 1.0 - (1.0 - v[2] ** 2) * math.sin(2 * chi) ** 2
        expect = 0.5 * (1.0 + v[2] ** 2 + (v[0] ** 2 + v[1] ** 2) * g2 ** (n - 1))
        assert purity(full_step_finite_n(density_matrix(v), p, n)) == pytest.approx(expect, abs=1e-13)


def test_single_step_error_scales_as_one_over_n():
    v0 = np.array([0.3, -0.2, 0.5])
    v0 /= np.linalg.norm(v0)
    errs = dict(convergence_error(v0, MapParams.chaotic(0.4), [100, 1000, 10_000]))
    for n in (100, 1000):
        ratio = errs[n] / errs[10 * n]
        assert 10 / 1.5 < ratio < 10 * 1.5
    assert errs[10_000] < 1e-3


def test_finite_n_step_is_a_valid_state():
    rng = np.random.default_rng(3)
    for n in (2, 7, 1000):
        rho = full_step_finite_n(random_density(rng, 2), MapParams.chaotic(0.6), n)
        check_state(rho)


def test_state_validation():
    with pytest.raises(InvalidQuditStateError):
        check_state(np.array([[1.0, 0.5], [0.0, 0.0]]))
    with pytest.raises(InvalidQuditStateError):
        check_state(np.eye(2))
    with pytest.raises(InvalidQuditStateError):
        check_state(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidQuditStateError):
        check_state(np.ones(3))


def test_argument_checks():
    with pytest.raises(ValueError):
        interaction_step_finite_n(np.eye(2) / 2, QUBIT_A, 1.0, 1)
    with pytest.raises(ValueError):
        full_step_finite_n(np.eye(3) / 3, MapParams.chaotic(0.5), 10)
    with pytest.raises(ValueError):
        convergence_error((0, 0, 1), MapParams.chaotic(0.5), [10], n_steps=0)


def test_two_qubit_plus_state_example():
    plus = np.full((2, 2), 0.5, dtype=complex)
    theta = math.pi
    chi = theta  # N = 2
    g = gamma_matrix(plus, QUBIT_A, chi)
    # gamma_01 = (exp(2i chi) + exp(-2i chi)) / 2 = cos(2 pi) = 1
    assert g[0, 1] == pytest.approx(1.0)
    out = interaction_step_finite_n(plus, QUBIT_A, theta, 2)
    np.testing.assert_allclose(out, brute_force_reduced(plus, QUBIT_A, theta, 2), atol=1e-14)


def test_diagonal_states_untouched():
    rho = np.diag([0.2, 0.5, 0.3]).astype(complex)
    a = np.array([1.0, 0.0, -1.0])
    np.testing.assert_allclose(interaction_step_finite_n(rho, a, 1.3, 7), rho, atol=1e-15)
    np.testing.assert_allclose(limit_step(rho, a, 1.3), rho, atol=1e-15)
    equator = density_matrix((0.6, 0.8, 0.0))
    np.testing.assert_allclose(limit_step(equator, QUBIT_A, 2.0), equator, atol=1e-15)


def test_full_damping_resets_to_ground_state():
    rho = full_step_finite_n(random_density(np.random.default_rng(1), 2), MapParams.chaotic(0.0), 5)
    np.testing.assert_allclose(rho, [[1, 0], [0, 0]], atol=1e-15)


def test_large_n_pure_state_matches_map():
    v = np.array([0.3, -0.2, 0.5])
    v /= np.linalg.norm(v)
    p = MapParams.chaotic(0.4)
    out = bloch_vector(full_step_finite_n(density_matrix(v), p, 10_000))
    assert np.linalg.norm(out - step(v, p)) < 1e-3


def test_multi_step_error_decreases_with_n():
    v0 = np.array([0.3, -0.2, 0.5])
    v0 /= np.linalg.norm(v0)
    errs = [e for _, e in convergence_error(v0, MapParams.chaotic(0.4), [2, 10, 100, 1000, 10_000],
                                            n_steps=5)]
    assert np.all(np.isfinite(errs))
    assert np.all(np.diff(errs) < 0)


def test_doubling_n_halves_error():
    v0 = np.array([0.3, -0.2, 0.5])
    v0 /= np.linalg.norm(v0)
    errs = dict(convergence_error(v0, MapParams.chaotic(0.4), [500, 1000, 2000, 4000]))
    for n in (500, 1000, 2000):
        assert 2 / 1.5 < errs[n] / errs[2 * n] < 2 * 1.5
