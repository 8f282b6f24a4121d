import math

import numpy as np
import pytest

from dampedtop import MapParams


@pytest.fixture
def chaotic():
    """Factory for the alpha = pi/2, beta = 6 preset."""
    return MapParams.chaotic


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_states(rng, n, in_ball=True):
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    if in_ball:
        v *= rng.random(n)[:, None] ** (1.0 / 3.0)
    return v


def random_params(rng, n):
    r = rng.random(n)
    alpha = rng.uniform(-math.pi, math.pi, n)
    beta = rng.uniform(-10.0, 10.0, n)
    return r, alpha, beta


ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, title, detail, secs = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  [{num:2d}] {title}: {detail} ({secs:.2f} s)")
