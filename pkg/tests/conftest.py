import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from geodual.tensor import ETA, make_metric

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
vec4 = st.lists(finite, min_size=4, max_size=4).map(np.array)
small = st.floats(min_value=-0.1, max_value=0.1, allow_nan=False, allow_infinity=False)


@st.composite
def lorentz_metrics(draw):
    """A^T eta A with A a small perturbation of the identity."""
    A = np.eye(4) + np.array(draw(st.lists(small, min_size=16, max_size=16))).reshape(4, 4)
    return make_metric(A.T @ ETA @ A)


@st.composite
def timelike_covectors(draw, g):
    """Covector with g^{-1}(v, v) < 0: rapidity-bounded boost of the frame time direction."""
    chi = draw(st.floats(min_value=0.0, max_value=2.0))
    n = np.array(draw(st.lists(st.floats(min_value=-1, max_value=1), min_size=3, max_size=3)))
    if np.linalg.norm(n) < 1e-3:
        n = np.array([1.0, 0.0, 0.0])
    n /= np.linalg.norm(n)
    scale = draw(st.floats(min_value=0.5, max_value=3.0))
    lam, Q = np.linalg.eigh(g.inv)
    order = np.argsort(lam)
    L = Q[:, order] * np.sqrt(np.abs(lam[order]))
    w = np.concatenate(([-np.cosh(chi)], np.sinh(chi) * n))
    return scale * np.linalg.solve(L.T, w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
