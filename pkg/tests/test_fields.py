import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geodual.errors import DegenerateK, DualSingularity, NotTimelike
from geodual.fields import (CallableScalar, ConstantScalar, GaugeGenerator, LinearScalar, LogScalar,
                            PlummerScalar, VectorFieldU, antisym, conformal_factor, dot_co, k_vector,
                            normalize_u)
from geodual.tensor import ETA, IsotropicSchwarzschild, Minkowski, fd_gradient, make_metric

from .conftest import lorentz_metrics, timelike_covectors, vec4

MINK = make_metric(ETA)


# ---------------------------------------------------------------- conformal factor


def test_conformal_factor_examples():
    x = np.zeros(4)
    assert conformal_factor(-0.5, ConstantScalar(0.0), x) == 1.0
    assert conformal_factor(-0.5, ConstantScalar(-0.25), x) == 2.0
    with pytest.raises(DualSingularity):
        conformal_factor(-0.5, ConstantScalar(-0.5 * (1 - 1e-12)), x)


def test_conformal_factor_custom_threshold():
    x = np.zeros(4)
    with pytest.raises(DualSingularity):
        conformal_factor(1.0, ConstantScalar(0.9), x, delta=0.2)
    assert conformal_factor(1.0, ConstantScalar(0.9), x, delta=0.05) == pytest.approx(10.0)


@given(st.floats(min_value=-5, max_value=-0.1), st.floats(min_value=-3, max_value=3))
def test_conformal_factor_definition(k, phi):
    if abs(k - phi) > 1e-6:
        assert conformal_factor(k, ConstantScalar(phi), np.zeros(4)) == pytest.approx(k / (k - phi), rel=1e-15)


# ---------------------------------------------------------------- scalars


@pytest.mark.parametrize("phi", [
    LinearScalar([0.1, -0.2, 0.05, 0.3], 0.4),
    PlummerScalar(0.3, 0.5),
    LogScalar(0.02, 0.3),
    CallableScalar(lambda x: np.sin(x[1]) * x[0]),
])
def test_scalar_gradients_match_fd(phi, rng):
    for x in rng.normal(size=(20, 4)):
        assert np.max(np.abs(phi.grad(x) - fd_gradient(phi.value, x))) <= 1e-8


def test_radial_scalars_ignore_time():
    phi = PlummerScalar(0.3, 0.5)
    x = np.array([0.0, 1.0, 0.5, -0.2])
    assert phi.value(x) == phi.value(x + np.array([3.0, 0, 0, 0]))
    assert phi.grad(x)[0] == 0.0


# ---------------------------------------------------------------- normalization, k


def test_normalize_u_examples():
    assert np.array_equal(normalize_u(MINK, [-2.0, 0, 0, 0]), [-1.0, 0, 0, 0])
    with pytest.raises(NotTimelike):
        normalize_u(MINK, [0.0, 1, 0, 0])
    v = np.array([-2.0, 1, 0, 0])
    assert np.allclose(normalize_u(MINK, v), v / np.sqrt(3.0), rtol=0, atol=1e-15)


@given(st.data())
def test_normalize_u_unit_norm(data):
    g = data.draw(lorentz_metrics())
    v = data.draw(timelike_covectors(g))
    u = normalize_u(g, v)
    assert abs(dot_co(g, u, u) + 1.0) <= 1e-12


def test_k_vector_examples():
    u = np.array([-1.0, 0, 0, 0])
    assert np.array_equal(k_vector(MINK, u, [0.0, 1, 0, 0]), [0.0, 1, 0, 0])
    with pytest.raises(DegenerateK):
        k_vector(MINK, u, u)


@given(st.data(), vec4)
def test_k_orthogonal_to_u(data, b):
    g = data.draw(lorentz_metrics())
    u = normalize_u(g, data.draw(timelike_covectors(g)))
    try:
        k = k_vector(g, u, b)
    except DegenerateK:
        return
    assert abs(dot_co(g, k, u)) <= 1e-14 * max(1.0, np.linalg.norm(k) * np.linalg.norm(u))


# ---------------------------------------------------------------- U fields


def test_boost_field_is_unit_and_jacobian_matches_fd(rng):
    for metric in (Minkowski(), IsotropicSchwarzschild(0.2)):
        field = VectorFieldU.boost(metric, 0.3, [0.1, 0.2, -0.1, 0.05], [1.0, 0.5, 0.0])
        for x in np.array([0.0, 2.0, 1.0, 0.5]) + 0.3 * rng.normal(size=(10, 4)):
            u = field.u_co(x)
            assert abs(dot_co(metric.eval(x), u, u) + 1.0) <= 1e-13
            assert np.max(np.abs(field.jac(x) - fd_gradient(field.u_co, x))) <= 1e-8


def test_rest_field_on_minkowski():
    field = VectorFieldU.rest(Minkowski())
    assert np.array_equal(field.u_co(np.ones(4)), [-1.0, 0, 0, 0])
    assert not np.any(field.jac(np.ones(4)))


# ---------------------------------------------------------------- gauge generators


def test_antisym_layout():
    a = antisym(1, 2, 3, 4, 5, 6)
    assert np.array_equal(a, -a.T)
    assert a[0, 1] == 1 and a[2, 3] == 6 and a[3, 1] == -5


def test_poly_generator_derivatives(rng):
    A = [antisym(*rng.normal(size=6)) for _ in range(4)]
    gen = GaugeGenerator.poly(A, center=0.3)
    for s in rng.normal(size=5):
        d1 = (gen.omega(s + 1e-5) - gen.omega(s - 1e-5)) / 2e-5
        d2 = (gen.omega1(s + 1e-5) - gen.omega1(s - 1e-5)) / 2e-5
        assert np.max(np.abs(d1 - gen.omega1(s))) <= 1e-7
        assert np.max(np.abs(d2 - gen.omega2(s))) <= 1e-7
    assert np.array_equal(gen.omega(0.3), A[0])


def test_poly_rejects_symmetric_coefficients():
    with pytest.raises(ValueError):
        GaugeGenerator.poly([np.eye(4)])


def test_sinusoid_and_scaling():
    A = antisym(c01=1.0, c23=-0.5)
    gen = GaugeGenerator.sinusoid(A, 2.0, 0.1)
    s = 0.7
    assert np.allclose(gen.omega2(s), -4.0 * gen.omega(s))
    half = gen.scaled(0.5)
    assert np.allclose(half.omega1(s), 0.5 * gen.omega1(s))
    assert not np.any(GaugeGenerator.zero().omega2(s))
