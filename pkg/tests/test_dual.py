from dataclasses import replace

import numpy as np
import pytest

from geodual.checks import dual_suite
from geodual.dual import (DualPair, dual_christoffel, dual_geodesic_residual, dual_inverse_derivative_residual,
                          dual_metric, map_orbit_to_dual, momentum_mismatch, reconstruct_acceleration,
                          restricted_derivative, restricted_second_symmetry, scalar_force_acceleration,
                          z_embed, z_flow_terms)
from geodual.errors import DualSingularity
from geodual.fields import ConstantScalar, LinearScalar, LogScalar, PlummerScalar, VectorFieldU
from geodual.orbit import (HamiltonianSpec, IntegratorOptions, PhaseState, fd_time_derivative, geodesic_residual,
                           hamiltonian_value, integrate_orbit)
from geodual.tensor import ETA, ConformallyFlat, IsotropicSchwarzschild, Minkowski, christoffel

MINK = Minkowski()
SCHW = IsotropicSchwarzschild(0.5)
X0 = np.array([0.0, 6.0, 0.5, 0.0])
P0 = np.array([-1.0, 0.05, 0.35, 0.0])


def orbit(metric, phi, tau_end=2.0, h=1e-3, m=1.0, x0=X0, p0=P0):
    spec = HamiltonianSpec("metric+scalar", metric, m=m, scalar=phi)
    return integrate_orbit(spec, PhaseState(x0, p0), tau_end, IntegratorOptions(h=h))


CATALOG = [
    ("minkowski-linear", MINK, LinearScalar([0.0, 0.02, -0.01, 0.0])),
    ("schwarzschild-plummer", SCHW, PlummerScalar(-0.1, 1.0)),
    ("conformal-log", ConformallyFlat.linear([0.0, 0.01, 0.0, -0.01]), LogScalar(0.01, 0.5)),
]


# ---------------------------------------------------------------- dual metric


def test_dual_metric_identity_for_zero_potential(rng):
    pair = DualPair(SCHW, -0.5, ConstantScalar(0.0))
    for x in X0 + rng.normal(size=(5, 4)):
        m = SCHW.eval(x)
        d = dual_metric(pair, x)
        assert np.array_equal(d.inv, m.inv) and np.array_equal(d.g, m.g)


def test_dual_metric_half_shell():
    pair = DualPair(MINK, -0.5, ConstantScalar(-0.25))
    assert np.array_equal(dual_metric(pair, np.zeros(4)).inv, 2.0 * ETA)


def test_dual_metric_inverse_pair(rng):
    pair = DualPair(SCHW, -0.4, PlummerScalar(0.2, 0.8))
    for x in X0 + rng.normal(size=(20, 4)):
        d = dual_metric(pair, x)
        assert np.max(np.abs(d.g @ d.inv - np.eye(4))) <= 1e-12


def test_nonpositive_factor_rejected():
    # F = k / (k - Phi) = -1
    pair = DualPair(MINK, -0.5, ConstantScalar(-1.0))
    with pytest.raises(DualSingularity):
        dual_metric(pair, np.zeros(4))


def test_dual_inverse_derivative_identity(rng):
    for _, metric, phi in CATALOG:
        traj = orbit(metric, phi, tau_end=0.5, h=1e-2)
        pair = DualPair(metric, traj.k_value, phi)
        for x in traj.x:
            assert dual_inverse_derivative_residual(pair, x) <= 1e-10


def test_dual_christoffel_zero_potential_is_base(rng):
    pair = DualPair(SCHW, -0.5, ConstantScalar(0.0))
    for x in X0 + rng.normal(size=(5, 4)):
        assert np.max(np.abs(dual_christoffel(pair, x) - christoffel(SCHW, x))) <= 1e-15


# ---------------------------------------------------------------- restricted derivatives


def test_restricted_derivative_examples(rng):
    x = np.array([0.1, 0.2, -0.3, 0.4])
    f = lambda y: np.sin(y[1]) + y[0] * y[2]  # noqa: E731
    grad = lambda y: np.array([y[2], np.cos(y[1]), y[0], 0.0])  # noqa: E731
    plain = DualPair(MINK, -0.5, ConstantScalar(0.0))
    assert np.array_equal(restricted_derivative(plain, f, x, grad), grad(x))

    half = DualPair(MINK, -0.5, ConstantScalar(-0.25))
    assert not np.any(restricted_derivative(half, half.factor, x))

    a = np.array([0.01, 0.03, -0.02, 0.05])
    lin = DualPair(MINK, -0.7, LinearScalar(a))
    for y in rng.normal(size=(10, 4)):
        F = lin.factor(y)
        # dF/dx = F^2 / k dPhi/dx, then divided by F
        expect = F / lin.k * a
        assert np.max(np.abs(restricted_derivative(lin, lin.factor, y) - expect)) <= 1e-8


def test_restricted_second_symmetry(rng):
    const = DualPair(MINK, -0.5, ConstantScalar(0.1))
    assert restricted_second_symmetry(const, np.zeros(4)) == 0.0
    lin = DualPair(MINK, -0.7, LinearScalar([0.01, 0.03, -0.02, 0.05]))
    radial = DualPair(SCHW, -0.5, PlummerScalar(0.2, 1.0))
    for x in X0 + rng.normal(size=(20, 4)):
        assert restricted_second_symmetry(lin, x) <= 1e-9
        assert restricted_second_symmetry(radial, x) <= 1e-7


# ---------------------------------------------------------------- orbit mapping


def test_zero_potential_maps_to_itself():
    traj = orbit(SCHW, ConstantScalar(0.0), tau_end=1.0)
    y = map_orbit_to_dual(DualPair(SCHW, traj.k_value, ConstantScalar(0.0)), traj)
    assert np.max(np.abs(y.x - traj.x)) <= 1e-10


def test_half_shell_factor_two_exactly():
    p0 = np.array([-np.sqrt(0.5), 0.0, 0.0, 0.0])
    traj = orbit(MINK, ConstantScalar(-0.25), tau_end=1.0, x0=np.zeros(4), p0=p0)
    assert traj.k_value == pytest.approx(-0.5, rel=1e-15)
    pair = DualPair(MINK, traj.k_value, ConstantScalar(-0.25))
    y = map_orbit_to_dual(pair, traj)
    assert np.max(np.abs((y.x - y.x[0]) - 2.0 * (traj.x - traj.x[0]))) <= 1e-9


@pytest.mark.parametrize("name,metric,phi", CATALOG, ids=[c[0] for c in CATALOG])
def test_mapped_orbit_is_dual_geodesic(name, metric, phi):
    traj = orbit(metric, phi)
    pair = DualPair(metric, traj.k_value, phi)
    y = map_orbit_to_dual(pair, traj)
    assert np.max(np.abs(dual_geodesic_residual(pair, y))) <= 1e-5
    assert momentum_mismatch(pair, traj, y) <= 1e-8
    assert np.max(np.abs(y.K - traj.k_value)) <= 1e-8 * max(1.0, abs(traj.k_value))


def test_minkowski_linear_dual_residual_tight():
    _, metric, phi = CATALOG[0]
    traj = orbit(metric, phi)
    pair = DualPair(metric, traj.k_value, phi)
    assert np.max(np.abs(dual_geodesic_residual(pair, map_orbit_to_dual(pair, traj)))) <= 1e-6


def test_zero_potential_dual_residual_is_geodesic_residual():
    traj = orbit(SCHW, ConstantScalar(0.0), tau_end=1.0)
    pair = DualPair(SCHW, traj.k_value, ConstantScalar(0.0))
    y = map_orbit_to_dual(pair, traj)
    assert np.max(np.abs(y.x - traj.x)) <= 1e-10
    # on the identical path the two residuals are the same formula
    same = replace(y, x=traj.x.copy())
    assert np.max(np.abs(dual_geodesic_residual(pair, same) - geodesic_residual(SCHW, traj))) <= 1e-14


def test_conformal_shell_is_scalar_shell():
    """F g p p / 2m = k holds exactly when g p p / 2m + Phi = k."""
    metric, phi = SCHW, PlummerScalar(-0.1, 1.0)
    base = HamiltonianSpec("metric+scalar", metric, scalar=phi)
    k = hamiltonian_value(base, PhaseState(X0, P0))
    spec = HamiltonianSpec("conformal-gauge", metric, scalar=phi, u=VectorFieldU.rest(metric), eps=0.0, k=k)
    traj = integrate_orbit(spec, PhaseState(X0, P0), 2.0, IntegratorOptions(h=1e-3))
    pair = DualPair(metric, k, phi)
    assert traj.k_drift() <= 1e-9
    assert abs(hamiltonian_value(base, traj.state(len(traj) - 1)) - k) <= 1e-8
    assert pair.factor(traj.x[-1]) > 0


# ---------------------------------------------------------------- z-embedding


def test_free_particle_zdot_constant():
    p = np.array([-1.0, 0.3, 0.0, 0.1])
    traj = integrate_orbit(HamiltonianSpec("metric", MINK), PhaseState(np.zeros(4), p), 1.0, IntegratorOptions(h=1e-2))
    emb = z_embed(DualPair(MINK, traj.k_value, ConstantScalar(0.0)), traj)
    assert np.max(np.abs(emb.zdot - ETA @ (ETA @ p))) <= 1e-12
    assert np.array_equal(emb.z[0], np.zeros(4))


@pytest.mark.parametrize("name,metric,phi", CATALOG, ids=[c[0] for c in CATALOG])
def test_z_acceleration_matches_flow_terms(name, metric, phi):
    traj = orbit(metric, phi)
    pair = DualPair(metric, traj.k_value, phi)
    emb = z_embed(pair, traj)
    zdd = fd_time_derivative(emb.zdot, traj.spacing)
    for i in range(5, len(traj) - 5, 50):
        geo, pot = z_flow_terms(pair, traj.x[i], emb.zdot[i])
        assert np.max(np.abs(zdd[i] - geo - pot)) <= 1e-6


@pytest.mark.parametrize("name,metric,phi", CATALOG, ids=[c[0] for c in CATALOG])
def test_force_reconstruction_pointwise(name, metric, phi, rng):
    traj = orbit(metric, phi, tau_end=0.2, h=1e-2)
    pair = DualPair(metric, traj.k_value, phi)
    for x, p in zip(traj.x, traj.p):
        xdot = metric.eval(x).inv @ p
        direct = scalar_force_acceleration(metric, phi, x, xdot)
        assert np.max(np.abs(reconstruct_acceleration(pair, x, xdot) - direct)) <= 1e-10


# ---------------------------------------------------------------- suite and negative control


def test_dual_suite_passes_and_corruption_fails():
    metric, phi = MINK, LinearScalar([0.0, 0.02, -0.01, 0.0])
    opts = IntegratorOptions(h=1e-3)
    good = dual_suite(metric, phi, X0, P0, 1.0, 1.0, opts, False, np.random.default_rng(0), 20, 0.5)
    assert good["max_residual_dual"] <= 1e-6
    assert good["max_momentum_mismatch"] <= 1e-8
    assert good["max_force_reconstruction_error"] <= 1e-10
    assert good["symmetry_check"] <= 1e-7
    bad = dual_suite(metric, phi, X0, P0, 1.0, 1.0, opts, True, np.random.default_rng(0), 20, 0.5)
    assert bad["max_residual_dual"] > 1e3 * good["max_residual_dual"]
