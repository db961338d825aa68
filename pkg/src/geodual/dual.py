"""Conformal dual of a scalar-potential Hamiltonian.

K = g^{mn} p p / 2m + Phi(x) and Khat = ghat^{mn}(y) p p / 2m describe the
same motion when both sit on the shell value k, momenta agree at every tau and

    ghat^{mn}(y) = F(x) g^{mn}(x),   F = k / (k - Phi),   dy = F dx.

y exists only along orbits, so every dual quantity is evaluated at the
source point x(tau). Derivatives with respect to y are restricted to the
constraint hypersurface: d~/d~y = F^{-1} d/dx.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DualSingularity, TooFewSamples
from .fields import ScalarField, conformal_factor
from .orbit import Trajectory, cumulative_quad4, fd_time_derivative, path_velocity
from .tensor import Metric4, MetricField, christoffel, christoffel_from, fd_gradient


@dataclass(frozen=True)
class DualPair:
    base: MetricField
    k: float
    phi: ScalarField
    delta: float | None = None
    # negative control: replaces F by F**2 everywhere
    corrupt: bool = False

    def factor(self, x):
        F = conformal_factor(self.k, self.phi, x, self.delta)
        if not F > 0.0:
            raise DualSingularity(f"conformal factor F = {F:.6g} is not positive at x = {np.asarray(x).tolist()}")
        return F * F if self.corrupt else F

    def factor_grad(self, x):
        F = conformal_factor(self.k, self.phi, x, self.delta)
        dF = F * F / self.k * self.phi.grad(x)
        return 2.0 * F * dF if self.corrupt else dF


def dual_metric(pair: DualPair, x) -> Metric4:
    """ghat at the dual point paired with x: inverse scaled by F, covariant by 1/F."""
    F = pair.factor(x)
    m = pair.base.eval(x)
    return Metric4(g=m.g / F, inv=F * m.inv)


def dual_deriv_cov(pair: DualPair, x):
    """d~ ghat_{mn} / d~ y^l, shape (4, 4, 4)."""
    F = pair.factor(x)
    dF = pair.factor_grad(x)
    g = pair.base.eval(x).g
    dg = pair.base.deriv_cov(x)
    return (dg / F - np.einsum("l,mn->lmn", dF, g) / F**2) / F


def dual_deriv(pair: DualPair, x):
    """d~ ghat^{mn} / d~ y^l, shape (4, 4, 4)."""
    F = pair.factor(x)
    dF = pair.factor_grad(x)
    inv = pair.base.eval(x).inv
    dinv = pair.base.deriv(x)
    return (F * dinv + np.einsum("l,mn->lmn", dF, inv)) / F


def dual_christoffel(pair: DualPair, x):
    return christoffel_from(dual_metric(pair, x).inv, dual_deriv_cov(pair, x))


def restricted_derivative(pair: DualPair, f, x, grad=None):
    """F(x)^{-1} d f / d x^mu. ``grad`` supplies df/dx analytically if given."""
    x = np.asarray(x, dtype=float)
    df = np.asarray(grad(x) if grad is not None else fd_gradient(f, x), dtype=float)
    return df / pair.factor(x)


def restricted_second_symmetry(pair: DualPair, x, h=1e-2):
    """Relative antisymmetric part of the twice-restricted derivative of F.

    Both derivatives are taken numerically. Returns
    max|S - S^T| / 2 / max|S|, or 0 when S vanishes identically.
    """
    x = np.asarray(x, dtype=float)

    def first(y):
        return fd_gradient(pair.factor, y, h) / pair.factor(y)

    S = fd_gradient(first, x, h) / pair.factor(x)
    anti = 0.5 * np.max(np.abs(S - S.T))
    if anti == 0.0:
        return 0.0
    return float(anti / np.max(np.abs(S)))


def map_orbit_to_dual(pair: DualPair, traj: Trajectory) -> Trajectory:
    """Carry an x-orbit to the dual description.

    y(tau) integrates dy = F(x(tau)) dx from y(0) = x(0); momenta are copied.
    The returned trajectory keeps x(tau) in ``base_x`` for pulling fields back.
    """
    if len(traj) < 5:
        raise TooFewSamples("mapping needs at least 5 samples")
    h = traj.spacing
    xdot = fd_time_derivative(traj.x, h)
    F = np.array([pair.factor(x) for x in traj.x])
    y = traj.x[0] + cumulative_quad4(F[:, None] * xdot, h)
    m = traj.spec.m if traj.spec is not None else 1.0
    Khat = np.array([float(p @ dual_metric(pair, x).inv @ p) / (2.0 * m) for x, p in zip(traj.x, traj.p)])
    return Trajectory(tau=traj.tau.copy(), x=y, p=traj.p.copy(), K=Khat, k_value=pair.k,
                      spec=None, base_x=traj.x.copy())


def dual_geodesic_residual(pair: DualPair, ytraj: Trajectory):
    """yddot^m + Ghat^m_{ls} ydot^l ydot^s per sample, with Ghat from restricted derivatives."""
    if ytraj.base_x is None:
        raise ValueError("trajectory carries no source x-orbit")
    if len(ytraj) < 5:
        raise TooFewSamples("dual residual needs at least 5 samples")
    v, a = path_velocity(ytraj)
    out = np.empty_like(a)
    for i, x in enumerate(ytraj.base_x):
        G = dual_christoffel(pair, x)
        out[i] = a[i] + np.einsum("rmn,m,n->r", G, v[i], v[i])
    return out


def momentum_mismatch(pair: DualPair, traj: Trajectory, ytraj: Trajectory, m=1.0):
    """max |m ghat_{mn} ydot^n - m g_{mn} xdot^n| with both velocities from path differences."""
    h = traj.spacing
    xdot = fd_time_derivative(traj.x, h)
    ydot = fd_time_derivative(ytraj.x, h)
    worst = 0.0
    for x, vx, vy in zip(traj.x, xdot, ydot):
        lhs = m * dual_metric(pair, x).g @ vy
        rhs = m * pair.base.eval(x).g @ vx
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# ------------------------------------------------------------- z-embedding


@dataclass(frozen=True)
class ZEmbedding:
    z: np.ndarray
    zdot: np.ndarray

    def __len__(self):
        return len(self.z)


def z_embed(pair: DualPair, traj: Trajectory) -> ZEmbedding:
    """zdot_mu = g_{mn} xdot^n along the orbit, z from quadrature with z(0) = 0."""
    if len(traj) < 5:
        raise TooFewSamples("z-embedding needs at least 5 samples")
    h = traj.spacing
    xdot = fd_time_derivative(traj.x, h)
    zdot = np.array([pair.base.eval(x).g @ v for x, v in zip(traj.x, xdot)])
    return ZEmbedding(z=cumulative_quad4(zdot, h), zdot=zdot)


def z_flow_terms(pair: DualPair, x, zdot):
    """The two pieces of zddot_n for the conformal metric pulled back to g.

    geometric = -1/2 d_n g^{rg} zdot_r zdot_g
    potential = -1/2 F^{-1} g_{nl} (dF/dz_l) g^{rg} zdot_r zdot_g,

    with dF/dz_l = ghat^{la} d~F/d~y^a.
    """
    x = np.asarray(x, dtype=float)
    m = pair.base.eval(x)
    F = pair.factor(x)
    geometric = -0.5 * np.einsum("nrg,r,g->n", pair.base.deriv(x), zdot, zdot)
    dF_dz = dual_metric(pair, x).inv @ (pair.factor_grad(x) / F)
    potential = -0.5 / F * (m.g @ dF_dz) * float(zdot @ m.inv @ zdot)
    return geometric, potential


def scalar_force_acceleration(metric: MetricField, phi: ScalarField, x, xdot, m=1.0):
    """-Gamma^r_{mn} xdot^m xdot^n - (1/m) g^{rn} d_n Phi."""
    x = np.asarray(x, dtype=float)
    G = christoffel(metric, x)
    return -np.einsum("rmn,m,n->r", G, xdot, xdot) - metric.eval(x).inv @ phi.grad(x) / m


def reconstruct_acceleration(pair: DualPair, x, xdot):
    """xddot rebuilt from the z-chain: d/dtau (g^{rn} zdot_n) with zddot from z_flow_terms."""
    x = np.asarray(x, dtype=float)
    m = pair.base.eval(x)
    zdot = m.g @ xdot
    geo, pot = z_flow_terms(pair, x, zdot)
    dinv = pair.base.deriv(x)
    return np.einsum("srn,s,n->r", dinv, xdot, zdot) + m.inv @ (geo + pot)


def dual_inverse_derivative_residual(pair: DualPair, x):
    """max |ghat^{gl} d~ghat_{ls} ghat^{sr} + d~ghat^{gr}| at the dual point of x."""
    inv = dual_metric(pair, x).inv
    lhs = np.einsum("gl,mls,sr->mgr", inv, dual_deriv_cov(pair, x), inv)
    return float(np.max(np.abs(lhs + dual_deriv(pair, x))))


__all__ = [
    "DualPair", "ZEmbedding", "dual_metric", "dual_deriv", "dual_deriv_cov", "dual_christoffel",
    "restricted_derivative", "restricted_second_symmetry", "map_orbit_to_dual",
    "dual_geodesic_residual", "momentum_mismatch", "z_embed", "z_flow_terms",
    "scalar_force_acceleration", "reconstruct_acceleration", "dual_inverse_derivative_residual",
]
