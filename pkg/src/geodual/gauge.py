"""Gauge algebra of the unit vector field near the special abelian gauge.

The generator is G = eps omega_{lg}(s) N^{lg} with s = k.x and
k_mu = U_mu (U.b) + b_mu, so k.U = 0 whenever U.U = -1. Everything here is
first order in omega and evaluated as c-numbers at one point; operator
identities are cross-checked with the affine operator algebra in
``operators``, where omega and k enter as c-number coefficients.

Conventions: omega is stored with both indices down, and the mixed forms
are omega_mu^g = omega_{mu b} g^{bg} and omega^l_mu = g^{la} omega_{a mu}.
Commutators [U_mu, U_nu] are purely imaginary; functions that return them
give the real coefficient R of 2i, i.e. [U'_mu, U'_nu] = 2i R_{mu nu}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import RealnessViolation
from .fields import GaugeGenerator, VectorFieldU, k_vector
from .operators import AffineOp, commutator, contract_generators
from .tensor import DIM, Metric4, MetricField, fd_gradient

REAL_TOL = 1e-12


def as_real(z, what="value", tol=REAL_TOL):
    """Drop the imaginary part after checking it is negligible."""
    z = np.asarray(z)
    if np.iscomplexobj(z):
        scale = max(1.0, float(np.max(np.abs(z.real))) if z.size else 1.0)
        if z.size and np.max(np.abs(z.imag)) > tol * scale:
            raise RealnessViolation(f"{what} has imaginary residue {np.max(np.abs(z.imag)):.3e}")
        z = z.real
    return z.astype(float)


@dataclass(frozen=True)
class GaugeContext:
    metric: MetricField
    u: VectorFieldU | None
    gen: GaugeGenerator

    def local(self, x, u_co=None) -> "LocalGauge":
        """Everything the closed forms need at x.

        ``u_co`` overrides the field value (used to differentiate in U).
        U = None in the context means U = 0, which only the current uses.
        """
        x = np.asarray(x, dtype=float)
        m = self.metric.eval(x)
        if u_co is None:
            u_co = self.u.u_co(x) if self.u is not None else np.zeros(DIM)
        u_co = np.asarray(u_co, dtype=float)
        k = k_vector(m, u_co, self.gen.b)
        s = float(k @ x)
        return LocalGauge(x=x, m=m, u=u_co, k=k, s=s,
                          omega=np.asarray(self.gen.omega(s), dtype=float),
                          omega1=np.asarray(self.gen.omega1(s), dtype=float),
                          omega2=np.asarray(self.gen.omega2(s), dtype=float),
                          b=np.asarray(self.gen.b, dtype=float), eps=self.gen.eps)


@dataclass(frozen=True)
class LocalGauge:
    x: np.ndarray
    m: Metric4
    u: np.ndarray
    k: np.ndarray
    s: float
    omega: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    b: np.ndarray
    eps: float

    @property
    def u_up(self):
        return self.m.inv @ self.u

    @property
    def v(self):
        """v_mu = omega'^l_mu U_l."""
        return self.u_up @ self.omega1


@dataclass(frozen=True)
class FieldStrength:
    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "f", 0.5 * (f - f.T))


# ------------------------------------------------------------ transformation


def gauge_transform_u(ctx: GaugeContext, x):
    """First-order transformed field.

    Returns (u_prime, op_coeff). u_prime is the c-number part U + i[G,U];
    op_coeff[mu, l, g] = k_mu omega'_{lg} is the coefficient of N^{lg} in
    (1/eps) dG/dx^mu, which has no c-number part.
    """
    lg = ctx.local(x)
    comm = 2j * lg.eps * (lg.omega @ lg.u_up)  # [G, U_mu]
    u_prime = as_real(lg.u + 1j * comm, "U'")
    op_coeff = np.einsum("m,lg->mlg", lg.k, lg.omega1)
    return u_prime, op_coeff


def finite_lorentz_u(ctx: GaugeContext, x, lam):
    """U'_mu = exp(-2 eps lam L)_mu^g U_g with L = omega g^{-1}: the group element."""
    lg = ctx.local(x)
    L = lg.omega @ lg.m.inv
    return expm(-2.0 * lg.eps * lam * L) @ lg.u


def full_norm_residual(ctx: GaugeContext, x, lam=1.0):
    """|U'.U' + 1| for the c-number transform with omega -> lam omega."""
    lg = ctx.local(x)
    up = lg.u - 2.0 * lg.eps * lam * (lg.omega @ lg.u_up)
    return abs(float(up @ lg.m.inv @ up) + 1.0)


def _generator(lg: LocalGauge, coeff) -> AffineOp:
    return lg.eps * contract_generators(lg.m.inv, coeff)


def _raised_coord(lg: LocalGauge, mu) -> AffineOp:
    """Multiplication by U^mu = g^{mu a} U_a."""
    return AffineOp.mult(lg.m.inv[mu])


def norm_residual(ctx: GaugeContext, x):
    """First-order part of U'.U' + 1, assembled term by term.

    commutator term   i (U_mu [G, U^mu] + [G, U_mu] U^mu)
    projection terms  N (d_mu omega U^mu) and (U^mu d_mu omega) N, with
                      d_mu omega U^mu = (k.U) omega'
    ordering terms    [U^mu, N] d_mu omega + d_mu omega [N, U^mu]

    Each group is evaluated independently; the sum of their magnitudes
    is returned.
    """
    lg = ctx.local(x)
    u = lg.u
    G = _generator(lg, lg.omega)
    comm = 0j
    for mu in range(DIM):
        g_u_up = commutator(G, _raised_coord(lg, mu)).mult_value(u)
        g_u_lo = commutator(G, AffineOp.coord(mu)).mult_value(u)
        comm += u[mu] * g_u_up + g_u_lo * lg.u_up[mu]
    comm = float(as_real(1j * comm, "commutator term"))

    ku = float(lg.k @ lg.u_up)
    projection = abs(ku) * float(np.linalg.norm(lg.omega1))

    order = 0j
    for mu in range(DIM):
        A = contract_generators(lg.m.inv, lg.k[mu] * lg.omega1)
        Um = _raised_coord(lg, mu)
        order += commutator(Um, A).mult_value(u) + commutator(A, Um).mult_value(u)
    order = float(as_real(order, "ordering terms"))
    return abs(comm) + projection + abs(order)


def omega_norm(ctx: GaugeContext, x):
    """Frobenius norm of (omega, omega') at s = k.x."""
    lg = ctx.local(x)
    return float(np.sqrt(np.sum(lg.omega**2) + np.sum(lg.omega1**2)))


# ------------------------------------------------------------ commutators


def commutator_coeff(lg: LocalGauge):
    """R_{mu nu} = k_nu v_mu - k_mu v_nu."""
    v = lg.v
    return np.outer(v, lg.k) - np.outer(lg.k, v)


def nonabelian_commutator(ctx: GaugeContext, x):
    """Closed form of [U'_mu, U'_nu] as the real coefficient of 2i."""
    return commutator_coeff(ctx.local(x))


def assembled_commutator(ctx: GaugeContext, x):
    """[U'_mu, U'_nu] built from the operator algebra, coefficient of 2i.

    (1/eps)([U_mu, d_nu G] - [U_nu, d_mu G]) + i[U_mu, [G, U_nu]] - i[U_nu, [G, U_mu]]
    with d_nu G = eps k_nu omega'_{lg} N^{lg}.
    """
    lg = ctx.local(x)
    u = lg.u
    G = _generator(lg, lg.omega)
    dG = [_generator(lg, lg.k[nu] * lg.omega1) for nu in range(DIM)]
    GU = [commutator(G, AffineOp.coord(nu)) for nu in range(DIM)]
    out = np.zeros((DIM, DIM), complex)
    for mu in range(DIM):
        Um = AffineOp.coord(mu)
        for nu in range(DIM):
            Un = AffineOp.coord(nu)
            op = (1.0 / lg.eps) * (commutator(Um, dG[nu]) - commutator(Un, dG[mu]))
            op = op + 1j * commutator(Um, GU[nu]) - 1j * commutator(Un, GU[mu])
            if not op.is_multiplication:
                raise RealnessViolation("assembled commutator kept a derivative part")
            out[mu, nu] = op.mult_value(u)
    return as_real(out / 2j, "assembled commutator")


# ------------------------------------------------------------ field strength


def field_strength_from(lg: LocalGauge, jac) -> FieldStrength:
    """f_{mu nu} = d_nu U_mu - d_mu U_nu + i eps [U_mu, U_nu], jac[nu, mu] = d_nu U_mu."""
    curl = jac.T - jac
    return FieldStrength(curl - 2.0 * lg.eps * commutator_coeff(lg))


def field_strength(ctx: GaugeContext, x) -> FieldStrength:
    return field_strength_from(ctx.local(x), ctx.u.jac(x))


def o_tensor(ctx: GaugeContext, x, u_co=None):
    """O^g_{mu nu} = dR_{mu nu}/dU_g as the real coefficient of 2i, shape [g, mu, nu].

    dk_nu/dU_g = delta_nu^g (U.b) + U_nu b^g
    dv_mu/dU_g = omega'^g_mu + U^a omega''_{a mu} ds/dU_g,  ds/dU_g = x^g (U.b) + (U.x) b^g
    """
    lg = ctx.local(x, u_co)
    return o_tensor_from(lg)


def o_tensor_from(lg: LocalGauge):
    inv = lg.m.inv
    ub = float(lg.u @ inv @ lg.b)
    b_up = inv @ lg.b
    dk = np.eye(DIM) * ub + np.outer(b_up, lg.u)  # [g, nu]
    ds = lg.x * ub + float(lg.u @ lg.x) * b_up
    dv = inv @ lg.omega1 + np.outer(ds, lg.u_up @ lg.omega2)  # [g, mu]
    v = lg.v
    P = np.einsum("gn,m->gmn", dk, v) + np.einsum("n,gm->gmn", lg.k, dv)
    return P - P.transpose(0, 2, 1)


def commutator_of_u(ctx: GaugeContext, x, u_co):
    """R_{mu nu} with U replaced by an arbitrary (unnormalized) covector; for U-derivative oracles."""
    return commutator_coeff(ctx.local(x, u_co))


# ------------------------------------------------------------ covariance probe


def _delta_u(ctx: GaugeContext, k0, y, lam, finite):
    y = np.asarray(y, dtype=float)
    m = ctx.metric.eval(y)
    u = ctx.u.u_co(y)
    L = np.asarray(ctx.gen.omega(float(k0 @ y))) @ m.inv
    if finite:
        return expm(-2.0 * ctx.gen.eps * lam * L) @ u - u
    return -2.0 * ctx.gen.eps * lam * (L @ u)


def gauge_covariance_probe(ctx: GaugeContext, x, lambdas=(0.1, 0.05, 0.025), h=1e-3):
    """Change of f under the finite transform against its first-order pieces.

    k is frozen at x so s = k.y near x. For each lam returns
    |(f'(lam) - f) - lam A|, with A the assembled first-order change
    (curl of dU plus the commutator), and the fitted exponent of that
    remainder in lam (expected 2).
    """
    x = np.asarray(x, dtype=float)
    lg = ctx.local(x)
    k0 = lg.k
    jac_d = fd_gradient(lambda y: _delta_u(ctx, k0, y, 1.0, False), x, h)
    A = (jac_d.T - jac_d) - 2.0 * lg.eps * commutator_coeff(lg)
    errs = []
    for lam in lambdas:
        jac_f = fd_gradient(lambda y: _delta_u(ctx, k0, y, lam, True), x, h)
        df = (jac_f.T - jac_f) - 2.0 * lg.eps * lam * commutator_coeff(lg)
        errs.append(float(np.max(np.abs(df - lam * A))))
    errs = np.array(errs)
    lam = np.asarray(lambdas, dtype=float)
    with np.errstate(divide="ignore"):
        slope = float(np.polyfit(np.log(lam), np.log(errs), 1)[0]) if np.all(errs > 0) else float("nan")
    return errs, slope
