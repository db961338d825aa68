"""Fixed-dimension tensor arithmetic on a 4D Lorentzian manifold.

Signature is (-,+,+,+) throughout, units with c = 1.

Index conventions for derivative arrays (first axis is always the
differentiation index):

    dinv[mu, l, g] = d g^{lg} / d x^mu
    dcov[mu, l, g] = d g_{lg} / d x^mu
    gamma[r, mu, nu] = Gamma^r_{mu nu}
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SingularMetric

DIM = 4
ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
ETA.setflags(write=False)


@dataclass(frozen=True)
class Metric4:
    """Covariant components ``g`` and their inverse ``inv`` at one point."""

    g: np.ndarray
    inv: np.ndarray

    def signature(self):
        w = np.linalg.eigvalsh(self.g)
        return tuple(int(np.sign(v)) for v in w)

    def is_lorentzian(self):
        return self.signature() == (-1, 1, 1, 1)


def invert_metric(g):
    """Inverse of a symmetric 4x4 metric, symmetrized on return.

    Raises SingularMetric when |det g| <= 1e-12 * scale**4, with scale the
    largest absolute entry.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (DIM, DIM):
        raise ValueError(f"metric must be 4x4, got {g.shape}")
    scale = np.max(np.abs(g))
    det = np.linalg.det(g)
    if scale == 0.0 or abs(det) <= 1e-12 * scale**4:
        raise SingularMetric(f"metric determinant {det:.3e} below threshold")
    inv = np.linalg.inv(g)
    return 0.5 * (inv + inv.T)


def make_metric(g):
    g = np.asarray(g, dtype=float)
    g = 0.5 * (g + g.T)
    return Metric4(g=g, inv=invert_metric(g))


def raise_index(g_inv, v):
    """v^mu = g^{mu nu} v_nu. Accepts a Metric4 or a bare inverse matrix."""
    inv = g_inv.inv if isinstance(g_inv, Metric4) else g_inv
    return inv @ np.asarray(v, dtype=float)


def lower_index(g, v):
    cov = g.g if isinstance(g, Metric4) else g
    return cov @ np.asarray(v, dtype=float)


def christoffel_from(inv, dcov):
    """Gamma^r_{mu nu} = 1/2 g^{r l} (d_nu g_{l mu} + d_mu g_{l nu} - d_l g_{mu nu})."""
    dcov = 0.5 * (dcov + dcov.transpose(0, 2, 1))
    # bracket[l, mu, nu]
    bracket = dcov.transpose(1, 2, 0) + dcov.transpose(1, 0, 2) - dcov
    gamma = 0.5 * np.einsum("rl,lmn->rmn", inv, bracket)
    return 0.5 * (gamma + gamma.transpose(0, 2, 1))


def christoffel(metric, x):
    """Connection coefficients of a MetricField at x."""
    m = metric.eval(x)
    return christoffel_from(m.inv, metric.deriv_cov(x))


def fd_gradient(f, x, h=None):
    """4th-order central-difference gradient of a scalar or array valued f.

    Default step h = 1e-5 * (1 + |x|). Returns an array whose first axis is
    the differentiation index.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-5 * (1.0 + np.linalg.norm(x))
    out = []
    for mu in range(DIM):
        e = np.zeros(DIM)
        e[mu] = h
        # paired differences: exactly zero for constant f
        d1 = np.asarray(f(x + e)) - np.asarray(f(x - e))
        d2 = np.asarray(f(x + 2 * e)) - np.asarray(f(x - 2 * e))
        out.append((8.0 * d1 - d2) / (12.0 * h))
    return np.array(out)


def fd2_gradient(f, x, h):
    """Second-order central-difference gradient; used for convergence-order probes."""
    x = np.asarray(x, dtype=float)
    out = []
    for mu in range(DIM):
        e = np.zeros(DIM)
        e[mu] = h
        out.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return np.array(out)


class MetricField:
    """Position-dependent metric with first derivatives.

    Subclasses implement ``eval``; analytic families override ``deriv`` and
    ``deriv_cov`` with closed forms. The fallback differentiates ``eval``
    numerically with a 4th-order stencil.
    """

    name = "metric"

    def eval(self, x) -> Metric4:
        raise NotImplementedError

    def deriv(self, x):
        """d g^{lg} / d x^mu, shape (4, 4, 4)."""
        d = fd_gradient(lambda y: self.eval(y).inv, x)
        return 0.5 * (d + d.transpose(0, 2, 1))

    def deriv_cov(self, x):
        """d g_{lg} / d x^mu, shape (4, 4, 4)."""
        d = fd_gradient(lambda y: self.eval(y).g, x)
        return 0.5 * (d + d.transpose(0, 2, 1))

    def inv_and_deriv(self, x):
        """Fast path for the orbit integrator."""
        return self.eval(x).inv, self.deriv(x)


class Minkowski(MetricField):
    name = "minkowski"
    _M = Metric4(g=ETA, inv=ETA)
    _ZERO = np.zeros((DIM, DIM, DIM))

    def eval(self, x):
        return self._M

    def deriv(self, x):
        return self._ZERO

    def deriv_cov(self, x):
        return self._ZERO

    def inv_and_deriv(self, x):
        return ETA, self._ZERO


class ConstantMetric(MetricField):
    """Position-independent metric, e.g. a random Lorentzian draw."""

    name = "constant"

    def __init__(self, g):
        self._m = make_metric(g)
        self._zero = np.zeros((DIM, DIM, DIM))

    def eval(self, x):
        return self._m

    def deriv(self, x):
        return self._zero

    def deriv_cov(self, x):
        return self._zero

    def inv_and_deriv(self, x):
        return self._m.inv, self._zero


class IsotropicSchwarzschild(MetricField):
    """Schwarzschild exterior in isotropic coordinates.

    ds^2 = -A(r) dt^2 + B(r) (dx^2 + dy^2 + dz^2),
    A = ((1 - u)/(1 + u))^2, B = (1 + u)^4, u = M / (2 r).
    Valid for r > M/2.
    """

    name = "schwarzschild"

    def __init__(self, mass):
        if mass < 0:
            raise ValueError("mass must be non-negative")
        self.mass = float(mass)

    def profile(self, r):
        """(A, B, dA/dr, dB/dr) at isotropic radius r."""
        if r <= 0.5 * self.mass:
            raise SingularMetric(f"r = {r:.6g} inside isotropic horizon radius {0.5 * self.mass:.6g}")
        u = 0.5 * self.mass / r
        A = ((1.0 - u) / (1.0 + u)) ** 2
        B = (1.0 + u) ** 4
        du_dr = -u / r
        dA = -4.0 * (1.0 - u) / (1.0 + u) ** 3 * du_dr
        dB = 4.0 * (1.0 + u) ** 3 * du_dr
        return A, B, dA, dB

    def _radial(self, x):
        xs = np.asarray(x[1:], dtype=float)
        r = float(np.sqrt(xs @ xs))
        A, B, dA, dB = self.profile(r)
        grad_r = np.zeros(DIM)
        grad_r[1:] = xs / r
        return A, B, dA, dB, grad_r

    def eval(self, x):
        A, B, *_ = self._radial(x)
        g = np.diag([-A, B, B, B])
        inv = np.diag([-1.0 / A, 1.0 / B, 1.0 / B, 1.0 / B])
        return Metric4(g=g, inv=inv)

    def deriv(self, x):
        A, B, dA, dB, grad_r = self._radial(x)
        diag = np.array([dA / A**2, -dB / B**2, -dB / B**2, -dB / B**2])
        return _diag_deriv(grad_r, diag)

    def deriv_cov(self, x):
        A, B, dA, dB, grad_r = self._radial(x)
        diag = np.array([-dA, dB, dB, dB])
        return _diag_deriv(grad_r, diag)

    def inv_and_deriv(self, x):
        A, B, dA, dB, grad_r = self._radial(x)
        inv = np.diag([-1.0 / A, 1.0 / B, 1.0 / B, 1.0 / B])
        diag = np.array([dA / A**2, -dB / B**2, -dB / B**2, -dB / B**2])
        return inv, _diag_deriv(grad_r, diag)


def _diag_deriv(grad_r, diag):
    d = np.zeros((DIM, DIM, DIM))
    idx = np.arange(DIM)
    d[:, idx, idx] = np.outer(grad_r, diag)
    return d


class ConformallyFlat(MetricField):
    """g = exp(2 psi(x)) eta with user-supplied psi and its gradient.

    When ``grad_psi`` is omitted the gradient is taken numerically.
    """

    name = "conformal_flat"

    def __init__(self, psi: Callable, grad_psi: Callable | None = None):
        self.psi = psi
        self.grad_psi = grad_psi if grad_psi is not None else (lambda x: fd_gradient(psi, x))

    @classmethod
    def linear(cls, a, c=0.0):
        a = np.asarray(a, dtype=float)
        return cls(lambda x: c + a @ np.asarray(x, dtype=float), lambda x: a.copy())

    def eval(self, x):
        s = np.exp(2.0 * self.psi(x))
        return Metric4(g=s * ETA, inv=ETA / s)

    def deriv(self, x):
        inv = ETA * np.exp(-2.0 * self.psi(x))
        return -2.0 * np.einsum("m,lg->mlg", self.grad_psi(x), inv)

    def deriv_cov(self, x):
        g = ETA * np.exp(2.0 * self.psi(x))
        return 2.0 * np.einsum("m,lg->mlg", self.grad_psi(x), g)

    def inv_and_deriv(self, x):
        inv = ETA * np.exp(-2.0 * self.psi(x))
        return inv, -2.0 * np.einsum("m,lg->mlg", self.grad_psi(x), inv)


class NumericMetric(MetricField):
    """User metric given only as a function x -> 4x4 covariant matrix."""

    name = "numeric"

    def __init__(self, g_of_x: Callable):
        self._g_of_x = g_of_x

    def eval(self, x):
        return make_metric(self._g_of_x(np.asarray(x, dtype=float)))


def inverse_derivative_residual(inv, dcov, dinv):
    """max |g^{gl} d g_{ls} g^{sr} + d g^{gr}| over all components."""
    lhs = np.einsum("gl,mls,sr->mgr", inv, dcov, inv)
    return float(np.max(np.abs(lhs + dinv)))
