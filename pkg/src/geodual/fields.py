"""World scalar field, conformal factor, unit timelike vector field and gauge data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateK, DualSingularity, NotTimelike
from .tensor import DIM, Metric4, MetricField, fd_gradient


# ---------------------------------------------------------------- scalar fields


class ScalarField:
    """Phi(x) with covariant gradient d Phi / d x^mu."""

    name = "scalar"

    def value(self, x) -> float:
        raise NotImplementedError

    def grad(self, x):
        return fd_gradient(self.value, x)

    def __call__(self, x):
        return self.value(x)


class ConstantScalar(ScalarField):
    name = "constant"

    def __init__(self, c=0.0):
        self.c = float(c)

    def value(self, x):
        return self.c

    def grad(self, x):
        return np.zeros(DIM)


class LinearScalar(ScalarField):
    """Phi = c + a_mu x^mu."""

    name = "linear"

    def __init__(self, a, c=0.0):
        self.a = np.asarray(a, dtype=float)
        self.c = float(c)

    def value(self, x):
        return self.c + float(self.a @ np.asarray(x, dtype=float))

    def grad(self, x):
        return self.a.copy()


class RadialScalar(ScalarField):
    """Static spherically symmetric profile Phi(r), r the spatial radius.

    Subclasses give ``profile(r2)`` and ``dprofile_dr2(r2)`` in terms of
    r^2 so the softened forms stay smooth through the origin.
    """

    def profile(self, r2):
        raise NotImplementedError

    def dprofile_dr2(self, r2):
        raise NotImplementedError

    def value(self, x):
        xs = np.asarray(x[1:], dtype=float)
        return float(self.profile(xs @ xs))

    def grad(self, x):
        xs = np.asarray(x[1:], dtype=float)
        out = np.zeros(DIM)
        out[1:] = 2.0 * self.dprofile_dr2(xs @ xs) * xs
        return out


class PlummerScalar(RadialScalar):
    """Phi = -amp / sqrt(r^2 + soft^2)."""

    name = "plummer"

    def __init__(self, amp, soft):
        self.amp = float(amp)
        self.soft = float(soft)

    def profile(self, r2):
        return -self.amp / np.sqrt(r2 + self.soft**2)

    def dprofile_dr2(self, r2):
        return 0.5 * self.amp * (r2 + self.soft**2) ** -1.5


class LogScalar(RadialScalar):
    """Phi = (amp / 2) ln(r^2 + soft^2); gives asymptotically flat circular speeds."""

    name = "log"

    def __init__(self, amp, soft):
        self.amp = float(amp)
        self.soft = float(soft)

    def profile(self, r2):
        return 0.5 * self.amp * np.log(r2 + self.soft**2)

    def dprofile_dr2(self, r2):
        return 0.5 * self.amp / (r2 + self.soft**2)


class CallableScalar(ScalarField):
    name = "callable"

    def __init__(self, fn: Callable, grad_fn: Callable | None = None):
        self._fn = fn
        self._grad = grad_fn

    def value(self, x):
        return float(self._fn(np.asarray(x, dtype=float)))

    def grad(self, x):
        if self._grad is None:
            return fd_gradient(self.value, x)
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)


# ------------------------------------------------------------ conformal factor


def singularity_threshold(k, delta=None):
    return 1e-8 * abs(k) if delta is None else float(delta)


def conformal_factor(k, phi: ScalarField, x, delta=None):
    """F(x) = k / (k - Phi(x)).

    Raises DualSingularity when |k - Phi(x)| <= delta (default 1e-8 |k|).
    """
    gap = k - phi.value(x)
    if abs(gap) <= singularity_threshold(k, delta):
        raise DualSingularity(f"Phi(x) = {k - gap:.17g} within {singularity_threshold(k, delta):.3g} of k = {k:.17g}")
    return k / gap


# ------------------------------------------------------------- vector algebra


def dot_co(g: Metric4, u, v):
    """g^{mu nu} u_mu v_nu for covariant u, v."""
    return float(np.asarray(u) @ g.inv @ np.asarray(v))


def normalize_u(g: Metric4, v):
    """Scale a timelike covector to unit norm, g^{mu nu} U_mu U_nu = -1."""
    v = np.asarray(v, dtype=float)
    n2 = dot_co(g, v, v)
    if not n2 < 0.0:
        raise NotTimelike(f"covector has g^(mu nu) v_mu v_nu = {n2:.6g} >= 0")
    return v / np.sqrt(-n2)


def k_vector(g: Metric4, u, b):
    """k_mu = U_mu (U.b) + b_mu, orthogonal to U whenever U.U = -1."""
    u = np.asarray(u, dtype=float)
    b = np.asarray(b, dtype=float)
    k = u * dot_co(g, u, b) + b
    if np.linalg.norm(k) < 1e-12 * np.linalg.norm(b):
        raise DegenerateK("k = U(U.b) + b vanishes; b is parallel to U")
    return k


# ----------------------------------------------------- unit timelike U field


class VectorFieldU:
    """Unit timelike covector field U_mu(x), normalized under a metric field.

    ``raw`` may be any timelike covector field; it is normalized pointwise.
    ``raw_jac`` (shape (4, 4), [nu, mu] = d_nu raw_mu) enables closed-form
    derivatives, otherwise they are taken numerically.
    """

    def __init__(self, metric: MetricField, raw: Callable, raw_jac: Callable | None = None, name="u"):
        self.metric = metric
        self.raw = raw
        self.raw_jac = raw_jac
        self.name = name

    def u_co(self, x):
        return normalize_u(self.metric.eval(x), self.raw(np.asarray(x, dtype=float)))

    def jac(self, x):
        """d_nu U_mu as array [nu, mu]."""
        if self.raw_jac is None:
            return fd_gradient(self.u_co, x)
        x = np.asarray(x, dtype=float)
        m = self.metric.eval(x)
        r = np.asarray(self.raw(x), dtype=float)
        dr = np.asarray(self.raw_jac(x), dtype=float)
        dinv = self.metric.deriv(x)
        n = np.sqrt(-(r @ m.inv @ r))
        dn = -(np.einsum("nab,a,b->n", dinv, r, r) + 2.0 * dr @ (m.inv @ r)) / (2.0 * n)
        return dr / n - np.outer(dn, r) / n**2

    @classmethod
    def rest(cls, metric):
        e0 = np.array([-1.0, 0.0, 0.0, 0.0])
        return cls(metric, lambda x: e0, lambda x: np.zeros((DIM, DIM)), name="rest")

    @classmethod
    def constant(cls, metric, v):
        v = np.asarray(v, dtype=float)
        return cls(metric, lambda x: v, lambda x: np.zeros((DIM, DIM)), name="constant")

    @classmethod
    def boost(cls, metric, chi0, chi_grad, direction):
        """raw_mu = (-cosh chi, sinh chi n), chi(x) = chi0 + chi_grad . x, n a unit 3-vector."""
        cg = np.asarray(chi_grad, dtype=float)
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)

        def chi(x):
            return chi0 + cg @ x

        def raw(x):
            c = chi(x)
            return np.concatenate(([-np.cosh(c)], np.sinh(c) * n))

        def raw_jac(x):
            c = chi(x)
            d = np.concatenate(([-np.sinh(c)], np.cosh(c) * n))
            return np.outer(cg, d)

        return cls(metric, raw, raw_jac, name="boost")


# ----------------------------------------------------------- gauge generator


def antisym(c01=0.0, c02=0.0, c03=0.0, c12=0.0, c13=0.0, c23=0.0):
    """Antisymmetric 4x4 matrix from its six upper-triangular entries."""
    a = np.zeros((DIM, DIM))
    for (i, j), c in zip(((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)), (c01, c02, c03, c12, c13, c23)):
        a[i, j] = c
        a[j, i] = -c
    return a


@dataclass(frozen=True)
class GaugeGenerator:
    """omega_{lg}(s) with its first two s-derivatives, b_mu and coupling eps.

    omega depends on position only through s = k.x (lower indices on omega).
    """

    omega: Callable
    omega1: Callable
    omega2: Callable
    b: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0, 0.0]))
    eps: float = 1.0
    kind: str = "custom"

    @classmethod
    def zero(cls, b=(0.0, 1.0, 0.0, 0.0), eps=1.0):
        z = np.zeros((DIM, DIM))
        f = lambda s: z.copy()  # noqa: E731
        return cls(f, f, f, np.asarray(b, dtype=float), float(eps), "zero")

    @classmethod
    def poly(cls, coeffs: Sequence, center=0.0, b=(0.0, 1.0, 0.0, 0.0), eps=1.0):
        """omega(s) = sum_n A_n (s - center)^n with antisymmetric A_n."""
        A = [np.asarray(c, dtype=float) for c in coeffs]
        for a in A:
            if not np.allclose(a, -a.T, rtol=0, atol=0):
                raise ValueError("polynomial coefficients must be antisymmetric")

        def series(s, order):
            t = s - center
            out = np.zeros((DIM, DIM))
            for n, a in enumerate(A):
                if n < order:
                    continue
                c = 1.0
                for j in range(order):
                    c *= n - j
                out = out + c * t ** (n - order) * a
            return out

        return cls(lambda s: series(s, 0), lambda s: series(s, 1), lambda s: series(s, 2),
                   np.asarray(b, dtype=float), float(eps), "poly")

    @classmethod
    def sinusoid(cls, A, kappa, phase=0.0, b=(0.0, 1.0, 0.0, 0.0), eps=1.0):
        """omega(s) = A sin(kappa s + phase)."""
        A = np.asarray(A, dtype=float)
        return cls(lambda s: A * np.sin(kappa * s + phase),
                   lambda s: A * kappa * np.cos(kappa * s + phase),
                   lambda s: -A * kappa**2 * np.sin(kappa * s + phase),
                   np.asarray(b, dtype=float), float(eps), "sin")

    def scaled(self, lam):
        """Generator with omega -> lam * omega."""
        return GaugeGenerator(lambda s: lam * self.omega(s), lambda s: lam * self.omega1(s),
                              lambda s: lam * self.omega2(s), self.b, self.eps, self.kind)
