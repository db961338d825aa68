"""Hamiltonian orbits in world time tau.

Four Hamiltonian kinds share one integrator:

    metric           K = g^{mn} p_m p_n / 2m
    metric+scalar    K = g^{mn} p_m p_n / 2m + Phi
    gauge+scalar     K = g^{mn} (p - eps U)_m (p - eps U)_n / 2m + Phi
    conformal-gauge  K = F g^{mn} (p - eps U)_m (p - eps U)_n / 2m,  F = k / (k - Phi)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DualSingularity, NumericalFailure, StepFailure, TooFewSamples, WrongKind
from .fields import ScalarField, VectorFieldU, conformal_factor, singularity_threshold
from .tensor import DIM, MetricField, christoffel

KINDS = ("metric", "metric+scalar", "gauge+scalar", "conformal-gauge")
CSV_HEADER = ["tau", "x0", "x1", "x2", "x3", "p0", "p1", "p2", "p3", "K", "ds2_accum"]
_TINY = 1e-300


@dataclass(frozen=True)
class PhaseState:
    x: np.ndarray
    p: np.ndarray
    tau: float = 0.0


@dataclass(frozen=True)
class HamiltonianSpec:
    kind: str
    metric: MetricField
    m: float = 1.0
    scalar: ScalarField | None = None
    u: VectorFieldU | None = None
    eps: float = 0.0
    # shell value for the conformal kind; frozen from the initial state when None
    k: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}; expected one of {KINDS}")
        if not self.m > 0:
            raise ValueError("mass m must be positive")
        if self.kind != "metric" and self.scalar is None:
            raise ValueError(f"kind {self.kind!r} needs a scalar field")
        if self.kind in ("gauge+scalar", "conformal-gauge") and self.u is None:
            raise ValueError(f"kind {self.kind!r} needs a vector field U")

    def phi(self, x):
        return 0.0 if self.scalar is None else self.scalar.value(x)


def freeze_k(spec: HamiltonianSpec, s0: PhaseState) -> HamiltonianSpec:
    """Fix the shell value k for the conformal kind from the paired gauge Hamiltonian at s0."""
    if spec.kind != "conformal-gauge" or spec.k is not None:
        return spec
    k = hamiltonian_value(replace(spec, kind="gauge+scalar"), s0)
    return replace(spec, k=k)


def _pi(spec, x, p):
    if spec.kind in ("gauge+scalar", "conformal-gauge"):
        return p - spec.eps * spec.u.u_co(x)
    return p


def hamiltonian_value(spec: HamiltonianSpec, s: PhaseState) -> float:
    x = np.asarray(s.x, dtype=float)
    inv = spec.metric.eval(x).inv
    pi = _pi(spec, x, np.asarray(s.p, dtype=float))
    kin = float(pi @ inv @ pi) / (2.0 * spec.m)
    if spec.kind == "metric":
        return kin
    if spec.kind == "conformal-gauge":
        if spec.k is None:
            raise ValueError("conformal-gauge Hamiltonian needs k; call freeze_k first")
        return conformal_factor(spec.k, spec.scalar, x, spec.delta) * kin
    return kin + spec.scalar.value(x)


def hamilton_rhs(spec: HamiltonianSpec, s: PhaseState):
    """(dx^mu/dtau, dp_mu/dtau) = (dK/dp_mu, -dK/dx^mu)."""
    y = _rhs(spec, np.concatenate((s.x, s.p)).astype(float))
    return y[:DIM], y[DIM:]


def _rhs(spec, y):
    x, p = y[:DIM], y[DIM:]
    m = spec.m
    inv, dinv = spec.metric.inv_and_deriv(x)
    kind = spec.kind
    if kind in ("gauge+scalar", "conformal-gauge"):
        pi = p - spec.eps * spec.u.u_co(x)
        jac = spec.u.jac(x)
    else:
        pi = p
    vel = inv @ pi / m
    pdot = -np.einsum("mlg,l,g->m", dinv, pi, pi) / (2.0 * m)
    if kind in ("gauge+scalar", "conformal-gauge"):
        # d/dx^mu of -(1/2m) g (p - eps U)(p - eps U) through U
        pdot = pdot + spec.eps * (jac @ vel)
    if kind == "metric+scalar" or kind == "gauge+scalar":
        pdot = pdot - spec.scalar.grad(x)
    elif kind == "conformal-gauge":
        phi = spec.scalar.value(x)
        gap = spec.k - phi
        if abs(gap) <= singularity_threshold(spec.k, spec.delta):
            raise DualSingularity(f"Phi = {phi:.17g} reached k = {spec.k:.17g} at x = {x.tolist()}")
        F = spec.k / gap
        dF = F * F / spec.k * spec.scalar.grad(x)
        kin2 = float(pi @ inv @ pi) / (2.0 * m)
        pdot = F * pdot - dF * kin2
        vel = F * vel
    return np.concatenate((vel, pdot))


# ------------------------------------------------------------------ trajectory


@dataclass
class Trajectory:
    tau: np.ndarray
    x: np.ndarray
    p: np.ndarray
    K: np.ndarray
    k_value: float
    ds2: np.ndarray | None = None
    spec: HamiltonianSpec | None = None
    # source x-orbit for trajectories living in dual coordinates
    base_x: np.ndarray | None = None
    status: str = "ok"
    message: str = ""

    def __len__(self):
        return len(self.tau)

    def state(self, i) -> PhaseState:
        return PhaseState(self.x[i].copy(), self.p[i].copy(), float(self.tau[i]))

    @property
    def spacing(self):
        d = np.diff(self.tau)
        if len(d) == 0:
            raise TooFewSamples("trajectory has a single sample")
        h = float(d.mean())
        if np.max(np.abs(d - h)) > 1e-9 * max(h, 1.0):
            raise ValueError("trajectory samples are not uniformly spaced")
        return h

    def k_drift(self):
        return float(np.max(np.abs(self.K - self.k_value)) / max(abs(self.k_value), _TINY))

    def to_csv(self, path):
        ds2 = self.ds2 if self.ds2 is not None else np.full(len(self), np.nan)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for i in range(len(self)):
                row = [self.tau[i], *self.x[i], *self.p[i], self.K[i], ds2[i]]
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, k_value=None):
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header != CSV_HEADER:
                raise ValueError(f"unexpected trajectory header {header}")
            data = np.array([[float(v) for v in row] for row in r])
        K = data[:, 9]
        return cls(tau=data[:, 0], x=data[:, 1:5], p=data[:, 5:9], K=K,
                   k_value=float(K[0]) if k_value is None else k_value, ds2=data[:, 10])


@dataclass(frozen=True)
class IntegratorOptions:
    method: str = "rk4"
    h: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-10
    h_min: float = 1e-12
    # rk4: record every n-th step; rk45: output cadence is h * sample_every
    sample_every: int = 1
    # watch k - Phi along scalar-potential orbits even when the kind itself never divides by it
    dual_guard: bool = False
    max_steps: int = 10_000_000


def integrate_orbit(spec: HamiltonianSpec, s0: PhaseState, tau_end: float,
                    opts: IntegratorOptions = IntegratorOptions()) -> Trajectory:
    """Integrate Hamilton's equations from s0 to tau_end.

    Samples are uniformly spaced in tau. On DualSingularity or StepFailure the
    exception carries the partial trajectory as ``exc.partial``.
    """
    if not tau_end > s0.tau:
        raise ValueError("tau_end must exceed the initial tau")
    spec = freeze_k(spec, s0)
    k = hamiltonian_value(spec, s0)
    guard = opts.dual_guard and spec.scalar is not None
    y = np.concatenate((s0.x, s0.p)).astype(float)

    taus, ys = [float(s0.tau)], [y.copy()]

    def check(yv):
        if guard:
            conformal_factor(k, spec.scalar, yv[:DIM], spec.delta)

    try:
        check(y)
        if opts.method == "rk4":
            _run_rk4(spec, y, s0.tau, tau_end, opts, taus, ys, check)
        elif opts.method == "rk45":
            _run_dopri(spec, y, s0.tau, tau_end, opts, taus, ys, check)
        else:
            raise ValueError(f"unknown integrator {opts.method!r}")
    except NumericalFailure as exc:
        traj = _assemble(spec, taus, ys, k)
        traj.status = type(exc).__name__
        traj.message = str(exc)
        exc.partial = traj
        raise
    return _assemble(spec, taus, ys, k)


def _rk4_step(spec, y, h):
    k1 = _rhs(spec, y)
    k2 = _rhs(spec, y + 0.5 * h * k1)
    k3 = _rhs(spec, y + 0.5 * h * k2)
    k4 = _rhs(spec, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _run_rk4(spec, y, tau0, tau_end, opts, taus, ys, check):
    n = max(1, int(round((tau_end - tau0) / opts.h)))
    h = (tau_end - tau0) / n
    every = max(1, opts.sample_every)
    for i in range(1, n + 1):
        y = _rk4_step(spec, y, h)
        check(y)
        if i % every == 0 or i == n:
            taus.append(tau0 + i * h)
            ys.append(y.copy())


# Dormand-Prince 5(4)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _dopri_step(spec, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_DP_A[i], ks))
        ks.append(_rhs(spec, yi))
    K = np.array(ks)
    y5 = y + h * (_DP_B5 @ K)
    err = h * ((_DP_B5 - _DP_B4) @ K)
    return y5, err, ks[-1]


def _run_dopri(spec, y, tau0, tau_end, opts, taus, ys, check):
    dt_out = opts.h * max(1, opts.sample_every)
    n_out = max(1, int(math.ceil((tau_end - tau0) / dt_out - 1e-12)))
    dt_out = (tau_end - tau0) / n_out
    tau = tau0
    h = min(opts.h, dt_out)
    k1 = _rhs(spec, y)
    steps = 0
    for j in range(1, n_out + 1):
        t_next = tau0 + j * dt_out
        while tau < t_next:
            steps += 1
            if steps > opts.max_steps:
                raise StepFailure(f"exceeded max_steps = {opts.max_steps}")
            last = tau + h >= t_next - 1e-14 * max(1.0, abs(t_next))
            step = t_next - tau if last else h
            y_new, err, k_last = _dopri_step(spec, y, step, k1)
            scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y_new))
            e = float(np.sqrt(np.mean((err / scale) ** 2)))
            if e <= 1.0:
                tau = t_next if last else tau + step
                y, k1 = y_new, k_last
                check(y)
                fac = 5.0 if e == 0.0 else min(5.0, max(0.2, 0.9 * e ** -0.2))
                if not last:
                    h = step * fac
                elif fac < 1.0:
                    h = min(h, step * fac)
            else:
                h = step * max(0.2, 0.9 * e ** -0.2)
                if h < opts.h_min:
                    raise StepFailure(f"adaptive step {h:.3e} fell below h_min = {opts.h_min:.3e} at tau = {tau:.17g}")
        taus.append(t_next)
        ys.append(y.copy())


def _assemble(spec, taus, ys, k):
    Y = np.array(ys)
    tau = np.array(taus)
    x, p = Y[:, :DIM], Y[:, DIM:]
    K = np.array([hamiltonian_value(spec, PhaseState(x[i], p[i], tau[i])) for i in range(len(tau))])
    traj = Trajectory(tau=tau, x=x, p=p, K=K, k_value=k, spec=spec)
    traj.ds2 = interval_accumulator(spec.metric, traj)
    return traj


# ---------------------------------------------------------------- diagnostics


def fd_time_derivative(values, h):
    """4th-order finite-difference derivative along axis 0 of uniformly sampled data.

    Interior points use the 5-point central stencil, the two samples at each
    end use one-sided 5-point stencils.
    """
    f = np.asarray(values, dtype=float)
    n = len(f)
    if n < 5:
        raise TooFewSamples(f"need at least 5 samples for 4th-order differences, got {n}")
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    return d


def path_velocity(traj: Trajectory, coords=None):
    """(xdot, xddot) by repeated 4th-order differences of stored positions."""
    h = traj.spacing
    c = traj.x if coords is None else coords
    v = fd_time_derivative(c, h)
    return v, fd_time_derivative(v, h)


def geodesic_residual(metric: MetricField, traj: Trajectory):
    """xddot^r + Gamma^r_{mn} xdot^m xdot^n per sample, shape (n, 4)."""
    if len(traj) < 5:
        raise TooFewSamples(f"geodesic residual needs >= 5 samples, got {len(traj)}")
    v, a = path_velocity(traj)
    out = np.empty_like(a)
    for i in range(len(traj)):
        G = christoffel(metric, traj.x[i])
        out[i] = a[i] + np.einsum("rmn,m,n->r", G, v[i], v[i])
    return out


def interval_accumulator(metric: MetricField, traj: Trajectory):
    """Signed squared interval sign(k) (int sqrt|g xdot xdot| dtau)^2 from tau0.

    Velocities come from differences of the stored path; with fewer than five
    samples the Hamiltonian velocity is used instead.
    """
    n = len(traj)
    if n >= 5:
        v, _ = path_velocity(traj)
    else:
        v = np.array([_rhs(traj.spec, np.concatenate((traj.x[i], traj.p[i])))[:DIM] for i in range(n)])
    integrand = np.array([math.sqrt(abs(float(v[i] @ metric.eval(traj.x[i]).g @ v[i]))) for i in range(n)])
    s = np.zeros(n)
    if n > 1:
        s[1:] = np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(traj.tau))
    return math.copysign(1.0, traj.k_value) * s**2


def interval_check(spec: HamiltonianSpec, traj: Trajectory) -> float:
    """max_i |s^2(tau_i) - (2k/m) tau_i^2| / max(|2k/m| tau_i^2, tiny).

    Only meaningful for the bare metric Hamiltonian.
    """
    if spec.kind != "metric":
        raise WrongKind(f"interval law holds for the bare metric Hamiltonian only, not {spec.kind!r}")
    s2 = interval_accumulator(spec.metric, traj)
    t = traj.tau - traj.tau[0]
    ref = 2.0 * traj.k_value / spec.m * t**2
    return float(np.max(np.abs(s2 - ref) / np.maximum(np.abs(ref), _TINY)))


def cumulative_quad4(values, h):
    """Running integral from sample 0 of uniformly sampled data, 4th order.

    Each interval integrates the cubic through its four nearest samples.
    """
    f = np.asarray(values, dtype=float)
    n = len(f)
    if n < 4:
        raise TooFewSamples(f"need at least 4 samples for cubic quadrature, got {n}")
    seg = np.empty((n - 1,) + f.shape[1:])
    seg[0] = 9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
    seg[1:-1] = -f[:-3] + 13.0 * f[1:-2] + 13.0 * f[2:-1] - f[3:]
    seg[-1] = f[-4] - 5.0 * f[-3] + 19.0 * f[-2] + 9.0 * f[-1]
    out = np.zeros_like(f)
    out[1:] = np.cumsum(seg * (h / 24.0), axis=0)
    return out
