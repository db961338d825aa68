"""Verification suites shared by the CLI, the scripts and the acceptance tests.

Each suite returns a plain dict with a fixed key order. Randomness comes
from numpy Generators seeded through SeedSequence, and work is split into
a fixed number of chunks, so the numbers do not depend on ``jobs``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .dual import (DualPair, dual_geodesic_residual, map_orbit_to_dual, momentum_mismatch,
                   reconstruct_acceleration, restricted_second_symmetry, scalar_force_acceleration)
from .errors import DegenerateK, DualSingularity, SingularMetric
from .fields import GaugeGenerator, ScalarField, VectorFieldU, antisym, normalize_u
from .gauge import (GaugeContext, assembled_commutator, full_norm_residual, nonabelian_commutator,
                    norm_residual, omega_norm)
from .kk import (FiveMomentum, discriminant, five_metric, kk_contract, kk_hamiltonian_direct,
                 p5_root_residual, solve_p5)
from .lattice import WaveSample, field_equation_terms, matter_current
from .orbit import HamiltonianSpec, IntegratorOptions, PhaseState, integrate_orbit
from .tensor import ETA, ConstantMetric, IsotropicSchwarzschild, MetricField, Minkowski, make_metric

N_CHUNKS = 16


def log_slope(xs, ys):
    """Least-squares slope of log y against log x."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(ys <= 0):
        return float("nan")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _chunks(n, n_chunks=N_CHUNKS):
    n_chunks = max(1, min(n, n_chunks))
    base, extra = divmod(n, n_chunks)
    return [base + (i < extra) for i in range(n_chunks)]


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


# ------------------------------------------------------------------ random draws


def random_metric(rng, spread=0.1):
    """Lorentzian metric A^T eta A with A = I + spread * N(0, 1)."""
    A = np.eye(4) + spread * rng.normal(size=(4, 4))
    return make_metric(A.T @ ETA @ A)


def orthonormal_frame(g):
    """L with g^{-1} = L eta L^T, the timelike column first."""
    lam, Q = np.linalg.eigh(g.inv)
    order = np.argsort(lam)  # the single negative eigenvalue first
    return Q[:, order] * np.sqrt(np.abs(lam[order]))


def random_unit_u(rng, g, max_rapidity=2.0):
    """Unit timelike covector with rapidity uniform in [0, max_rapidity] relative to g's frame."""
    chi = rng.uniform(0.0, max_rapidity)
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    w = np.concatenate(([-np.cosh(chi)], np.sinh(chi) * n))
    L = orthonormal_frame(g)
    return normalize_u(g, np.linalg.solve(L.T, w))


def random_antisym(rng, scale=1.0):
    return antisym(*(scale * rng.normal(size=6)))


def random_gauge_context(rng):
    """Constant random metric and U, cubic omega(s), random b and eps; returns (ctx, x)."""
    m = random_metric(rng)
    metric = ConstantMetric(m.g)
    u = random_unit_u(rng, m)
    while True:
        b = rng.normal(size=4)
        if np.linalg.norm(u * float(u @ m.inv @ b) + b) > 1e-3 * np.linalg.norm(b):
            break
    gen = GaugeGenerator.poly([random_antisym(rng) for _ in range(3)], center=float(rng.normal()),
                              b=b, eps=float(rng.uniform(0.2, 2.0)))
    return GaugeContext(metric, VectorFieldU.constant(metric, u), gen), rng.normal(size=4)


# ------------------------------------------------------------------ dual suite


def dual_suite(metric: MetricField, scalar: ScalarField, x0, p0, m=1.0, tau_end=1.0,
               opts: IntegratorOptions = IntegratorOptions(), corrupt=False, rng=None,
               n_points=100, point_scale=1.0):
    """Conformal-dual invariants along one orbit of the scalar-potential Hamiltonian."""
    rng = np.random.default_rng(0) if rng is None else rng
    spec = HamiltonianSpec("metric+scalar", metric, m=m, scalar=scalar)
    traj = integrate_orbit(spec, PhaseState(np.asarray(x0, float), np.asarray(p0, float)), tau_end, opts)
    k = traj.k_value
    pair = DualPair(metric, k, scalar, corrupt=corrupt)
    ytraj = map_orbit_to_dual(pair, traj)
    res = dual_geodesic_residual(pair, ytraj)
    mom = momentum_mismatch(pair, traj, ytraj, m)
    recon = 0.0
    for x, p in zip(traj.x, traj.p):
        xdot = metric.eval(x).inv @ p / m
        a_ref = scalar_force_acceleration(metric, scalar, x, xdot, m)
        recon = max(recon, float(np.max(np.abs(reconstruct_acceleration(pair, x, xdot) - a_ref))))
    khat = float(np.max(np.abs(ytraj.K - k)) / abs(k))
    sym, skipped = 0.0, 0
    for _ in range(n_points):
        x = np.asarray(x0, float) + point_scale * rng.normal(size=4)
        try:
            sym = max(sym, restricted_second_symmetry(pair, x))
        except (DualSingularity, SingularMetric):
            skipped += 1
    return {
        "k": k,
        "n_samples": len(traj),
        "K_drift": traj.k_drift(),
        "max_residual_dual": float(np.max(np.abs(res))),
        "max_momentum_mismatch": mom,
        "max_force_reconstruction_error": recon,
        "khat_drift": khat,
        "symmetry_check": sym,
        "symmetry_points": n_points - skipped,
    }


# ------------------------------------------------------------------ KK suite


def _kk_chunk(task):
    seed, n, branch, g55, g55_range, phi_range, m = task
    rng = np.random.default_rng(seed)
    worst, root, violations, valid = 0.0, 0.0, 0, 0
    for _ in range(n):
        g = random_metric(rng)
        uc = g.inv @ random_unit_u(rng, g)
        p = rng.normal(size=4)
        phi = float(rng.uniform(*phi_range))
        gv = float(rng.uniform(*g55_range)) if g55 is None else g55
        if discriminant(phi, gv) < 0.0:
            violations += 1
            continue
        valid += 1
        p5 = solve_p5(uc, p, phi, gv, branch)
        direct = kk_hamiltonian_direct(g, uc, phi, p, m)
        contract = kk_contract(five_metric(g, uc, phi, gv), FiveMomentum(p, p5), m)
        worst = max(worst, abs(contract - direct) / abs(direct))
        root = max(root, abs(p5_root_residual(uc, p, phi, gv, p5)))
    return worst, root, violations, valid


def kk_continuity(seed, g55_values=(1e-3, 1e-4, 1e-5), m=1.0):
    """Frozen g55 = 0 minus-branch p5 against the direct value as g55 -> 0."""
    rng = np.random.default_rng(seed)
    g = random_metric(rng)
    uc = g.inv @ random_unit_u(rng, g)
    p = rng.normal(size=4)
    phi = float(rng.uniform(0.1, 0.5))
    p5_0 = solve_p5(uc, p, phi, 0.0, "minus")
    direct = kk_hamiltonian_direct(g, uc, phi, p, m)
    diffs, p5_gaps = [], []
    for gv in g55_values:
        diffs.append(abs(kk_contract(five_metric(g, uc, phi, gv), FiveMomentum(p, p5_0), m) - direct))
        p5_gaps.append(abs(float(solve_p5(uc, p, phi, gv, "minus") - p5_0)))
    return {
        "g55": list(g55_values),
        "contract_gap": [float(d) for d in diffs],
        "contract_slope": log_slope(g55_values, diffs),
        "p5_gap": p5_gaps,
        "p5_slope": log_slope(g55_values, p5_gaps),
    }


def kk_suite(seed, n_samples=10000, branch="minus", g55=None, g55_range=(-0.4, 0.4),
             phi_range=(-0.5, 0.5), continuity_g55=(1e-3, 1e-4, 1e-5), m=1.0, jobs=1):
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(N_CHUNKS + 1)
    sizes = _chunks(n_samples)
    tasks = [(children[i], n, branch, g55, tuple(g55_range), tuple(phi_range), m) for i, n in enumerate(sizes)]
    parts = _map(_kk_chunk, tasks, jobs)
    report = {
        "branch": branch,
        "g55": g55 if g55 is not None else list(g55_range),
        "n_samples": n_samples,
        "n_valid": int(sum(p[3] for p in parts)),
        "max_rel_error": float(max(p[0] for p in parts)),
        "max_root_residual": float(max(p[1] for p in parts)),
        "discriminant_violations": int(sum(p[2] for p in parts)),
    }
    if branch == "minus":
        report["continuity"] = kk_continuity(children[-1], continuity_g55, m)
    return report


# ------------------------------------------------------------------ gauge suite


def _gauge_chunk(task):
    seed, n, lambdas = task
    rng = np.random.default_rng(seed)
    norm, comm, exps = 0.0, 0.0, []
    for _ in range(n):
        ctx, x = random_gauge_context(rng)
        try:
            norm = max(norm, norm_residual(ctx, x) / omega_norm(ctx, x))
            R = nonabelian_commutator(ctx, x)
            comm = max(comm, float(np.max(np.abs(assembled_commutator(ctx, x) - R))) / max(1.0, float(np.max(np.abs(R)))))
            exps.append(log_slope(lambdas, [full_norm_residual(ctx, x, lam) for lam in lambdas]))
        except DegenerateK:
            continue
    return norm, comm, exps


def constant_omega_commutator(seed):
    """max |[U', U']| for omega constant in s (omega' = 0)."""
    rng = np.random.default_rng(seed)
    ctx, x = random_gauge_context(rng)
    gen = GaugeGenerator.poly([random_antisym(rng)], b=ctx.gen.b, eps=ctx.gen.eps)
    return float(np.max(np.abs(nonabelian_commutator(replace(ctx, gen=gen), x))))


def current_convergence(eps=0.8, M=2.0, q=(0.3, -1.0, 0.5, 2.0), amp=1.0, n=16, h=0.05,
                        u_field: VectorFieldU | None = None, metric: MetricField | None = None):
    """Plane-wave and real-psi current errors at h and h/2 on an n^4 grid."""
    metric = Minkowski() if metric is None else metric
    q = np.asarray(q, dtype=float)
    zero_u = GaugeContext(metric, None, GaugeGenerator.zero(eps=eps))
    u_field = VectorFieldU.boost(metric, 0.2, (0.0, 0.3, -0.2, 0.1), (0.0, 1.0, 0.0)) if u_field is None else u_field
    with_u = GaugeContext(metric, u_field, GaugeGenerator.zero(eps=eps))
    exact = eps / M * q * abs(amp) ** 2
    pw, real = [], []
    for hh in (h, h / 2.0):
        w = WaveSample.plane_wave(n, hh, q, amp, M)
        site = w.center_site()
        pw.append(float(np.max(np.abs(matter_current(w, zero_u, site) - exact)) / np.max(np.abs(exact))))
        g = WaveSample.gaussian(n, hh, center=w.coords(site) + 0.1, width=0.3, M=M)
        ref = -(eps**2) / M * u_field.u_co(g.coords(site)) * abs(g.psi[site]) ** 2
        real.append(float(np.max(np.abs(matter_current(g, with_u, site) - ref))))
    bound = float(np.max(np.abs(q)) * h) ** 2
    return {
        "h": [h, h / 2.0],
        "plane_wave_rel_error": pw,
        "plane_wave_order": float(np.log2(pw[0] / pw[1])) if pw[1] > 0 else float("inf"),
        "plane_wave_bound": bound,
        "real_psi_error": real,
    }


def omega2_only_context(metric, x_site, eps, A=None, b=(0.0, 1.0, 0.0, 0.0)):
    """U with a spatial profile and omega = (s - s0)^2 A / 2, centered so omega = omega' = 0 at x_site."""
    A = antisym(1.0, 0.5, -0.3, 0.2, 0.7, -1.0) if A is None else A
    u = VectorFieldU.boost(metric, 0.2, (0.0, 0.3, -0.2, 0.1), (0.0, 1.0, 0.0))
    base = GaugeContext(metric, u, GaugeGenerator.zero(b=b, eps=eps))
    lg = base.local(x_site)
    s0 = float(lg.k @ lg.x)
    z = np.zeros((4, 4))
    return GaugeContext(metric, u, GaugeGenerator.poly([z, z, 0.5 * A], center=s0, b=b, eps=eps))


def _norms(terms):
    return {
        "divergence": float(np.linalg.norm(terms.divergence)),
        "current": float(np.linalg.norm(terms.current)),
        "o_term": float(np.linalg.norm(terms.o_term)),
        "residual": float(np.linalg.norm(terms.residual)),
    }


def field_equation_suite(ctx: GaugeContext, w: WaveSample, o_coupling="eps"):
    site = w.center_site()
    zero_ctx = GaugeContext(Minkowski(), VectorFieldU.rest(Minkowski()), GaugeGenerator.zero())
    zero_w = WaveSample(np.zeros(w.shape), w.h, w.M, w.origin)
    zero = field_equation_terms(zero_ctx, zero_w, site, o_coupling)
    configured = field_equation_terms(ctx, w, site, o_coupling)
    octx = omega2_only_context(Minkowski(), w.coords(site), ctx.gen.eps, b=ctx.gen.b)
    o2 = field_equation_terms(octx, w, site, o_coupling)
    n2 = _norms(o2)
    return {
        "zero_config_residual": float(np.max(np.abs(zero.residual))),
        "configured": _norms(configured),
        "omega2_only": n2,
        "omega2_o_fraction": n2["o_term"] / n2["residual"] if n2["residual"] > 0 else 0.0,
    }


def gauge_suite(seed, ctx: GaugeContext, w: WaveSample, n_random=1000, lambdas=(1e-2, 1e-3, 1e-4),
                x0=None, jobs=1, o_coupling="eps", current=None):
    """Gauge-sector invariants; ``current`` holds extra keyword arguments for current_convergence."""
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(N_CHUNKS + 1)
    tasks = [(children[i], n, tuple(lambdas)) for i, n in enumerate(_chunks(n_random))]
    parts = _map(_gauge_chunk, tasks, jobs)
    exps = [e for p in parts for e in p[2]]
    x0 = w.coords(w.center_site()) if x0 is None else np.asarray(x0, float)
    cfg_exp = None
    if omega_norm(ctx, x0) > 0:
        cfg_exp = log_slope(lambdas, [full_norm_residual(ctx, x0, lam) for lam in lambdas])
        exps.append(cfg_exp)
    worst_exp = max(exps, key=lambda e: abs(e - 2.0)) if exps else float("nan")
    q = current_convergence(**{"eps": ctx.gen.eps, "M": w.M, "n": w.shape[0], "h": w.h, **(current or {})})
    return {
        "n_contexts": n_random,
        "norm_residual_max": float(max(p[0] for p in parts)),
        "scaling_exponent": float(worst_exp),
        "scaling_exponent_configured": cfg_exp,
        "commutator_match_error": float(max(p[1] for p in parts)),
        "commutator_configured": [[float(v) for v in row] for row in nonabelian_commutator(ctx, x0)],
        "constant_omega_commutator": constant_omega_commutator(children[-1]),
        "current_tests": q,
        "field_eq_residuals": field_equation_suite(ctx, w, o_coupling),
    }


# ------------------------------------------------------------------ rotation demo


def circular_orbit(metric: IsotropicSchwarzschild, scalar: ScalarField | None, r, energy=1.0, m=1.0):
    """Angular momentum L^2 and locally measured speed of a circular orbit at isotropic radius r.

    From dK/dr = 0 at p_r = 0 in the equatorial plane with p_t = -E:
    L^2 (2/(r^3 B) + B'/(r^2 B^2)) = E^2 A'/A^2 + 2m Phi'(r).
    Returns (L2, v) with v = NaN where no circular orbit exists.
    """
    A, B, dA, dB = metric.profile(r)
    dphi = 0.0 if scalar is None else float(scalar.grad(np.array([0.0, r, 0.0, 0.0]))[1])
    L2 = (energy**2 * dA / A**2 + 2.0 * m * dphi) / (2.0 / (r**3 * B) + dB / (r**2 * B**2))
    if not L2 > 0:
        return float(L2), float("nan")
    v = np.sqrt(L2) * np.sqrt(A) / (r * np.sqrt(B) * energy)
    return float(L2), float(v)


def rotation_curve(metric: IsotropicSchwarzschild, scalar: ScalarField | None, radii, energy=1.0, m=1.0,
                   tau_end=5.0, h=1e-2):
    """Circular speeds with and without Phi, plus the radial drift of the integrated orbits."""
    rows = []
    for r in radii:
        row = {"r": float(r)}
        for label, phi in (("metric", None), ("scalar", scalar)):
            L2, v = circular_orbit(metric, phi, r, energy, m)
            drift = float("nan")
            if np.isfinite(v):
                kind = "metric" if phi is None else "metric+scalar"
                spec = HamiltonianSpec(kind, metric, m=m, scalar=phi)
                s0 = PhaseState(np.array([0.0, r, 0.0, 0.0]), np.array([-energy, 0.0, np.sqrt(L2) / r, 0.0]))
                traj = integrate_orbit(spec, s0, tau_end, IntegratorOptions(h=h))
                rr = np.linalg.norm(traj.x[:, 1:], axis=1)
                drift = float(np.max(np.abs(rr - r)) / r)
            row[f"v_{label}"] = v
            row[f"drift_{label}"] = drift
        rows.append(row)
    return rows
