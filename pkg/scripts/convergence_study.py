"""Step-size studies: RK4 order, finite-difference residual floor, current order, gauge lambda sweep.

    python3 scripts/convergence_study.py [--out out/convergence]

Writes one CSV per study and prints the fitted slopes.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from geodual.checks import current_convergence, log_slope, random_gauge_context
from geodual.gauge import full_norm_residual
from geodual.orbit import HamiltonianSpec, IntegratorOptions, PhaseState, geodesic_residual, integrate_orbit
from geodual.tensor import IsotropicSchwarzschild, Minkowski


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows([[repr(float(v)) for v in row] for row in rows])


def rk4_order(out):
    spec = HamiltonianSpec("metric", IsotropicSchwarzschild(1.0))
    s0 = PhaseState(np.array([0.0, 8.0, 0.0, 0.0]), np.array([-0.95, 0.0, 2.8, 0.0]))
    hs = [0.4, 0.2, 0.1, 0.05, 0.025]
    ends = [integrate_orbit(spec, s0, 20.0, IntegratorOptions(h=h)).x[-1] for h in hs]
    diffs = [float(np.max(np.abs(ends[i] - ends[i + 1]))) for i in range(len(hs) - 1)]
    write_csv(out / "rk4_order.csv", ["h", "self_difference"], zip(hs[:-1], diffs))
    print(f"RK4 order (curved orbit, successive differences): {log_slope(hs[:-1], diffs):.3f}")


def residual_floor(out):
    """Free-particle path residual: pure roundoff, growing like eps |x| / h^2."""
    rows = []
    for h in (1e-1, 3e-2, 1e-2, 3e-3, 1e-3):
        traj = integrate_orbit(HamiltonianSpec("metric", Minkowski()),
                               PhaseState(np.zeros(4), np.array([-1.0, 0.2, 0.1, 0.0])), 1.0, IntegratorOptions(h=h))
        rows.append((h, float(np.max(np.abs(geodesic_residual(Minkowski(), traj))))))
    write_csv(out / "residual_floor.csv", ["h", "free_particle_residual"], rows)
    print("free-particle residual floor: " + ", ".join(f"h={h:g}: {r:.1e}" for h, r in rows))


def current_order(out):
    rows = []
    for h in (0.1, 0.05, 0.025):
        rep = current_convergence(h=h)
        rows.append((h, rep["plane_wave_rel_error"][0], rep["plane_wave_order"]))
    write_csv(out / "current_order.csv", ["h", "plane_wave_rel_error", "order_to_half_h"], rows)
    print("current order under halving: " + ", ".join(f"h={h:g}: {o:.3f}" for h, _, o in rows))


def gauge_sweep(out, n=20):
    lams = np.logspace(-5, -1, 9)
    rng = np.random.default_rng(0)
    rows, slopes = [], []
    for i in range(n):
        ctx, x = random_gauge_context(rng)
        r = [full_norm_residual(ctx, x, lam) for lam in lams]
        slopes.append(log_slope(lams, r))
        rows.extend((i, lam, v) for lam, v in zip(lams, r))
    write_csv(out / "gauge_lambda_sweep.csv", ["context", "lambda", "norm_residual"], rows)
    print(f"norm residual exponent over {n} contexts: {min(slopes):.4f} .. {max(slopes):.4f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/convergence")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rk4_order(out)
    residual_floor(out)
    current_order(out)
    gauge_sweep(out)


if __name__ == "__main__":
    main()
