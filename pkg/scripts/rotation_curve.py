"""Circular-orbit speeds in the isotropic Schwarzschild field with logarithmic potentials of several strengths.

    python3 scripts/rotation_curve.py [--mass 1] [--amps 0 0.005 0.01 0.02] [--out out/rotation]

A log potential gives an asymptotically flat curve; amp = 0 is the Kepler fall-off.
The drift columns are the relative radial excursion of the integrated orbit.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from geodual.checks import rotation_curve
from geodual.fields import LogScalar
from geodual.tensor import IsotropicSchwarzschild


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mass", type=float, default=1.0)
    ap.add_argument("--amps", type=float, nargs="+", default=[0.0, 0.005, 0.01, 0.02])
    ap.add_argument("--soft", type=float, default=1.0)
    ap.add_argument("--radii", type=float, nargs="+", default=list(np.geomspace(4.0, 512.0, 8)))
    ap.add_argument("--tau-end", type=float, default=5.0)
    ap.add_argument("--out", default="out/rotation")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metric = IsotropicSchwarzschild(args.mass)
    path = out / "rotation_curves.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["amp", "r", "v", "drift"])
        for amp in args.amps:
            scalar = LogScalar(amp, args.soft) if amp != 0.0 else None
            rows = rotation_curve(metric, scalar, args.radii, tau_end=args.tau_end)
            key = "scalar" if scalar is not None else "metric"
            for row in rows:
                w.writerow([repr(amp), repr(row["r"]), repr(row[f"v_{key}"]), repr(row[f"drift_{key}"])])
            print(f"amp {amp:g}: " + " ".join(f"{row[f'v_{key}']:.4f}" for row in rows))
    print(f"radii: {' '.join(f'{r:.0f}' for r in args.radii)}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
