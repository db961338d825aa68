"""Run every shipped scenario through the CLI and compare exit codes with the expected ones.

    python3 scripts/run_all_checks.py [--out out/scenarios] [--jobs N] [--seed S]
"""

import argparse
import sys
import time
from pathlib import Path

from geodual.cli import main as cli_main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

# (config, command, expected exit code); failures 1 and 2 are negative controls
SCENARIOS = [
    ("free_particle", "orbit", 0),
    ("constant_force", "orbit", 0),
    ("dual_singularity", "orbit", 2),
    ("dual_zero", "dual-check", 0),
    ("dual_linear", "dual-check", 0),
    ("dual_schwarzschild", "dual-check", 0),
    ("dual_corrupt", "dual-check", 2),
    ("kk_sweep", "kk-check", 0),
    ("kk_plus_zero", "kk-check", 1),
    ("gauge_default", "gauge-check", 0),
    ("rotation_log", "rotation-demo", 0),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/scenarios")
    ap.add_argument("--jobs", default="1")
    ap.add_argument("--seed", default="0")
    args = ap.parse_args()
    bad = 0
    for name, cmd, expected in SCENARIOS:
        t0 = time.perf_counter()
        code = cli_main([cmd, "--config", str(CONFIGS / f"{name}.json"), "--out", args.out,
                         "--jobs", args.jobs, "--seed", args.seed])
        ok = code == expected
        bad += not ok
        print(f"{'ok  ' if ok else 'BAD '} {name:<20} {cmd:<14} exit {code} (expected {expected}) "
              f"{time.perf_counter() - t0:5.1f} s")
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
