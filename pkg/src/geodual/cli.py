"""Command-line batch runner.

    geodual {orbit|dual-check|kk-check|gauge-check|rotation-demo} --config PATH
            [--out DIR] [--jobs N] [--seed S]

Exit codes: 0 pass, 1 usage or configuration error, 2 numerical failure
or failed check. Reports are JSON with a fixed key order and round-trip
float formatting, so a fixed config and seed give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import checks
from .config import (ScenarioConfig, build_generator, build_initial, build_integrator, build_metric,
                     build_scalar, build_spec, build_vector_u, load_config, to_dict)
from .errors import ConfigError, DivergentBranch, GeoDualError, NumericalFailure
from .gauge import GaugeContext
from .kk import solve_p5
from .lattice import WaveSample
from .orbit import integrate_orbit, interval_check
from .tensor import IsotropicSchwarzschild

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
COMMANDS = ("orbit", "dual-check", "kk-check", "gauge-check", "rotation-demo")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(report) -> str:
    return json.dumps(report, indent=2, default=_json_default) + "\n"


class Run:
    """Output location and naming for one invocation."""

    def __init__(self, cfg: ScenarioConfig, out: str | None, command: str):
        self.cfg = cfg
        self.dir = Path(out if out is not None else cfg.output.dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        stem = cfg.output.prefix or cfg.name
        self.stem = f"{stem}_{command.replace('-', '_')}"

    def path(self, suffix):
        return self.dir / f"{self.stem}{suffix}"

    def write_report(self, report):
        self.path(".json").write_text(dumps(report))


def _header(command, cfg, seed):
    return {"command": command, "scenario": cfg.name, "seed": seed, "config": to_dict(cfg)}


# ------------------------------------------------------------------ commands


def cmd_orbit(cfg: ScenarioConfig, run: Run, seed: int, jobs: int):
    spec = build_spec(cfg)
    s0 = build_initial(cfg)
    report = _header("orbit", cfg, seed)
    csv_path = run.path(".csv")
    try:
        traj = integrate_orbit(spec, s0, cfg.integrator.tau_end, build_integrator(cfg.integrator))
    except NumericalFailure as exc:
        partial = getattr(exc, "partial", None)
        if partial is not None:
            partial.to_csv(csv_path)
        report.update({"status": "failed", "error": type(exc).__name__, "message": str(exc),
                       "n_samples": len(partial) if partial is not None else 0,
                       "tau_reached": float(partial.tau[-1]) if partial is not None else 0.0})
        run.write_report(report)
        return EXIT_NUMERIC
    traj.to_csv(csv_path)
    report.update({"status": "ok", "hamiltonian": spec.kind, "k": traj.k_value, "K_drift": traj.k_drift(),
                   "n_samples": len(traj), "tau_end": float(traj.tau[-1])})
    if spec.kind == "metric":
        report["interval_check"] = interval_check(spec, traj)
    report["trajectory_csv"] = csv_path.name
    run.write_report(report)
    return EXIT_OK


def cmd_dual_check(cfg: ScenarioConfig, run: Run, seed: int, jobs: int):
    tol = cfg.tolerances
    report = _header("dual-check", cfg, seed)
    report["corrupt_dual_factor"] = cfg.debug.corrupt_dual_factor
    try:
        res = checks.dual_suite(build_metric(cfg.metric), build_scalar(cfg.scalar), cfg.particle.x0,
                                cfg.particle.p0, cfg.particle.m, cfg.integrator.tau_end,
                                build_integrator(cfg.integrator), cfg.debug.corrupt_dual_factor,
                                np.random.default_rng(seed), cfg.checks.n_points, cfg.checks.point_scale)
    except NumericalFailure as exc:
        report.update({"status": "failed", "error": type(exc).__name__, "message": str(exc)})
        run.write_report(report)
        return EXIT_NUMERIC
    report.update(res)
    verdicts = {
        "dual_residual": res["max_residual_dual"] <= tol.dual_residual,
        "momentum": res["max_momentum_mismatch"] <= tol.momentum,
        "reconstruction": res["max_force_reconstruction_error"] <= tol.reconstruction,
        "khat_drift": res["khat_drift"] <= tol.k_drift,
        "symmetry": res["symmetry_check"] <= tol.symmetry,
    }
    report["checks"] = verdicts
    report["status"] = "pass" if all(verdicts.values()) else "fail"
    run.write_report(report)
    return EXIT_OK if all(verdicts.values()) else EXIT_NUMERIC


def cmd_kk_check(cfg: ScenarioConfig, run: Run, seed: int, jobs: int):
    kk = cfg.kk
    tol = cfg.tolerances
    report = _header("kk-check", cfg, seed)
    if kk.g55 is not None:
        try:
            solve_p5(np.array([1.0, 0, 0, 0]), np.array([-1.0, 0, 0, 0]), 0.0, kk.g55, kk.branch)
        except DivergentBranch as exc:
            report.update({"status": "failed", "error": "DivergentBranch", "message": f"kk.g55: {exc}"})
            run.write_report(report)
            print(f"kk.g55: DivergentBranch: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    res = checks.kk_suite(seed, kk.n_samples, kk.branch, kk.g55, kk.g55_range, kk.phi_range,
                          kk.continuity_g55, cfg.particle.m, jobs)
    report.update(res)
    ok = res["max_rel_error"] <= tol.kk_rel and res["max_root_residual"] <= tol.kk_root
    if "continuity" in res:
        ok = ok and abs(res["continuity"]["contract_slope"] - 1.0) <= 0.1
    report["status"] = "pass" if ok else "fail"
    run.write_report(report)
    return EXIT_OK if ok else EXIT_NUMERIC


def _wave(cfg: ScenarioConfig) -> WaveSample:
    g = cfg.grid
    if g.psi_csv is not None:
        return WaveSample.from_csv(g.psi_csv, g.n, g.h, g.M, g.origin)
    if g.psi.kind == "plane_wave":
        return WaveSample.plane_wave(g.n, g.h, g.psi.q, g.psi.amp, g.M, g.origin)
    return WaveSample.gaussian(g.n, g.h, g.psi.center, g.psi.width, g.psi.q, g.psi.amp, g.M, g.origin)


def cmd_gauge_check(cfg: ScenarioConfig, run: Run, seed: int, jobs: int):
    tol = cfg.tolerances
    report = _header("gauge-check", cfg, seed)
    metric = build_metric(cfg.metric)
    ctx = GaugeContext(metric, build_vector_u(cfg.vector_u, metric), build_generator(cfg.gauge))
    w = _wave(cfg)
    current = {"q": cfg.grid.psi.q, "amp": cfg.grid.psi.amp} if cfg.grid.psi.kind == "plane_wave" else {}
    try:
        res = checks.gauge_suite(seed, ctx, w, cfg.checks.n_random, cfg.checks.lambdas, jobs=jobs, current=current)
    except NumericalFailure as exc:
        report.update({"status": "failed", "error": type(exc).__name__, "message": str(exc)})
        run.write_report(report)
        return EXIT_NUMERIC
    report.update(res)
    cur = res["current_tests"]
    fe = res["field_eq_residuals"]
    verdicts = {
        "norm": res["norm_residual_max"] <= tol.norm,
        "scaling": abs(res["scaling_exponent"] - 2.0) <= tol.exponent_band,
        "commutator": res["commutator_match_error"] <= tol.commutator,
        "constant_omega": res["constant_omega_commutator"] == 0.0,
        "current_order": cur["plane_wave_order"] >= tol.current_order,
        "current_bound": cur["plane_wave_rel_error"][0] <= cur["plane_wave_bound"],
        "real_psi": max(cur["real_psi_error"]) <= cur["plane_wave_bound"],
        "zero_residual": fe["zero_config_residual"] <= tol.field_zero,
        "omega2_residue": fe["omega2_o_fraction"] >= 1e-3,
    }
    report["checks"] = verdicts
    report["status"] = "pass" if all(verdicts.values()) else "fail"
    run.write_report(report)
    return EXIT_OK if all(verdicts.values()) else EXIT_NUMERIC


def cmd_rotation_demo(cfg: ScenarioConfig, run: Run, seed: int, jobs: int):
    if cfg.metric.kind != "schwarzschild":
        raise ConfigError("metric.kind", "rotation-demo needs the schwarzschild metric")
    metric = IsotropicSchwarzschild(cfg.metric.mass)
    scalar = None if cfg.scalar.kind == "zero" else build_scalar(cfg.scalar)
    rot = cfg.rotation
    report = _header("rotation-demo", cfg, seed)
    try:
        rows = checks.rotation_curve(metric, scalar, rot.radii, rot.energy, cfg.particle.m, rot.tau_end, cfg.integrator.h)
    except NumericalFailure as exc:
        report.update({"status": "failed", "error": type(exc).__name__, "message": str(exc)})
        run.write_report(report)
        return EXIT_NUMERIC
    csv_path = run.path(".csv")
    keys = ["r", "v_metric", "v_scalar", "drift_metric", "drift_scalar"]
    with open(csv_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(keys)
        for row in rows:
            wr.writerow([repr(float(row[k])) for k in keys])
    report.update({"status": "ok", "rows": rows, "curve_csv": csv_path.name})
    run.write_report(report)
    return EXIT_OK


HANDLERS = {
    "orbit": cmd_orbit,
    "dual-check": cmd_dual_check,
    "kk-check": cmd_kk_check,
    "gauge-check": cmd_gauge_check,
    "rotation-demo": cmd_rotation_demo,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="geodual", description="Run one verification scenario from a JSON config.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="scenario JSON file")
    ap.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for random sweeps")
    ap.add_argument("--seed", type=int, default=0, help="64-bit seed for every random draw")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.jobs < 1:
        print("--jobs: must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if not 0 <= args.seed < 2**64:
        print("--seed: must fit in 64 unsigned bits", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        run = Run(cfg, args.out, args.command)
        code = HANDLERS[args.command](cfg, run, args.seed, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GeoDualError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = "ok" if code == EXIT_OK else "failed"
    print(f"{args.command}: {status} -> {run.path('.json')}")
    return code


if __name__ == "__main__":
    sys.exit(main())
