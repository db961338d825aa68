import csv
import json
from pathlib import Path

import numpy as np
import pytest

from geodual.cli import main
from geodual.config import (ScenarioConfig, build_generator, build_metric, build_scalar, build_spec, load_config,
                            parse_config, to_dict)
from geodual.errors import ConfigError
from geodual.orbit import Trajectory
from geodual.tensor import ETA, ConformallyFlat, IsotropicSchwarzschild

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(tmp_path, command, cfg, *extra):
    out = tmp_path / "out"
    code = main([command, "--config", cfg, "--out", str(out), *extra])
    return code, out


# ---------------------------------------------------------------- parsing


def test_defaults_parse():
    cfg = parse_config({})
    assert isinstance(cfg, ScenarioConfig)
    assert cfg.kk.branch == "minus" and cfg.grid.n == 16 and cfg.grid.h == 0.05


@pytest.mark.parametrize("data,path", [
    ({"bogus": 1}, "bogus"),
    ({"metric": {"kind": "minkowski", "mas": 1.0}}, "metric.mas"),
    ({"gauge": {"omega": {"kind": "sin", "kapa": 1.0}}}, "gauge.omega.kapa"),
])
def test_unknown_keys_are_errors(data, path):
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.path == path
    assert str(info.value).startswith(path + ":")


@pytest.mark.parametrize("data,path", [
    ({"particle": {"m": "one"}}, "particle.m"),
    ({"particle": {"x0": [0, 0, 0]}}, "particle.x0"),
    ({"integrator": {"sample_every": 1.5}}, "integrator.sample_every"),
    ({"debug": {"corrupt_dual_factor": 1}}, "debug.corrupt_dual_factor"),
    ({"metric": {"kind": "ads"}}, "metric.kind"),
    ({"kk": {"branch": "both"}}, "kk.branch"),
    ({"particle": {"m": 0.0}}, "particle.m"),
    ({"gauge": {"omega": {"kind": "poly", "coeffs": [[1, 2, 3]]}}}, "gauge.omega.coeffs[0]"),
    ({"metric": {"kind": "constant"}}, "metric.g"),
    ({"grid": {"n": 4}}, "grid.n"),
    ({"checks": {"lambdas": [0.1]}}, "checks.lambdas"),
])
def test_bad_values_name_the_field(data, path):
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.path == path


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)


def test_to_dict_roundtrip():
    cfg = load_config(CONFIGS / "gauge_default.json")
    assert parse_config(to_dict(cfg)) == cfg


def test_builders():
    assert isinstance(build_metric(parse_config({"metric": {"kind": "schwarzschild", "mass": 0.5}}).metric),
                      IsotropicSchwarzschild)
    assert isinstance(build_metric(parse_config({"metric": {"kind": "conformal_flat", "a": [0, 0.1, 0, 0]}}).metric),
                      ConformallyFlat)
    g = build_metric(parse_config({"metric": {"kind": "constant", "g": ETA.tolist()}}).metric)
    assert np.array_equal(g.eval(np.zeros(4)).inv, ETA)
    phi = build_scalar(parse_config({"scalar": {"kind": "linear", "a": [0, 2.0, 0, 0], "c": 1.0}}).scalar)
    assert phi.value(np.array([0, 1.0, 0, 0])) == 3.0
    gen = build_generator(parse_config({"gauge": {"omega": {"kind": "poly", "coeffs": [[1, 0, 0, 0, 0, 0]]}}}).gauge)
    assert gen.omega(5.0)[0, 1] == 1.0 and gen.omega(5.0)[1, 0] == -1.0
    spec = build_spec(parse_config({"particle": {"hamiltonian": "gauge+scalar"}, "gauge": {"eps": 0.5}}))
    assert spec.kind == "gauge+scalar" and spec.eps == 0.5 and spec.u is not None


# ---------------------------------------------------------------- CLI


def test_usage_errors(tmp_path, capsys):
    assert main(["fly", "--config", "x"]) == 1
    assert main(["orbit"]) == 1
    cfg = write(tmp_path, {})
    assert main(["orbit", "--config", cfg, "--jobs", "0"]) == 1
    assert main(["orbit", "--config", cfg, "--seed", "-1"]) == 1


def test_unknown_key_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "orbit", write(tmp_path, {"particle": {"p_0": [1, 0, 0, 0]}}))
    assert code == 1
    assert "particle.p_0" in capsys.readouterr().err


def test_orbit_free_particle(tmp_path):
    code, out = run(tmp_path, "orbit", str(CONFIGS / "free_particle.json"))
    assert code == 0
    report = json.loads((out / "free_particle_orbit.json").read_text())
    assert report["status"] == "ok" and report["K_drift"] <= 1e-12 and report["interval_check"] <= 1e-8
    traj = Trajectory.from_csv(out / report["trajectory_csv"])
    cfg = load_config(CONFIGS / "free_particle.json")
    p = np.array(cfg.particle.p0)
    exact = np.array(cfg.particle.x0) + np.outer(traj.tau, ETA @ p / cfg.particle.m)
    assert np.max(np.abs(traj.x - exact)) <= 1e-10


def test_orbit_constant_force(tmp_path):
    code, out = run(tmp_path, "orbit", str(CONFIGS / "constant_force.json"))
    assert code == 0
    cfg = load_config(CONFIGS / "constant_force.json")
    traj = Trajectory.from_csv(out / "constant_force_orbit.csv")
    a = np.array(cfg.scalar.a)
    p_exact = np.array(cfg.particle.p0) - np.outer(traj.tau, a)
    assert np.max(np.abs(traj.p - p_exact)) <= 1e-10
    assert "interval_check" not in json.loads((out / "constant_force_orbit.json").read_text())


def test_orbit_dual_singularity(tmp_path):
    code, out = run(tmp_path, "orbit", str(CONFIGS / "dual_singularity.json"))
    assert code == 2
    report = json.loads((out / "dual_singularity_orbit.json").read_text())
    assert report["error"] == "DualSingularity"
    with open(out / "dual_singularity_orbit.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) - 1 == report["n_samples"] > 1


def test_dual_check_zero_potential(tmp_path):
    code, out = run(tmp_path, "dual-check", str(CONFIGS / "dual_zero.json"))
    assert code == 0
    report = json.loads((out / "dual_zero_dual_check.json").read_text())
    for key in ("max_residual_dual", "max_momentum_mismatch", "max_force_reconstruction_error", "symmetry_check"):
        assert report[key] <= 1e-10


def test_dual_check_linear_and_corrupted(tmp_path):
    code, out = run(tmp_path, "dual-check", str(CONFIGS / "dual_linear.json"))
    assert code == 0
    good = json.loads((out / "dual_linear_dual_check.json").read_text())
    code, out = run(tmp_path, "dual-check", str(CONFIGS / "dual_corrupt.json"))
    assert code == 2
    bad = json.loads((out / "dual_corrupt_dual_check.json").read_text())
    assert bad["status"] == "fail" and not bad["checks"]["dual_residual"]
    assert bad["max_residual_dual"] > 1e3 * good["max_residual_dual"]


def test_kk_check_default_sweep(tmp_path):
    code, out = run(tmp_path, "kk-check", str(CONFIGS / "kk_sweep.json"))
    assert code == 0
    report = json.loads((out / "kk_sweep_kk_check.json").read_text())
    assert report["max_rel_error"] <= 1e-12 and report["n_samples"] == 10000


def test_kk_check_violations_and_plus_zero(tmp_path):
    cfg = write(tmp_path, {"name": "viol", "kk": {"g55": 3.0, "n_samples": 200, "phi_range": [0.0, 0.5]}})
    code, out = run(tmp_path, "kk-check", cfg)
    assert code == 0
    assert json.loads((out / "viol_kk_check.json").read_text())["discriminant_violations"] > 0
    code, _ = run(tmp_path, "kk-check", str(CONFIGS / "kk_plus_zero.json"))
    assert code == 1


def test_gauge_check_zero_omega(tmp_path):
    cfg = write(tmp_path, {"name": "flat", "vector_u": {"kind": "boost", "chi0": 0.2, "chi_grad": [0, 0.3, -0.2, 0.1],
                                                          "direction": [0, 1, 0]},
                           "gauge": {"eps": 0.8}, "grid": {"n": 8, "M": 2.0}, "checks": {"n_random": 20}})
    code, out = run(tmp_path, "gauge-check", cfg)
    report = json.loads((out / "flat_gauge_check.json").read_text())
    assert code == 0
    assert all(v == 0.0 for row in report["commutator_configured"] for v in row)
    assert report["field_eq_residuals"]["configured"]["o_term"] == 0.0


def test_rotation_demo(tmp_path):
    code, out = run(tmp_path, "rotation-demo", str(CONFIGS / "rotation_log.json"))
    assert code == 0
    with open(out / "rotation_log_rotation_demo.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["r", "v_metric", "v_scalar", "drift_metric", "drift_scalar"]
    v_m = [float(r["v_metric"]) for r in rows]
    v_s = [float(r["v_scalar"]) for r in rows]
    # the log potential adds speed and keeps the outer curve flatter than Kepler
    assert all(s > m for s, m in zip(v_s, v_m))
    assert v_s[-1] / v_s[-2] > v_m[-1] / v_m[-2]
    cfg = write(tmp_path, {"name": "flat"})
    assert run(tmp_path, "rotation-demo", cfg)[0] == 1


def test_determinism_across_runs_and_jobs(tmp_path):
    cfg = write(tmp_path, {"name": "det", "kk": {"n_samples": 3000, "branch": "plus"}})
    outs = []
    for jobs in ("1", "1", "4"):
        code, out = run(tmp_path / jobs / str(len(outs)), "kk-check", cfg, "--seed", "1234", "--jobs", jobs)
        assert code == 0
        outs.append((out / "det_kk_check.json").read_bytes())
    assert outs[0] == outs[1] == outs[2]
    code, out = run(tmp_path / "other", "kk-check", cfg, "--seed", "1235")
    assert (out / "det_kk_check.json").read_bytes() != outs[0]
