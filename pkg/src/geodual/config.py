"""Scenario configuration: one JSON document per run.

Every section is a frozen dataclass. Loading is strict: unknown keys and
ill-typed values raise ConfigError with the dotted path of the field.
Builders turn validated sections into metric, scalar, vector and gauge
objects.
"""

from __future__ import annotations

import dataclasses
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .fields import (ConstantScalar, GaugeGenerator, LinearScalar, LogScalar, PlummerScalar,
                     ScalarField, VectorFieldU, antisym)
from .orbit import KINDS, HamiltonianSpec, IntegratorOptions, PhaseState
from .tensor import ConformallyFlat, ConstantMetric, IsotropicSchwarzschild, MetricField, Minkowski

Vec4 = tuple[float, float, float, float]
ZERO4 = (0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class MetricConfig:
    kind: str = "minkowski"  # minkowski | schwarzschild | conformal_flat | constant
    mass: float = 0.1
    a: Vec4 = ZERO4
    c: float = 0.0
    g: Optional[tuple[Vec4, Vec4, Vec4, Vec4]] = None


@dataclass(frozen=True)
class ScalarConfig:
    kind: str = "zero"  # zero | constant | linear | plummer | log
    c: float = 0.0
    a: Vec4 = ZERO4
    amp: float = 0.1
    soft: float = 1.0


@dataclass(frozen=True)
class VectorUConfig:
    kind: str = "rest"  # rest | constant | boost
    v: Vec4 = (-1.0, 0.0, 0.0, 0.0)
    chi0: float = 0.0
    chi_grad: Vec4 = ZERO4
    direction: tuple[float, float, float] = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class OmegaConfig:
    kind: str = "zero"  # zero | poly | sin
    # poly: list of antisymmetric coefficients, each as its six entries (01, 02, 03, 12, 13, 23)
    coeffs: tuple[tuple[float, ...], ...] = ()
    center: float = 0.0
    amp: tuple[float, ...] = (0.0,) * 6
    kappa: float = 1.0
    phase: float = 0.0


@dataclass(frozen=True)
class GaugeConfig:
    eps: float = 1.0
    b: Vec4 = (0.0, 1.0, 0.0, 0.0)
    omega: OmegaConfig = field(default_factory=OmegaConfig)


@dataclass(frozen=True)
class ParticleConfig:
    hamiltonian: str = "metric"
    m: float = 1.0
    x0: Vec4 = ZERO4
    p0: Vec4 = (-1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"  # rk4 | rk45
    h: float = 1e-3
    tau_end: float = 1.0
    rtol: float = 1e-10
    atol: float = 1e-10
    h_min: float = 1e-12
    sample_every: int = 1
    dual_guard: bool = False


@dataclass(frozen=True)
class KKConfig:
    # None: draw g55 uniformly from g55_range for every sample
    g55: Optional[float] = None
    branch: str = "minus"
    n_samples: int = 10000
    phi_range: tuple[float, float] = (-0.5, 0.5)
    g55_range: tuple[float, float] = (-0.4, 0.4)
    continuity_g55: tuple[float, ...] = (1e-3, 1e-4, 1e-5)


@dataclass(frozen=True)
class PsiConfig:
    kind: str = "plane_wave"  # plane_wave | gaussian
    q: Vec4 = (0.3, -1.0, 0.5, 2.0)
    amp: float = 1.0
    center: Vec4 = (0.4, 0.4, 0.4, 0.4)
    width: float = 0.3


@dataclass(frozen=True)
class GridConfig:
    n: int = 16
    h: float = 0.05
    M: float = 1.0
    origin: Vec4 = ZERO4
    psi: PsiConfig = field(default_factory=PsiConfig)
    psi_csv: Optional[str] = None


@dataclass(frozen=True)
class ChecksConfig:
    n_random: int = 1000
    n_points: int = 100
    lambdas: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    point_scale: float = 1.0


@dataclass(frozen=True)
class TolerancesConfig:
    dual_residual: float = 1e-5
    momentum: float = 1e-8
    reconstruction: float = 1e-10
    symmetry: float = 1e-7
    k_drift: float = 1e-8
    kk_rel: float = 1e-12
    kk_root: float = 1e-12
    norm: float = 1e-12
    exponent_band: float = 0.1
    commutator: float = 1e-13
    current_order: float = 1.9
    field_zero: float = 1e-12


@dataclass(frozen=True)
class RotationConfig:
    radii: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    energy: float = 1.0
    tau_end: float = 5.0


@dataclass(frozen=True)
class DebugConfig:
    corrupt_dual_factor: bool = False


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    prefix: str = ""


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    metric: MetricConfig = field(default_factory=MetricConfig)
    scalar: ScalarConfig = field(default_factory=ScalarConfig)
    vector_u: VectorUConfig = field(default_factory=VectorUConfig)
    gauge: GaugeConfig = field(default_factory=GaugeConfig)
    particle: ParticleConfig = field(default_factory=ParticleConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    kk: KKConfig = field(default_factory=KKConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    checks: ChecksConfig = field(default_factory=ChecksConfig)
    tolerances: TolerancesConfig = field(default_factory=TolerancesConfig)
    rotation: RotationConfig = field(default_factory=RotationConfig)
    debug: DebugConfig = field(default_factory=DebugConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


# ------------------------------------------------------------------ loading


def _coerce(tp, value, path):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(inner[0], value, path)
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigError(path, f"expected a list, got {value!r}")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(args[0], v, f"{path}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(path, f"expected {len(args)} entries, got {len(value)}")
        return tuple(_coerce(a, v, f"{path}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    raise TypeError(f"unsupported config type {tp!r}")


def _build(cls, data, path=""):
    if not isinstance(data, dict):
        raise ConfigError(path or "<root>", f"expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")
    kwargs = {}
    for name in names:
        if name in data:
            kwargs[name] = _coerce(hints[name], data[name], f"{path}.{name}" if path else name)
    return cls(**kwargs)


def _choice(path, value, allowed):
    if value not in allowed:
        raise ConfigError(path, f"{value!r} is not one of {', '.join(allowed)}")


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    _choice("metric.kind", cfg.metric.kind, ("minkowski", "schwarzschild", "conformal_flat", "constant"))
    if cfg.metric.kind == "constant" and cfg.metric.g is None:
        raise ConfigError("metric.g", "required for a constant metric")
    if cfg.metric.mass < 0:
        raise ConfigError("metric.mass", "must be non-negative")
    _choice("scalar.kind", cfg.scalar.kind, ("zero", "constant", "linear", "plummer", "log"))
    if cfg.scalar.kind in ("plummer", "log") and not cfg.scalar.soft > 0:
        raise ConfigError("scalar.soft", "must be positive")
    _choice("vector_u.kind", cfg.vector_u.kind, ("rest", "constant", "boost"))
    _choice("gauge.omega.kind", cfg.gauge.omega.kind, ("zero", "poly", "sin"))
    for i, c in enumerate(cfg.gauge.omega.coeffs):
        if len(c) != 6:
            raise ConfigError(f"gauge.omega.coeffs[{i}]", "needs six entries (01, 02, 03, 12, 13, 23)")
    if len(cfg.gauge.omega.amp) != 6:
        raise ConfigError("gauge.omega.amp", "needs six entries (01, 02, 03, 12, 13, 23)")
    if cfg.gauge.eps == 0.0:
        raise ConfigError("gauge.eps", "must be nonzero")
    _choice("particle.hamiltonian", cfg.particle.hamiltonian, KINDS)
    if not cfg.particle.m > 0:
        raise ConfigError("particle.m", "must be positive")
    _choice("integrator.method", cfg.integrator.method, ("rk4", "rk45"))
    if not cfg.integrator.h > 0:
        raise ConfigError("integrator.h", "must be positive")
    if not cfg.integrator.tau_end > 0:
        raise ConfigError("integrator.tau_end", "must be positive")
    if cfg.integrator.sample_every < 1:
        raise ConfigError("integrator.sample_every", "must be at least 1")
    _choice("kk.branch", cfg.kk.branch, ("minus", "plus"))
    if cfg.kk.n_samples < 1:
        raise ConfigError("kk.n_samples", "must be at least 1")
    _choice("grid.psi.kind", cfg.grid.psi.kind, ("plane_wave", "gaussian"))
    if cfg.grid.n < 5:
        raise ConfigError("grid.n", "must be at least 5 (two-site margin)")
    if not cfg.grid.h > 0:
        raise ConfigError("grid.h", "must be positive")
    if not cfg.grid.M > 0:
        raise ConfigError("grid.M", "must be positive")
    if cfg.checks.n_random < 1 or cfg.checks.n_points < 1:
        raise ConfigError("checks", "sample counts must be at least 1")
    if len(cfg.checks.lambdas) < 2 or any(not lam > 0 for lam in cfg.checks.lambdas):
        raise ConfigError("checks.lambdas", "need at least two positive values")
    if any(not r > 0 for r in cfg.rotation.radii):
        raise ConfigError("rotation.radii", "must be positive")
    return cfg


def parse_config(data) -> ScenarioConfig:
    return validate(_build(ScenarioConfig, data))


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(data)


def to_dict(cfg) -> dict:
    """Plain JSON-ready form, keys in declaration order."""
    return json.loads(json.dumps(dataclasses.asdict(cfg)))


# ------------------------------------------------------------------ builders


def build_metric(c: MetricConfig) -> MetricField:
    if c.kind == "minkowski":
        return Minkowski()
    if c.kind == "schwarzschild":
        return IsotropicSchwarzschild(c.mass)
    if c.kind == "conformal_flat":
        return ConformallyFlat.linear(c.a, c.c)
    return ConstantMetric(np.array(c.g, dtype=float))


def build_scalar(c: ScalarConfig) -> ScalarField:
    if c.kind == "zero":
        return ConstantScalar(0.0)
    if c.kind == "constant":
        return ConstantScalar(c.c)
    if c.kind == "linear":
        return LinearScalar(c.a, c.c)
    if c.kind == "plummer":
        return PlummerScalar(c.amp, c.soft)
    return LogScalar(c.amp, c.soft)


def build_vector_u(c: VectorUConfig, metric: MetricField) -> VectorFieldU:
    if c.kind == "rest":
        return VectorFieldU.rest(metric)
    if c.kind == "constant":
        return VectorFieldU.constant(metric, c.v)
    return VectorFieldU.boost(metric, c.chi0, c.chi_grad, c.direction)


def build_generator(c: GaugeConfig) -> GaugeGenerator:
    o = c.omega
    if o.kind == "zero":
        return GaugeGenerator.zero(c.b, c.eps)
    if o.kind == "poly":
        return GaugeGenerator.poly([antisym(*row) for row in o.coeffs], o.center, c.b, c.eps)
    return GaugeGenerator.sinusoid(antisym(*o.amp), o.kappa, o.phase, c.b, c.eps)


def build_spec(cfg: ScenarioConfig) -> HamiltonianSpec:
    metric = build_metric(cfg.metric)
    kind = cfg.particle.hamiltonian
    scalar = None if kind == "metric" else build_scalar(cfg.scalar)
    u = build_vector_u(cfg.vector_u, metric) if kind in ("gauge+scalar", "conformal-gauge") else None
    return HamiltonianSpec(kind=kind, metric=metric, m=cfg.particle.m, scalar=scalar, u=u,
                           eps=cfg.gauge.eps if u is not None else 0.0)


def build_initial(cfg: ScenarioConfig) -> PhaseState:
    return PhaseState(np.array(cfg.particle.x0, dtype=float), np.array(cfg.particle.p0, dtype=float), 0.0)


def build_integrator(c: IntegratorConfig) -> IntegratorOptions:
    return IntegratorOptions(method=c.method, h=c.h, rtol=c.rtol, atol=c.atol, h_min=c.h_min,
                             sample_every=c.sample_every, dual_guard=c.dual_guard)
