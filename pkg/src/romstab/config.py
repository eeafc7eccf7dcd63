"""Experiment configuration: nested dataclasses loaded from YAML."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError


@dataclass
class PhysicsConfig:
    reynolds: float = 1000.0
    kappa: float = 5e-4
    c: float = 1e-2
    forcing: float = 0.0  # constant source in the temperature equation
    w_left: float = 0.0
    w_right: float = 0.0
    T_left: float = 0.0
    T_right: float = 0.0

    def validate(self, prefix="physics"):
        if not self.reynolds > 0:
            raise ConfigError(f"{prefix}.reynolds", f"must be positive, got {self.reynolds}")
        if not self.c > 0:
            raise ConfigError(f"{prefix}.c", f"must be positive, got {self.c}")


@dataclass
class GridConfig:
    n_elements: int = 100

    def validate(self, prefix="grid"):
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise ConfigError(f"{prefix}.n_elements", f"must be an integer >= 2, got {self.n_elements}")


@dataclass
class InitialConfig:
    kind: str = "step"  # step | zero | custom
    w: Optional[list] = None
    T: Optional[list] = None

    def validate(self, prefix="initial"):
        if self.kind not in ("step", "zero", "custom"):
            raise ConfigError(f"{prefix}.kind", f"must be step, zero or custom, got {self.kind!r}")
        if self.kind == "custom" and (self.w is None or self.T is None):
            raise ConfigError(f"{prefix}.w", "custom initial condition needs w and T samples")


@dataclass
class TimeConfig:
    t_f: float = 1.0
    snapshots: int = 101
    rtol: float = 1e-6
    atol: float = 1e-8

    def validate(self, prefix="time"):
        if not self.t_f > 0:
            raise ConfigError(f"{prefix}.t_f", f"must be positive, got {self.t_f}")
        if self.snapshots < 2:
            raise ConfigError(f"{prefix}.snapshots", f"need at least 2, got {self.snapshots}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ConfigError(f"{prefix}.rtol", "tolerances must be positive")


@dataclass
class PodConfig:
    r_w: int = 10
    r_T: int = 10

    def validate(self, prefix="pod"):
        for name in ("r_w", "r_T"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{prefix}.{name}", "must be >= 1")


@dataclass
class ClosureConfig:
    kind: str = "H"
    mu_e: float = 0.0
    mu_nl: float = 0.0
    m: Optional[int] = None
    alphas: Optional[list] = None
    scope: str = "velocity"

    def to_spec(self):
        from .closures import ClosureSpec

        return ClosureSpec(self.kind, self.mu_e, self.mu_nl, self.m, self.alphas, self.scope)

    def validate(self, prefix="closure"):
        try:
            self.to_spec()
        except ValueError as exc:
            raise ConfigError(f"{prefix}.kind", str(exc)) from exc


@dataclass
class EsConfig:
    a: list = field(default_factory=lambda: [3e-4])
    omega: list = field(default_factory=lambda: [15.0])
    max_iters: int = 500
    clamp: bool = True
    literal_dual_phase: bool = False
    mu_hat0: Optional[list] = None

    def to_params(self, t_f: float):
        from .es import EsParams

        return EsParams(tuple(self.a), tuple(self.omega), t_f, self.max_iters, self.literal_dual_phase)

    def validate(self, prefix="es"):
        if len(self.a) != len(self.omega) or len(self.a) not in (1, 2):
            raise ConfigError(f"{prefix}.a", "need one or two channels with matching a and omega")
        if any(v < 0 for v in self.a):
            raise ConfigError(f"{prefix}.a", "dither amplitudes must be >= 0")
        if any(not v > 0 for v in self.omega):
            raise ConfigError(f"{prefix}.omega", "dither frequencies must be positive")
        if len(set(self.omega)) != len(self.omega):
            raise ConfigError(f"{prefix}.omega", "channel frequencies must differ")
        if self.max_iters < 0:
            raise ConfigError(f"{prefix}.max_iters", "must be >= 0")


@dataclass
class CostConfig:
    Q1: float = 1.0
    Q2: float = 1.0

    def validate(self, prefix="cost"):
        if self.Q1 < 0 or self.Q2 < 0 or (self.Q1 == 0 and self.Q2 == 0):
            raise ConfigError(f"{prefix}.Q1", "weights must be >= 0 and not both zero")


@dataclass
class ExperimentConfig:
    name: str = "test1"
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    pod: PodConfig = field(default_factory=PodConfig)
    closure: ClosureConfig = field(default_factory=ClosureConfig)
    es: EsConfig = field(default_factory=EsConfig)
    cost: CostConfig = field(default_factory=CostConfig)
    out: str = "runs/test1"
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        for f in dataclasses.fields(self):
            sub = getattr(self, f.name)
            if hasattr(sub, "validate"):
                sub.validate(f.name)
        if len(self.es.a) == 2 and not self.closure.to_spec().has_nev:
            raise ConfigError("closure.kind", "two ES channels need a closure with a NEV term")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _build(cls, data: Any, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(prefix or "<root>", f"expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{prefix}.{key}" if prefix else key, "unknown key")
        ftype = known[key].default_factory if known[key].default_factory is not dataclasses.MISSING else None
        if ftype is not None and dataclasses.is_dataclass(ftype) and isinstance(ftype, type):
            kwargs[key] = _build(ftype, value, f"{prefix}.{key}" if prefix else key)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def from_dict(data: dict) -> ExperimentConfig:
    try:
        cfg = _build(ExperimentConfig, data or {}, "")
    except TypeError as exc:
        raise ConfigError("<root>", str(exc)) from exc
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    return from_dict(yaml.safe_load(text) or {})


def dump_config(cfg: ExperimentConfig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))
    return path


def preset(name: str) -> ExperimentConfig:
    """Built-in experiments: ``test1`` (H closure, one ES channel) and ``test2`` (H+NEV, two)."""
    if name == "test1":
        return ExperimentConfig(name="test1", out="runs/test1").validate()
    if name == "test2":
        return ExperimentConfig(
            name="test2",
            closure=ClosureConfig(kind="H+NEV"),
            es=EsConfig(a=[6e-6, 6e-6], omega=[10.0, 15.0], max_iters=500),
            out="runs/test2",
        ).validate()
    raise ConfigError("preset", f"unknown preset {name!r}; use test1 or test2")
