"""Experiment configuration: a flat key = value text format.

Lines are `key = value`; blank lines and `#` comments are ignored. Unknown
keys are rejected. All experiments gate alpha and beta to (0, 1/3), the range
the steady-state guarantees assume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .tracker import completion_potential_bound
from .truth import FAMILY_KINDS

LAYOUTS = ("uniform", "grid", "clustered", "pairs")
EVOLVERS = ("dormant", "random", "scripted", "adversary")

# Queries per time unit that keep the tracker ahead of one evolver step per
# unit at alpha = beta = 0.1, found by sweeping sigma on steady-state runs
# (see README). Cover scans grow exponentially with dimension, hence the ramp.
DEFAULT_SIGMA = {1: 8, 2: 32, 3: 96}


@dataclass
class ExperimentConfig:
    n: int = 32
    d: int = 1
    alpha: float = 0.1
    beta: float = 0.1
    sigma: int = 0  # 0 = pick DEFAULT_SIGMA[d]
    r0: float = 0.0  # 0 = derive from the layout
    seed: int = 0
    family: str = "uniform-ball"
    family_scale: float = 0.5
    evolver: str = "random"
    script_path: str = ""
    adversary_t0: int = -1  # -1 = arm when burn-in is detected
    adversary_m: int = 8
    max_time: int = 10_000
    metrics_stride: int = 0  # time units between distance estimates; 0 = n // sigma
    mc_samples: int = 4096
    d_method: str = "auto"  # auto | exact | mc | quadrature
    layout: str = "uniform"
    min_separation: float = 1.0
    spread: float = 0.5  # layout lives inside spread * r0
    burn_in_threshold: float = 0.0  # nats per object; 0 = 2 * phi0(beta)
    hypothesis_stride: int = 0  # 0 = no hypothesis snapshots
    out_dir: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.d < 1:
            raise ConfigError("d must be at least 1")
        if not (0 < self.alpha < 1 / 3 and 0 < self.beta < 1 / 3):
            raise ConfigError("alpha and beta must lie in (0, 1/3)")
        if self.sigma < 0 or (self.sigma == 0 and self.d not in DEFAULT_SIGMA):
            raise ConfigError(f"sigma must be given explicitly for d={self.d}")
        if self.family not in FAMILY_KINDS:
            raise ConfigError(f"family must be one of {FAMILY_KINDS}")
        if self.evolver not in EVOLVERS:
            raise ConfigError(f"evolver must be one of {EVOLVERS}")
        if self.layout not in LAYOUTS:
            raise ConfigError(f"layout must be one of {LAYOUTS}")
        if self.evolver == "scripted" and not self.script_path:
            raise ConfigError("scripted evolver needs script_path")
        if self.evolver == "adversary" and self.layout != "pairs":
            raise ConfigError("the adversary strategy needs the pairs layout")
        if self.evolver == "adversary" and self.n % 2 != 0:
            raise ConfigError("the adversary strategy needs an even n")
        if self.max_time < 1:
            raise ConfigError("max_time must be positive")
        if self.mc_samples < 1:
            raise ConfigError("mc_samples must be positive")
        if not 0 < self.spread <= 1:
            raise ConfigError("spread must lie in (0, 1]")
        if self.min_separation <= 0:
            raise ConfigError("min_separation must be positive")

    @property
    def effective_sigma(self) -> int:
        return self.sigma if self.sigma > 0 else DEFAULT_SIGMA[self.d]

    @property
    def effective_burn_in_threshold(self) -> float:
        if self.burn_in_threshold > 0:
            return self.burn_in_threshold
        return 2.0 * completion_potential_bound(self.beta)

    def effective_metrics_stride(self) -> int:
        if self.metrics_stride > 0:
            return self.metrics_stride
        return max(1, self.n // self.effective_sigma)

    def replace(self, **kwargs) -> "ExperimentConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(kwargs)
        return ExperimentConfig(**values)


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, raw)
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def config_to_text(config: ExperimentConfig) -> str:
    lines = [f"{f.name} = {getattr(config, f.name)}" for f in fields(config)]
    return "\n".join(lines) + "\n"
