"""Run and experiment configuration.

Config documents are YAML (JSON is accepted too).  Keys mirror the model field
names one to one and unknown keys are rejected, so a typo fails loudly instead
of silently falling back to a default.

Example run config::

    grid: {dim: 2, n: 32}
    m: 16
    nu: 1.0
    t_end: 1.0
    dt: 0.001
    ic: {kind: random-divfree, seed: 0, slope: -4.0, kmax: 4, energy: 0.5}
    force: {kind: zero}
    sample_every: 1
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .spectral import GridSpec, MollifierSpec

__all__ = [
    "ConfigError",
    "GridConfig",
    "ICConfig",
    "ForceConfig",
    "RunConfig",
    "ExperimentPlan",
    "load_config",
    "load_plan",
]


class ConfigError(ValueError):
    """Invalid or unreadable configuration; the message names the offending field."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Strict):
    dim: Literal[2, 3] = 2
    n: int = 32
    dealias: float = 2.0 / 3.0

    @model_validator(mode="after")
    def _check(self):
        GridSpec(self.dim, self.n, self.dealias)
        return self

    def spec(self) -> GridSpec:
        return GridSpec(self.dim, self.n, self.dealias)


class ICConfig(_Strict):
    kind: Literal["taylor-green", "random-divfree", "abc-flow", "zero", "snapshot"] = "taylor-green"
    amplitude: float = 1.0
    # random-divfree
    seed: int = 0
    slope: float = -4.0
    kmin: float = 1.0
    kmax: float = 4.0
    energy: Optional[float] = 0.5
    # snapshot
    path: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "snapshot" and not self.path:
            raise ValueError("ic kind 'snapshot' needs 'path'")
        if self.kmin <= 0 or self.kmax < self.kmin:
            raise ValueError("need 0 < kmin <= kmax")
        return self


class ForceConfig(_Strict):
    kind: Literal["zero", "fixed-field", "time-decaying"] = "zero"
    field: str = "kolmogorov"
    amplitude: float = 1.0
    wavenumber: int = 2
    rate: float = 1.0

    @field_validator("rate")
    @classmethod
    def _rate(cls, v):
        if v < 0:
            raise ValueError("rate must be non-negative")
        return v


class RunConfig(_Strict):
    grid: GridConfig = Field(default_factory=GridConfig)
    m: Optional[int] = None
    mollifier: Literal["sharp", "gaussian"] = "sharp"
    nu: float = 1.0
    t_end: float
    dt: float
    ic: ICConfig = Field(default_factory=ICConfig)
    force: ForceConfig = Field(default_factory=ForceConfig)
    sample_every: int = 1
    scheme: Literal["rk4", "heun"] = "rk4"

    @model_validator(mode="after")
    def _check(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.ic.kind == "abc-flow" and self.grid.dim != 3:
            raise ValueError("ic 'abc-flow' needs grid.dim = 3")
        return self

    @property
    def grid_spec(self) -> GridSpec:
        return self.grid.spec()

    @property
    def mollifier_spec(self) -> MollifierSpec | None:
        return None if self.m is None else MollifierSpec(self.m, self.mollifier)

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))

    def echo(self) -> dict:
        return self.model_dump(mode="json")


class ExperimentPlan(_Strict):
    base: RunConfig
    m_list: list[int]
    alpha_list: list[float]
    window: Optional[tuple[float, float]] = None
    s_zero: bool = False
    s_sequence_length: int = 6
    out: Optional[str] = None
    jobs: int = 1
    tolerance: float = 1e-5

    @model_validator(mode="after")
    def _check(self):
        if not self.m_list:
            raise ValueError("m_list must not be empty")
        if any(b <= a for a, b in zip(self.m_list, self.m_list[1:])):
            raise ValueError("m_list must be strictly increasing")
        if any(m < 1 for m in self.m_list):
            raise ValueError("m_list entries must be positive")
        if not self.alpha_list:
            raise ValueError("alpha_list must not be empty")
        if any(b <= a for a, b in zip(self.alpha_list, self.alpha_list[1:])):
            raise ValueError("alpha_list must be strictly increasing")
        if any(not 0 < a < 1 for a in self.alpha_list):
            raise ValueError("alpha_list entries must lie in (0, 1)")
        if self.window is not None:
            s, t = self.window
            if not 0 <= s < t <= self.base.t_end + 1e-12:
                raise ValueError("window must satisfy 0 <= s < t <= t_end")
        return self

    def resolved_window(self) -> tuple[float, float]:
        if self.window is not None:
            return (0.0, self.window[1]) if self.s_zero else self.window
        return (0.0, self.base.nsteps * self.base.dt)


def _format_error(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def _read(path) -> dict:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return data


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from None


def load_config(path) -> RunConfig:
    return parse_config(_read(path))


def load_plan(path) -> ExperimentPlan:
    try:
        return ExperimentPlan.model_validate(_read(path))
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from None
