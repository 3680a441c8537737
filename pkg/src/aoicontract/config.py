"""Scenario configuration: JSON schema, defaults, overrides and validation.

Every field has a default, so ``{}`` is a complete scenario: period
``t = 2`` s, ``a = 2`` idle periods, ``beta = 20``, ``K = 200`` s, ``H = 50`` s,
``M = 20`` workers split into ``N = 10`` equally likely types with ``gamma``
evenly spaced over ``[0.001, 0.01]`` and a shared AoI preference of 0.5.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .economics import ProviderEconomics
from .flsim import WorkflowConfig
from .freshness import TimingParams
from .solver import SolverParams


class ConfigError(ValueError):
    pass


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True, frozen=True)


class TimingSection(_Section):
    t: float = Field(2.0, gt=0)
    a: int = Field(2, ge=1)
    c_min: int = Field(1, ge=1)
    c_max: int = Field(15, ge=1)

    @model_validator(mode="after")
    def _bounds(self):
        if self.c_min > self.c_max:
            raise ValueError("c_min must not exceed c_max")
        return self


class PopulationSection(_Section):
    M: int = Field(20, ge=1)
    N: int = Field(10, ge=1)
    gamma_min: float = Field(0.001, gt=0)
    gamma_max: float = Field(0.01, gt=0)
    distribution: Literal["grid", "sampled"] = "grid"
    # optional per-type preference; overrides provider.alpha
    alpha: Optional[list[float]] = None

    @model_validator(mode="after")
    def _range(self):
        if self.gamma_min > self.gamma_max:
            raise ValueError("gamma_min must not exceed gamma_max")
        if self.alpha is not None:
            if len(self.alpha) != self.N:
                raise ValueError(f"alpha lists {len(self.alpha)} values for N={self.N} types")
            if any(not 0 <= x <= 1 for x in self.alpha):
                raise ValueError("alpha values must lie in [0, 1]")
        return self


class ProviderSection(_Section):
    beta: float = Field(20.0, gt=0)
    K: float = Field(200.0, ge=0)
    H: float = Field(50.0, ge=0)
    alpha: float = Field(0.5, ge=0, le=1)


class SolverSection(_Section):
    f_min: float = Field(1e-5, gt=0)
    f_max: Optional[float] = Field(None, gt=0)
    phi: float = Field(1e-6, gt=0)
    variant: Literal["paper", "oracle"] = "paper"


class SweepSection(_Section):
    a_values: list[int] = Field(default_factory=lambda: list(range(1, 16)))
    alpha_values: list[float] = Field(default_factory=lambda: [round(0.1 * k, 1) for k in range(1, 10)])

    @model_validator(mode="after")
    def _values(self):
        if any(a < 1 for a in self.a_values):
            raise ValueError("a_values must be positive")
        if any(not 0 <= x <= 1 for x in self.alpha_values):
            raise ValueError("alpha_values must lie in [0, 1]")
        return self


DelaySpec = Union[float, tuple[float, float]]


class FlsimSection(_Section):
    publish: DelaySpec = 0.1
    relay_verify: DelaySpec = 0.1
    dispatch: DelaySpec = 0.1
    train: DelaySpec = 1.0
    upload: DelaySpec = 0.2
    relay_check: DelaySpec = 0.1
    main_transfer: DelaySpec = 0.1
    aggregate: DelaySpec = 0.2
    distribute: DelaySpec = 0.1
    workers_virtual: int = Field(5, ge=1)
    workers_physical: int = Field(5, ge=1)
    epochs: int = Field(1, ge=1)
    train_overrides: dict[str, DelaySpec] = Field(default_factory=dict)


class ScenarioConfig(_Section):
    timing: TimingSection = TimingSection()
    population: PopulationSection = PopulationSection()
    provider: ProviderSection = ProviderSection()
    solver: SolverSection = SolverSection()
    mechanism: Literal["CA", "CC", "CS"] = "CA"
    seed: int = Field(0, ge=0, lt=2 ** 64)
    sweep: SweepSection = SweepSection()
    flsim: FlsimSection = FlsimSection()

    def timing_params(self) -> TimingParams:
        return TimingParams(**self.timing.model_dump())

    def economics(self) -> ProviderEconomics:
        p = self.provider
        return ProviderEconomics(beta=p.beta, K=p.K, H=p.H, M=self.population.M)

    def solver_params(self) -> SolverParams:
        return SolverParams(**self.solver.model_dump())

    def workflow(self) -> WorkflowConfig:
        return WorkflowConfig(seed=self.seed, **self.flsim.model_dump())

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with dotted-key changes, re-validated."""
        data = self.model_dump(mode="json")
        for key, value in changes.items():
            _assign(data, key.split("__"), value)
        return from_dict(data)


def _assign(data: dict, path: list[str], value) -> None:
    node = data
    for i, part in enumerate(path[:-1]):
        child = node.get(part)
        if not isinstance(child, dict):
            where = ".".join(path[: i + 1])
            raise ConfigError(f"{where}: not a config section")
        node = child
    node[path[-1]] = value


def _format(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def from_dict(data: dict) -> ScenarioConfig:
    try:
        # JSON-mode validation: strict scalars, arrays accepted for tuples
        return ScenarioConfig.model_validate_json(json.dumps(data))
    except ValidationError as err:
        raise ConfigError(_format(err)) from None


def parse_override(item: str) -> tuple[list[str], object]:
    """``"provider.alpha=0.9"`` -> (["provider", "alpha"], 0.9).

    The value is read as JSON when possible, otherwise kept as a string.
    """
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {item!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def load_config(path=None, overrides=()) -> ScenarioConfig:
    """Read a JSON scenario file (or start from defaults) and apply overrides."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
        if text.strip():
            try:
                data = json.loads(text)
            except json.JSONDecodeError as err:
                raise ConfigError(f"{path}: invalid JSON ({err.msg} at line {err.lineno})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    for item in overrides:
        keys, value = parse_override(item)
        # materialize defaults so dotted paths into untouched sections work
        base = from_dict(data).model_dump(mode="json")
        _assign(base, keys, value)
        data = base
    return from_dict(data)
