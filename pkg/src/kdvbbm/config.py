"""Run configuration: JSON schema with defaults and eager validation."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .model import ModelParams
from .spectral import OVERFLOW_GUARD


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_default=True)


class GridConfig(_Section):
    n: int = Field(512, ge=8)
    L: float = Field(64.0, gt=0)

    @field_validator("n")
    @classmethod
    def _even(cls, v):
        if v % 2:
            raise ValueError("must be even")
        return v


class ParamsConfig(_Section):
    gamma1: float = Field(gt=0)
    delta1: float = Field(gt=0)
    gamma: float = 7.0 / 48.0
    gamma2: float = 0.0
    delta2: float = 0.0

    def model_params(self) -> ModelParams:
        return ModelParams(**self.model_dump())


class SolverSection(_Section):
    dt: float = Field(1e-3, gt=0)
    t_end: float = Field(10.0, ge=0)
    method: Literal["ifrk4", "rk4", "picard"] = "ifrk4"
    observer_stride: int = Field(10, ge=1)
    picard_quadrature_nodes: int = Field(17, ge=8)


class DatumConfig(_Section):
    seed: Optional[int] = None
    amplitude: float = 1.0
    width: float = Field(4.0, gt=0)
    radius: float = Field(1.0, gt=0)
    skew: float = 1.0
    center_spread: float = Field(2.0, ge=0)


class ObserveConfig(_Section):
    sigmas: list[float] = [0.1]
    radius_floor: float = Field(1e-12, gt=0)
    radius_ceiling: float = Field(1e-4, gt=0)
    snapshot_stride: int = Field(0, ge=0)

    @field_validator("sigmas")
    @classmethod
    def _nonneg(cls, v):
        if any(s < 0 for s in v):
            raise ValueError("sigmas must be >= 0")
        return v

    @model_validator(mode="after")
    def _band(self):
        if self.radius_floor >= self.radius_ceiling:
            raise ValueError("radius_floor must be below radius_ceiling")
        return self


class LemmasConfig(_Section):
    p2_points: int = Field(400, ge=2)
    p3_points: int = Field(50, ge=2)
    xi_max: float = Field(20.0, gt=0, le=300)
    pairs: int = Field(1_000_000, ge=1)
    ab_max: float = Field(100.0, gt=0, le=300)
    sigma_points: int = Field(200, ge=1)
    sigma_max: float = Field(10.0, gt=0)
    xi_points: int = Field(2001, ge=2)
    weight_xi_max: float = Field(100.0, gt=0)


class EnsembleConfig(_Section):
    count: int = Field(200, ge=1)
    n: int = Field(128, ge=8)
    L: float = Field(32.0, gt=0)
    sigma_min: float = Field(1e-3, gt=0)
    sigma_max: float = Field(1e-1, gt=0)
    sigma_points: int = Field(9, ge=3)
    norm_min: float = Field(0.1, gt=0)
    norm_max: float = Field(10.0, gt=0)
    scaling_min: float = Field(1e-2, gt=0)
    scaling_max: float = Field(1e2, gt=0)
    scaling_points: int = Field(9, ge=2)


class AlmostConservationConfig(_Section):
    sigmas: list[float] = [0.0125, 0.025, 0.05, 0.1, 0.2]
    t_span: Optional[float] = Field(None, gt=0)
    span_factors: list[float] = [0.25, 0.5, 1.0]
    dt: float = Field(1e-3, gt=0)
    observer_stride: int = Field(10, ge=1)

    @field_validator("sigmas")
    @classmethod
    def _positive(cls, v):
        if len(v) < 3 or any(s <= 0 for s in v):
            raise ValueError("need at least 3 positive sigmas")
        return v


class RadiusConfig(_Section):
    """Long runs (radius-track, continuation) use this grid; L defaults to grid.L."""

    n: int = Field(1024, ge=8)
    L: Optional[float] = Field(None, gt=0)
    sigma0: float = Field(0.5, gt=0)
    t_end: float = Field(100.0, gt=0)
    dt: float = Field(1e-2, gt=0)
    observer_stride: int = Field(100, ge=1)


class ContinuationConfig(_Section):
    sigma0: float = Field(0.5, gt=0)
    t_star: float = Field(100.0, gt=0)
    safety: float = Field(0.5, gt=0, le=1)
    dt: float = Field(1e-2, gt=0)
    observer_stride: int = Field(10, ge=1)


class PicardConfig(_Section):
    count: int = Field(6, ge=1)
    n: int = Field(128, ge=8)
    L: float = Field(32.0, gt=0)
    sigma: float = Field(0.1, ge=0)
    nodes: int = Field(129, ge=8)
    iters: int = Field(60, ge=1)
    compare_steps: int = Field(1024, ge=1)
    calibration_nodes: int = Field(65, ge=8)
    calibration_target: float = Field(0.45, gt=0, lt=1)


class CalibrationConfig(_Section):
    contraction_c: Optional[float] = Field(None, gt=0)
    almost_conservation_constant: Optional[float] = Field(None, gt=0)
    almost_conservation_C_hat: Optional[float] = Field(None, gt=0)
    provenance: dict = {}


class RunConfig(_Section):
    seed: int = 0
    grid: GridConfig = GridConfig()
    params: ParamsConfig
    solver: SolverSection = SolverSection()
    datum: DatumConfig = DatumConfig()
    observe: ObserveConfig = ObserveConfig()
    lemmas: LemmasConfig = LemmasConfig()
    estimates: EnsembleConfig = EnsembleConfig()
    almost_conservation: AlmostConservationConfig = AlmostConservationConfig()
    radius: RadiusConfig = RadiusConfig()
    continuation: ContinuationConfig = ContinuationConfig()
    picard: PicardConfig = PicardConfig()
    calibration: CalibrationConfig = CalibrationConfig()

    @model_validator(mode="after")
    def _overflow_guard(self):
        def xi_max(n, length):
            return math.pi * n / length

        long_l = self.radius.L or self.grid.L
        checks = [
            ("observe.sigmas", max(self.observe.sigmas, default=0.0), xi_max(self.grid.n, self.grid.L)),
            ("almost_conservation.sigmas", max(self.almost_conservation.sigmas), xi_max(self.grid.n, self.grid.L)),
            ("estimates.sigma_max", self.estimates.sigma_max, xi_max(self.estimates.n, self.estimates.L)),
            ("picard.sigma", self.picard.sigma, xi_max(self.picard.n, self.picard.L)),
            ("radius.sigma0", self.radius.sigma0, xi_max(self.radius.n, long_l)),
            ("continuation.sigma0", self.continuation.sigma0, xi_max(self.radius.n, long_l)),
        ]
        for key, sigma, xm in checks:
            if sigma * xm > OVERFLOW_GUARD:
                raise ValueError(f"{key}: sigma*max|xi| = {sigma * xm:.4g} exceeds {OVERFLOW_GUARD:g}")
        if self.estimates.sigma_min >= self.estimates.sigma_max:
            raise ValueError("estimates.sigma_min must be below estimates.sigma_max")
        return self

    @property
    def datum_seed(self) -> int:
        return self.seed if self.datum.seed is None else self.datum.seed


def _key_path(loc) -> str:
    return ".".join(str(p) for p in loc)


def config_from_dict(data: dict) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        lines = [f"{_key_path(e['loc']) or '<root>'}: {e['msg']}" for e in exc.errors()]
        raise ConfigError("invalid configuration\n  " + "\n  ".join(lines)) from None
    try:
        cfg.params.model_params()
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None
    return cfg


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(data)


def resolved_dict(cfg: RunConfig) -> dict:
    """Fully resolved configuration as plain JSON-compatible data."""
    return cfg.model_dump(mode="json")


def dump_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(resolved_dict(cfg), indent=2, sort_keys=True) + "\n")
