"""Flat ``key = value`` run configuration.

One pair per line, ``#`` starts a comment, an empty value means "unset".
Every value is validated before any simulation work starts.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .boundary import BoundaryKind, BoundaryMode, load_mask_file
from .exceptions import (
    ConfigurationError,
    validate_block,
    validate_periodic_height,
)
from .lattice import Direction
from .scenarios import Scenario, ScenarioKind, format_regions, parse_regions, zero_region_mask

SEED_MAX = (1 << 64) - 1


class SimConfig(BaseModel):
    """Validated simulation configuration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    width: int = Field(..., gt=0, le=1 << 16, description="Sites per row")
    height: int = Field(..., gt=0, le=1 << 16, description="Number of rows")
    steps: int = Field(..., ge=0, description="Time steps to run")
    seed: int = Field(..., ge=0, le=SEED_MAX, description="64-bit run seed")

    scenario: ScenarioKind = ScenarioKind.UNIFORM
    fill: float = Field(0.5, ge=0.0, le=1.0, description="Per-direction occupation probability")
    bias_direction: int | None = Field(None, ge=0, le=5)
    bias_fill: float | None = Field(None, ge=0.0, le=1.0)
    regions: str = Field("", description="';'-separated disk:cx,cy,r / rect:x0,y0,x1,y1")

    boundary: BoundaryKind = BoundaryKind.PERIODIC
    mask: str | None = Field(None, description="Plain PBM obstacle bitmap")

    block: int = Field(10, gt=0)
    window: int = Field(50, ge=1)
    frame_every: int = Field(50, ge=1)
    output_dir: str = "out"
    workers: int = Field(1, ge=1, le=256)

    amplitude: float = Field(0.1, ge=0.0, le=1.0, description="Shear-wave amplitude U/v")
    ensembles: int = Field(16, ge=1)
    pulse_delta: float = Field(0.1, ge=0.0, le=1.0)
    pulse_radius: float | None = Field(None, gt=0.0)
    probe_steps: int | None = Field(None, ge=1)

    @field_validator("regions")
    @classmethod
    def canonical_regions(cls, v: str) -> str:
        return format_regions(parse_regions(v))

    @field_validator("mask", "output_dir")
    @classmethod
    def plain_path(cls, v: str | None) -> str | None:
        if v is None:
            return v
        if not v or v != v.strip() or "#" in v or "\n" in v:
            raise ValueError("paths must be non-empty, unpadded and free of '#'")
        return v

    @model_validator(mode="after")
    def check_geometry(self) -> "SimConfig":
        validate_block(self.block, self.width, self.height)
        if self.boundary is BoundaryKind.PERIODIC:
            validate_periodic_height(self.height)
        if self.bias_fill is not None and self.bias_direction is None:
            raise ConfigurationError("bias_fill", "set bias_direction as well")
        zero_region_mask(parse_regions(self.regions), self.width, self.height)
        return self

    @property
    def dims(self) -> tuple[int, int]:
        return self.width, self.height

    def build_scenario(self) -> Scenario:
        direction = None if self.bias_direction is None else Direction(self.bias_direction)
        return Scenario(
            self.scenario,
            self.fill,
            direction,
            self.bias_fill,
            parse_regions(self.regions),
        )

    def load_obstacles(self, mask_path: Path | str | None = None) -> np.ndarray | None:
        path = mask_path if mask_path is not None else self.mask
        if path is None:
            return None
        return load_mask_file(path, self.width, self.height, self.boundary)

    def boundary_mode(self, obstacles: np.ndarray | None = None) -> BoundaryMode:
        if self.boundary is BoundaryKind.PERIODIC:
            return BoundaryMode.periodic(self.width, self.height, obstacles)
        return BoundaryMode.walled(self.width, self.height, obstacles)


FIELD_NAMES: tuple[str, ...] = tuple(SimConfig.model_fields)
REQUIRED_FIELDS: tuple[str, ...] = tuple(
    name for name, info in SimConfig.model_fields.items() if info.is_required()
)


def _split_lines(text: str) -> tuple[dict[str, str | None], dict[str, int]]:
    values: dict[str, str | None] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key = key.strip()
        if not sep or not key.isidentifier():
            raise ConfigurationError(key or "<line>", f"malformed line {raw.strip()!r}", lineno)
        if key not in SimConfig.model_fields:
            raise ConfigurationError(key, "unknown key", lineno)
        if key in lines:
            raise ConfigurationError(key, f"duplicate key (first set on line {lines[key]})", lineno)
        value = value.strip()
        values[key] = value or None
        lines[key] = lineno
    return values, lines


def _from_validation_error(exc: ValidationError, lines: dict[str, int]) -> ConfigurationError:
    errors = exc.errors()
    present = [e for e in errors if e["type"] != "missing"]
    first = (present or errors)[0]
    key = str(first["loc"][0]) if first["loc"] else "<config>"
    message = "missing required key" if first["type"] == "missing" else first["msg"]
    return ConfigurationError(key, message, lines.get(key))


def build_config(values: dict[str, Any], lines: dict[str, int] | None = None) -> SimConfig:
    """Validate a mapping of raw values, attributing errors to source lines."""
    lines = lines or {}
    cleaned = {k: v for k, v in values.items() if v is not None}
    try:
        return SimConfig(**cleaned)
    except ValidationError as e:
        raise _from_validation_error(e, lines) from None
    except ConfigurationError as e:
        if e.line is None and e.key in lines:
            raise dataclasses.replace(e, line=lines[e.key]) from None
        raise


def parse_config(text: str) -> SimConfig:
    values, lines = _split_lines(text)
    return build_config(values, lines)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def serialize_config(config: SimConfig) -> str:
    """Canonical text form; ``parse_config(serialize_config(c)) == c``."""
    out = []
    for name in FIELD_NAMES:
        value = getattr(config, name)
        if value is None or (name == "regions" and not value):
            continue
        out.append(f"{name} = {_format_value(value)}")
    return "\n".join(out) + "\n"


def load_config(path: Path | str) -> SimConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigurationError("config", f"cannot read {path} ({e})") from e
    return parse_config(text)
