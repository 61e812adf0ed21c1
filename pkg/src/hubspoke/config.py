"""Runtime configuration: file + environment + flag overrides."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

ENV_PREFIX = "HUBSPOKE_"

GRAVITY_CHOICES = ("delivery", "pickup", "total")


@dataclass
class AppConfig:
    """All tunables shared across the pipeline, with urban defaults."""

    speed_kmh: float = 25.0
    detour_factor: float = 1.4
    truck_capacity: float = 40.0
    truck_fixed_cost: float = 20.0
    cost_per_km: float = 1.0
    shift_start_min: float = 0.0
    shift_end_min: float = 600.0
    gravity_demand: str = "delivery"
    gravity_zero_demand: str = "error"
    allow_intra_point: bool = False
    handoff_radius_km: float = 2.0
    linehaul_roundtrip: bool = False

    def __post_init__(self) -> None:
        if self.speed_kmh <= 0:
            raise ValueError("speed_kmh must be positive")
        if self.detour_factor < 1.0:
            raise ValueError("detour_factor must be >= 1")
        if self.truck_capacity <= 0:
            raise ValueError("truck_capacity must be positive")
        if self.truck_fixed_cost < 0 or self.cost_per_km < 0:
            raise ValueError("costs must be non-negative")
        if self.shift_end_min <= self.shift_start_min:
            raise ValueError("shift_end_min must exceed shift_start_min")
        if self.gravity_demand not in GRAVITY_CHOICES:
            raise ValueError(f"gravity_demand must be one of {GRAVITY_CHOICES}")
        if self.gravity_zero_demand not in ("error", "mean"):
            raise ValueError("gravity_zero_demand must be 'error' or 'mean'")
        if self.handoff_radius_km < 0:
            raise ValueError("handoff_radius_km must be non-negative")


_FIELDS = {f.name: f.type for f in dataclasses.fields(AppConfig)}


def _coerce(name: str, raw: Any) -> Any:
    if name not in _FIELDS:
        raise ValueError(f"unknown config key: {name}")
    default = getattr(AppConfig(), name)
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"config key {name}: cannot parse boolean from {raw!r}")
    if isinstance(default, float):
        return float(raw)
    return str(raw)


def load_config(path: str | Path | None = None,
                env: dict[str, str] | None = None,
                overrides: dict[str, Any] | None = None) -> AppConfig:
    """Merge config file, environment, and explicit overrides.

    Precedence: overrides > environment (HUBSPOKE_*) > file > defaults.
    The file may be TOML or JSON (decided by extension, JSON by default).
    """
    values: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"config file not found: {p}")
        if p.suffix.lower() == ".toml":
            try:
                import tomllib  # 3.11+
            except ModuleNotFoundError:
                import tomli as tomllib
            raw = tomllib.loads(p.read_text())
        else:
            raw = json.loads(p.read_text())
        for k, v in raw.items():
            values[k] = _coerce(k, v)
    env = os.environ if env is None else env
    for name in _FIELDS:
        key = ENV_PREFIX + name.upper()
        if key in env:
            values[name] = _coerce(name, env[key])
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = _coerce(k, v)
    return AppConfig(**values)
