"""Platform configuration: one INI section per service, keys matching the
service config field names exactly. Unknown sections or keys are rejected
with the line they appear on; value validation is delegated to the service
config classes so the same rules hold no matter where a value came from.

The search order is: explicit path, then the BMS_CONFIG environment
variable, then built-in defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass
from typing import Any, Optional

from smartbuilding.core import ServiceId
from smartbuilding.services import (
    DoorConfig,
    FireGasConfig,
    IaqConfig,
    IntrusionConfig,
    IrrigationConfig,
    LightingConfig,
    MedicineConfig,
    ParkingConfig,
)

ENV_VAR = "BMS_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TelemetryConfig:
    min_interval_ms: int = 1000
    flush_period_ms: int = 10_000

    def __post_init__(self) -> None:
        if self.min_interval_ms <= 0 or self.flush_period_ms <= 0:
            raise ValueError("telemetry intervals must be positive")


SECTIONS: dict[str, type] = {
    "parking": ParkingConfig,
    "irrigation": IrrigationConfig,
    "intrusion": IntrusionConfig,
    "door": DoorConfig,
    "firegas": FireGasConfig,
    "lighting": LightingConfig,
    "medicine": MedicineConfig,
    "iaq": IaqConfig,
    "telemetry": TelemetryConfig,
}


@dataclass(frozen=True)
class PlatformConfig:
    parking: ParkingConfig
    irrigation: IrrigationConfig
    intrusion: IntrusionConfig
    door: DoorConfig
    firegas: FireGasConfig
    lighting: LightingConfig
    medicine: MedicineConfig
    iaq: IaqConfig
    telemetry: TelemetryConfig

    def for_service(self, service: ServiceId) -> Any:
        return getattr(self, service.value)


def defaults() -> PlatformConfig:
    return PlatformConfig(**{name: cls() for name, cls in SECTIONS.items()})


def _field_names(cls: type) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _split_csv(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _coerce_str(key: str, raw: str, default: Any) -> Any:
    raw = raw.strip()
    if key == "gps":
        # optional coordinate pair; "none" disables location reporting
        if raw.lower() in ("", "none", "off"):
            return None
        parts = _split_csv(raw)
        if len(parts) != 2:
            raise ValueError("expected 'latitude,longitude' or 'none'")
        return (float(parts[0]), float(parts[1]))
    if isinstance(default, bool):
        lowered = raw.lower()
        if lowered in ("1", "yes", "true", "on"):
            return True
        if lowered in ("0", "no", "false", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw, 10)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, frozenset):
        return frozenset(_split_csv(raw))
    if isinstance(default, tuple):
        items = _split_csv(raw)
        if default and isinstance(default[0], float):
            return tuple(float(x) for x in items)
        return tuple(items)
    return raw


def _normalize_typed(key: str, value: Any, default: Any) -> Any:
    """Light shaping for values that arrive already typed (scenario JSON)."""
    if key == "gps":
        if value is None:
            return None
        return tuple(float(x) for x in value)
    if isinstance(default, bool):
        return value
    if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if isinstance(default, frozenset) and isinstance(value, (list, tuple, set)):
        return frozenset(value)
    if isinstance(default, tuple) and isinstance(value, list):
        return tuple(value)
    return value


def build(overrides: Optional[dict] = None, source: str = "<overrides>") -> PlatformConfig:
    """Assemble a PlatformConfig from per-section override dicts with
    already-typed values, validating section and key names."""
    overrides = overrides or {}
    unknown_sections = set(overrides) - set(SECTIONS)
    if unknown_sections:
        name = sorted(unknown_sections)[0]
        raise ConfigError(f"{source}: unknown section '{name}'")
    kwargs = {}
    for name, cls in SECTIONS.items():
        vals = dict(overrides.get(name, {}))
        unknown = set(vals) - _field_names(cls)
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"{source}: unknown key '{key}' in section '{name}'")
        ref = cls()
        shaped = {k: _normalize_typed(k, v, getattr(ref, k)) for k, v in vals.items()}
        try:
            kwargs[name] = cls(**shaped)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: bad [{name}] config: {exc}") from None
    return PlatformConfig(**kwargs)


def _line_index(text: str) -> dict:
    """Map (section, key) and ('', section) to the 1-based line they start on."""
    index: dict = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            index.setdefault(("", section), no)
            continue
        if line[:1] in (" ", "\t"):
            continue  # continuation of the previous value
        for sep in ("=", ":"):
            if sep in stripped:
                key = stripped.split(sep, 1)[0].strip().lower()
                if section is not None:
                    index.setdefault((section, key), no)
                break
    return index


def parse_config(text: str, source: str = "<config>") -> PlatformConfig:
    index = _line_index(text)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    overrides: dict = {}
    for section in parser.sections():
        if section not in SECTIONS:
            no = index.get(("", section), 0)
            raise ConfigError(f"{source} line {no}: unknown section [{section}]")
        cls = SECTIONS[section]
        known = _field_names(cls)
        ref = cls()
        vals = {}
        for key, raw in parser.items(section):
            if key not in known:
                no = index.get((section, key), 0)
                raise ConfigError(
                    f"{source} line {no}: unknown key '{key}' in [{section}]")
            try:
                vals[key] = _coerce_str(key, raw, getattr(ref, key))
            except ValueError as exc:
                no = index.get((section, key), 0)
                raise ConfigError(
                    f"{source} line {no}: bad value for '{key}' in [{section}]: {exc}"
                ) from None
        overrides[section] = vals
    return build(overrides, source=source)


def load_config(path: Optional[str] = None) -> PlatformConfig:
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return defaults()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=path)
