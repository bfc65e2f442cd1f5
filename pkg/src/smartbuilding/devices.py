"""Virtual sensors and actuators plus the scenario file loader.

Sensors are either trace-driven (scripted records, hold-last between points)
or seeded generators (base value plus uniform noise). The actuator registry
holds the single authoritative copy of every actuator's state; controllers
never touch it directly, they emit actuate effects that get applied here.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Sequence, Union

from smartbuilding.core import (
    BOOL_KINDS,
    STRING_KINDS,
    Command,
    Effect,
    EffectKind,
    Origin,
    Reading,
    ReadingKind,
    ServiceId,
)


class ActuatorKind(str, Enum):
    servo_deg = "servo_deg"
    led_bool = "led_bool"
    rgb_led = "rgb_led"
    buzzer_bool = "buzzer_bool"
    pump_bool = "pump_bool"
    fan_bool = "fan_bool"
    purifier_bool = "purifier_bool"
    lcd_text = "lcd_text"
    speaker_text = "speaker_text"
    gate = "gate"


_BOOL_ACTUATORS = frozenset(
    {
        ActuatorKind.led_bool,
        ActuatorKind.buzzer_bool,
        ActuatorKind.pump_bool,
        ActuatorKind.fan_bool,
        ActuatorKind.purifier_bool,
    }
)

_DEFAULTS: dict[ActuatorKind, Any] = {
    ActuatorKind.servo_deg: 0,
    ActuatorKind.led_bool: False,
    ActuatorKind.rgb_led: (0, 0, 0),
    ActuatorKind.buzzer_bool: False,
    ActuatorKind.pump_bool: False,
    ActuatorKind.fan_bool: False,
    ActuatorKind.purifier_bool: False,
    ActuatorKind.lcd_text: "",
    ActuatorKind.speaker_text: "",
    ActuatorKind.gate: "closed",
}


def _check_actuator_value(kind: ActuatorKind, value: Any) -> Any:
    if kind is ActuatorKind.servo_deg:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0 <= value <= 180:
            raise ValueError(f"servo_deg out of range: {value!r}")
        return value
    if kind is ActuatorKind.rgb_led:
        if not isinstance(value, (tuple, list)) or len(value) != 3:
            raise ValueError(f"rgb_led needs a 3-component value, got {value!r}")
        for c in value:
            if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c <= 255:
                raise ValueError(f"rgb component out of range: {c!r}")
        return tuple(value)
    if kind in _BOOL_ACTUATORS:
        if not isinstance(value, bool):
            raise ValueError(f"{kind.value} needs a boolean, got {value!r}")
        return value
    if kind in (ActuatorKind.lcd_text, ActuatorKind.speaker_text):
        if not isinstance(value, str):
            raise ValueError(f"{kind.value} needs a string, got {value!r}")
        return value
    if kind is ActuatorKind.gate:
        if value not in ("open", "closed"):
            raise ValueError(f"gate must be 'open' or 'closed', got {value!r}")
        return value
    raise ValueError(f"unknown actuator kind {kind!r}")


@dataclass(frozen=True)
class ActuatorState:
    device: str
    kind: ActuatorKind
    value: Any

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _check_actuator_value(self.kind, self.value))


class ActuatorRegistry:
    """Mutable map device -> ActuatorState, mutated only by the sim loop."""

    def __init__(self) -> None:
        self._states: dict[str, ActuatorState] = {}

    def declare(self, device: str, kind: ActuatorKind) -> None:
        if device in self._states:
            raise ValueError(f"duplicate actuator {device}")
        self._states[device] = ActuatorState(device, kind, _DEFAULTS[kind])

    def apply_command(self, effect: Effect) -> ActuatorState:
        if effect.kind is not EffectKind.actuate:
            raise ValueError("registry only applies actuate effects")
        device = effect.target
        current = self._states.get(device)
        if current is None:
            raise KeyError(f"unknown device {device}")
        new = ActuatorState(device, current.kind, effect.payload["state"])
        self._states[device] = new
        return new

    def get(self, device: str) -> ActuatorState:
        return self._states[device]

    def snapshot_states(self) -> dict[str, ActuatorState]:
        return dict(self._states)

    def snapshot_values(self) -> dict[str, Any]:
        """JSON-safe view for artifacts and the UI."""
        out = {}
        for device, st in sorted(self._states.items()):
            value = list(st.value) if st.kind is ActuatorKind.rgb_led else st.value
            out[device] = {"kind": st.kind.value, "value": value}
        return out


class SensorMode(str, Enum):
    trace = "trace"
    generator = "generator"


@dataclass(frozen=True)
class SensorSpec:
    device: str
    kind: ReadingKind
    mode: SensorMode
    trace: Optional[tuple[tuple[int, Any], ...]] = None
    base: Optional[float] = None
    noise: float = 0.0
    period_ms: int = 1000
    service: Optional[ServiceId] = None

    def __post_init__(self) -> None:
        if self.period_ms <= 0:
            raise ValueError("period_ms must be positive")
        if self.mode is SensorMode.trace:
            if self.trace is None or self.base is not None:
                raise ValueError(f"{self.device}: trace mode needs a trace and no generator")
            last = -1
            for t, _ in self.trace:
                if t <= last:
                    raise ValueError(f"{self.device}: trace timestamps must be strictly increasing")
                last = t
        else:
            if self.base is None or self.trace is not None:
                raise ValueError(f"{self.device}: generator mode needs a base and no trace")
            if self.noise < 0:
                raise ValueError(f"{self.device}: noise amplitude must be non-negative")


def _clamp_for_kind(kind: ReadingKind, value: float) -> float:
    if kind in (ReadingKind.humidity_pct, ReadingKind.soil_moisture_pct):
        return min(100.0, max(0.0, value))
    if kind is ReadingKind.distance_cm:
        return min(400.0, max(2.0, value))
    if kind in (ReadingKind.gas_ppm, ReadingKind.iaq_ppm, ReadingKind.light_lux):
        return max(0.0, value)
    return value


def sample_sensor(spec: SensorSpec, t: int, seed: Union[int, str] = 0) -> Optional[Reading]:
    """Sample one sensor at sim time t; None means no sample yet.

    Generator noise draws from a generator keyed by (seed, device, t) so any
    single sample is reproducible without replaying the whole stream.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if spec.mode is SensorMode.trace:
        value = None
        for rec_t, rec_v in spec.trace or ():
            if rec_t > t:
                break
            value = rec_v
        if value is None:
            return None
        return Reading(spec.device, spec.kind, value, t)
    value = spec.base
    if spec.noise > 0:
        rng = random.Random(f"{seed}:{spec.device}:{t}")
        value = value + rng.uniform(-spec.noise, spec.noise)
    if spec.kind in BOOL_KINDS:
        return Reading(spec.device, spec.kind, bool(spec.base), t)
    return Reading(spec.device, spec.kind, _clamp_for_kind(spec.kind, value), t)


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration_ms: int
    tick_ms: int
    sensors: tuple[SensorSpec, ...]
    actuators: tuple[tuple[str, ActuatorKind], ...]
    records: tuple[tuple[int, str, Any], ...]
    links: tuple[tuple[int, str, bool], ...] = ()
    commands: tuple[Command, ...] = ()
    wall_start: Optional[str] = None
    config: dict = field(default_factory=dict)


class ScenarioError(ValueError):
    """Malformed scenario content; message carries the offending line."""


_DEFAULT_SERVICE_FOR_KIND = {
    ReadingKind.soil_moisture_pct: ServiceId.irrigation,
    ReadingKind.temperature_C: ServiceId.irrigation,
    ReadingKind.humidity_pct: ServiceId.irrigation,
    ReadingKind.distance_cm: ServiceId.intrusion,
    ReadingKind.iaq_ppm: ServiceId.iaq,
    ReadingKind.gas_ppm: ServiceId.firegas,
    ReadingKind.flame_bool: ServiceId.firegas,
    ReadingKind.vibration_bool: ServiceId.intrusion,
    ReadingKind.light_lux: ServiceId.lighting,
    ReadingKind.motion_bool: ServiceId.lighting,
    ReadingKind.ir_occupied_bool: ServiceId.parking,
    ReadingKind.rfid_uid: ServiceId.door,
    ReadingKind.keypress: ServiceId.door,
}


def service_for(spec: SensorSpec) -> Optional[ServiceId]:
    """The service a sensor feeds: its explicit binding or the kind default."""
    if spec.service is not None:
        return spec.service
    return _DEFAULT_SERVICE_FOR_KIND.get(spec.kind)


def _parse_roster_entry(entry: dict, line_no: int) -> Union[SensorSpec, tuple[str, ActuatorKind]]:
    device = entry.get("device")
    kind_token = entry.get("kind")
    if not device or not isinstance(device, str):
        raise ScenarioError(f"line {line_no}: roster entry missing device name")
    actuator_kinds = {k.value for k in ActuatorKind}
    if kind_token in actuator_kinds:
        return (device, ActuatorKind(kind_token))
    try:
        kind = ReadingKind(kind_token)
    except ValueError:
        raise ScenarioError(f"line {line_no}: unknown kind {kind_token!r} for device {device}") from None
    service = None
    if "service" in entry:
        try:
            service = ServiceId(entry["service"])
        except ValueError:
            raise ScenarioError(f"line {line_no}: unknown service {entry['service']!r}") from None
    else:
        service = _DEFAULT_SERVICE_FOR_KIND.get(kind)
    mode = SensorMode(entry.get("mode", "generator" if "base" in entry else "trace"))
    try:
        if mode is SensorMode.generator:
            return SensorSpec(
                device, kind, mode,
                base=entry["base"], noise=entry.get("noise", 0.0),
                period_ms=entry.get("period_ms", 1000), service=service,
            )
        return SensorSpec(
            device, kind, mode, trace=(),
            period_ms=entry.get("period_ms", 1000), service=service,
        )
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"line {line_no}: bad roster entry for {device}: {exc}") from None


def _parse_command(entry: dict, line_no: int) -> Command:
    try:
        return Command(
            ServiceId(entry["service"]),
            entry["action"],
            entry.get("params", {}),
            Origin(entry.get("origin", "push_button")),
            entry["t"],
        )
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"line {line_no}: bad command entry: {exc}") from None


def load_scenario(path: str) -> Scenario:
    """Parse a scenario file: a header line then one record per line.

    Errors name the 1-based line they came from.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    header = None
    header_line = 0
    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            header = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {line_no}: malformed header: {exc.msg}") from None
        header_line = line_no
        break
    if header is None:
        raise ScenarioError("line 1: empty scenario file")
    if not isinstance(header, dict) or "roster" not in header:
        raise ScenarioError(f"line {header_line}: header must declare a roster")

    sensors: list[SensorSpec] = []
    actuators: list[tuple[str, ActuatorKind]] = []
    seen: set[str] = set()
    for entry in header["roster"]:
        parsed = _parse_roster_entry(entry, header_line)
        device = parsed.device if isinstance(parsed, SensorSpec) else parsed[0]
        if device in seen:
            raise ScenarioError(f"line {header_line}: duplicate device {device}")
        seen.add(device)
        if isinstance(parsed, SensorSpec):
            sensors.append(parsed)
        else:
            actuators.append(parsed)

    links: list[tuple[int, str, bool]] = []
    for item in header.get("links", ()):
        try:
            t, kind, available = item["t"], item["kind"], item["available"]
        except (TypeError, KeyError):
            raise ScenarioError(f"line {header_line}: links entries need t, kind, available") from None
        if kind not in ("rfid", "bluetooth", "wifi", "gsm", "lte"):
            raise ScenarioError(f"line {header_line}: unknown link kind {kind!r}")
        links.append((t, kind, bool(available)))
    links.sort(key=lambda it: it[0])

    commands = tuple(_parse_command(c, header_line) for c in header.get("commands", ()))

    sensor_by_name = {s.device: s for s in sensors}
    trace_points: dict[str, list[tuple[int, Any]]] = {s.device: [] for s in sensors}
    records: list[tuple[int, str, Any]] = []
    for line_no, raw in enumerate(lines, start=1):
        if line_no <= header_line or not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {line_no}: malformed record: {exc.msg}") from None
        if not isinstance(rec, dict) or not {"t", "device", "value"} <= rec.keys():
            raise ScenarioError(f"line {line_no}: record needs keys t, device, value")
        device = rec["device"]
        if device not in sensor_by_name:
            raise ScenarioError(f"line {line_no}: unknown device {device}")
        t = rec["t"]
        if not isinstance(t, int) or t < 0:
            raise ScenarioError(f"line {line_no}: t must be a non-negative integer")
        records.append((t, device, rec["value"]))
        trace_points[device].append((t, rec["value"]))

    if records != sorted(records, key=lambda r: r[0]):
        records.sort(key=lambda r: r[0])
        for pts in trace_points.values():
            pts.sort(key=lambda p: p[0])

    final_sensors = []
    for s in sensors:
        if s.mode is SensorMode.trace:
            pts = trace_points[s.device]
            try:
                s = SensorSpec(s.device, s.kind, s.mode, trace=tuple(pts),
                               period_ms=s.period_ms, service=s.service)
            except ValueError as exc:
                raise ScenarioError(f"trace for {s.device}: {exc}") from None
        final_sensors.append(s)

    return Scenario(
        name=header.get("name", "scenario"),
        seed=header.get("seed", 0),
        duration_ms=header.get("duration_ms", 60_000),
        tick_ms=header.get("tick_ms", 1000),
        sensors=tuple(final_sensors),
        actuators=tuple(actuators),
        records=tuple(records),
        links=tuple(links),
        commands=commands,
        wall_start=header.get("wall_start"),
        config=header.get("config", {}),
    )
