"""Shared domain types, the simulated clock, and the in-process event bus.

Everything downstream (devices, links, service controllers, telemetry) is
driven by SimClock time and communicates through EventBus envelopes, so a
whole scenario is deterministic and replayable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Any, Optional, Union


class ReadingKind(str, Enum):
    """Quantity kinds a simulated sensor can report."""

    temperature_C = "temperature_C"
    humidity_pct = "humidity_pct"
    soil_moisture_pct = "soil_moisture_pct"
    distance_cm = "distance_cm"
    vibration_bool = "vibration_bool"
    gas_ppm = "gas_ppm"
    iaq_ppm = "iaq_ppm"
    flame_bool = "flame_bool"
    motion_bool = "motion_bool"
    light_lux = "light_lux"
    rfid_uid = "rfid_uid"
    keypress = "keypress"
    ir_occupied_bool = "ir_occupied_bool"


BOOL_KINDS = frozenset(
    {
        ReadingKind.vibration_bool,
        ReadingKind.flame_bool,
        ReadingKind.motion_bool,
        ReadingKind.ir_occupied_bool,
    }
)

STRING_KINDS = frozenset({ReadingKind.rfid_uid, ReadingKind.keypress})


class ServiceId(str, Enum):
    """The eight building services."""

    parking = "parking"
    irrigation = "irrigation"
    intrusion = "intrusion"
    door = "door"
    firegas = "firegas"
    lighting = "lighting"
    medicine = "medicine"
    iaq = "iaq"


class Origin(str, Enum):
    """Ingress channel a command arrived through."""

    push_button = "push_button"
    rfid = "rfid"
    bluetooth = "bluetooth"
    wifi = "wifi"
    cellular = "cellular"
    voice = "voice"


class EffectKind(str, Enum):
    """Declarative controller outputs executed by the platform."""

    actuate = "actuate"
    display_text = "display_text"
    audio = "audio"
    alert_sms = "alert_sms"
    alert_call = "alert_call"
    telemetry_point = "telemetry_point"
    ui_event = "ui_event"


@dataclass(frozen=True)
class SimClock:
    """Simulated time in milliseconds since scenario start.

    wall_anchor optionally maps t=0 to a real-world datetime; the medicine
    reminder and night detection need it, nothing else does.
    """

    now: int = 0
    wall_anchor: Optional[datetime] = None

    def __post_init__(self) -> None:
        if self.now < 0:
            raise ValueError("clock time must be non-negative")

    def advance(self, delta_ms: int) -> "SimClock":
        if delta_ms < 0:
            raise ValueError("delta_ms must be non-negative")
        return SimClock(self.now + delta_ms, self.wall_anchor)

    def wall(self) -> Optional[datetime]:
        """Wall-clock datetime for the current instant, if anchored."""
        if self.wall_anchor is None:
            return None
        return self.wall_anchor + timedelta(milliseconds=self.now)


def clock_advance(clock: SimClock, delta_ms: int) -> SimClock:
    """Advance the clock by exactly delta_ms (zero is legal)."""
    return clock.advance(delta_ms)


@dataclass(frozen=True)
class Reading:
    """One timestamped sensor observation."""

    device: str
    kind: ReadingKind
    value: Union[float, int, bool, str]
    t: int

    def __post_init__(self) -> None:
        kind, value = self.kind, self.value
        if kind in BOOL_KINDS:
            if not isinstance(value, bool):
                raise ValueError(f"{kind.value} readings must be boolean, got {value!r}")
            return
        if kind in STRING_KINDS:
            if not isinstance(value, str) or not value:
                raise ValueError(f"{kind.value} readings must be a non-empty string")
            return
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"{kind.value} readings must be numeric, got {value!r}")
        if kind in (ReadingKind.humidity_pct, ReadingKind.soil_moisture_pct):
            if not 0 <= value <= 100:
                raise ValueError(f"{kind.value} must be within [0, 100], got {value}")
        elif kind is ReadingKind.distance_cm:
            # HC-SR04 detecting range.
            if not 2 <= value <= 400:
                raise ValueError(f"distance_cm must be within [2, 400], got {value}")
        elif kind in (ReadingKind.gas_ppm, ReadingKind.iaq_ppm, ReadingKind.light_lux):
            if value < 0:
                raise ValueError(f"{kind.value} must be non-negative, got {value}")


@dataclass(frozen=True)
class Command:
    """One actuation/control request with its ingress origin."""

    service: ServiceId
    action: str
    params: dict = field(default_factory=dict)
    origin: Origin = Origin.push_button
    t: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.origin, Origin):
            raise ValueError(f"unknown origin {self.origin!r}")
        if not isinstance(self.service, ServiceId):
            raise ValueError(f"unknown service {self.service!r}")


@dataclass(frozen=True)
class Effect:
    """Uniform carrier for every controller response.

    Sirens, LCD texts, SMS, calls, telemetry points and UI notifications all
    travel as effects; the platform executes them.
    """

    kind: EffectKind
    target: str
    payload: dict
    t: int

    def __post_init__(self) -> None:
        if self.kind in (EffectKind.alert_sms, EffectKind.alert_call):
            if "recipient" not in self.payload or "message" not in self.payload:
                raise ValueError("alert effects must carry a recipient and a message")
        if self.kind is EffectKind.actuate and "state" not in self.payload:
            # No toggles: actuations always name the definite target state.
            raise ValueError("actuate effects must carry a definite 'state'")


EnvelopeBody = Union[Reading, Command, Effect]


@dataclass(frozen=True)
class EventEnvelope:
    seq: int
    body: EnvelopeBody


class BusClosedError(RuntimeError):
    pass


class EventBus:
    """In-process event log: serialized publishes, any number of readers.

    Sequence numbers start at 1; 0 means "poll from the beginning". Envelopes
    are immutable and safe to hand across threads. Retention is unbounded —
    desk-scale runs are short and replay needs the full history.
    """

    def __init__(self) -> None:
        self._events: list[EventEnvelope] = []
        self._lock = threading.Lock()
        self._changed = threading.Condition(self._lock)
        self._closed = False

    def publish(self, body: EnvelopeBody) -> int:
        if not isinstance(body, (Reading, Command, Effect)):
            raise TypeError(f"bus bodies must be Reading, Command or Effect, got {type(body)!r}")
        with self._changed:
            if self._closed:
                raise BusClosedError("bus closed")
            seq = len(self._events) + 1
            self._events.append(EventEnvelope(seq, body))
            self._changed.notify_all()
            return seq

    def poll(self, after_seq: int) -> list[EventEnvelope]:
        if after_seq < 0:
            raise ValueError("after_seq must be >= 0")
        with self._lock:
            return self._events[after_seq:]

    def wait(self, after_seq: int, timeout: float) -> list[EventEnvelope]:
        """Poll, blocking up to timeout seconds for something new."""
        with self._changed:
            if len(self._events) <= after_seq:
                self._changed.wait(timeout)
            return self._events[after_seq:]

    def close(self) -> None:
        with self._changed:
            self._closed = True
            self._changed.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed

    @property
    def last_seq(self) -> int:
        with self._lock:
            return len(self._events)


def bus_publish(bus: EventBus, body: EnvelopeBody) -> int:
    return bus.publish(body)


def bus_poll(bus: EventBus, after_seq: int) -> list[EventEnvelope]:
    return bus.poll(after_seq)


def body_to_dict(body: EnvelopeBody) -> dict:
    """JSON-safe representation used by the event log and the UI stream."""
    if isinstance(body, Reading):
        return {
            "type": "reading",
            "device": body.device,
            "kind": body.kind.value,
            "value": body.value,
            "t": body.t,
        }
    if isinstance(body, Command):
        return {
            "type": "command",
            "service": body.service.value,
            "action": body.action,
            "params": body.params,
            "origin": body.origin.value,
            "t": body.t,
        }
    return {
        "type": "effect",
        "kind": body.kind.value,
        "target": body.target,
        "payload": body.payload,
        "t": body.t,
    }


def body_from_dict(d: dict) -> EnvelopeBody:
    kind = d.get("type")
    if kind == "reading":
        return Reading(d["device"], ReadingKind(d["kind"]), d["value"], d["t"])
    if kind == "command":
        return Command(
            ServiceId(d["service"]), d["action"], d.get("params", {}),
            Origin(d.get("origin", "push_button")), d["t"],
        )
    if kind == "effect":
        return Effect(EffectKind(d["kind"]), d["target"], d["payload"], d["t"])
    raise ValueError(f"unknown envelope body type {kind!r}")


def envelope_to_dict(env: EventEnvelope) -> dict:
    d = body_to_dict(env.body)
    d["seq"] = env.seq
    return d
