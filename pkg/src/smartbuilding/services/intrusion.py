"""Intrusion detection: a sonar and a vibration sensor in conjunction.

The alarm needs both signals close together in time: an object nearer than
the distance threshold and a vibration within the correlation window. Either
alone is treated as noise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from smartbuilding.core import Command, Reading, ReadingKind, ServiceId, SimClock
from smartbuilding.services import common

ALARM_TEXT = "Intrusion alarm"
ALARM_AUDIO = "Intrusion detected, alerting the owner."


@dataclass(frozen=True)
class IntrusionConfig:
    close_threshold: float = 50.0
    window_ms: int = 5000
    owner_phone: str = "+10000000001"


@dataclass(frozen=True)
class IntrusionState:
    armed: bool = True
    alarm_active: bool = False
    last_close_distance_t: Optional[int] = None
    last_vibration_t: Optional[int] = None


def initial_state(config: IntrusionConfig) -> IntrusionState:
    return IntrusionState()


def intrusion_step(state: IntrusionState, readings: Sequence[Reading],
                   commands: Sequence[Command], clock: SimClock,
                   config: IntrusionConfig) -> tuple[IntrusionState, list]:
    now = clock.now
    effects = []

    armed = state.armed
    alarm = state.alarm_active
    for c in commands:
        if c.action == "arm":
            armed = True
        elif c.action == "disarm":
            armed = False
            alarm = False
        else:
            effects.append(common.ui(ServiceId.intrusion, "rejected",
                                     {"action": c.action}, now))

    close_t = state.last_close_distance_t
    vib_t = state.last_vibration_t
    metrics = {}
    for r in readings:
        if r.kind is ReadingKind.distance_cm:
            metrics["distance_cm"] = float(r.value)
            if r.value < config.close_threshold:
                close_t = r.t
        elif r.kind is ReadingKind.vibration_bool:
            metrics["vibration"] = 1 if r.value else 0
            if r.value:
                vib_t = r.t

    correlated = (
        close_t is not None
        and vib_t is not None
        and abs(close_t - vib_t) <= config.window_ms
    )
    if armed and correlated and not alarm:
        alarm = True
        effects.append(common.call(config.owner_phone, "Intrusion detected", now))
        effects.append(common.sms(config.owner_phone, "Intrusion detected", now))
        effects.append(common.display("intrusion-lcd", ALARM_TEXT, now))
        effects.append(common.actuate("intrusion-red-led", True, now))
        effects.append(common.audio("intrusion-audio", ALARM_AUDIO, now))

    if state.alarm_active and not alarm:
        # disarm stood the alarm down
        effects.append(common.actuate("intrusion-red-led", False, now))
        effects.append(common.display("intrusion-lcd", "Disarmed", now))

    if not armed:
        alarm = False

    new_state = IntrusionState(armed, alarm, close_t, vib_t)
    assert not new_state.alarm_active or new_state.armed
    if new_state != state:
        effects.append(common.ui(
            ServiceId.intrusion,
            "alarm" if alarm and not state.alarm_active else "state",
            {"armed": armed, "alarm_active": alarm},
            now,
            alert=alarm and not state.alarm_active,
        ))
    if alarm != state.alarm_active:
        metrics["alarm"] = 1 if alarm else 0
    if metrics:
        effects.append(common.point(ServiceId.intrusion, metrics, now))
    return new_state, effects
