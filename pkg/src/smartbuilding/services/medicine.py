"""Medicine reminder with late-dose escalation.

Push buttons one to three pick the daily schedule (once, twice, thrice);
button four acknowledges a pending dose. A dose left unacknowledged for
half an hour escalates once: one call and one SMS to the caregiver.
Requires a wall-anchored clock; sim time alone cannot know it is 08:00.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Optional, Sequence

from smartbuilding.core import Command, Reading, ServiceId, SimClock
from smartbuilding.services import common

REMINDER_AUDIO = "Time to take your medicine."
MODES = ("off", "once", "twice", "thrice")


@dataclass(frozen=True)
class MedicineConfig:
    slot_times: tuple[str, ...] = ("08:00", "14:00", "20:00")
    escalate_after_ms: int = 30 * 60_000
    reminder_repeat_ms: int = 60_000
    owner_phone: str = "+10000000001"

    def __post_init__(self) -> None:
        if not 1 <= len(self.slot_times) <= 3:
            raise ValueError("slot_times needs 1 to 3 entries")
        for hhmm in self.slot_times:
            _parse_hhmm(hhmm)
        if list(self.slot_times) != sorted(self.slot_times):
            raise ValueError("slot_times must be ascending")


def _parse_hhmm(hhmm: str) -> tuple[int, int]:
    try:
        hh, mm = hhmm.split(":")
        hour, minute = int(hh), int(mm)
    except ValueError:
        raise ValueError(f"bad time {hhmm!r}, expected HH:MM") from None
    if not (0 <= hour < 24 and 0 <= minute < 60):
        raise ValueError(f"bad time {hhmm!r}")
    return hour, minute


def times_for_mode(mode: str, slot_times: Sequence[str]) -> tuple[str, ...]:
    """once = first slot, twice = first and last, thrice = all three."""
    if mode == "off":
        return ()
    if mode == "once":
        return (slot_times[0],)
    if mode == "twice":
        return (slot_times[0], slot_times[-1])
    if mode == "thrice":
        return tuple(slot_times)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class MedicineState:
    mode: str = "off"
    slot_times: tuple[str, ...] = ("08:00", "14:00", "20:00")
    due_at: Optional[int] = None  # sim ms of the pending dose
    acknowledged: bool = True
    escalated: bool = False
    last_reminder_t: Optional[int] = None


def initial_state(config: MedicineConfig) -> MedicineState:
    return MedicineState(slot_times=tuple(config.slot_times))


_DAY_MS = 86_400_000


def _dose_instants(clock: SimClock, state: MedicineState, after_ms: int) -> list[int]:
    """Sim times of scheduled doses in (after_ms, clock.now]."""
    anchor = clock.wall_anchor
    if anchor is None or state.mode == "off":
        return []
    out = []
    for hhmm in times_for_mode(state.mode, state.slot_times):
        hour, minute = _parse_hhmm(hhmm)
        first = anchor.replace(hour=hour, minute=minute, second=0, microsecond=0)
        if first < anchor:
            first += timedelta(days=1)
        t = int((first - anchor).total_seconds() * 1000)
        if t <= after_ms:
            t += ((after_ms - t) // _DAY_MS + 1) * _DAY_MS
        while t <= clock.now:
            out.append(t)
            t += _DAY_MS
    return sorted(out)


def medicine_step(state: MedicineState, readings: Sequence[Reading],
                  commands: Sequence[Command], clock: SimClock,
                  config: MedicineConfig,
                  prev_now: Optional[int] = None) -> tuple[MedicineState, list]:
    """prev_now is the previous step's sim time; doses strictly after it fire."""
    now = clock.now
    if prev_now is None:
        prev_now = now - 1
    effects = []

    mode = state.mode
    due_at = state.due_at
    acknowledged = state.acknowledged
    escalated = state.escalated
    last_reminder = state.last_reminder_t

    for c in commands:
        action = c.action
        if action == "button":
            n = c.params.get("n")
            if n in (1, 2, 3):
                action = "set_mode"
                c = Command(c.service, "set_mode", {"mode": MODES[n]}, c.origin, c.t)
            elif n == 4:
                action = "acknowledge"
            else:
                effects.append(common.ui(ServiceId.medicine, "rejected",
                                         {"button": n}, now))
                continue
        if action == "set_mode":
            wanted = c.params.get("mode")
            if wanted not in MODES:
                effects.append(common.ui(ServiceId.medicine, "rejected",
                                         {"mode": wanted}, now))
                continue
            mode = wanted
            due_at = None
            acknowledged = True
            escalated = False
            last_reminder = None
        elif action == "acknowledge":
            if due_at is None or acknowledged:
                effects.append(common.ui(ServiceId.medicine, "no_pending_dose", {}, now))
            else:
                acknowledged = True
                effects.append(common.actuate("medicine-led", False, now))
        else:
            effects.append(common.ui(ServiceId.medicine, "rejected",
                                     {"action": action}, now))

    probe = MedicineState(mode, state.slot_times, due_at, acknowledged,
                          escalated, last_reminder)
    for dose_t in _dose_instants(clock, probe, prev_now):
        due_at = dose_t
        acknowledged = False
        escalated = False
        last_reminder = now
        effects.append(common.audio("medicine-speaker", REMINDER_AUDIO, now))
        effects.append(common.actuate("medicine-led", True, now))

    if due_at is not None and not acknowledged and not escalated:
        if now >= due_at + config.escalate_after_ms:
            escalated = True
            late_min = config.escalate_after_ms // 60_000
            message = f"Medicine dose missed for {late_min} minutes"
            effects.append(common.call(config.owner_phone, message, now))
            effects.append(common.sms(config.owner_phone, message, now))
            effects.append(common.actuate("medicine-led", False, now))
        elif last_reminder is not None and now - last_reminder >= config.reminder_repeat_ms:
            last_reminder = now
            effects.append(common.audio("medicine-speaker", REMINDER_AUDIO, now))

    new_state = MedicineState(mode, state.slot_times, due_at, acknowledged,
                              escalated, last_reminder)
    if new_state != state:
        effects.append(common.ui(
            ServiceId.medicine,
            "escalated" if escalated and not state.escalated else "state",
            {"mode": mode, "pending": due_at is not None and not acknowledged,
             "escalated": escalated},
            now,
            alert=escalated and not state.escalated,
        ))
    return new_state, effects
