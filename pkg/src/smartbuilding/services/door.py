"""Keyless door: RFID, keypad, or remote open, with failure lockout.

Three consecutive bad attempts lock the door for a while; inside the lockout
even a whitelisted tag is denied. The door closes itself after a hold time.
Anyone approaching gets the sanitation reminder over the speaker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from smartbuilding.core import Command, Origin, Reading, ReadingKind, ServiceId, SimClock
from smartbuilding.services import common

REMINDER_TEXT = "Please disinfect your hands and take all health precautions."
OPEN_DEG = 90
CLOSED_DEG = 0


@dataclass(frozen=True)
class DoorConfig:
    password: str = "1234"
    whitelist: frozenset = frozenset()
    hold_ms: int = 5000
    lockout_after: int = 3
    lockout_ms: int = 60_000
    approach_cm: float = 100.0

    def __post_init__(self) -> None:
        if not (self.password.isdigit() and len(self.password) == 4):
            raise ValueError("password must be exactly 4 digits")
        object.__setattr__(self, "whitelist", frozenset(self.whitelist))


@dataclass(frozen=True)
class DoorState:
    door: str = "closed"
    whitelist: frozenset = frozenset()
    password: str = "1234"
    entry_buffer: str = ""
    failed_attempts: int = 0
    lockout_until: Optional[int] = None
    opened_at: Optional[int] = None
    near: bool = False
    denying: bool = False  # red LED + buzzer lit during the deny step

    def __post_init__(self) -> None:
        if len(self.entry_buffer) > len(self.password):
            raise ValueError("entry buffer cannot outgrow the password")


def initial_state(config: DoorConfig) -> DoorState:
    return DoorState(whitelist=config.whitelist, password=config.password)


def door_step(state: DoorState, readings: Sequence[Reading],
              commands: Sequence[Command], clock: SimClock,
              config: DoorConfig) -> tuple[DoorState, list]:
    now = clock.now
    effects = []

    door = state.door
    buffer = state.entry_buffer
    failed = state.failed_attempts
    lockout_until = state.lockout_until
    opened_at = state.opened_at
    denied = False
    opened = False

    if lockout_until is not None and now >= lockout_until:
        lockout_until = None
        failed = 0

    def locked_out() -> bool:
        return lockout_until is not None and now < lockout_until

    near = state.near
    attempts: list[bool] = []  # success per access attempt, in order
    for r in readings:
        if r.kind is ReadingKind.rfid_uid:
            attempts.append(r.value in state.whitelist)
        elif r.kind is ReadingKind.keypress:
            for ch in r.value:
                buffer += ch
                if len(buffer) == len(state.password):
                    attempts.append(buffer == state.password)
                    buffer = ""
        elif r.kind is ReadingKind.motion_bool:
            if r.value and not state.near:
                effects.append(common.audio("door-audio", REMINDER_TEXT, now))
            near = bool(r.value)
        elif r.kind is ReadingKind.distance_cm:
            is_near = r.value < config.approach_cm
            if is_near and not state.near:
                effects.append(common.audio("door-audio", REMINDER_TEXT, now))
            near = is_near

    for c in commands:
        if c.action == "open":
            if c.origin is Origin.rfid:
                effects.append(common.ui(ServiceId.door, "rejected",
                                         {"reason": "rfid is not a remote channel"}, now))
            else:
                attempts.append(True)
        elif c.action == "close":
            if door == "open":
                door = "closed"
                opened_at = None
                effects.append(common.actuate("door-servo", CLOSED_DEG, now))
                effects.append(common.actuate("door-green-led", False, now))
        else:
            effects.append(common.ui(ServiceId.door, "rejected", {"action": c.action}, now))

    for success in attempts:
        if locked_out() or not success:
            denied = True
            if not locked_out():
                failed += 1
                if failed >= config.lockout_after:
                    lockout_until = now + config.lockout_ms
        else:
            door = "open"
            opened_at = now
            failed = 0
            opened = True

    if denied:
        effects.append(common.actuate("door-red-led", True, now))
        effects.append(common.actuate("door-buzzer", True, now))
        effects.append(common.display("door-lcd", "Access denied", now))
    elif opened:
        effects.append(common.actuate("door-servo", OPEN_DEG, now))
        effects.append(common.actuate("door-green-led", True, now))
        effects.append(common.display("door-lcd", "Access granted", now))

    if not denied and state.denying:
        effects.append(common.actuate("door-red-led", False, now))
        effects.append(common.actuate("door-buzzer", False, now))

    if door == "open" and opened_at is not None and not opened:
        if now - opened_at >= config.hold_ms:
            door = "closed"
            opened_at = None
            effects.append(common.actuate("door-servo", CLOSED_DEG, now))
            effects.append(common.actuate("door-green-led", False, now))

    new_state = DoorState(door, state.whitelist, state.password, buffer, failed,
                          lockout_until, opened_at, near, denied)
    if new_state != state:
        effects.append(common.ui(
            ServiceId.door, "state",
            {"door": door, "failed_attempts": failed, "locked_out": locked_out()},
            now,
            alert=locked_out() and not (state.lockout_until is not None and state.lockout_until > now),
        ))
    return new_state, effects
