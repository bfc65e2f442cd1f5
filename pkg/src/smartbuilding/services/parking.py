"""Parking controller: slot occupancy, the entry gate, and cloud summaries.

Occupancy comes from one infrared sensor per slot. An arrival command opens
the gate when a slot is free and refuses (with the full audio message) when
the lot is full. A summary telemetry point goes out every cloud period.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from smartbuilding.core import Command, Reading, ReadingKind, ServiceId, SimClock
from smartbuilding.services import common

REFUSAL_TEXT = (
    "sorry, this parking lot is full, you can search for another available "
    "parking lot via the Raniso app."
)
WELCOME_TEXT = "Welcome! A slot is free, the gate is opening."


@dataclass(frozen=True)
class ParkingConfig:
    slot_count: int = 4
    cloud_period_ms: int = 30_000
    gate_hold_ms: int = 5000


@dataclass(frozen=True)
class ParkingState:
    slots: tuple[bool, ...]  # True = occupied
    gate: str = "closed"
    last_cloud_update: int = 0
    gate_opened_at: Optional[int] = None


def initial_state(config: ParkingConfig) -> ParkingState:
    return ParkingState(slots=(False,) * config.slot_count)


_TRAILING_INT = re.compile(r"(\d+)$")


def _slot_index(device: str, slot_count: int) -> int:
    m = _TRAILING_INT.search(device)
    if not m:
        raise ValueError(f"cannot find a slot index in device name {device!r}")
    ix = int(m.group(1))
    if ix >= slot_count:
        raise ValueError(f"slot index {ix} out of range (slot count {slot_count})")
    return ix


def _free_list(slots: Sequence[bool]) -> list[int]:
    return [i for i, occupied in enumerate(slots) if not occupied]


def _lcd_text(slots: Sequence[bool]) -> str:
    free = _free_list(slots)
    if not free:
        return "Parking full"
    return "Free slots: " + ", ".join(str(i + 1) for i in free)


def parking_step(state: ParkingState, readings: Sequence[Reading],
                 commands: Sequence[Command], clock: SimClock,
                 config: ParkingConfig) -> tuple[ParkingState, list]:
    now = clock.now
    effects = []

    slots = list(state.slots)
    for r in readings:
        if r.kind is not ReadingKind.ir_occupied_bool:
            continue
        slots[_slot_index(r.device, config.slot_count)] = r.value
    slots = tuple(slots)
    occupancy_changed = slots != state.slots

    gate = state.gate
    gate_opened_at = state.gate_opened_at
    arrivals = [c for c in commands if c.action == "arrival"]
    for _ in arrivals:
        if _free_list(slots):
            gate = "open"
            gate_opened_at = now
            effects.append(common.audio("parking-audio", WELCOME_TEXT, now))
        else:
            gate = "closed"
            gate_opened_at = None
            effects.append(common.audio("parking-audio", REFUSAL_TEXT, now))

    if gate == "open" and gate_opened_at is not None and not arrivals:
        if now - gate_opened_at >= config.gate_hold_ms:
            gate = "closed"
            gate_opened_at = None

    if gate != state.gate:
        effects.append(common.actuate("parking-gate", gate, now))

    if occupancy_changed or arrivals:
        effects.append(common.display("parking-lcd", _lcd_text(slots), now))

    last_cloud = state.last_cloud_update
    if now - last_cloud >= config.cloud_period_ms and now > 0:
        free = _free_list(slots)
        metrics = {"free_count": len(free)}
        for i, occupied in enumerate(slots):
            metrics[f"slot{i + 1}"] = 1 if occupied else 0
        effects.append(common.point(ServiceId.parking, metrics, now))
        last_cloud = now

    new_state = ParkingState(slots, gate, last_cloud, gate_opened_at)
    if new_state != state or arrivals:
        effects.append(common.ui(
            ServiceId.parking, "state",
            {"slots": list(slots), "gate": gate, "free_count": len(_free_list(slots))},
            now,
        ))
    assert len(_free_list(slots)) + sum(slots) == config.slot_count
    return new_state, effects
