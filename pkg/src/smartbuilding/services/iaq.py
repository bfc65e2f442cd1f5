"""Indoor air quality classifier and its actuator policy.

Three bands over the ppm signal: below 130 is good, 130 through 250 is
medium (fan only), strictly above 250 is danger (fan, purifier, siren,
red light). The band edges are part of the product's contract and are
deliberately not configurable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from smartbuilding.core import Command, Reading, ReadingKind, ServiceId, SimClock
from smartbuilding.services import common

GOOD_BELOW = 130.0
DANGER_ABOVE = 250.0

DISPLAY = {
    "good": "Air Quality Level Good",
    "medium": "Air Quality Level Medium",
    "danger": "Air Quality Level Danger",
}

_SEVERITY = {"good": 0, "medium": 1, "danger": 2}


def classify(ppm: float) -> str:
    if ppm < 0:
        raise ValueError(f"ppm must be non-negative, got {ppm}")
    if ppm < GOOD_BELOW:
        return "good"
    if ppm <= DANGER_ABOVE:
        return "medium"
    return "danger"


def severity(level: str) -> int:
    return _SEVERITY[level]


@dataclass(frozen=True)
class IaqConfig:
    pass  # band edges are fixed; nothing to configure yet


@dataclass(frozen=True)
class IaqState:
    level: Optional[str] = None
    fan: bool = False
    purifier: bool = False
    buzzer: bool = False
    last_ppm: Optional[float] = None

    def __post_init__(self) -> None:
        if self.level == "good" and self.fan:
            raise ValueError("good air never runs the fan")
        if self.level == "danger" and not (self.fan and self.purifier and self.buzzer):
            raise ValueError("danger engages fan, purifier and buzzer")


def initial_state(config: IaqConfig) -> IaqState:
    return IaqState()


_POLICY = {
    # level -> (fan, purifier, buzzer, red led)
    "good": (False, False, False, False),
    "medium": (True, False, False, False),
    "danger": (True, True, True, True),
}


def iaq_step(state: IaqState, readings: Sequence[Reading],
             commands: Sequence[Command], clock: SimClock,
             config: IaqConfig) -> tuple[IaqState, list]:
    now = clock.now
    effects = []

    ppm = None
    for r in readings:
        if r.kind is ReadingKind.iaq_ppm:
            ppm = float(r.value)
    if ppm is None:
        return state, effects

    level = classify(ppm)
    fan, purifier, buzzer, red = _POLICY[level]

    if level != state.level:
        effects.append(common.actuate("iaq-fan", fan, now))
        effects.append(common.actuate("iaq-purifier", purifier, now))
        effects.append(common.actuate("iaq-buzzer", buzzer, now))
        effects.append(common.actuate("iaq-red-led", red, now))
        effects.append(common.display("iaq-lcd", DISPLAY[level], now))

    effects.append(common.point(ServiceId.iaq, {"ppm": ppm}, now))
    effects.append(common.ui(
        ServiceId.iaq,
        "level" if level != state.level else "sample",
        {"level": level, "ppm": ppm, "fan": fan, "purifier": purifier},
        now,
        alert=level == "danger" and state.level != "danger",
    ))

    return IaqState(level, fan, purifier, buzzer, ppm), effects
