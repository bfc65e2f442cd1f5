"""Fire and gas response.

A flame signal or a gas concentration above threshold trips the full
response in a single step: siren, danger text on the LCD, red light,
sprayer and window servos open, a call to the owner, and SMS with the
building location to the owner, the fire station, and civil protection.
The alarm stands down only after both signals stay clear for a hold period.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from smartbuilding.core import Command, Reading, ReadingKind, ServiceId, SimClock
from smartbuilding.services import common

DANGER_TEXT = "There is Danger, Not safe here"
SAFE_ROUTE_AUDIO = "Danger detected. Follow the green lights to the safe exit."
ALL_CLEAR_TEXT = "All clear"


@dataclass(frozen=True)
class FireGasConfig:
    gas_threshold: float = 400.0
    clear_hold_ms: int = 10_000
    owner_phone: str = "+10000000001"
    fire_station_phone: str = "+10000000002"
    civil_protection_phone: str = "+10000000003"
    gps: Optional[tuple[float, float]] = (36.8065, 10.1815)


@dataclass(frozen=True)
class FireGasState:
    alarm_active: bool = False
    sprayer: bool = False
    window: str = "closed"
    safe_route_light: bool = False
    clear_since: Optional[int] = None
    last_flame: bool = False
    last_gas: float = 0.0

    def __post_init__(self) -> None:
        if self.alarm_active and not (self.sprayer or self.window == "open"):
            raise ValueError("active alarm requires an engaged response")


def initial_state(config: FireGasConfig) -> FireGasState:
    return FireGasState()


def _location(config: FireGasConfig) -> str:
    if config.gps is None:
        return "location unavailable"
    lat, lon = config.gps
    return f"location {lat:.4f},{lon:.4f}"


def firegas_step(state: FireGasState, readings: Sequence[Reading],
                 commands: Sequence[Command], clock: SimClock,
                 config: FireGasConfig) -> tuple[FireGasState, list]:
    now = clock.now
    effects = []

    flame = state.last_flame
    gas = state.last_gas
    metrics = {}
    for r in readings:
        if r.kind is ReadingKind.flame_bool:
            flame = bool(r.value)
            metrics["flame"] = 1 if flame else 0
        elif r.kind is ReadingKind.gas_ppm:
            gas = float(r.value)
            metrics["gas_ppm"] = gas

    danger = flame or gas > config.gas_threshold
    alarm = state.alarm_active
    sprayer = state.sprayer
    window = state.window
    safe_route = state.safe_route_light
    clear_since = state.clear_since

    if danger:
        clear_since = None
        if not alarm:
            alarm = True
            sprayer = True
            window = "open"
            safe_route = True
            where = _location(config)
            cause = "flame detected" if flame else f"gas {gas:.0f} ppm"
            message = f"Fire/gas alert: {cause}, {where}"
            effects.append(common.actuate("firegas-buzzer", True, now))
            effects.append(common.display("firegas-lcd", DANGER_TEXT, now))
            effects.append(common.actuate("firegas-red-led", True, now))
            effects.append(common.actuate("sprayer-servo", 90, now))
            effects.append(common.actuate("window-servo", 90, now))
            effects.append(common.call(config.owner_phone, message, now))
            effects.append(common.sms(config.owner_phone, message, now))
            effects.append(common.sms(config.fire_station_phone, message, now))
            effects.append(common.sms(config.civil_protection_phone, message, now))
            effects.append(common.actuate("safe-route-led", True, now))
            effects.append(common.audio("firegas-audio", SAFE_ROUTE_AUDIO, now))
    elif alarm:
        if clear_since is None:
            clear_since = now
        if now - clear_since >= config.clear_hold_ms:
            alarm = False
            sprayer = False
            window = "closed"
            safe_route = False
            clear_since = None
            effects.append(common.actuate("firegas-buzzer", False, now))
            effects.append(common.display("firegas-lcd", ALL_CLEAR_TEXT, now))
            effects.append(common.actuate("firegas-red-led", False, now))
            effects.append(common.actuate("sprayer-servo", 0, now))
            effects.append(common.actuate("window-servo", 0, now))
            effects.append(common.actuate("safe-route-led", False, now))

    new_state = FireGasState(alarm, sprayer, window, safe_route, clear_since,
                             flame, gas)
    if new_state != state:
        effects.append(common.ui(
            ServiceId.firegas,
            "alarm" if alarm and not state.alarm_active else "state",
            {"alarm_active": alarm, "sprayer": sprayer, "window": window,
             "flame": flame, "gas_ppm": gas},
            now,
            alert=alarm and not state.alarm_active,
        ))
    if metrics:
        effects.append(common.point(ServiceId.firegas, metrics, now))
    return new_state, effects
