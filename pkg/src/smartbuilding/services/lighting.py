"""Lighting: manual zone switches, an RGB strip, and presence automation.

The auto zone turns on when motion coincides with darkness and turns itself
off once the hold expires without fresh motion. Manual zones and the RGB
value only ever change by command; a bad RGB component rejects the command
rather than clamping it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from smartbuilding.core import Command, Reading, ReadingKind, ServiceId, SimClock
from smartbuilding.services import common

AUTO_ZONE = "auto"


@dataclass(frozen=True)
class LightingConfig:
    dark_lux: float = 50.0
    hold_ms: int = 30_000
    zones: tuple[str, ...] = ("main", AUTO_ZONE)


@dataclass(frozen=True)
class LightingState:
    lights: tuple[tuple[str, bool], ...]
    rgb: tuple[int, int, int] = (0, 0, 0)
    auto_light_on_until: Optional[int] = None
    last_lux: Optional[float] = None


def initial_state(config: LightingConfig) -> LightingState:
    return LightingState(lights=tuple(sorted((z, False) for z in config.zones)))


def _lights_dict(state: LightingState) -> dict[str, bool]:
    return dict(state.lights)


def lighting_step(state: LightingState, readings: Sequence[Reading],
                  commands: Sequence[Command], clock: SimClock,
                  config: LightingConfig) -> tuple[LightingState, list]:
    now = clock.now
    effects = []

    lights = _lights_dict(state)
    rgb = state.rgb
    until = state.auto_light_on_until
    lux = state.last_lux
    motion = False

    for r in readings:
        if r.kind is ReadingKind.light_lux:
            lux = float(r.value)
        elif r.kind is ReadingKind.motion_bool and r.value:
            motion = True

    for c in commands:
        if c.action == "set_light":
            zone = c.params.get("zone")
            on = c.params.get("on")
            if zone not in lights or not isinstance(on, bool):
                effects.append(common.ui(ServiceId.lighting, "rejected",
                                         {"action": c.action, "params": c.params}, now))
                continue
            lights[zone] = on
            if zone == AUTO_ZONE:
                until = None  # manual override cancels the pending expiry
        elif c.action == "set_rgb":
            value = c.params.get("rgb")
            ok = (isinstance(value, (list, tuple)) and len(value) == 3
                  and all(isinstance(comp, int) and not isinstance(comp, bool)
                          and 0 <= comp <= 255 for comp in value))
            if not ok:
                effects.append(common.ui(ServiceId.lighting, "rejected",
                                         {"action": c.action, "params": c.params}, now))
                continue
            rgb = tuple(value)
        else:
            effects.append(common.ui(ServiceId.lighting, "rejected",
                                     {"action": c.action}, now))

    if motion and lux is not None and lux < config.dark_lux:
        lights[AUTO_ZONE] = True
        until = now + config.hold_ms
    elif until is not None and now >= until:
        lights[AUTO_ZONE] = False
        until = None

    new_state = LightingState(tuple(sorted(lights.items())), rgb, until, lux)

    old_lights = _lights_dict(state)
    for zone in sorted(lights):
        if lights[zone] != old_lights.get(zone):
            effects.append(common.actuate(f"light-{zone}", lights[zone], now))
    if rgb != state.rgb:
        effects.append(common.actuate("rgb-main", list(rgb), now))

    changed = (lights != old_lights or rgb != state.rgb)
    if changed:
        effects.append(common.point(
            ServiceId.lighting,
            {"lights_on": sum(lights.values()),
             "lux": lux if lux is not None else -1},
            now,
        ))
        effects.append(common.ui(
            ServiceId.lighting, "state",
            {"lights": dict(sorted(lights.items())), "rgb": list(rgb)},
            now,
        ))
    elif lux is not None and lux != state.last_lux:
        effects.append(common.point(ServiceId.lighting, {"lux": lux}, now))
    if any(r.kind is ReadingKind.motion_bool for r in readings):
        effects.append(common.point(
            ServiceId.lighting, {"motion": 1 if motion else 0}, now))
    return new_state, effects
