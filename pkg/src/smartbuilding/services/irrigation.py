"""Garden irrigation: hysteresis pump control, tank refill, grow lights.

The watering pump switches on at or below the dry threshold and off at or
above the wet threshold; between the two it holds its state so it never
chatters around a single set point. Every watering pump flip notifies the
owner by SMS and call.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from smartbuilding.core import Command, Reading, ReadingKind, ServiceId, SimClock
from smartbuilding.services import common


@dataclass(frozen=True)
class IrrigationConfig:
    dry_threshold: float = 30.0
    wet_threshold: float = 50.0
    tank_low: float = 20.0
    tank_full: float = 90.0
    tank_depth_cm: float = 100.0
    dark_lux: float = 50.0
    owner_phone: str = "+10000000001"

    def __post_init__(self) -> None:
        if not self.dry_threshold < self.wet_threshold:
            raise ValueError("dry_threshold must be below wet_threshold")
        if not self.tank_low < self.tank_full:
            raise ValueError("tank_low must be below tank_full")


@dataclass(frozen=True)
class IrrigationState:
    watering_pump: bool = False
    supply_pump: bool = False
    photo_leds: bool = False
    last_soil_pct: Optional[float] = None
    last_tank_pct: Optional[float] = None
    last_temp_C: Optional[float] = None
    last_hum_pct: Optional[float] = None
    last_lux: Optional[float] = None
    offline_alerted: bool = False


def initial_state(config: IrrigationConfig) -> IrrigationState:
    return IrrigationState()


def _tank_pct(distance_cm: float, depth_cm: float) -> float:
    # The tank sonar looks down at the water surface: near = full.
    pct = 100.0 * (1.0 - distance_cm / depth_cm)
    return min(100.0, max(0.0, pct))


def _is_night(clock: SimClock) -> bool:
    wall = clock.wall()
    if wall is None:
        return True  # unanchored runs let the lux threshold decide alone
    return wall.hour >= 18 or wall.hour < 6


def irrigation_step(state: IrrigationState, readings: Sequence[Reading],
                    commands: Sequence[Command], clock: SimClock,
                    config: IrrigationConfig) -> tuple[IrrigationState, list]:
    now = clock.now
    effects = []

    soil = state.last_soil_pct
    tank = state.last_tank_pct
    temp = state.last_temp_C
    hum = state.last_hum_pct
    lux = state.last_lux
    for r in readings:
        if r.kind is ReadingKind.soil_moisture_pct:
            soil = float(r.value)
        elif r.kind is ReadingKind.distance_cm:
            tank = _tank_pct(float(r.value), config.tank_depth_cm)
        elif r.kind is ReadingKind.temperature_C:
            temp = float(r.value)
        elif r.kind is ReadingKind.humidity_pct:
            hum = float(r.value)
        elif r.kind is ReadingKind.light_lux:
            lux = float(r.value)

    offline_alerted = state.offline_alerted
    if soil is None:
        if not offline_alerted:
            effects.append(common.ui(ServiceId.irrigation, "sensor_offline",
                                     {"sensor": "soil"}, now, alert=True))
            offline_alerted = True
        watering = state.watering_pump
    else:
        offline_alerted = False
        if soil <= config.dry_threshold:
            watering = True
        elif soil >= config.wet_threshold:
            watering = False
        else:
            watering = state.watering_pump

    supply = state.supply_pump
    if tank is not None:
        if tank < config.tank_low:
            supply = True
        elif tank >= config.tank_full:
            supply = False

    photo = state.photo_leds
    if lux is not None:
        photo = lux < config.dark_lux and _is_night(clock)

    if watering != state.watering_pump:
        effects.append(common.actuate("watering-pump", watering, now))
        text = f"Watering pump {'ON' if watering else 'OFF'}"
        effects.append(common.sms(config.owner_phone, text, now))
        effects.append(common.call(config.owner_phone, text, now))
    if supply != state.supply_pump:
        effects.append(common.actuate("supply-pump", supply, now))
        if supply:
            effects.append(common.sms(
                config.owner_phone,
                f"Water tank low ({tank:.0f}%), refill pump ON", now))
    if photo != state.photo_leds:
        effects.append(common.actuate("photo-leds", photo, now))

    new_state = IrrigationState(watering, supply, photo, soil, tank, temp, hum,
                                lux, offline_alerted)

    changed = (watering != state.watering_pump or supply != state.supply_pump
               or soil != state.last_soil_pct or tank != state.last_tank_pct)
    if changed:
        tank_txt = "--" if tank is None else f"{tank:.0f}%"
        soil_txt = "--" if soil is None else f"{soil:.0f}%"
        effects.append(common.display(
            "irrigation-lcd",
            f"Tank {tank_txt} Soil {soil_txt} Pump {'ON' if watering else 'OFF'}",
            now,
        ))
    if new_state != state:
        effects.append(common.ui(
            ServiceId.irrigation, "state",
            {
                "watering_pump": watering, "supply_pump": supply,
                "photo_leds": photo, "soil_pct": soil, "tank_pct": tank,
                "temp_C": temp, "hum_pct": hum,
            },
            now,
        ))
        metrics = {}
        if soil is not None:
            metrics["soil_pct"] = soil
        if tank is not None:
            metrics["tank_pct"] = tank
        if temp is not None:
            metrics["temp_C"] = temp
        if hum is not None:
            metrics["hum_pct"] = hum
        if metrics:
            effects.append(common.point(ServiceId.irrigation, metrics, now))
    return new_state, effects
