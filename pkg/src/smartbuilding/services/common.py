"""Effect constructors shared by the service controllers."""

from __future__ import annotations

from typing import Any, Optional

from smartbuilding.core import Effect, EffectKind, ServiceId


def actuate(target: str, state: Any, t: int) -> Effect:
    return Effect(EffectKind.actuate, target, {"state": state}, t)


def display(target: str, text: str, t: int) -> Effect:
    return Effect(EffectKind.display_text, target, {"text": text}, t)


def audio(target: str, text: str, t: int) -> Effect:
    return Effect(EffectKind.audio, target, {"text": text}, t)


def sms(recipient: str, message: str, t: int) -> Effect:
    return Effect(EffectKind.alert_sms, recipient, {"recipient": recipient, "message": message}, t)


def call(recipient: str, message: str, t: int) -> Effect:
    return Effect(EffectKind.alert_call, recipient, {"recipient": recipient, "message": message}, t)


def point(service: ServiceId, metrics: dict, t: int) -> Effect:
    """Telemetry sample; the pump maps metrics onto channel fields."""
    return Effect(EffectKind.telemetry_point, service.value, {"metrics": metrics}, t)


def ui(service: ServiceId, event: str, state: dict, t: int, alert: bool = False,
       extra: Optional[dict] = None) -> Effect:
    payload = {"event": event, "state": state, "alert": alert}
    if extra:
        payload.update(extra)
    return Effect(EffectKind.ui_event, service.value, payload, t)
