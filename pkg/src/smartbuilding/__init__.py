"""Desk-scale smart-building platform.

Simulated sensors and actuators, a heterogeneous link layer, eight service
controllers written as pure step functions, a channel-based telemetry store
with an HTTP facade, and error-rate analytics over observed data.
"""

from smartbuilding.core import (
    BusClosedError,
    Command,
    Effect,
    EffectKind,
    EventBus,
    EventEnvelope,
    Origin,
    Reading,
    ReadingKind,
    ServiceId,
    SimClock,
)

__all__ = [
    "BusClosedError",
    "Command",
    "Effect",
    "EffectKind",
    "EventBus",
    "EventEnvelope",
    "Origin",
    "Reading",
    "ReadingKind",
    "ServiceId",
    "SimClock",
]

__version__ = "0.1.0"
