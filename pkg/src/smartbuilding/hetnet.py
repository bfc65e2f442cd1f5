"""Heterogeneous link layer: profiles, convergence, selection, and delivery.

Five link kinds in three families. Outbound traffic picks the best available
link for its message class from a fixed preference table; messages with no
route wait in a bounded retry queue that is re-run on every availability
change, so behavior stays deterministic (no timers).
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional

from smartbuilding.core import Command, Origin, SimClock


class LinkKind(str, Enum):
    rfid = "rfid"
    bluetooth = "bluetooth"
    wifi = "wifi"
    gsm = "gsm"
    lte = "lte"

    @property
    def family(self) -> str:
        if self in (LinkKind.rfid, LinkKind.bluetooth):
            return "wpan"
        if self is LinkKind.wifi:
            return "wlan"
        return "wwan"


_RANGE_CLASS = {
    LinkKind.rfid: "short",
    LinkKind.bluetooth: "short",
    LinkKind.wifi: "local",
    LinkKind.gsm: "wide",
    LinkKind.lte: "wide",
}

_DEFAULT_LATENCY_MS = {
    LinkKind.rfid: 5,
    LinkKind.bluetooth: 40,
    LinkKind.wifi: 20,
    LinkKind.lte: 60,
    LinkKind.gsm: 3000,
}


@dataclass(frozen=True)
class LinkProfile:
    kind: LinkKind
    available: bool = True
    latency_ms: float = 0
    cost_units: float = 0.0

    def __post_init__(self) -> None:
        if self.latency_ms <= 0:
            object.__setattr__(self, "latency_ms", _DEFAULT_LATENCY_MS[self.kind])
        if self.cost_units < 0:
            raise ValueError("cost_units must be non-negative")

    @property
    def range_class(self) -> str:
        return _RANGE_CLASS[self.kind]

    @property
    def supports_sms_call(self) -> bool:
        return self.kind is LinkKind.gsm


def default_profiles() -> dict[LinkKind, LinkProfile]:
    out = {}
    for kind in LinkKind:
        cost = 1.0 if kind is LinkKind.gsm else 0.0
        out[kind] = LinkProfile(kind, available=True, cost_units=cost)
    return out


@dataclass(frozen=True)
class ConvergenceClass:
    device: bool
    protocol: bool
    service: bool

    @property
    def full(self) -> bool:
        return self.device and self.protocol and self.service


def classify_convergence(device: bool, protocol: bool, service: bool) -> ConvergenceClass:
    return ConvergenceClass(device, protocol, service)


class MessageClass(str, Enum):
    local_command = "local_command"
    remote_command = "remote_command"
    telemetry = "telemetry"
    sms_alert = "sms_alert"
    call_alert = "call_alert"


# Strict total preference per class; absent kinds are never used for it.
PREFERENCE: dict[MessageClass, tuple[LinkKind, ...]] = {
    MessageClass.local_command: (LinkKind.bluetooth, LinkKind.wifi, LinkKind.lte, LinkKind.gsm),
    MessageClass.remote_command: (LinkKind.wifi, LinkKind.lte, LinkKind.gsm),
    MessageClass.telemetry: (LinkKind.wifi, LinkKind.lte),
    MessageClass.sms_alert: (LinkKind.gsm,),
    MessageClass.call_alert: (LinkKind.gsm,),
}

_PHONEISH = re.compile(r"^\+?[0-9][0-9 \-]*$")


@dataclass(frozen=True)
class Message:
    id: str
    msg_class: MessageClass
    payload: Any
    recipient: str
    attempts: int = 0

    def __post_init__(self) -> None:
        if self.msg_class in (MessageClass.sms_alert, MessageClass.call_alert):
            if not _PHONEISH.match(self.recipient):
                raise ValueError(f"alert recipient must look like a phone number: {self.recipient!r}")


@dataclass(frozen=True)
class DeliveryRecord:
    msg_id: str
    kind: LinkKind
    sent_at: int
    deliver_at: int
    cost: float
    msg_class: MessageClass
    payload: Any = None
    recipient: str = ""


def select_link(links: dict[LinkKind, LinkProfile], msg_class: MessageClass) -> Optional[LinkKind]:
    """First available kind in the class's preference order; None = no route."""
    for kind in PREFERENCE[msg_class]:
        profile = links.get(kind)
        if profile is not None and profile.available:
            return kind
    return None


_VIA_TO_ORIGIN = {
    LinkKind.bluetooth: Origin.bluetooth,
    LinkKind.wifi: Origin.wifi,
    LinkKind.gsm: Origin.cellular,
    LinkKind.lte: Origin.cellular,
    LinkKind.rfid: Origin.rfid,
}


class LinkDownError(RuntimeError):
    pass


class LinkTable:
    """Owns link state, the retry queue, and delivery/drop records.

    Mutated only by the simulation loop. Outcomes per message: exactly one of
    delivered, queued, dropped; a queued message later moves to delivered (on
    an availability change that opens a route) or dropped (queue overflow).
    """

    def __init__(self, profiles: Optional[dict[LinkKind, LinkProfile]] = None,
                 retry_cap: int = 1024) -> None:
        self.profiles = dict(profiles) if profiles is not None else default_profiles()
        self.retry_cap = retry_cap
        self.retry_queue: deque[Message] = deque()
        self.deliveries: list[DeliveryRecord] = []
        self.drops: list[Message] = []
        self.total_cost = 0.0

    def _dispatch(self, msg: Message, now: int) -> Optional[DeliveryRecord]:
        kind = select_link(self.profiles, msg.msg_class)
        if kind is None:
            return None
        profile = self.profiles[kind]
        record = DeliveryRecord(
            msg_id=msg.id,
            kind=kind,
            sent_at=now,
            deliver_at=now + int(profile.latency_ms),
            cost=profile.cost_units,
            msg_class=msg.msg_class,
            payload=msg.payload,
            recipient=msg.recipient,
        )
        self.deliveries.append(record)
        self.total_cost += profile.cost_units
        return record

    def send_message(self, msg: Message, clock: SimClock) -> Optional[DeliveryRecord]:
        """Send now or park for retry; None means queued or dropped."""
        msg = replace(msg, attempts=msg.attempts + 1)
        record = self._dispatch(msg, clock.now)
        if record is not None:
            return record
        if len(self.retry_queue) >= self.retry_cap:
            self.drops.append(msg)
            return None
        self.retry_queue.append(msg)
        return None

    def set_available(self, kind: LinkKind, available: bool, clock: SimClock) -> list[DeliveryRecord]:
        """Flip one link and re-run the retry queue; returns new deliveries."""
        profile = self.profiles[kind]
        if profile.available == available:
            return []
        self.profiles[kind] = replace(profile, available=available)
        flushed: list[DeliveryRecord] = []
        still_waiting: deque[Message] = deque()
        while self.retry_queue:
            msg = self.retry_queue.popleft()
            msg = replace(msg, attempts=msg.attempts + 1)
            record = self._dispatch(msg, clock.now)
            if record is None:
                still_waiting.append(msg)
            else:
                flushed.append(record)
        self.retry_queue = still_waiting
        return flushed

    def deliver_inbound(self, raw: Command, via: LinkKind) -> Command:
        profile = self.profiles.get(via)
        if profile is None or not profile.available:
            raise LinkDownError(f"link down: {via.value}")
        # Assistant-tagged commands keep their voice origin; the link is
        # just the transport in that case.
        if raw.origin is Origin.voice:
            return raw
        return replace(raw, origin=_VIA_TO_ORIGIN[via])

    def counts(self) -> dict[str, int]:
        return {
            "delivered": len(self.deliveries),
            "queued": len(self.retry_queue),
            "dropped": len(self.drops),
        }
