"""The simulation loop: wires sensors, links, services, telemetry and the
event log together and drives them on a fixed tick.

Everything observable about a run lands in the out directory:

    events.jsonl      every reading/command/effect, one JSON object per line
    deliveries.jsonl  every routed message with link, latency and cost
    snapshot.json     final service states, actuator values, link counters
    channels/         the telemetry store's per-channel entry logs
    meta.json         scenario identity plus the actuator roster for replay

Runs are deterministic: same scenario, same seed, same bytes. Replay
reconstructs the final snapshot from events.jsonl alone and cross-checks it.
"""

from __future__ import annotations

import heapq
import json
import os
import threading
from datetime import datetime
from typing import Any, Callable, Optional

from smartbuilding.config import PlatformConfig, TelemetryConfig, build as build_config
from smartbuilding.core import (
    Command,
    Effect,
    EffectKind,
    EventBus,
    Reading,
    ServiceId,
    SimClock,
    body_from_dict,
    envelope_to_dict,
)
from smartbuilding.devices import (
    ActuatorKind,
    ActuatorRegistry,
    Scenario,
    sample_sensor,
    service_for,
)
from smartbuilding.hetnet import (
    DeliveryRecord,
    LinkKind,
    LinkTable,
    Message,
    MessageClass,
)
from smartbuilding.services import door, firegas, iaq, intrusion, irrigation, lighting, medicine, parking
from smartbuilding.telemetry import ChannelStore, TelemetryPump, default_channels

_SERVICES: dict[ServiceId, Any] = {
    ServiceId.parking: parking,
    ServiceId.irrigation: irrigation,
    ServiceId.intrusion: intrusion,
    ServiceId.door: door,
    ServiceId.firegas: firegas,
    ServiceId.lighting: lighting,
    ServiceId.medicine: medicine,
    ServiceId.iaq: iaq,
}

_ALERT_CLASS = {
    EffectKind.alert_sms: MessageClass.sms_alert,
    EffectKind.alert_call: MessageClass.call_alert,
}


def default_actuators(config: PlatformConfig) -> dict[str, ActuatorKind]:
    """Every device name the stock controllers actuate, with its kind."""
    table = {
        "parking-gate": ActuatorKind.gate,
        "parking-lcd": ActuatorKind.lcd_text,
        "parking-audio": ActuatorKind.speaker_text,
        "watering-pump": ActuatorKind.pump_bool,
        "supply-pump": ActuatorKind.pump_bool,
        "photo-leds": ActuatorKind.led_bool,
        "irrigation-lcd": ActuatorKind.lcd_text,
        "intrusion-red-led": ActuatorKind.led_bool,
        "intrusion-lcd": ActuatorKind.lcd_text,
        "intrusion-audio": ActuatorKind.speaker_text,
        "door-servo": ActuatorKind.servo_deg,
        "door-green-led": ActuatorKind.led_bool,
        "door-red-led": ActuatorKind.led_bool,
        "door-buzzer": ActuatorKind.buzzer_bool,
        "door-audio": ActuatorKind.speaker_text,
        "door-lcd": ActuatorKind.lcd_text,
        "firegas-buzzer": ActuatorKind.buzzer_bool,
        "firegas-lcd": ActuatorKind.lcd_text,
        "firegas-red-led": ActuatorKind.led_bool,
        "firegas-audio": ActuatorKind.speaker_text,
        "sprayer-servo": ActuatorKind.servo_deg,
        "window-servo": ActuatorKind.servo_deg,
        "safe-route-led": ActuatorKind.led_bool,
        "rgb-main": ActuatorKind.rgb_led,
        "medicine-speaker": ActuatorKind.speaker_text,
        "medicine-led": ActuatorKind.led_bool,
        "iaq-fan": ActuatorKind.fan_bool,
        "iaq-purifier": ActuatorKind.purifier_bool,
        "iaq-buzzer": ActuatorKind.buzzer_bool,
        "iaq-red-led": ActuatorKind.led_bool,
        "iaq-lcd": ActuatorKind.lcd_text,
    }
    for zone in config.lighting.zones:
        table[f"light-{zone}"] = ActuatorKind.led_bool
    return table


def _parse_wall_start(text: Optional[str]) -> Optional[datetime]:
    if text is None:
        return None
    return datetime.fromisoformat(text)


class Runtime:
    """One scenario run. Thread-safe enough for a server thread to step it
    while HTTP handlers read snapshots and inject commands."""

    def __init__(self, scenario: Scenario, config: Optional[PlatformConfig] = None,
                 out_dir: Optional[str] = None) -> None:
        self.scenario = scenario
        self.config = config if config is not None else build_config(scenario.config)
        self.out_dir = out_dir

        self.bus = EventBus()
        self.registry = ActuatorRegistry()
        for device, kind in scenario.actuators:
            self.registry.declare(device, kind)
        declared = {d for d, _ in scenario.actuators}
        self._actuator_roster = dict(scenario.actuators)
        for device, kind in default_actuators(self.config).items():
            if device not in declared:
                self.registry.declare(device, kind)
                self._actuator_roster[device] = kind

        self.links = LinkTable()
        persist = os.path.join(out_dir, "channels") if out_dir else None
        anchor = _parse_wall_start(scenario.wall_start)
        store_kwargs: dict[str, Any] = {
            "persist_dir": persist,
            "min_interval_ms": self.config.telemetry.min_interval_ms,
        }
        if anchor is not None:
            from datetime import timezone
            store_kwargs["anchor"] = anchor.replace(tzinfo=anchor.tzinfo or timezone.utc)
        self.store = ChannelStore(default_channels(), **store_kwargs)
        self.pump = TelemetryPump(flush_period_ms=self.config.telemetry.flush_period_ms)

        self._clock = SimClock(0, anchor)
        self._prev_now: Optional[int] = None
        self._finished = False
        self._lock = threading.RLock()
        self._inbox: list[Command] = []
        self._pending: list[tuple[int, int, DeliveryRecord]] = []
        self._pending_n = 0
        self._msg_n = 0
        self._link_cursor = 0
        self._cmd_cursor = 0
        self._ui: dict[str, dict] = {}

        self._states: dict[ServiceId, Any] = {
            sid: mod.initial_state(self.config.for_service(sid))
            for sid, mod in _SERVICES.items()
        }
        # the occupancy channel has data from the first flush on; the other
        # channels are fed by first-tick sensor points
        slots = self.config.parking.slot_count
        baseline = {"free_count": slots}
        baseline.update({f"slot{i}": 0 for i in range(1, slots + 1)})
        self.pump.seed(ServiceId.parking.value, baseline, 0)

    # -- observability ------------------------------------------------------

    @property
    def finished(self) -> bool:
        return self._finished

    @property
    def now(self) -> int:
        return self._clock.now

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "t": self._prev_now if self._prev_now is not None else 0,
                "seq": self.bus.last_seq,
                "finished": self._finished,
                "services": {sid.value: self._ui.get(sid.value) for sid in ServiceId},
                "actuators": self.registry.snapshot_values(),
                "links": {**self.links.counts(), "total_cost": self.links.total_cost},
                "channels": {str(cid): len(rows) for cid, rows in self.store.entries.items()},
            }

    # -- external ingress ---------------------------------------------------

    def submit_command(self, raw: Command, via: LinkKind = LinkKind.wifi) -> Command:
        """Queue an externally-injected command for the next tick.

        Raises LinkDownError when the ingress link is unavailable, so callers
        can surface the refusal immediately.
        """
        with self._lock:
            if self._finished:
                raise RuntimeError("run already finished")
            from dataclasses import replace
            mapped = self.links.deliver_inbound(raw, via)
            mapped = replace(mapped, t=self._clock.now)
            self._inbox.append(mapped)
            return mapped

    # -- the loop -----------------------------------------------------------

    def _queue_record(self, record: DeliveryRecord) -> None:
        self._pending_n += 1
        heapq.heappush(self._pending, (record.deliver_at, self._pending_n, record))

    def _apply_delivery(self, record: DeliveryRecord) -> None:
        if record.msg_class is MessageClass.telemetry:
            payload = record.payload
            self.store.append_internal(payload["channel_id"], payload["fields"], payload["t"])

    def _process_effect(self, service: ServiceId, effect: Effect, now: int) -> None:
        self.bus.publish(effect)
        kind = effect.kind
        if kind is EffectKind.actuate:
            self.registry.apply_command(effect)
        elif kind in (EffectKind.display_text, EffectKind.audio):
            if effect.target in self._actuator_roster:
                self.registry.apply_command(Effect(
                    EffectKind.actuate, effect.target,
                    {"state": effect.payload["text"]}, effect.t))
        elif kind is EffectKind.telemetry_point:
            self.pump.observe(effect)
        elif kind is EffectKind.ui_event:
            self._ui[effect.target] = dict(effect.payload)
        elif kind in _ALERT_CLASS:
            self._msg_n += 1
            msg = Message(
                id=f"{kind.value}-{self._msg_n}",
                msg_class=_ALERT_CLASS[kind],
                payload={"message": effect.payload["message"], "service": service.value},
                recipient=effect.payload["recipient"],
            )
            record = self.links.send_message(msg, self._clock)
            if record is not None:
                self._queue_record(record)

    def step(self) -> None:
        """Process exactly one tick."""
        with self._lock:
            if self._finished:
                return
            now = self._clock.now

            # 1. link availability schedule
            links = self.scenario.links
            while self._link_cursor < len(links) and links[self._link_cursor][0] <= now:
                _, kind, available = links[self._link_cursor]
                self._link_cursor += 1
                for record in self.links.set_available(LinkKind(kind), available, self._clock):
                    self._queue_record(record)

            # 2. in-flight messages whose latency has elapsed
            while self._pending and self._pending[0][0] <= now:
                _, _, record = heapq.heappop(self._pending)
                self._apply_delivery(record)

            # 3. sensor sampling
            readings_by_service: dict[ServiceId, list[Reading]] = {sid: [] for sid in ServiceId}
            for spec in self.scenario.sensors:
                if now % spec.period_ms != 0:
                    continue
                reading = sample_sensor(spec, now, seed=self.scenario.seed)
                if reading is None:
                    continue
                self.bus.publish(reading)
                service = service_for(spec)
                if service is not None:
                    readings_by_service[service].append(reading)

            # 4. commands: scenario schedule, then externally injected
            commands_by_service: dict[ServiceId, list[Command]] = {sid: [] for sid in ServiceId}
            sched = self.scenario.commands
            while self._cmd_cursor < len(sched) and sched[self._cmd_cursor].t <= now:
                cmd = sched[self._cmd_cursor]
                self._cmd_cursor += 1
                self.bus.publish(cmd)
                commands_by_service[cmd.service].append(cmd)
            for cmd in self._inbox:
                self.bus.publish(cmd)
                commands_by_service[cmd.service].append(cmd)
            self._inbox.clear()

            # 5. service steps, fixed order
            for sid, mod in _SERVICES.items():
                kwargs: dict[str, Any] = {}
                if sid is ServiceId.medicine:
                    kwargs["prev_now"] = self._prev_now
                state, effects = getattr(mod, f"{sid.value}_step")(
                    self._states[sid],
                    readings_by_service[sid],
                    commands_by_service[sid],
                    self._clock,
                    self.config.for_service(sid),
                    **kwargs,
                )
                self._states[sid] = state
                for effect in effects:
                    self._process_effect(sid, effect, now)

            # 6. telemetry flush on its own cadence
            if self.pump.due(now):
                for channel_id, fields, t_meas in self.pump.flush(now):
                    self._msg_n += 1
                    msg = Message(
                        id=f"telemetry-{channel_id}-{self._msg_n}",
                        msg_class=MessageClass.telemetry,
                        payload={"channel_id": channel_id, "fields": fields, "t": t_meas},
                        recipient="",
                    )
                    record = self.links.send_message(msg, self._clock)
                    if record is not None:
                        self._queue_record(record)

            # 7. advance or finish
            self._prev_now = now
            if now + self.scenario.tick_ms > self.scenario.duration_ms:
                self._finish()
            else:
                self._clock = self._clock.advance(self.scenario.tick_ms)

    def _finish(self) -> None:
        # drain every in-flight message past the horizon; nothing routed may
        # be lost just because the run ended mid-latency
        while self._pending:
            _, _, record = heapq.heappop(self._pending)
            self._apply_delivery(record)
        self._finished = True
        self.bus.close()
        self._write_artifacts()

    def run(self) -> dict:
        while not self._finished:
            self.step()
        return self.snapshot()

    # -- artifacts ----------------------------------------------------------

    def _write_artifacts(self) -> None:
        if not self.out_dir:
            return
        os.makedirs(self.out_dir, exist_ok=True)
        with open(os.path.join(self.out_dir, "events.jsonl"), "w", encoding="utf-8") as fh:
            for env in self.bus.poll(0):
                fh.write(json.dumps(envelope_to_dict(env), sort_keys=True) + "\n")
        with open(os.path.join(self.out_dir, "deliveries.jsonl"), "w", encoding="utf-8") as fh:
            for rec in self.links.deliveries:
                fh.write(json.dumps({
                    "msg_id": rec.msg_id,
                    "link": rec.kind.value,
                    "sent_at": rec.sent_at,
                    "deliver_at": rec.deliver_at,
                    "cost": rec.cost,
                    "class": rec.msg_class.value,
                    "recipient": rec.recipient,
                    "payload": rec.payload,
                }, sort_keys=True) + "\n")
        with open(os.path.join(self.out_dir, "snapshot.json"), "w", encoding="utf-8") as fh:
            json.dump(self.snapshot(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        with open(os.path.join(self.out_dir, "meta.json"), "w", encoding="utf-8") as fh:
            json.dump({
                "name": self.scenario.name,
                "seed": self.scenario.seed,
                "duration_ms": self.scenario.duration_ms,
                "tick_ms": self.scenario.tick_ms,
                "wall_start": self.scenario.wall_start,
                "final_seq": self.bus.last_seq,
                "actuators": {d: k.value for d, k in sorted(self._actuator_roster.items())},
            }, fh, sort_keys=True, indent=2)
            fh.write("\n")


# -- replay -----------------------------------------------------------------

def replay(out_dir: str) -> dict:
    """Rebuild service UI states and actuator values from events.jsonl."""
    with open(os.path.join(out_dir, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    registry = ActuatorRegistry()
    for device, kind in meta["actuators"].items():
        registry.declare(device, ActuatorKind(kind))
    roster = set(meta["actuators"])
    ui: dict[str, Optional[dict]] = {sid.value: None for sid in ServiceId}

    last_seq = 0
    with open(os.path.join(out_dir, "events.jsonl"), encoding="utf-8") as fh:
        for line in fh:
            d = json.loads(line)
            if d["seq"] != last_seq + 1:
                raise ValueError(f"event log gap at seq {d['seq']}")
            last_seq = d["seq"]
            body = body_from_dict(d)
            if not isinstance(body, Effect):
                continue
            if body.kind is EffectKind.actuate:
                registry.apply_command(body)
            elif body.kind in (EffectKind.display_text, EffectKind.audio):
                if body.target in roster:
                    registry.apply_command(Effect(
                        EffectKind.actuate, body.target,
                        {"state": body.payload["text"]}, body.t))
            elif body.kind is EffectKind.ui_event:
                ui[body.target] = dict(body.payload)

    return {
        "seq": last_seq,
        "services": ui,
        "actuators": registry.snapshot_values(),
    }


def verify_replay(out_dir: str) -> bool:
    """True when replaying the event log reproduces the recorded snapshot."""
    with open(os.path.join(out_dir, "snapshot.json"), encoding="utf-8") as fh:
        snap = json.load(fh)
    rebuilt = replay(out_dir)
    return all(rebuilt[key] == snap[key] for key in ("seq", "services", "actuators"))
