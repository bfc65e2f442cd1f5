"""Channel telemetry: a small write/read feed store plus the pump that
feeds it from service telemetry points.

The store speaks the common channel convention: writes carry an api_key and
field1..field8 values and get back the new entry id as text, or "0" when the
key is wrong or the channel is rate-limited. Entries persist to one
append-only JSONL file per channel; a corrupt tail (torn final write) is
truncated on reload. Entry ids stay gapless across restarts.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Any, Optional, Sequence

from smartbuilding.core import Effect, EffectKind, ServiceId

log = logging.getLogger(__name__)

FIELD_KEYS = tuple(f"field{i}" for i in range(1, 9))
DEFAULT_ANCHOR = datetime(2022, 11, 1, 0, 0, 0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class Channel:
    id: int
    name: str
    write_key: str
    read_key: str
    field_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.id <= 0:
            raise ValueError("channel id must be positive")
        if not 1 <= len(self.field_names) <= 8:
            raise ValueError("a channel carries 1 to 8 fields")


@dataclass(frozen=True)
class ChannelEntry:
    channel_id: int
    entry_id: int
    created_at: str
    fields: dict


class FeedAuthError(Exception):
    pass


class UnknownChannelError(KeyError):
    pass


def default_channels() -> list[Channel]:
    return [
        Channel(1, "garden", "WKEY1GARDEN", "RKEY1GARDEN",
                ("soil_pct", "tank_pct", "temp_C", "hum_pct")),
        Channel(2, "safety", "WKEY2SAFETY", "RKEY2SAFETY",
                ("flame", "gas_ppm", "distance_cm", "vibration", "alarm")),
        Channel(3, "ambient", "WKEY3AMBIENT", "RKEY3AMBIENT",
                ("ppm", "lux", "motion", "lights_on")),
        Channel(4, "occupancy", "WKEY4OCCUPANCY", "RKEY4OCCUPANCY",
                ("free_count", "slot1", "slot2", "slot3", "slot4")),
    ]


class ChannelStore:
    """Per-channel entry log with rate limiting and JSONL persistence."""

    def __init__(self, channels: Sequence[Channel],
                 persist_dir: Optional[str] = None,
                 min_interval_ms: int = 1000,
                 anchor: datetime = DEFAULT_ANCHOR) -> None:
        ids = [c.id for c in channels]
        if len(set(ids)) != len(ids):
            raise ValueError("channel ids must be unique")
        self.channels = {c.id: c for c in channels}
        self._by_write_key = {c.write_key: c for c in channels}
        self.min_interval_ms = min_interval_ms
        self.anchor = anchor
        self.persist_dir = persist_dir
        self.degraded = False
        self.entries: dict[int, list[ChannelEntry]] = {c.id: [] for c in channels}
        self._last_accept_ms: dict[int, Optional[int]] = {c.id: None for c in channels}
        if persist_dir:
            os.makedirs(persist_dir, exist_ok=True)
            for c in channels:
                self._load_channel(c.id)

    # -- persistence ------------------------------------------------------

    def _path(self, channel_id: int) -> str:
        return os.path.join(self.persist_dir, f"channel_{channel_id}.jsonl")

    def _load_channel(self, channel_id: int) -> None:
        path = self._path(channel_id)
        if not os.path.exists(path):
            return
        good: list[ChannelEntry] = []
        good_bytes = 0
        with open(path, "rb") as fh:
            raw = fh.read()
        for line in raw.split(b"\n"):
            if not line:
                good_bytes += 1  # the newline itself
                continue
            try:
                rec = json.loads(line)
                entry = ChannelEntry(channel_id, rec["entry_id"],
                                     rec["created_at"], rec["fields"])
                if entry.entry_id != len(good) + 1:
                    raise ValueError("entry id gap")
            except (ValueError, KeyError, TypeError):
                log.warning("channel %d: truncating corrupt tail of %s",
                            channel_id, path)
                with open(path, "wb") as fh:
                    fh.write(raw[: max(0, good_bytes - 1)])
                break
            good.append(entry)
            good_bytes += len(line) + 1
        self.entries[channel_id] = good

    def _persist(self, entry: ChannelEntry) -> None:
        if not self.persist_dir:
            return
        try:
            with open(self._path(entry.channel_id), "a", encoding="utf-8") as fh:
                fh.write(json.dumps(
                    {"entry_id": entry.entry_id, "created_at": entry.created_at,
                     "fields": entry.fields},
                    sort_keys=True) + "\n")
        except OSError as exc:
            self.degraded = True
            log.warning("persistence degraded: %s", exc)

    # -- writes -----------------------------------------------------------

    def _created_at(self, channel_id: int, t_ms: int) -> str:
        stamp = self.anchor + timedelta(milliseconds=t_ms)
        text = stamp.strftime("%Y-%m-%dT%H:%M:%SZ")
        previous = self.entries[channel_id]
        if previous and text < previous[-1].created_at:
            # never let a late delivery run time backwards in the feed
            text = previous[-1].created_at
        return text

    def append_internal(self, channel_id: int, fields: dict, t_ms: int) -> ChannelEntry:
        """Pump-side append: no api key, no rate limit (conservation path)."""
        if channel_id not in self.channels:
            raise UnknownChannelError(channel_id)
        clean = {k: v for k, v in fields.items() if k in FIELD_KEYS}
        entry = ChannelEntry(channel_id, len(self.entries[channel_id]) + 1,
                             self._created_at(channel_id, t_ms), clean)
        self.entries[channel_id].append(entry)
        self._persist(entry)
        return entry

    def handle_update(self, params: dict, now_ms: int) -> str:
        """The write endpoint's logic; returns the response body text."""
        channel = self._by_write_key.get(params.get("api_key", ""))
        if channel is None:
            return "0"
        fields = {k: params[k] for k in FIELD_KEYS if k in params}
        if not fields:
            return "0"
        last = self._last_accept_ms[channel.id]
        if last is not None and now_ms - last < self.min_interval_ms:
            return "0"
        self._last_accept_ms[channel.id] = now_ms
        entry = self.append_internal(channel.id, fields, now_ms)
        return str(entry.entry_id)

    # -- reads ------------------------------------------------------------

    def query_feed(self, channel_id: int, read_key: Optional[str] = None,
                   results: Optional[int] = None) -> dict:
        channel = self.channels.get(channel_id)
        if channel is None:
            raise UnknownChannelError(channel_id)
        if read_key != channel.read_key:
            raise FeedAuthError(f"bad read key for channel {channel_id}")
        if results is not None and results < 0:
            raise ValueError("results must be >= 0")
        entries = self.entries[channel_id]
        if results is not None:
            entries = entries[len(entries) - min(results, len(entries)):]
        meta = {"id": channel.id, "name": channel.name}
        for i, label in enumerate(channel.field_names, start=1):
            meta[f"field{i}"] = label
        feeds = []
        for e in entries:
            row = {"created_at": e.created_at, "entry_id": e.entry_id}
            for i in range(1, len(channel.field_names) + 1):
                row[f"field{i}"] = e.fields.get(f"field{i}")
            feeds.append(row)
        return {"channel": meta, "feeds": feeds}

    def status(self) -> dict:
        return {
            "degraded": self.degraded,
            "channels": {str(cid): len(rows) for cid, rows in self.entries.items()},
        }


# -- the pump -------------------------------------------------------------

# (service, metric) -> (channel id, field index 1..8)
DEFAULT_MAPPING: dict[tuple[str, str], tuple[int, int]] = {
    (ServiceId.irrigation.value, "soil_pct"): (1, 1),
    (ServiceId.irrigation.value, "tank_pct"): (1, 2),
    (ServiceId.irrigation.value, "temp_C"): (1, 3),
    (ServiceId.irrigation.value, "hum_pct"): (1, 4),
    (ServiceId.firegas.value, "flame"): (2, 1),
    (ServiceId.firegas.value, "gas_ppm"): (2, 2),
    (ServiceId.intrusion.value, "distance_cm"): (2, 3),
    (ServiceId.intrusion.value, "vibration"): (2, 4),
    (ServiceId.intrusion.value, "alarm"): (2, 5),
    (ServiceId.iaq.value, "ppm"): (3, 1),
    (ServiceId.lighting.value, "lux"): (3, 2),
    (ServiceId.lighting.value, "motion"): (3, 3),
    (ServiceId.lighting.value, "lights_on"): (3, 4),
    (ServiceId.parking.value, "free_count"): (4, 1),
    (ServiceId.parking.value, "slot1"): (4, 2),
    (ServiceId.parking.value, "slot2"): (4, 3),
    (ServiceId.parking.value, "slot3"): (4, 4),
    (ServiceId.parking.value, "slot4"): (4, 5),
}


class TelemetryPump:
    """Holds the latest value of every mapped metric and flushes the held
    snapshot into per-channel field dicts on a fixed sim-time cadence."""

    def __init__(self, mapping: Optional[dict] = None,
                 flush_period_ms: int = 10_000) -> None:
        self.mapping = dict(mapping) if mapping is not None else dict(DEFAULT_MAPPING)
        self.flush_period_ms = flush_period_ms
        self._held: dict[tuple[str, str], tuple[Any, int]] = {}
        self._last_flush_ms = 0

    def seed(self, service: str, metrics: dict, t_ms: int = 0) -> None:
        for name, value in metrics.items():
            if (service, name) in self.mapping:
                self._held[(service, name)] = (value, t_ms)

    def observe(self, effect: Effect) -> None:
        if effect.kind is not EffectKind.telemetry_point:
            return
        self.seed(effect.target, effect.payload.get("metrics", {}), effect.t)

    def due(self, now_ms: int) -> bool:
        return now_ms - self._last_flush_ms >= self.flush_period_ms

    def flush(self, now_ms: int) -> list[tuple[int, dict, int]]:
        """Returns (channel_id, fields, measurement_t_ms) per channel with data."""
        self._last_flush_ms = now_ms
        per_channel: dict[int, tuple[dict, int]] = {}
        for (service, metric), (value, t) in sorted(self._held.items()):
            channel_id, ix = self.mapping[(service, metric)]
            fields, latest_t = per_channel.setdefault(channel_id, ({}, 0))
            fields[f"field{ix}"] = value
            per_channel[channel_id] = (fields, max(latest_t, t))
        return [(cid, fields, t) for cid, (fields, t) in sorted(per_channel.items())]


class MirrorClient:
    """Optional forwarder of accepted entries to an external channel server."""

    def __init__(self, endpoint: str, write_keys: dict[int, str]) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.write_keys = write_keys

    def forward(self, entry: ChannelEntry, timeout: float = 2.0) -> Optional[str]:
        import urllib.parse
        import urllib.request

        key = self.write_keys.get(entry.channel_id)
        if key is None:
            return None
        params = {"api_key": key}
        params.update({k: str(v) for k, v in entry.fields.items()})
        url = f"{self.endpoint}/update?{urllib.parse.urlencode(params)}"
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                return resp.read().decode("utf-8", "replace")
        except OSError as exc:
            log.warning("mirror forward failed: %s", exc)
            return None
