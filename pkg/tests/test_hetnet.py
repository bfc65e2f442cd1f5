import itertools

import pytest
from hypothesis import given, strategies as st

from smartbuilding.core import Command, Origin, ServiceId, SimClock
from smartbuilding.hetnet import (
    DeliveryRecord,
    LinkDownError,
    LinkKind,
    LinkProfile,
    LinkTable,
    Message,
    MessageClass,
    classify_convergence,
    default_profiles,
    select_link,
)

# Frozen copy of the routing policy, maintained by hand. If this drifts from
# the implementation the 160-case sweep below will say so.
ORACLE_ORDER = {
    "local_command": ["bluetooth", "wifi", "lte", "gsm"],
    "remote_command": ["wifi", "lte", "gsm"],
    "telemetry": ["wifi", "lte"],
    "sms_alert": ["gsm"],
    "call_alert": ["gsm"],
}

ALL_KINDS = ["rfid", "bluetooth", "wifi", "gsm", "lte"]


def oracle_select(avail: dict[str, bool], msg_class: str):
    for kind in ORACLE_ORDER[msg_class]:
        if avail[kind]:
            return kind
    return None


def table_with(avail: dict[str, bool]) -> LinkTable:
    profiles = {}
    for kind in LinkKind:
        cost = 1.0 if kind is LinkKind.gsm else 0.0
        profiles[kind] = LinkProfile(kind, available=avail[kind.value], cost_units=cost)
    return LinkTable(profiles)


def test_family_partition():
    assert LinkKind.rfid.family == "wpan"
    assert LinkKind.bluetooth.family == "wpan"
    assert LinkKind.wifi.family == "wlan"
    assert LinkKind.gsm.family == "wwan"
    assert LinkKind.lte.family == "wwan"


def test_profile_defaults():
    profiles = default_profiles()
    assert profiles[LinkKind.rfid].latency_ms == 5
    assert profiles[LinkKind.bluetooth].latency_ms == 40
    assert profiles[LinkKind.wifi].latency_ms == 20
    assert profiles[LinkKind.lte].latency_ms == 60
    assert profiles[LinkKind.gsm].latency_ms == 3000
    assert profiles[LinkKind.gsm].cost_units == 1.0
    assert all(profiles[k].cost_units == 0 for k in LinkKind if k is not LinkKind.gsm)
    assert profiles[LinkKind.gsm].supports_sms_call
    assert not any(profiles[k].supports_sms_call for k in LinkKind if k is not LinkKind.gsm)
    assert profiles[LinkKind.rfid].range_class == "short"
    assert profiles[LinkKind.wifi].range_class == "local"
    assert profiles[LinkKind.lte].range_class == "wide"


def test_convergence_truth_table():
    rows = list(itertools.product([False, True], repeat=3))
    assert len(rows) == 8
    for device, protocol, service in rows:
        got = classify_convergence(device, protocol, service)
        assert got.full == (device and protocol and service)


def test_selection_matches_oracle_all_160_cases():
    cases = 0
    for bits in itertools.product([False, True], repeat=5):
        avail = dict(zip(ALL_KINDS, bits))
        links = table_with(avail).profiles
        for msg_class in MessageClass:
            expected = oracle_select(avail, msg_class.value)
            got = select_link(links, msg_class)
            assert (got.value if got else None) == expected, (avail, msg_class)
            cases += 1
    assert cases == 160


def test_rfid_is_never_selected_outbound():
    avail = {k: False for k in ALL_KINDS}
    avail["rfid"] = True
    links = table_with(avail).profiles
    for msg_class in MessageClass:
        assert select_link(links, msg_class) is None


def test_delivery_arithmetic():
    table = table_with({k: True for k in ALL_KINDS})
    rec = table.send_message(
        Message("m1", MessageClass.telemetry, {"f": 1}, "cloud"), SimClock(1000))
    assert rec.kind is LinkKind.wifi
    assert rec.deliver_at == 1020
    assert rec.cost == 0.0

    rec2 = table.send_message(
        Message("m2", MessageClass.sms_alert, "gas!", "+21612345678"), SimClock(5000))
    assert rec2.kind is LinkKind.gsm
    assert rec2.deliver_at == 8000
    assert rec2.cost == 1.0
    assert table.total_cost == 1.0


def test_alert_recipient_must_be_phone_shaped():
    Message("ok", MessageClass.sms_alert, "x", "+216 12 345 678")
    with pytest.raises(ValueError):
        Message("bad", MessageClass.call_alert, "x", "owner@example.com")
    # non-alert classes may address anything
    Message("ok2", MessageClass.telemetry, "x", "cloud")


def test_all_links_down_queues():
    table = table_with({k: False for k in ALL_KINDS})
    rec = table.send_message(Message("m1", MessageClass.telemetry, {}, "cloud"), SimClock(0))
    assert rec is None
    assert table.counts() == {"delivered": 0, "queued": 1, "dropped": 0}


def test_queued_messages_flush_on_availability_change():
    table = table_with({k: False for k in ALL_KINDS})
    for i in range(5):
        table.send_message(Message(f"m{i}", MessageClass.telemetry, {}, "cloud"), SimClock(i))
    assert table.counts()["queued"] == 5
    flushed = table.set_available(LinkKind.lte, True, SimClock(10_000))
    assert [r.msg_id for r in flushed] == ["m0", "m1", "m2", "m3", "m4"]
    assert all(r.kind is LinkKind.lte for r in flushed)
    assert all(r.deliver_at == 10_060 for r in flushed)
    assert table.counts() == {"delivered": 5, "queued": 0, "dropped": 0}


def test_flip_that_opens_no_route_keeps_queue():
    table = table_with({k: False for k in ALL_KINDS})
    table.send_message(Message("sms", MessageClass.sms_alert, "x", "+100"), SimClock(0))
    flushed = table.set_available(LinkKind.wifi, True, SimClock(100))
    assert flushed == []
    assert table.counts()["queued"] == 1
    flushed = table.set_available(LinkKind.gsm, True, SimClock(200))
    assert len(flushed) == 1
    assert flushed[0].kind is LinkKind.gsm


def test_noop_flip_does_nothing():
    table = table_with({k: True for k in ALL_KINDS})
    assert table.set_available(LinkKind.wifi, True, SimClock(0)) == []


def test_retry_queue_cap_drops():
    table = LinkTable(table_with({k: False for k in ALL_KINDS}).profiles, retry_cap=3)
    for i in range(5):
        table.send_message(Message(f"m{i}", MessageClass.telemetry, {}, "c"), SimClock(i))
    counts = table.counts()
    assert counts == {"delivered": 0, "queued": 3, "dropped": 2}
    assert [m.id for m in table.drops] == ["m3", "m4"]


@given(st.lists(st.tuples(st.sampled_from(ALL_KINDS), st.booleans()), max_size=30),
       st.lists(st.sampled_from(list(MessageClass)), max_size=30))
def test_conservation_under_random_schedules(flips, classes):
    table = LinkTable(table_with({k: False for k in ALL_KINDS}).profiles, retry_cap=8)
    now = 0
    accepted = 0
    flips = list(flips)
    for i, msg_class in enumerate(classes):
        table.send_message(Message(f"m{i}", msg_class, None, "+1"), SimClock(now))
        accepted += 1
        now += 10
        if flips:
            kind, avail = flips.pop()
            table.set_available(LinkKind(kind), avail, SimClock(now))
            now += 10
    counts = table.counts()
    assert counts["delivered"] + counts["queued"] + counts["dropped"] == accepted
    assert all(r.kind is LinkKind.gsm for r in table.deliveries
               if r.msg_class in (MessageClass.sms_alert, MessageClass.call_alert))


def test_deliver_inbound_origin_mapping():
    table = table_with({k: True for k in ALL_KINDS})
    raw = Command(ServiceId.door, "unlock", {"password": "4321"}, Origin.push_button, 0)
    assert table.deliver_inbound(raw, LinkKind.bluetooth).origin is Origin.bluetooth
    assert table.deliver_inbound(raw, LinkKind.wifi).origin is Origin.wifi
    assert table.deliver_inbound(raw, LinkKind.lte).origin is Origin.cellular
    assert table.deliver_inbound(raw, LinkKind.gsm).origin is Origin.cellular
    assert table.deliver_inbound(raw, LinkKind.rfid).origin is Origin.rfid


def test_deliver_inbound_keeps_voice_tag():
    table = table_with({k: True for k in ALL_KINDS})
    raw = Command(ServiceId.lighting, "set_rgb", {"rgb": [0, 0, 255]}, Origin.voice, 0)
    assert table.deliver_inbound(raw, LinkKind.wifi).origin is Origin.voice


def test_deliver_inbound_rejects_downed_link():
    avail = {k: True for k in ALL_KINDS}
    avail["wifi"] = False
    table = table_with(avail)
    raw = Command(ServiceId.door, "unlock", {}, Origin.push_button, 0)
    with pytest.raises(LinkDownError, match="link down"):
        table.deliver_inbound(raw, LinkKind.wifi)
