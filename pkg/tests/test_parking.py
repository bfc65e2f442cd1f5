import pytest
from hypothesis import given, strategies as st

from smartbuilding.core import (
    Command,
    EffectKind,
    Origin,
    Reading,
    ReadingKind,
    ServiceId,
    SimClock,
)
from smartbuilding.services.parking import (
    REFUSAL_TEXT,
    WELCOME_TEXT,
    ParkingConfig,
    ParkingState,
    initial_state,
    parking_step,
)

CFG = ParkingConfig()  # 4 slots, 30 s cloud period


def ir(slot_ix, occupied, t=0):
    return Reading(f"ir-{slot_ix}", ReadingKind.ir_occupied_bool, occupied, t)


def arrival(t=0):
    return Command(ServiceId.parking, "arrival", {}, Origin.push_button, t)


def full_state():
    return ParkingState(slots=(True,) * CFG.slot_count)


def test_occupancy_updates_from_ir_readings():
    state = initial_state(CFG)
    state, _ = parking_step(state, [ir(0, True), ir(2, True)], [], SimClock(0), CFG)
    assert state.slots == (True, False, True, False)


def test_arrival_with_free_slot_opens_gate_and_welcomes():
    state = ParkingState(slots=(True, False, True, True))
    state, effects = parking_step(state, [], [arrival()], SimClock(0), CFG)
    assert state.gate == "open"
    audio = [e for e in effects if e.kind is EffectKind.audio]
    assert audio and audio[0].payload["text"] == WELCOME_TEXT
    gates = [e for e in effects if e.kind is EffectKind.actuate and e.target == "parking-gate"]
    assert gates and gates[0].payload["state"] == "open"


def test_full_lot_refuses_with_exact_text():
    state, effects = parking_step(full_state(), [], [arrival()], SimClock(0), CFG)
    assert state.gate == "closed"
    audio = [e for e in effects if e.kind is EffectKind.audio]
    assert audio[0].payload["text"] == (
        "sorry, this parking lot is full, you can search for another "
        "available parking lot via the Raniso app."
    )


def test_hundred_arrivals_never_open_a_full_lot():
    state = full_state()
    for i in range(100):
        t = i * 1000
        state, effects = parking_step(state, [], [arrival(t)], SimClock(t), CFG)
        assert state.gate == "closed"
        audio = [e for e in effects if e.kind is EffectKind.audio]
        assert len(audio) == 1 and audio[0].payload["text"] == REFUSAL_TEXT


def test_gate_closes_after_hold():
    state = ParkingState(slots=(False,) * 4)
    state, _ = parking_step(state, [], [arrival(0)], SimClock(0), CFG)
    assert state.gate == "open"
    state, _ = parking_step(state, [], [], SimClock(3000), CFG)
    assert state.gate == "open"
    state, effects = parking_step(state, [], [], SimClock(5000), CFG)
    assert state.gate == "closed"
    gates = [e for e in effects if e.kind is EffectKind.actuate and e.target == "parking-gate"]
    assert gates and gates[0].payload["state"] == "closed"


def test_cloud_summary_cadence():
    state = initial_state(CFG)
    points = []
    for t in range(0, 95_000, 1000):
        state, effects = parking_step(state, [], [], SimClock(t), CFG)
        points += [e for e in effects if e.kind is EffectKind.telemetry_point]
    assert [p.t for p in points] == [30_000, 60_000, 90_000]
    metrics = points[0].payload["metrics"]
    assert metrics["free_count"] == 4
    assert metrics["slot1"] == 0 and metrics["slot4"] == 0


def test_cloud_summary_carries_slot_bits():
    state = ParkingState(slots=(True, False, True, False), last_cloud_update=0)
    state, effects = parking_step(state, [], [], SimClock(30_000), CFG)
    point = next(e for e in effects if e.kind is EffectKind.telemetry_point)
    m = point.payload["metrics"]
    assert m == {"free_count": 2, "slot1": 1, "slot2": 0, "slot3": 1, "slot4": 0}


def test_quiescent_step_has_no_effects():
    state = ParkingState(slots=(True, False, True, False), last_cloud_update=10_000)
    state2, effects = parking_step(state, [], [], SimClock(15_000), CFG)
    assert state2 == state
    assert effects == []


def test_lcd_lists_free_slots_lowest_first():
    state = ParkingState(slots=(True, False, True, False))
    _, effects = parking_step(state, [], [arrival()], SimClock(0), CFG)
    lcd = next(e for e in effects if e.kind is EffectKind.display_text)
    assert lcd.payload["text"] == "Free slots: 2, 4"
    _, effects = parking_step(full_state(), [], [arrival()], SimClock(0), CFG)
    lcd = next(e for e in effects if e.kind is EffectKind.display_text)
    assert lcd.payload["text"] == "Parking full"


def test_out_of_range_slot_index_names_index():
    state = initial_state(CFG)
    with pytest.raises(ValueError, match="slot index 7"):
        parking_step(state, [ir(7, True)], [], SimClock(0), CFG)


def test_unnumbered_ir_device_rejected():
    state = initial_state(CFG)
    bad = Reading("ir-east", ReadingKind.ir_occupied_bool, True, 0)
    with pytest.raises(ValueError, match="slot index"):
        parking_step(state, [bad], [], SimClock(0), CFG)


@given(st.lists(st.tuples(st.integers(min_value=0, max_value=3), st.booleans()),
                max_size=30))
def test_conservation_free_plus_occupied(updates):
    state = initial_state(CFG)
    for i, (slot, occ) in enumerate(updates):
        state, _ = parking_step(state, [ir(slot, occ, i)], [], SimClock(i), CFG)
        free = state.slots.count(False)
        occupied = state.slots.count(True)
        assert free + occupied == CFG.slot_count


def test_step_is_pure():
    args = (full_state(), [ir(1, False)], [arrival(0)], SimClock(0), CFG)
    assert parking_step(*args) == parking_step(*args)
