"""Frame model, catalog shape, and signal encode/decode round trips."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hackcar_sim.codec import (
    AebSwitch,
    AttackSwitch,
    BRAKE_ID,
    CanFrame,
    CatalogMismatch,
    CodecError,
    MalformedFrame,
    Mode,
    RPM_ID,
    RPM_MAX,
    RPM_MIN,
    STEERING_MAX,
    STEERING_MIN,
    SignalValue,
    UnknownId,
    catalog_from_spec,
    decode_frame,
    default_catalog,
    encode_frame,
)

CATALOG = default_catalog()


def test_frame_invariants():
    frame = CanFrame(0x400, b"\x00\x01\x02\x03")
    assert frame.dlc == 4
    with pytest.raises(MalformedFrame):
        CanFrame(0x800, b"")
    with pytest.raises(MalformedFrame):
        CanFrame(0x100, b"\x00" * 9)
    with pytest.raises(MalformedFrame):
        CanFrame(0x100, b"\x00", enqueue_time_us=10, completion_time_us=10)


def test_catalog_has_exactly_six_fixed_entries():
    entries = {m.can_id: m for m in CATALOG}
    assert set(entries) == {0x400, 0x401, 0x402, 0x500, 0x501, 0x502}
    assert (entries[0x400].dlc, entries[0x400].period_ms) == (4, 10)
    assert (entries[0x401].dlc, entries[0x401].period_ms) == (4, 10)
    assert (entries[0x402].dlc, entries[0x402].period_ms) == (1, 10)
    for service_id in (0x500, 0x501, 0x502):
        assert entries[service_id].dlc == 1
        assert entries[service_id].period_ms is None
    # each periodic id has exactly one producer
    assert {m.producer for m in CATALOG.periodic()} == {"ssc"}


def test_encode_rpm_6000_frozen_bytes():
    # 6000 == 0x1770, little-endian over four bytes
    frame = encode_frame(CATALOG.by_id(RPM_ID), SignalValue.rpm(6000), t_us=7)
    assert frame.can_id == 0x400
    assert frame.payload == bytes([0x70, 0x17, 0x00, 0x00])
    assert frame.enqueue_time_us == 7
    assert decode_frame(frame, CATALOG) == SignalValue.rpm(6000)


def test_encode_rpm_zero():
    frame = encode_frame(CATALOG.by_id(RPM_ID), SignalValue.rpm(0))
    assert frame.payload == b"\x00\x00\x00\x00"


def test_encode_brake_saturation_boundary():
    frame = encode_frame(CATALOG.by_id(BRAKE_ID), SignalValue.brake(255))
    assert (frame.can_id, frame.payload) == (0x402, b"\xff")
    assert decode_frame(frame, CATALOG) == SignalValue.brake(255)
    # beyond the boundary clamps, never fails
    over = encode_frame(CATALOG.by_id(BRAKE_ID), SignalValue.brake(999))
    assert over.payload == b"\xff"


def test_rpm_saturates_to_range_endpoints():
    msg = CATALOG.by_id(RPM_ID)
    high = encode_frame(msg, SignalValue.rpm(RPM_MAX + 12345))
    low = encode_frame(msg, SignalValue.rpm(RPM_MIN - 12345))
    assert decode_frame(high, CATALOG).value == RPM_MAX
    assert decode_frame(low, CATALOG).value == RPM_MIN


def test_decode_mode_enum():
    frame = CanFrame(0x500, b"\x01")
    assert decode_frame(frame, CATALOG) == SignalValue("mode", Mode.AUTO_DRIVE)
    assert decode_frame(CanFrame(0x500, b"\x00"), CATALOG).value == Mode.MANUAL_AEB


def test_decode_errors():
    with pytest.raises(MalformedFrame):
        decode_frame(CanFrame(0x400, b"\x70\x17"), CATALOG)  # dlc mismatch
    with pytest.raises(UnknownId):
        decode_frame(CanFrame(0x123, b"\x00"), CATALOG)
    with pytest.raises(MalformedFrame):
        decode_frame(CanFrame(0x500, b"\x07"), CATALOG)  # outside enum


def test_kind_mismatch():
    with pytest.raises(CatalogMismatch):
        encode_frame(CATALOG.by_id(RPM_ID), SignalValue.brake(10))


@given(st.integers(min_value=RPM_MIN, max_value=RPM_MAX))
def test_rpm_round_trip(value):
    frame = encode_frame(CATALOG.by_id(RPM_ID), SignalValue.rpm(value))
    assert decode_frame(frame, CATALOG).value == value


@given(st.integers(min_value=STEERING_MIN, max_value=STEERING_MAX))
def test_steering_round_trip(value):
    frame = encode_frame(CATALOG.by_name("STEERING"), SignalValue.steering(value))
    assert decode_frame(frame, CATALOG).value == value


def test_brake_and_enum_domains_exhaustive():
    brake_msg = CATALOG.by_id(BRAKE_ID)
    for value in range(256):
        assert decode_frame(encode_frame(brake_msg, SignalValue.brake(value)),
                            CATALOG).value == value
    for mode in Mode:
        frame = encode_frame(CATALOG.by_name("MODE"), SignalValue.mode(mode))
        assert decode_frame(frame, CATALOG).value == mode
    for aeb in AebSwitch:
        frame = encode_frame(CATALOG.by_name("AEB"), SignalValue("aeb", int(aeb)))
        assert decode_frame(frame, CATALOG).value == aeb
    for attack in AttackSwitch:
        frame = encode_frame(CATALOG.by_name("ATTACK"), SignalValue("attack", int(attack)))
        assert decode_frame(frame, CATALOG).value == attack


def test_catalog_rejects_duplicates():
    base = [
        {"name": m.name, "id": m.can_id, "dlc": m.dlc, "producer": m.producer,
         "kind": m.kind, "period_ms": m.period_ms, "signed": m.codec.signed,
         "min": m.codec.lo, "max": m.codec.hi}
        for m in CATALOG
    ]
    for ent in base:
        if ent["period_ms"] is None:
            del ent["period_ms"]
    dup = base + [dict(base[0], name="RPM2")]
    with pytest.raises(CodecError):
        catalog_from_spec(dup)


def test_catalog_extension_keeps_builtins():
    base = [
        {"name": m.name, "id": m.can_id, "dlc": m.dlc, "producer": m.producer,
         "kind": m.kind, **({"period_ms": m.period_ms} if m.period_ms else {})}
        for m in CATALOG
    ]
    extended = catalog_from_spec(base + [
        {"name": "WHEELSPEED", "id": 0x410, "dlc": 2, "producer": "mcu",
         "period_ms": 20, "signed": False}
    ])
    extra = extended.by_id(0x410)
    assert extra.kind == "raw"
    assert extra.codec.hi == 0xFFFF
    # dropping a built-in is rejected
    with pytest.raises(CodecError):
        catalog_from_spec(base[1:])
