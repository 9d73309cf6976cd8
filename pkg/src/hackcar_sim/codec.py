"""CAN 2.0A frame model, the HackCar message catalog, and signal encode/decode.

The catalog binds each 11-bit identifier to a name, a fixed DLC, an optional
period, a producing node, and a signal codec. Signals are little-endian
two's-complement integers; service messages carry single-byte enums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional


class CodecError(Exception):
    """Base class for catalog and codec failures."""


class CatalogMismatch(CodecError):
    """Signal kind does not match the catalog entry it is encoded against."""


class UnknownId(CodecError):
    """Frame identifier not present in the catalog."""


class MalformedFrame(CodecError):
    """Frame shape or payload contradicts its catalog entry."""


MAX_STANDARD_ID = 0x7FF


@dataclass
class CanFrame:
    """One CAN 2.0A data frame as it exists on the virtual wire.

    ``completion_time_us`` is set by the bus when transmission finishes and
    must then be strictly greater than ``enqueue_time_us``.
    """

    can_id: int
    payload: bytes
    enqueue_time_us: int = 0
    completion_time_us: Optional[int] = None

    def __post_init__(self) -> None:
        self.payload = bytes(self.payload)
        if not 0 <= self.can_id <= MAX_STANDARD_ID:
            raise MalformedFrame(f"id 0x{self.can_id:X} outside 11-bit range")
        if len(self.payload) > 8:
            raise MalformedFrame(f"dlc {len(self.payload)} exceeds 8")
        if self.completion_time_us is not None and self.completion_time_us <= self.enqueue_time_us:
            raise MalformedFrame("completion time must follow enqueue time")

    @property
    def dlc(self) -> int:
        return len(self.payload)


class Mode(IntEnum):
    MANUAL_AEB = 0
    AUTO_DRIVE = 1


class AebSwitch(IntEnum):
    OFF = 0
    ON = 1


class AttackSwitch(IntEnum):
    STOP = 0
    START = 1


# Signal kinds understood by the codec. Service kinds are single-byte enums.
KIND_RPM = "rpm"
KIND_STEERING = "steering"
KIND_BRAKE = "brake"
KIND_MODE = "mode"
KIND_AEB = "aeb"
KIND_ATTACK = "attack"
KIND_RAW = "raw"

_ENUM_KINDS = {KIND_MODE: Mode, KIND_AEB: AebSwitch, KIND_ATTACK: AttackSwitch}


@dataclass(frozen=True)
class SignalCodec:
    """Integer signal layout: width, signedness, saturation range, unit.

    Byte order is always little-endian; values are clamped to [lo, hi]
    before encoding so numeric inputs never fail.
    """

    signed: bool
    lo: int
    hi: int
    unit: str = ""
    scale: int = 1


@dataclass(frozen=True)
class SignalValue:
    kind: str
    value: int

    @classmethod
    def rpm(cls, value: int) -> "SignalValue":
        return cls(KIND_RPM, int(value))

    @classmethod
    def steering(cls, mrad: int) -> "SignalValue":
        return cls(KIND_STEERING, int(mrad))

    @classmethod
    def brake(cls, effort: int) -> "SignalValue":
        return cls(KIND_BRAKE, int(effort))

    @classmethod
    def mode(cls, mode: Mode) -> "SignalValue":
        return cls(KIND_MODE, int(mode))

    @classmethod
    def aeb(cls, on: bool) -> "SignalValue":
        return cls(KIND_AEB, int(bool(on)))

    @classmethod
    def attack(cls, start: bool) -> "SignalValue":
        return cls(KIND_ATTACK, int(bool(start)))


@dataclass(frozen=True)
class CatalogMessage:
    name: str
    can_id: int
    dlc: int
    producer: str
    kind: str
    codec: SignalCodec
    period_ms: Optional[int] = None  # absent for event-driven service messages


# Saturation ranges. RPM and steering ride in 32-bit fields; rpm is clamped
# to twice the 16-bit range, brake and the service enums to their byte.
RPM_MIN, RPM_MAX = -32768 * 2, 32767 * 2
STEERING_MIN, STEERING_MAX = -(2**31), 2**31 - 1

RPM_ID = 0x400
STEERING_ID = 0x401
BRAKE_ID = 0x402
MODE_ID = 0x500
AEB_ID = 0x501
ATTACK_ID = 0x502

NODE_SSC = "ssc"
NODE_MCU = "mcu"
NODE_ATTACKER = "atk"
NODE_DETECTOR = "det"
NODE_GATEWAY = "gw"


def default_catalog() -> "Catalog":
    """The six HackCar messages: three 10 ms periodic, three event-driven."""
    enum_codec = SignalCodec(signed=False, lo=0, hi=1)
    return Catalog(
        [
            CatalogMessage("RPM", RPM_ID, 4, NODE_SSC, KIND_RPM,
                           SignalCodec(signed=True, lo=RPM_MIN, hi=RPM_MAX, unit="rpm"),
                           period_ms=10),
            CatalogMessage("STEERING", STEERING_ID, 4, NODE_SSC, KIND_STEERING,
                           SignalCodec(signed=True, lo=STEERING_MIN, hi=STEERING_MAX, unit="mrad"),
                           period_ms=10),
            CatalogMessage("BREAK", BRAKE_ID, 1, NODE_SSC, KIND_BRAKE,
                           SignalCodec(signed=False, lo=0, hi=255, unit="effort"),
                           period_ms=10),
            CatalogMessage("MODE", MODE_ID, 1, NODE_GATEWAY, KIND_MODE, enum_codec),
            CatalogMessage("AEB", AEB_ID, 1, NODE_GATEWAY, KIND_AEB, enum_codec),
            CatalogMessage("ATTACK", ATTACK_ID, 1, NODE_GATEWAY, KIND_ATTACK, enum_codec),
        ]
    )


_REQUIRED_IDS = {RPM_ID, STEERING_ID, BRAKE_ID, MODE_ID, AEB_ID, ATTACK_ID}


class Catalog:
    """Message set indexed by identifier.

    Each ID appears exactly once and each periodic ID has exactly one
    producer. User catalogs must keep the six HackCar entries and may add
    further messages (kind ``raw``).
    """

    def __init__(self, messages: list[CatalogMessage]):
        self._by_id: dict[int, CatalogMessage] = {}
        self._by_name: dict[str, CatalogMessage] = {}
        for msg in messages:
            if msg.can_id in self._by_id:
                raise CodecError(f"duplicate catalog id 0x{msg.can_id:03X}")
            if msg.name in self._by_name:
                raise CodecError(f"duplicate catalog name {msg.name!r}")
            if not 0 <= msg.dlc <= 8:
                raise CodecError(f"{msg.name}: dlc {msg.dlc} outside 0-8")
            self._by_id[msg.can_id] = msg
            self._by_name[msg.name] = msg

    def __iter__(self):
        return iter(self._by_id.values())

    def __contains__(self, can_id: int) -> bool:
        return can_id in self._by_id

    def __eq__(self, other) -> bool:
        if not isinstance(other, Catalog):
            return NotImplemented
        return self._by_id == other._by_id

    def by_id(self, can_id: int) -> CatalogMessage:
        try:
            return self._by_id[can_id]
        except KeyError:
            raise UnknownId(f"id 0x{can_id:03X} not in catalog") from None

    def by_name(self, name: str) -> CatalogMessage:
        return self._by_name[name]

    def periodic(self) -> list[CatalogMessage]:
        return [m for m in self if m.period_ms is not None]


def catalog_from_spec(entries: list[dict]) -> Catalog:
    """Build a catalog from parsed structured-text entries.

    Schema per entry: name, id, dlc, producer, optional period_ms, optional
    kind (default ``raw``), optional signed/min/max/unit for raw signals.
    The six built-in messages must be present with their fixed shape.
    """
    messages = []
    for ent in entries:
        ent = dict(ent)
        try:
            name = ent.pop("name")
            can_id = int(ent.pop("id"))
            dlc = int(ent.pop("dlc"))
            producer = ent.pop("producer")
        except KeyError as exc:
            raise CodecError(f"catalog entry missing key {exc.args[0]!r}") from None
        period = ent.pop("period_ms", None)
        kind = ent.pop("kind", KIND_RAW)
        signed = bool(ent.pop("signed", True))
        unit = ent.pop("unit", "")
        width = 8 * dlc
        if signed:
            dflt_lo, dflt_hi = -(2 ** (width - 1)), 2 ** (width - 1) - 1
        else:
            dflt_lo, dflt_hi = 0, 2**width - 1
        lo = int(ent.pop("min", dflt_lo))
        hi = int(ent.pop("max", dflt_hi))
        if ent:
            raise CodecError(f"catalog entry {name!r}: unknown keys {sorted(ent)}")
        messages.append(
            CatalogMessage(name, can_id, dlc, producer, kind,
                           SignalCodec(signed=signed, lo=lo, hi=hi, unit=unit),
                           period_ms=None if period is None else int(period))
        )
    catalog = Catalog(messages)
    defaults = default_catalog()
    for req_id in sorted(_REQUIRED_IDS):
        ref = defaults.by_id(req_id)
        if req_id not in catalog:
            raise CodecError(f"catalog is missing required message 0x{req_id:03X} ({ref.name})")
        got = catalog.by_id(req_id)
        if (got.dlc, got.kind, got.period_ms) != (ref.dlc, ref.kind, ref.period_ms):
            raise CodecError(f"catalog entry 0x{req_id:03X} must keep dlc/kind/period of {ref.name}")
    return catalog


def encode_frame(msg: CatalogMessage, value: SignalValue, t_us: int = 0) -> CanFrame:
    """Encode a signal into a frame; out-of-range numerics saturate."""
    if value.kind != msg.kind:
        raise CatalogMismatch(f"cannot encode {value.kind!r} signal as {msg.name} ({msg.kind!r})")
    raw = int(round(value.value))
    raw = min(max(raw, msg.codec.lo), msg.codec.hi)
    payload = (raw & (2 ** (8 * msg.dlc) - 1)).to_bytes(msg.dlc, "little")
    return CanFrame(msg.can_id, payload, enqueue_time_us=t_us)


def decode_frame(frame: CanFrame, catalog: Catalog) -> SignalValue:
    """Decode a frame against the catalog; exact inverse of encode."""
    msg = catalog.by_id(frame.can_id)
    if frame.dlc != msg.dlc:
        raise MalformedFrame(
            f"{msg.name}: dlc {frame.dlc} does not match catalog dlc {msg.dlc}")
    raw = int.from_bytes(frame.payload, "little", signed=msg.codec.signed)
    enum_type = _ENUM_KINDS.get(msg.kind)
    if enum_type is not None:
        try:
            enum_type(raw)
        except ValueError:
            raise MalformedFrame(f"{msg.name}: payload {raw} outside enum") from None
    return SignalValue(msg.kind, raw)
