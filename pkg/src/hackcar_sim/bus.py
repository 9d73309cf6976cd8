"""Deterministic discrete-event CAN bus.

Arbitration is modeled at frame granularity: whenever the bus goes idle,
the pending request with the lowest identifier starts transmitting (ties on
equal ID break by node id, then per-node sequence number). Transmission is
non-preemptive; completed frames are broadcast to every attached node,
including the producer. The event stream is a pure function of the request
stream, so equal inputs give byte-identical logs.

Time is integer microseconds; frame durations round up to whole
microseconds.
"""

from __future__ import annotations

import bisect
import heapq
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .codec import CanFrame
from .wire import frame_bit_length


class BusError(Exception):
    pass


class NotAttached(BusError):
    pass


class ClockError(BusError):
    """advance_until was asked to move backwards."""


class InvalidWindow(BusError):
    pass


class UnsupportedFormat(BusError):
    pass


# Delivery callback: (frame, origin node, completion time). Called during
# advance_until; may re-enter request_transmit with ready_time >= now.
FrameListener = Callable[[CanFrame, str, int], None]


@dataclass(frozen=True)
class BusConfig:
    bitrate: int = 500_000  # bits/second; common automotive high-speed rate

    def __post_init__(self) -> None:
        if self.bitrate <= 0:
            raise BusError("bitrate must be positive")


class EventKind(Enum):
    TX_START = "tx_start"
    TX_COMPLETE = "tx_complete"
    DELIVERY = "delivery"


@dataclass(frozen=True)
class BusEvent:
    kind: EventKind
    frame: CanFrame
    node: str
    time_us: int


@dataclass(frozen=True)
class TxRequest:
    node: str
    frame: CanFrame
    ready_time_us: int
    seq: int


@dataclass(frozen=True)
class TxRecord:
    """One completed transmission, kept for utilization and log export."""

    frame: CanFrame
    node: str
    start_us: int
    end_us: int
    bits: int


_CANDUMP_RE = re.compile(r"^\((\d+)\.(\d{6})\) (\S+) ([0-9A-Fa-f]{3,8})#([0-9A-Fa-f]*)$")


class VirtualCanBus:
    def __init__(self, config: BusConfig = BusConfig()):
        self.config = config
        self._clock = 0
        self._nodes: dict[str, Optional[FrameListener]] = {}
        self._seq: dict[str, int] = {}
        self._last_ready: dict[str, int] = {}
        # future: requests not yet ready, by ready time; ready: by priority
        self._future: list[tuple[int, int, str, int, TxRequest]] = []
        self._ready: list[tuple[int, str, int, TxRequest]] = []
        self._current: Optional[tuple[TxRequest, int, int]] = None  # (req, start, end)
        self._events: list[BusEvent] = []
        self._completed: list[TxRecord] = []
        # parallel sorted key lists (serial bus: starts and ends are ordered)
        self._start_keys: list[int] = []
        self._end_keys: list[int] = []

    @property
    def clock_us(self) -> int:
        return self._clock

    @property
    def events(self) -> list[BusEvent]:
        return list(self._events)

    @property
    def completed(self) -> list[TxRecord]:
        return list(self._completed)

    @property
    def bit_time_us(self) -> int:
        """Duration of one bus bit, rounded up to a whole microsecond."""
        return max(1, (1_000_000 + self.config.bitrate - 1) // self.config.bitrate)

    def attach(self, node: str, on_frame: Optional[FrameListener] = None) -> None:
        self._nodes[node] = on_frame
        self._seq.setdefault(node, 0)
        self._last_ready.setdefault(node, 0)

    def frame_duration_us(self, frame: CanFrame) -> int:
        bits = frame_bit_length(frame)
        return (bits * 1_000_000 + self.config.bitrate - 1) // self.config.bitrate

    def request_transmit(self, node: str, frame: CanFrame, ready_time_us: int) -> TxRequest:
        if node not in self._nodes:
            raise NotAttached(f"node {node!r} is not attached to the bus")
        if frame.completion_time_us is not None:
            raise BusError("frame object was already transmitted once")
        ready = max(int(ready_time_us), self._clock)
        if ready < self._last_ready[node]:
            raise BusError(f"node {node!r} requests must have non-decreasing ready times")
        self._last_ready[node] = ready
        seq = self._seq[node]
        self._seq[node] = seq + 1
        req = TxRequest(node, frame, ready, seq)
        if ready <= self._clock:
            heapq.heappush(self._ready, (frame.can_id, node, seq, req))
        else:
            heapq.heappush(self._future, (ready, frame.can_id, node, seq, req))
        return req

    def _promote_ready(self) -> None:
        while self._future and self._future[0][0] <= self._clock:
            _, can_id, node, seq, req = heapq.heappop(self._future)
            heapq.heappush(self._ready, (can_id, node, seq, req))

    def _start_next(self) -> None:
        _, _, _, req = heapq.heappop(self._ready)
        start = self._clock
        end = start + self.frame_duration_us(req.frame)
        self._current = (req, start, end)
        self._events.append(BusEvent(EventKind.TX_START, req.frame, req.node, start))

    def _complete_current(self) -> None:
        req, start, end = self._current  # type: ignore[misc]
        self._current = None
        self._clock = end
        req.frame.completion_time_us = end
        self._events.append(BusEvent(EventKind.TX_COMPLETE, req.frame, req.node, end))
        self._completed.append(
            TxRecord(req.frame, req.node, start, end, frame_bit_length(req.frame)))
        self._start_keys.append(start)
        self._end_keys.append(end)
        for node in sorted(self._nodes):
            self._events.append(BusEvent(EventKind.DELIVERY, req.frame, node, end))
            listener = self._nodes[node]
            if listener is not None:
                listener(req.frame, req.node, end)

    def advance_until(self, t_us: int) -> list[BusEvent]:
        """Resolve all arbitration, transmission, and delivery up to t_us."""
        if t_us < self._clock:
            raise ClockError(f"cannot rewind bus clock from {self._clock} to {t_us}")
        first = len(self._events)
        while True:
            if self._current is not None:
                if self._current[2] > t_us:
                    break
                self._complete_current()
                continue
            self._promote_ready()
            if not self._ready:
                if self._future and self._future[0][0] <= t_us:
                    self._clock = self._future[0][0]
                    continue
                break
            self._start_next()
        self._clock = max(self._clock, t_us)
        return self._events[first:]

    # -- metrics ----------------------------------------------------------

    def utilization(self, start_us: int, end_us: int) -> float:
        """Fraction of bus capacity occupied over [start_us, end_us)."""
        if end_us <= start_us:
            raise InvalidWindow(f"window [{start_us}, {end_us}) is empty")
        # only records with end > window start and start < window end overlap
        lo = bisect.bisect_right(self._end_keys, start_us)
        hi = bisect.bisect_left(self._start_keys, end_us)
        return utilization_of(self._completed[lo:hi], self.config.bitrate,
                              start_us, end_us)

    def utilization_series(self, duration_s: float) -> list[float]:
        """Per-second utilization over [0, duration_s)."""
        return [
            self.utilization(k * 1_000_000, (k + 1) * 1_000_000)
            for k in range(int(duration_s))
        ]

    # -- log export -------------------------------------------------------

    def export_log(self, format: str = "candump", channel: str = "vcan0") -> str:
        if format == "candump":
            lines = [
                f"({rec.end_us // 1_000_000}.{rec.end_us % 1_000_000:06d}) {channel} "
                f"{rec.frame.can_id:03X}#{rec.frame.payload.hex().upper()}"
                for rec in self._completed
            ]
        elif format == "csv":
            lines = ["time_s,node,id_hex,dlc,payload_hex,bits"]
            lines += [
                f"{rec.end_us // 1_000_000}.{rec.end_us % 1_000_000:06d},{rec.node},"
                f"{rec.frame.can_id:03X},{rec.frame.dlc},"
                f"{rec.frame.payload.hex().upper()},{rec.bits}"
                for rec in self._completed
            ]
        else:
            raise UnsupportedFormat(f"unknown log format {format!r}")
        return "".join(line + "\n" for line in lines)


def utilization_of(records: list[TxRecord], bitrate: int, start_us: int, end_us: int) -> float:
    """Pro-rated busy fraction of [start_us, end_us) for a transmission list."""
    if end_us <= start_us:
        raise InvalidWindow(f"window [{start_us}, {end_us}) is empty")
    total_bits = 0.0
    for rec in records:
        overlap = min(rec.end_us, end_us) - max(rec.start_us, start_us)
        if overlap > 0:
            total_bits += rec.bits * (overlap / (rec.end_us - rec.start_us))
    return total_bits / (bitrate * (end_us - start_us) / 1_000_000)


def parse_candump(text: str, bitrate: int = 500_000) -> list[TxRecord]:
    """Rebuild transmission records from a candump-format log.

    Node identity is not part of the candump format, so records carry an
    empty node name; start times are recovered from the serializer.
    """
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        match = _CANDUMP_RE.match(line)
        if match is None:
            raise UnsupportedFormat(f"line {lineno} is not candump format: {line!r}")
        sec, usec, _, id_hex, payload_hex = match.groups()
        end_us = int(sec) * 1_000_000 + int(usec)
        frame = CanFrame(int(id_hex, 16), bytes.fromhex(payload_hex))
        bits = frame_bit_length(frame)
        duration = (bits * 1_000_000 + bitrate - 1) // bitrate
        records.append(TxRecord(frame, "", end_us - duration, end_us, bits))
    return records
