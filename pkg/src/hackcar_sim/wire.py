"""Bit-level CAN 2.0A data frame serialization.

Layout: SOF, 11-bit ID, RTR=0, IDE=0, r0, 4-bit DLC, data, 15-bit CRC,
CRC delimiter, ACK slot + delimiter, EOF (7 recessive), IFS (3 recessive).
Bit stuffing (complement inserted after five equal bits) covers SOF through
the CRC field; the CRC itself is computed over the unstuffed SOF..data bits.

Unstuffed length is 47 + 8*dlc bits; stuffing can add at most
floor((33 + 8*dlc) / 4) more.
"""

from __future__ import annotations

import numpy as np

from .accel import maybe_njit
from .codec import CanFrame

CRC15_POLY = 0x4599  # x^15+x^14+x^10+x^8+x^7+x^4+x^3+1, truncated

# SOF + ID(11) + RTR + IDE + r0 + DLC(4)
_HEADER_BITS = 19
# CRC delimiter + ACK slot + ACK delimiter + EOF(7) + IFS(3)
_TAIL_BITS = 13


def base_bit_length(dlc: int) -> int:
    """Frame length before any stuff bits."""
    return 47 + 8 * dlc


def max_stuff_bits(dlc: int) -> int:
    """Upper bound on inserted stuff bits for the SOF..CRC region."""
    return (33 + 8 * dlc) // 4


@maybe_njit
def _crc15_kernel(bits: np.ndarray) -> int:
    crc = 0
    for i in range(bits.size):
        high = (crc >> 14) & 1
        crc = (crc << 1) & 0x7FFF
        if high ^ bits[i]:
            crc ^= 0x4599
    return crc


@maybe_njit
def _stuff_kernel(bits: np.ndarray, out: np.ndarray) -> int:
    n = 0
    prev = 2  # sentinel: no run in progress
    run = 0
    for i in range(bits.size):
        b = bits[i]
        out[n] = b
        n += 1
        if b == prev:
            run += 1
        else:
            prev = b
            run = 1
        if run == 5:
            s = 1 - b
            out[n] = s
            n += 1
            prev = s
            run = 1
    return n


def _unstuffed_body(frame: CanFrame) -> np.ndarray:
    """SOF through data field as a bit array, MSB first within each field."""
    dlc = frame.dlc
    bits = np.zeros(_HEADER_BITS + 8 * dlc, dtype=np.uint8)
    pos = 1  # bits[0] is the dominant SOF
    for shift in range(10, -1, -1):
        bits[pos] = (frame.can_id >> shift) & 1
        pos += 1
    pos += 3  # RTR, IDE, r0 all dominant
    for shift in range(3, -1, -1):
        bits[pos] = (dlc >> shift) & 1
        pos += 1
    for byte in frame.payload:
        for shift in range(7, -1, -1):
            bits[pos] = (byte >> shift) & 1
            pos += 1
    return bits


def serialize_wire_bits(frame: CanFrame) -> np.ndarray:
    """Full wire bit sequence of a frame, stuff bits included."""
    body = _unstuffed_body(frame)
    crc = int(_crc15_kernel(body))
    crc_bits = np.array([(crc >> s) & 1 for s in range(14, -1, -1)], dtype=np.uint8)
    region = np.concatenate([body, crc_bits])
    stuffed = np.empty(region.size + max_stuff_bits(frame.dlc), dtype=np.uint8)
    n = int(_stuff_kernel(region, stuffed))
    tail = np.array([1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1], dtype=np.uint8)
    return np.concatenate([stuffed[:n], tail])


_length_cache: dict[tuple[int, bytes], int] = {}


def frame_bit_length(frame: CanFrame) -> int:
    """Wire length in bits; memoized per (id, payload)."""
    key = (frame.can_id, frame.payload)
    length = _length_cache.get(key)
    if length is None:
        length = int(serialize_wire_bits(frame).size)
        _length_cache[key] = length
    return length
