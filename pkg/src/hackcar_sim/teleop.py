"""Teleoperation bridge: wire commands in, telemetry frames out.

Commands arrive as one JSON object per message and are validated strictly;
out-of-range values are rejected, never clamped. Mode, AEB, and attack
commands become real service frames on the bus. Recorded traces are CSV
``time_s,kind,value`` files replayed at their recorded sim-times, which
makes a live session reproducible headlessly.
"""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from .codec import Mode


class CommandError(Exception):
    """Malformed or out-of-range control command."""


class TraceError(Exception):
    """Trace file is unreadable or not sorted by time."""


class NotRunning(Exception):
    """Telemetry requested before the first control cycle."""


KIND_THROTTLE = "throttle"
KIND_STEERING = "steering"
KIND_AEB = "aeb"
KIND_MODE = "mode"
KIND_ATTACK = "attack"

_VALID_KINDS = (KIND_THROTTLE, KIND_STEERING, KIND_AEB, KIND_MODE, KIND_ATTACK)


@dataclass(frozen=True)
class ControlCommand:
    kind: str
    value: float | str
    time_us: int


def _validate(kind: str, value) -> float | str:
    if kind == KIND_THROTTLE:
        try:
            num = float(value)
        except (TypeError, ValueError):
            raise CommandError(f"throttle value {value!r} is not numeric") from None
        if not 0.0 <= num <= 100.0:
            raise CommandError(f"throttle {num} outside 0..100")
        return num
    if kind == KIND_STEERING:
        try:
            num = float(value)
        except (TypeError, ValueError):
            raise CommandError(f"steering value {value!r} is not numeric") from None
        if not -100.0 <= num <= 100.0:
            raise CommandError(f"steering {num} outside -100..100")
        return num
    if kind == KIND_AEB:
        if value not in ("on", "off"):
            raise CommandError(f"aeb value {value!r} must be 'on' or 'off'")
        return value
    if kind == KIND_MODE:
        if value not in ("ManualAEB", "AutoDrive"):
            raise CommandError(f"mode value {value!r} must be 'ManualAEB' or 'AutoDrive'")
        return value
    if kind == KIND_ATTACK:
        if value not in ("start", "stop"):
            raise CommandError(f"attack value {value!r} must be 'start' or 'stop'")
        return value
    raise CommandError(f"unknown command kind {kind!r}")


def make_command(kind: str, value, time_us: int) -> ControlCommand:
    if kind not in _VALID_KINDS:
        raise CommandError(f"unknown command kind {kind!r}")
    return ControlCommand(kind, _validate(kind, value), int(time_us))


def parse_command_json(text: str, arrival_us: int) -> ControlCommand:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CommandError(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or "kind" not in obj or "value" not in obj:
        raise CommandError("command must be an object with 'kind' and 'value'")
    return make_command(obj["kind"], obj["value"], arrival_us)


def mode_from_name(name: str) -> Mode:
    return Mode.AUTO_DRIVE if name == "AutoDrive" else Mode.MANUAL_AEB


# -- trace files ------------------------------------------------------------

TRACE_HEADER = "time_s,kind,value"


def load_trace(text: str) -> list[ControlCommand]:
    """Parse a command trace; rows must be sorted by time."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != TRACE_HEADER:
        raise TraceError(f"trace must start with header {TRACE_HEADER!r}")
    commands: list[ControlCommand] = []
    last_us = -1
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",", 2)
        if len(parts) != 3:
            raise TraceError(f"line {lineno}: expected time_s,kind,value")
        try:
            t_us = round(float(parts[0]) * 1_000_000)
        except ValueError:
            raise TraceError(f"line {lineno}: bad time {parts[0]!r}") from None
        if t_us < last_us:
            raise TraceError(f"line {lineno}: trace not sorted by time")
        last_us = t_us
        try:
            commands.append(make_command(parts[1], _coerce(parts[2]), t_us))
        except CommandError as exc:
            raise TraceError(f"line {lineno}: {exc}") from None
    return commands


def _coerce(raw: str):
    try:
        return float(raw)
    except ValueError:
        return raw


def dump_trace(commands: Iterable[ControlCommand]) -> str:
    lines = [TRACE_HEADER]
    for cmd in commands:
        value = f"{cmd.value:g}" if isinstance(cmd.value, float) else cmd.value
        lines.append(f"{cmd.time_us / 1_000_000:.6f},{cmd.kind},{value}")
    return "".join(line + "\n" for line in lines)


# -- command sources --------------------------------------------------------


class TraceSource:
    """Replays a recorded trace; commands apply at the first cycle after
    their recorded time."""

    def __init__(self, commands: list[ControlCommand]):
        self._commands = commands
        self._next = 0

    def pop_due(self, t_us: int) -> list[ControlCommand]:
        due = []
        while self._next < len(self._commands) and self._commands[self._next].time_us < t_us:
            due.append(self._commands[self._next])
            self._next += 1
        return due


class QueueSource:
    """Thread-safe live command queue; also records what it saw so a live
    session can be replayed as a trace."""

    def __init__(self):
        self._lock = threading.Lock()
        self._pending: list[ControlCommand] = []
        self.history: list[ControlCommand] = []

    def push(self, command: ControlCommand) -> None:
        with self._lock:
            self._pending.append(command)

    def pop_due(self, t_us: int) -> list[ControlCommand]:
        with self._lock:
            due = [c for c in self._pending if c.time_us < t_us]
            self._pending = [c for c in self._pending if c.time_us >= t_us]
        due.sort(key=lambda c: c.time_us)
        self.history.extend(due)
        return due


# -- outbound telemetry ------------------------------------------------------


@dataclass(frozen=True)
class TelemetryFrame:
    time_s: float
    target_rpm: float
    actual_rpm: float
    min_range_m: float
    obstacle: bool
    attack: bool
    collision: bool
    utilization_1s: float
    mode: str
    aeb_enabled: bool

    def to_json(self) -> str:
        payload = {"type": "telemetry", **asdict(self)}
        return json.dumps(payload, separators=(",", ":"))
