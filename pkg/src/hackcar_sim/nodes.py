"""The four virtual ECUs: sensing controller, main controller, attacker,
and detector, plus the service gateway.

Nodes interact with the bus only through a bound send callable and the
frame-delivery hook; everything else is node-local state. The sensing
controller owns the AEB decision and the autonomous tracker; the main
controller applies last-writer-wins commands to the plant; the attacker
re-injects the target identifier right after every legitimate completion;
the detector flags inter-arrival anomalies on the periodic identifiers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .codec import (
    AEB_ID,
    ATTACK_ID,
    MODE_ID,
    RPM_ID,
    Catalog,
    CanFrame,
    MalformedFrame,
    Mode,
    SignalValue,
    UnknownId,
    decode_frame,
    encode_frame,
    KIND_AEB,
    KIND_ATTACK,
    KIND_BRAKE,
    KIND_MODE,
    KIND_RPM,
    KIND_STEERING,
)
from .lidar import MAX_RANGE_M, LidarScan, min_forward_range
from .plant import Actuation

# send(frame, ready_time_us) bound to the node's bus identity
SendFn = Callable[[CanFrame, int], None]

SERVICE_IDS = (MODE_ID, AEB_ID, ATTACK_ID)


def pure_pursuit_steering(x: float, y: float, heading: float,
                          route: list[tuple[float, float]],
                          lookahead_m: float, wheelbase_m: float) -> float:
    """Steering angle (rad) toward the route point one lookahead away.

    Past the final waypoint, or with no reachable target, holds straight.
    """
    target = _lookahead_point(x, y, heading, route, lookahead_m)
    if target is None:
        return 0.0
    dx, dy = target[0] - x, target[1] - y
    alpha = math.atan2(dy, dx) - heading
    return math.atan2(2.0 * wheelbase_m * math.sin(alpha), lookahead_m)


def _lookahead_point(x: float, y: float, heading: float,
                     route: list[tuple[float, float]],
                     lookahead: float) -> Optional[tuple[float, float]]:
    best = None
    for (ax, ay), (bx, by) in zip(route, route[1:]):
        ex, ey = bx - ax, by - ay
        fx, fy = ax - x, ay - y
        a = ex * ex + ey * ey
        if a == 0.0:
            continue
        b = 2.0 * (fx * ex + fy * ey)
        c = fx * fx + fy * fy - lookahead * lookahead
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        # prefer the forward-most circle intersection on the latest segment
        for s in ((-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)):
            if 0.0 <= s <= 1.0:
                best = (ax + s * ex, ay + s * ey)
                break
    if best is not None:
        return best
    if route:
        lx, ly = route[-1]
        ahead = (lx - x) * math.cos(heading) + (ly - y) * math.sin(heading)
        if ahead > lookahead:
            return (lx, ly)
    return None


class SscNode:
    """Sensing system controller: emits RPM, STEERING, and BREAK every 10 ms.

    In AutoDrive the targets come from the cruise setpoint and the waypoint
    tracker; in ManualAEB they echo the teleop commands so the bus traffic
    profile is identical in both modes. An obstacle inside the AEB threshold
    forces RPM 0 and full braking whenever AEB is enabled.
    """

    node_id = "ssc"

    def __init__(self, send: SendFn, catalog: Catalog, *, mode: Mode,
                 aeb_enabled: bool, cruise_rpm: int, aeb_threshold_m: float,
                 cone_half_deg: float, route: list[tuple[float, float]],
                 lookahead_m: float, wheelbase_m: float,
                 pose_provider: Callable[[], tuple[float, float, float]],
                 max_rpm: int, max_steer_mrad: int):
        self._send = send
        self._rpm_msg = catalog.by_id(RPM_ID)
        self._steer_msg = catalog.by_name("STEERING")
        self._brake_msg = catalog.by_name("BREAK")
        self._catalog = catalog
        self.mode = mode
        self.aeb_enabled = aeb_enabled
        self.cruise_rpm = int(cruise_rpm)
        self.aeb_threshold_m = aeb_threshold_m
        self.cone_half_deg = cone_half_deg
        self.route = route
        self.lookahead_m = lookahead_m
        self.wheelbase_m = wheelbase_m
        self.pose_provider = pose_provider
        self.max_rpm = int(max_rpm)
        self.max_steer_mrad = int(max_steer_mrad)
        self.teleop_throttle_pct = 0.0
        self.teleop_steering_pct = 0.0
        self.min_forward_m = MAX_RANGE_M
        self.obstacle_detected = False
        self.service_warnings = 0
        self._have_scan = False

    def set_scan(self, scan: LidarScan) -> None:
        self._have_scan = True
        self.min_forward_m = min_forward_range(scan, self.cone_half_deg)
        self.obstacle_detected = self.min_forward_m < self.aeb_threshold_m

    def set_teleop(self, throttle_pct: float | None = None,
                   steering_pct: float | None = None) -> None:
        if throttle_pct is not None:
            self.teleop_throttle_pct = throttle_pct
        if steering_pct is not None:
            self.teleop_steering_pct = steering_pct

    def on_frame(self, frame: CanFrame, origin: str, t_us: int) -> None:
        if frame.can_id not in (MODE_ID, AEB_ID):
            return
        try:
            sig = decode_frame(frame, self._catalog)
        except MalformedFrame:
            self.service_warnings += 1
            return
        if sig.kind == KIND_MODE:
            self.mode = Mode(sig.value)
        elif sig.kind == KIND_AEB:
            self.aeb_enabled = bool(sig.value)

    def tick(self, t_us: int) -> None:
        if self.mode is Mode.AUTO_DRIVE:
            target_rpm = self.cruise_rpm
            x, y, heading = self.pose_provider()
            steer_rad = pure_pursuit_steering(x, y, heading, self.route,
                                              self.lookahead_m, self.wheelbase_m)
            steering_mrad = round(steer_rad * 1000.0)
        else:
            target_rpm = round(self.teleop_throttle_pct / 100.0 * self.max_rpm)
            steering_mrad = round(self.teleop_steering_pct / 100.0 * self.max_steer_mrad)
        brake = 0
        if self.aeb_enabled and self._have_scan and self.obstacle_detected:
            target_rpm = 0
            brake = 255
        self._send(encode_frame(self._rpm_msg, SignalValue.rpm(target_rpm), t_us), t_us)
        self._send(encode_frame(self._steer_msg, SignalValue.steering(steering_mrad), t_us), t_us)
        self._send(encode_frame(self._brake_msg, SignalValue.brake(brake), t_us), t_us)


@dataclass
class McuState:
    mode: Mode = Mode.AUTO_DRIVE
    aeb_enabled: bool = True
    last_rpm_cmd: int = 0
    last_steering_mrad: int = 0
    last_brake_cmd: int = 0


class McuNode:
    """Main controller: decodes command frames last-writer-wins and forwards
    the held commands to the plant on its own 10 ms actuation period."""

    node_id = "mcu"

    def __init__(self, catalog: Catalog, *, mode: Mode, aeb_enabled: bool):
        self._catalog = catalog
        self.state = McuState(mode=mode, aeb_enabled=aeb_enabled)
        self.malformed_count = 0
        self.service_warnings = 0

    def on_frame(self, frame: CanFrame, origin: str, t_us: int) -> None:
        try:
            sig = decode_frame(frame, self._catalog)
        except UnknownId:
            return
        except MalformedFrame:
            if frame.can_id in SERVICE_IDS:
                self.service_warnings += 1
            else:
                self.malformed_count += 1
            return
        if sig.kind == KIND_RPM:
            self.state.last_rpm_cmd = sig.value
        elif sig.kind == KIND_STEERING:
            self.state.last_steering_mrad = sig.value
        elif sig.kind == KIND_BRAKE:
            self.state.last_brake_cmd = sig.value
        elif sig.kind == KIND_MODE:
            self.state.mode = Mode(sig.value)
        elif sig.kind == KIND_AEB:
            self.state.aeb_enabled = bool(sig.value)

    def actuation(self) -> Actuation:
        return Actuation(
            target_rpm=float(self.state.last_rpm_cmd),
            steering_rad=self.state.last_steering_mrad / 1000.0,
            brake_effort=self.state.last_brake_cmd,
        )


class AttackerNode:
    """Overwrite attacker: one injection per legitimate target-id frame,
    scheduled one bus bit time after the observed completion."""

    node_id = "atk"

    def __init__(self, send: SendFn, catalog: Catalog, bit_time_us: int, *,
                 target_id: int = RPM_ID, malicious_value: int = 6000,
                 active: bool = False):
        self._send = send
        self._catalog = catalog
        self._target_msg = catalog.by_id(target_id)
        self.eps_us = bit_time_us
        self.target_id = target_id
        self.malicious_value = int(malicious_value)
        self.active = active
        self.injected_count = 0
        self.service_warnings = 0

    def on_frame(self, frame: CanFrame, origin: str, t_us: int) -> None:
        if frame.can_id == ATTACK_ID:
            try:
                sig = decode_frame(frame, self._catalog)
            except MalformedFrame:
                self.service_warnings += 1
                return
            self.active = bool(sig.value)
            return
        if not self.active or frame.can_id != self.target_id or origin == self.node_id:
            return
        ready = t_us + self.eps_us
        forged = encode_frame(self._target_msg,
                              SignalValue(self._target_msg.kind, self.malicious_value),
                              ready)
        self._send(forged, ready)
        self.injected_count += 1


@dataclass(frozen=True)
class DetectorAlert:
    time_us: int
    can_id: int
    reason: str
    observed_gap_ms: float
    expected_gap_ms: float


class DetectorNode:
    """Frequency-baseline detector: alerts when a periodic identifier's
    inter-arrival gap leaves [low_factor, high_factor] times its period."""

    node_id = "det"

    def __init__(self, catalog: Catalog, *, low_factor: float = 0.5,
                 high_factor: float = 1.5):
        self._period_ms = {m.can_id: m.period_ms for m in catalog.periodic()}
        self.low_factor = low_factor
        self.high_factor = high_factor
        self.alerts: list[DetectorAlert] = []
        self._last_us: dict[int, int] = {}

    def on_frame(self, frame: CanFrame, origin: str, t_us: int) -> None:
        period = self._period_ms.get(frame.can_id)
        if period is None:
            return
        last = self._last_us.get(frame.can_id)
        self._last_us[frame.can_id] = t_us
        if last is None:
            return
        gap_ms = (t_us - last) / 1000.0
        if gap_ms < self.low_factor * period or gap_ms > self.high_factor * period:
            self.alerts.append(DetectorAlert(t_us, frame.can_id,
                                             "inter-arrival-anomaly",
                                             gap_ms, float(period)))


def alerts_csv(alerts: list[DetectorAlert]) -> str:
    lines = ["time_s,id_hex,reason,observed_ms,expected_ms"]
    lines += [
        f"{a.time_us // 1_000_000}.{a.time_us % 1_000_000:06d},{a.can_id:03X},"
        f"{a.reason},{a.observed_gap_ms:.3f},{a.expected_gap_ms:.3f}"
        for a in alerts
    ]
    return "".join(line + "\n" for line in lines)


class GatewayNode:
    """Bridges scheduled and teleop mode/AEB/attack requests onto the bus as
    real service frames, keeping the bus the single source of truth."""

    node_id = "gw"

    def __init__(self, send: SendFn, catalog: Catalog):
        self._send = send
        self._mode_msg = catalog.by_id(MODE_ID)
        self._aeb_msg = catalog.by_id(AEB_ID)
        self._attack_msg = catalog.by_id(ATTACK_ID)

    def send_mode(self, mode: Mode, t_us: int) -> None:
        self._send(encode_frame(self._mode_msg, SignalValue.mode(mode), t_us), t_us)

    def send_aeb(self, enabled: bool, t_us: int) -> None:
        self._send(encode_frame(self._aeb_msg, SignalValue.aeb(enabled), t_us), t_us)

    def send_attack(self, start: bool, t_us: int) -> None:
        self._send(encode_frame(self._attack_msg, SignalValue.attack(start), t_us), t_us)
