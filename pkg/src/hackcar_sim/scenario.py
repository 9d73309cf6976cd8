"""Experiment orchestration: config loading, the co-simulation loop, and
run metrics.

A run advances a shared integer-microsecond clock: 1 ms plant substeps,
10 ms control cycles, 25 ms LiDAR scans, with the bus resolved
continuously in between. With teleop absent or trace-driven the whole run
is a pure function of its configuration, so repeated runs produce
byte-identical logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .bus import BusConfig, TxRecord, VirtualCanBus
from .codec import Catalog, Mode, RPM_ID, catalog_from_spec, default_catalog
from .lidar import MAX_RANGE_M, SCAN_PERIOD_US, lidar_scan
from .nodes import (
    AttackerNode,
    DetectorAlert,
    DetectorNode,
    GatewayNode,
    McuNode,
    SscNode,
    alerts_csv,
)
from .plant import Actuation, Box, Obstacle, PlantParams, PlantState, Wall, World, advance, collision
from .teleop import (
    ControlCommand,
    KIND_AEB,
    KIND_ATTACK,
    KIND_MODE,
    KIND_STEERING,
    KIND_THROTTLE,
    mode_from_name,
)


class ConfigError(Exception):
    pass


CONTROL_PERIOD_US = 10_000
PLANT_SUBSTEP_US = 1_000
_LOOP_STEP_US = 5_000  # gcd of the control and scan periods


@dataclass(frozen=True)
class AttackPlan:
    enabled: bool = False
    start_s: float = 0.0
    stop_s: float = 0.0
    malicious_rpm: int = 6000
    target_id: int = RPM_ID


@dataclass(frozen=True)
class ScenarioConfig:
    mode: Mode = Mode.AUTO_DRIVE
    duration_s: float = 60.0
    route: tuple[tuple[float, float], ...] = ()
    obstacles: tuple[Obstacle, ...] = ()
    cruise_rpm: int = 6000
    aeb_threshold_m: float = 0.5
    aeb_enabled: bool = True
    aeb_cone_half_deg: float = 15.0
    lookahead_m: float = 0.6
    max_rpm: int = 8000
    lidar_noise_sigma: float = 0.0
    attack: AttackPlan = AttackPlan()
    bus: BusConfig = BusConfig()
    plant: PlantParams = PlantParams()
    seed: int = 0
    teleop_trace: Optional[str] = None
    catalog: Optional[Catalog] = None

    def resolved_catalog(self) -> Catalog:
        return self.catalog if self.catalog is not None else default_catalog()


def validate_config(config: ScenarioConfig) -> None:
    if config.duration_s <= 0:
        raise ConfigError("duration_s must be positive")
    if config.mode is Mode.AUTO_DRIVE and len(config.route) < 2:
        raise ConfigError("route needs at least 2 waypoints in AutoDrive")
    atk = config.attack
    if atk.enabled:
        if not atk.start_s < atk.stop_s:
            raise ConfigError("attack.start_s must be before attack.stop_s")
        if atk.stop_s > config.duration_s:
            raise ConfigError("attack.stop_s must not exceed duration_s")
    if config.cruise_rpm <= 0:
        raise ConfigError("cruise_rpm must be positive")
    if config.aeb_threshold_m <= 0:
        raise ConfigError("aeb_threshold_m must be positive")


# -- structured-text loading -------------------------------------------------


def load_scenario(text: str) -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"scenario is not valid TOML: {exc}") from None
    return scenario_from_dict(data)


def load_scenario_file(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_scenario(fh.read())


def load_catalog(text: str) -> Catalog:
    """Load a message catalog from a structured-text file body.

    Same schema as the scenario's ``[[catalog]]`` section; the six built-in
    messages must be present.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"catalog is not valid TOML: {exc}") from None
    entries = data.pop("catalog", None)
    if entries is None:
        raise ConfigError("catalog file needs a [[catalog]] entry list")
    if data:
        raise ConfigError(f"unknown catalog file key {sorted(data)[0]!r}")
    try:
        return catalog_from_spec(entries)
    except Exception as exc:
        raise ConfigError(f"catalog: {exc}") from None


def load_catalog_file(path: str) -> Catalog:
    with open(path, "r", encoding="utf-8") as fh:
        return load_catalog(fh.read())


_MODE_NAMES = {"AutoDrive": Mode.AUTO_DRIVE, "ManualAEB": Mode.MANUAL_AEB}


def scenario_from_dict(data: dict) -> ScenarioConfig:
    data = dict(data)
    kwargs: dict = {}

    mode_name = data.pop("mode", "AutoDrive")
    if mode_name not in _MODE_NAMES:
        raise ConfigError(f"mode: expected AutoDrive or ManualAEB, got {mode_name!r}")
    kwargs["mode"] = _MODE_NAMES[mode_name]

    for key, conv in (("duration_s", float), ("cruise_rpm", int),
                      ("aeb_threshold_m", float), ("aeb_enabled", bool),
                      ("aeb_cone_half_deg", float), ("lookahead_m", float),
                      ("max_rpm", int), ("lidar_noise_sigma", float),
                      ("seed", int), ("teleop_trace", str)):
        if key in data:
            try:
                kwargs[key] = conv(data.pop(key))
            except (TypeError, ValueError):
                raise ConfigError(f"{key}: invalid value") from None

    if "route" in data:
        raw = data.pop("route")
        try:
            kwargs["route"] = tuple((float(p[0]), float(p[1])) for p in raw)
        except (TypeError, ValueError, IndexError):
            raise ConfigError("route: expected a list of [x, y] pairs") from None

    if "obstacles" in data:
        kwargs["obstacles"] = tuple(_parse_obstacle(i, o)
                                    for i, o in enumerate(data.pop("obstacles")))

    if "attack" in data:
        kwargs["attack"] = _parse_section("attack", data.pop("attack"), AttackPlan)
    if "bus" in data:
        kwargs["bus"] = _parse_section("bus", data.pop("bus"), BusConfig)
    if "plant" in data:
        kwargs["plant"] = _parse_section("plant", data.pop("plant"), PlantParams)
    if "catalog" in data:
        try:
            kwargs["catalog"] = catalog_from_spec(data.pop("catalog"))
        except Exception as exc:
            raise ConfigError(f"catalog: {exc}") from None

    if data:
        raise ConfigError(f"unknown scenario key {sorted(data)[0]!r}")
    config = ScenarioConfig(**kwargs)
    validate_config(config)
    return config


def _parse_section(name: str, raw: dict, cls):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected a table")
    raw = dict(raw)
    known = {f.name: f.type for f in fields(cls)}
    kwargs = {}
    for key in list(raw):
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key}")
        kwargs[key] = raw.pop(key)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _parse_obstacle(index: int, raw: dict) -> Obstacle:
    if not isinstance(raw, dict):
        raise ConfigError(f"obstacles[{index}]: expected a table")
    raw = dict(raw)
    kind = raw.pop("kind", "box")
    try:
        if kind == "box":
            obs = Box(float(raw.pop("x_min")), float(raw.pop("y_min")),
                      float(raw.pop("x_max")), float(raw.pop("y_max")))
        elif kind == "wall":
            obs = Wall(float(raw.pop("x1")), float(raw.pop("y1")),
                       float(raw.pop("x2")), float(raw.pop("y2")))
        else:
            raise ConfigError(f"obstacles[{index}].kind: expected box or wall")
    except KeyError as exc:
        raise ConfigError(f"obstacles[{index}] missing key {exc.args[0]!r}") from None
    if raw:
        raise ConfigError(f"unknown key obstacles[{index}].{sorted(raw)[0]!r}")
    return obs


# -- telemetry and metrics ----------------------------------------------------


@dataclass(frozen=True)
class TelemetryRecord:
    time_s: float
    target_rpm: float
    actual_rpm: float
    min_range_m: float
    obstacle: bool
    attack: bool
    collision: bool


TELEMETRY_HEADER = "time_s,target_rpm,actual_rpm,min_range_m,obstacle,attack,collision"


def telemetry_csv(records: list[TelemetryRecord]) -> str:
    lines = [TELEMETRY_HEADER]
    lines += [
        f"{r.time_s:.3f},{r.target_rpm:.0f},{r.actual_rpm:.3f},{r.min_range_m:.4f},"
        f"{int(r.obstacle)},{int(r.attack)},{int(r.collision)}"
        for r in records
    ]
    return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class Summary:
    stopped: bool
    stop_latency_s: Optional[float]  # None when no detection; inf when never stopped
    collided: bool
    rpm_variance_pre: Optional[float]
    rpm_variance_attack: Optional[float]
    mean_rpm_attack: Optional[float]
    detection_time_s: Optional[float]
    settled_time_s: Optional[float]


def attack_effect_metrics(telemetry: list[TelemetryRecord], cruise_rpm: int) -> Summary:
    """Recompute the run summary from telemetry alone.

    The pre window is [cruise settled, detection); the contested window is
    [detection, end). Degenerate windows yield None, never zero.
    """
    if not telemetry:
        raise ValueError("telemetry is empty")
    rpm = np.array([r.actual_rpm for r in telemetry])
    times = np.array([r.time_s for r in telemetry])
    n = len(telemetry)
    collided = any(r.collision for r in telemetry)

    det_idx = next((i for i, r in enumerate(telemetry) if r.obstacle), None)
    pre_end = det_idx if det_idx is not None else n

    tol = 0.02 * cruise_rpm
    settled_idx: Optional[int] = None
    if pre_end > 0:
        bad = np.nonzero(np.abs(rpm[:pre_end] - cruise_rpm) > tol)[0]
        if bad.size == 0:
            settled_idx = 0
        elif bad[-1] + 1 < pre_end:
            settled_idx = int(bad[-1]) + 1

    stop_latency: Optional[float] = None
    if det_idx is not None:
        below = np.nonzero(rpm[det_idx:] < 0.01 * cruise_rpm)[0]
        stop_latency = float(times[det_idx + below[0]] - times[det_idx]) if below.size else math.inf

    var_pre = mean_atk = var_atk = None
    if settled_idx is not None and pre_end - settled_idx >= 2:
        var_pre = float(np.var(rpm[settled_idx:pre_end]))
    if det_idx is not None and n - det_idx >= 2:
        var_atk = float(np.var(rpm[det_idx:]))
        mean_atk = float(np.mean(rpm[det_idx:]))

    return Summary(
        stopped=stop_latency is not None and math.isfinite(stop_latency),
        stop_latency_s=stop_latency,
        collided=collided,
        rpm_variance_pre=var_pre,
        rpm_variance_attack=var_atk,
        mean_rpm_attack=mean_atk,
        detection_time_s=float(times[det_idx]) if det_idx is not None else None,
        settled_time_s=float(times[settled_idx]) if settled_idx is not None else None,
    )


@dataclass
class RunReport:
    config: ScenarioConfig
    telemetry: list[TelemetryRecord]
    candump: str
    tx_records: list[TxRecord]
    utilization_series: list[float]
    alerts: list[DetectorAlert]
    summary: Summary

    def telemetry_csv(self) -> str:
        return telemetry_csv(self.telemetry)

    def alerts_csv(self) -> str:
        return alerts_csv(self.alerts)


# -- the run loop -------------------------------------------------------------


class RunContext:
    """Live view handed to the per-cycle observer; read-only by contract."""

    def __init__(self, bus: VirtualCanBus, ssc: SscNode, mcu: McuNode,
                 attacker: AttackerNode, detector: DetectorNode):
        self.bus = bus
        self.ssc = ssc
        self.mcu = mcu
        self.attacker = attacker
        self.detector = detector


CycleObserver = Callable[[TelemetryRecord, RunContext], None]


class CommandSource:
    """Anything with pop_due(t_us) -> list[ControlCommand]."""

    def pop_due(self, t_us: int) -> list[ControlCommand]:  # pragma: no cover
        raise NotImplementedError


def run(config: ScenarioConfig, command_source=None,
        on_cycle: Optional[CycleObserver] = None) -> RunReport:
    """Execute a scenario and produce its full report.

    ``command_source`` provides teleop commands (trace or live queue);
    ``on_cycle`` is invoked after each 10 ms control cycle with the fresh
    telemetry record and the live context.
    """
    validate_config(config)
    catalog = config.resolved_catalog()
    params = config.plant
    world = World(list(config.obstacles), [tuple(p) for p in config.route])

    if len(config.route) >= 2:
        (x0, y0), (x1, y1) = config.route[0], config.route[1]
        heading0 = math.atan2(y1 - y0, x1 - x0)
    else:
        x0 = y0 = heading0 = 0.0
    state = PlantState(x=x0, y=y0, heading=heading0)
    holder = {"state": state}

    bus = VirtualCanBus(config.bus)

    def sender(node_id: str):
        return lambda frame, ready_us: bus.request_transmit(node_id, frame, ready_us)

    ssc = SscNode(
        sender(SscNode.node_id), catalog, mode=config.mode,
        aeb_enabled=config.aeb_enabled, cruise_rpm=config.cruise_rpm,
        aeb_threshold_m=config.aeb_threshold_m,
        cone_half_deg=config.aeb_cone_half_deg,
        route=[tuple(p) for p in config.route], lookahead_m=config.lookahead_m,
        wheelbase_m=params.wheelbase_m,
        pose_provider=lambda: (holder["state"].x, holder["state"].y,
                               holder["state"].heading),
        max_rpm=config.max_rpm,
        max_steer_mrad=round(params.max_steer_rad * 1000),
    )
    mcu = McuNode(catalog, mode=config.mode, aeb_enabled=config.aeb_enabled)
    attacker = AttackerNode(sender(AttackerNode.node_id), catalog, bus.bit_time_us,
                            target_id=config.attack.target_id,
                            malicious_value=config.attack.malicious_rpm)
    detector = DetectorNode(catalog)
    gateway = GatewayNode(sender(GatewayNode.node_id), catalog)

    bus.attach(ssc.node_id, ssc.on_frame)
    bus.attach(mcu.node_id, mcu.on_frame)
    bus.attach(attacker.node_id, attacker.on_frame)
    bus.attach(detector.node_id, detector.on_frame)
    bus.attach(gateway.node_id)

    # the scheduled attack window travels as real service frames on the bus
    schedule: list[tuple[int, bool]] = []
    if config.attack.enabled:
        schedule.append((round(config.attack.start_s * 1_000_000), True))
        schedule.append((round(config.attack.stop_s * 1_000_000), False))
    sched_next = 0

    rng = np.random.default_rng(config.seed) if config.lidar_noise_sigma > 0 else None
    ctx = RunContext(bus, ssc, mcu, attacker, detector)
    telemetry: list[TelemetryRecord] = []
    held = Actuation()

    duration_us = round(config.duration_s * 1_000_000)
    t = 0
    while t < duration_us:
        state = holder["state"]
        if t > 0 and t % SCAN_PERIOD_US == 0:
            ssc.set_scan(lidar_scan(state, world, config.lidar_noise_sigma, rng))
        if t % CONTROL_PERIOD_US == 0:
            if command_source is not None:
                for cmd in command_source.pop_due(t):
                    _apply_command(cmd, t, ssc, gateway)
            ssc.tick(t)
            held = mcu.actuation()
            record = TelemetryRecord(
                time_s=t / 1_000_000,
                target_rpm=held.target_rpm,
                actual_rpm=state.rpm,
                min_range_m=ssc.min_forward_m,
                obstacle=ssc.obstacle_detected,
                attack=attacker.active,
                collision=collision(state, world, params),
            )
            telemetry.append(record)
            if on_cycle is not None:
                on_cycle(record, ctx)
        while sched_next < len(schedule) and schedule[sched_next][0] < t + _LOOP_STEP_US:
            at_us, start = schedule[sched_next]
            gateway.send_attack(start, at_us)
            sched_next += 1
        bus.advance_until(t + _LOOP_STEP_US)
        holder["state"] = advance(state, held, params,
                                  _LOOP_STEP_US // PLANT_SUBSTEP_US,
                                  PLANT_SUBSTEP_US)
        t += _LOOP_STEP_US

    return RunReport(
        config=config,
        telemetry=telemetry,
        candump=bus.export_log("candump"),
        tx_records=bus.completed,
        utilization_series=bus.utilization_series(config.duration_s),
        alerts=list(detector.alerts),
        summary=attack_effect_metrics(telemetry, config.cruise_rpm),
    )


def _apply_command(cmd: ControlCommand, t_us: int, ssc: SscNode,
                   gateway: GatewayNode) -> None:
    if cmd.kind == KIND_THROTTLE:
        ssc.set_teleop(throttle_pct=float(cmd.value))
    elif cmd.kind == KIND_STEERING:
        ssc.set_teleop(steering_pct=float(cmd.value))
    elif cmd.kind == KIND_MODE:
        gateway.send_mode(mode_from_name(str(cmd.value)), t_us)
    elif cmd.kind == KIND_AEB:
        gateway.send_aeb(cmd.value == "on", t_us)
    elif cmd.kind == KIND_ATTACK:
        gateway.send_attack(cmd.value == "start", t_us)


# -- reference experiment builders --------------------------------------------


def approach_scenario(duration_s: float = 60.0, detect_after_s: float = 30.0,
                      cruise_rpm: int = 6000, attack_start_s: Optional[float] = None,
                      attack_stop_s: Optional[float] = None, seed: int = 1,
                      bitrate: int = 500_000,
                      plant: PlantParams = PlantParams()) -> ScenarioConfig:
    """Straight-road approach with the obstacle placed so AEB detection
    lands near ``detect_after_s`` at the configured threshold range."""
    speed = cruise_rpm * plant.kv_ms_per_rpm
    face_x = speed * detect_after_s + 0.5
    route_end = face_x + speed * max(duration_s - detect_after_s, 0.0) + 10.0
    attack = AttackPlan()
    if attack_start_s is not None:
        attack = AttackPlan(enabled=True, start_s=attack_start_s,
                            stop_s=attack_stop_s if attack_stop_s is not None else duration_s,
                            malicious_rpm=cruise_rpm)
    return ScenarioConfig(
        mode=Mode.AUTO_DRIVE,
        duration_s=duration_s,
        route=((0.0, 0.0), (route_end, 0.0)),
        obstacles=(Box(face_x, -0.8, face_x + 0.4, 0.8),),
        cruise_rpm=cruise_rpm,
        attack=attack,
        bus=BusConfig(bitrate=bitrate),
        plant=plant,
        seed=seed,
    )


def cruise_scenario(duration_s: float = 60.0, cruise_rpm: int = 6000,
                    seed: int = 1, bitrate: int = 500_000) -> ScenarioConfig:
    """Obstacle-free straight cruise used for the utilization validation."""
    plant = PlantParams()
    route_end = cruise_rpm * plant.kv_ms_per_rpm * duration_s + 20.0
    return ScenarioConfig(
        mode=Mode.AUTO_DRIVE,
        duration_s=duration_s,
        route=((0.0, 0.0), (route_end, 0.0)),
        cruise_rpm=cruise_rpm,
        bus=BusConfig(bitrate=bitrate),
        seed=seed,
    )
