"""Vehicle plant: engine speed dynamics, bicycle kinematics, obstacle world.

The engine is a first-order motor behind a discrete PI speed controller
running on the 10 ms control period, which gives the closed loop its
second-order underdamped step response. Braking is a competing
deceleration term scaled by effort, strong enough to stop from cruise in
well under a second; while braking, the controller integral is reset so
brake release re-enters the loop cleanly.

Positions are meters; the state position is the front (sensor) reference
point and the footprint used for collision extends rearward from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .accel import maybe_njit


class PlantError(Exception):
    pass


class InvalidStep(PlantError):
    pass


@dataclass(frozen=True)
class PlantParams:
    motor_tau_s: float = 0.4          # first-order motor time constant
    kp: float = 0.6                   # PI proportional gain, rpm per rpm error
    ki: float = 5.3                   # PI integral gain, rpm per rpm*s
    drive_max_rpm: float = 9000.0     # drive command headroom
    brake_rate_full: float = 25.0     # 1/s decay at full brake effort
    kv_ms_per_rpm: float = 8.0e-4     # ground speed per rpm
    wheelbase_m: float = 0.325
    max_steer_rad: float = 0.45
    control_period_us: int = 10_000
    footprint_length_m: float = 0.44
    footprint_width_m: float = 0.21


@dataclass(frozen=True)
class Actuation:
    target_rpm: float = 0.0
    steering_rad: float = 0.0
    brake_effort: int = 0


@dataclass(frozen=True)
class PlantState:
    rpm: float = 0.0
    target_rpm_applied: float = 0.0
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    steering_angle: float = 0.0
    brake_effort: int = 0
    time_us: int = 0
    # controller internals
    ctrl_integral: float = 0.0
    drive_cmd: float = 0.0
    pi_next_us: int = 0

    @property
    def speed_of(self) -> float:  # pragma: no cover - convenience only
        raise AttributeError("use speed_ms(params)")

    def speed_ms(self, params: PlantParams) -> float:
        return self.rpm * params.kv_ms_per_rpm

    @classmethod
    def cruising(cls, rpm: float, params: PlantParams, x: float = 0.0, y: float = 0.0,
                 heading: float = 0.0) -> "PlantState":
        """A state at speed equilibrium: the PI holds ``rpm`` with zero error."""
        return cls(rpm=rpm, target_rpm_applied=rpm, x=x, y=y, heading=heading,
                   ctrl_integral=rpm / params.ki, drive_cmd=rpm)


@maybe_njit
def _advance_kernel(rpm, integ, drive, pi_next_us, time_us, x, y, heading,
                    target, steer_rad, brake, n_substeps, substep_us,
                    tau, kp, ki, u_max, brake_rate, kv, wheelbase, ctrl_period_us):
    dt = substep_us * 1e-6
    tc = ctrl_period_us * 1e-6
    for _ in range(n_substeps):
        if time_us >= pi_next_us:
            err = target - rpm
            if brake > 0.0:
                integ = 0.0
                u = kp * err
            else:
                cand = integ + err * tc
                u_unsat = kp * err + ki * cand
                if not ((u_unsat > u_max and err > 0.0) or (u_unsat < 0.0 and err < 0.0)):
                    integ = cand
                u = kp * err + ki * integ
            if u < 0.0:
                u = 0.0
            elif u > u_max:
                u = u_max
            drive = u
            pi_next_us = time_us + ctrl_period_us
        decel = brake_rate * (brake / 255.0) * rpm
        rpm += dt * ((drive - rpm) / tau - decel)
        if rpm < 0.0:
            rpm = 0.0
        v = kv * rpm
        x += dt * v * math.cos(heading)
        y += dt * v * math.sin(heading)
        heading += dt * v * math.tan(steer_rad) / wheelbase
        time_us += substep_us
    return rpm, integ, drive, pi_next_us, time_us, x, y, heading


def advance(state: PlantState, actuation: Actuation, params: PlantParams,
            n_substeps: int, substep_us: int = 1000) -> PlantState:
    """Integrate ``n_substeps`` fixed substeps with held actuation."""
    steer = min(max(actuation.steering_rad, -params.max_steer_rad), params.max_steer_rad)
    rpm, integ, drive, pi_next, t, x, y, heading = _advance_kernel(
        state.rpm, state.ctrl_integral, state.drive_cmd, state.pi_next_us,
        state.time_us, state.x, state.y, state.heading,
        float(actuation.target_rpm), steer, float(actuation.brake_effort),
        n_substeps, substep_us,
        params.motor_tau_s, params.kp, params.ki, params.drive_max_rpm,
        params.brake_rate_full, params.kv_ms_per_rpm, params.wheelbase_m,
        params.control_period_us,
    )
    return replace(
        state, rpm=rpm, ctrl_integral=integ, drive_cmd=drive, pi_next_us=pi_next,
        time_us=t, x=x, y=y, heading=heading, steering_angle=steer,
        target_rpm_applied=float(actuation.target_rpm),
        brake_effort=int(actuation.brake_effort),
    )


def step(state: PlantState, actuation: Actuation, dt: float,
         params: PlantParams = PlantParams()) -> PlantState:
    """Advance the plant by one step of ``dt`` seconds, dt in (0, 0.01]."""
    if not (0.0 < dt <= 0.01):
        raise InvalidStep(f"dt must be in (0, 0.01], got {dt}")
    return advance(state, actuation, params, 1, substep_us=max(1, round(dt * 1e6)))


# -- obstacle world --------------------------------------------------------


@dataclass(frozen=True)
class Box:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def corners(self) -> list[tuple[float, float]]:
        return [(self.x_min, self.y_min), (self.x_max, self.y_min),
                (self.x_max, self.y_max), (self.x_min, self.y_max)]

    def segments(self) -> list[tuple[float, float, float, float]]:
        c = self.corners()
        return [(*c[i], *c[(i + 1) % 4]) for i in range(4)]


@dataclass(frozen=True)
class Wall:
    """A line-segment obstacle."""

    x1: float
    y1: float
    x2: float
    y2: float

    def corners(self) -> list[tuple[float, float]]:
        return [(self.x1, self.y1), (self.x2, self.y2)]

    def segments(self) -> list[tuple[float, float, float, float]]:
        return [(self.x1, self.y1, self.x2, self.y2)]


Obstacle = Box | Wall


@dataclass
class World:
    obstacles: list[Obstacle] = field(default_factory=list)
    route: list[tuple[float, float]] = field(default_factory=list)
    _segments: np.ndarray | None = field(default=None, repr=False, compare=False)

    def segment_array(self) -> np.ndarray:
        """All obstacle edges as an (n, 4) float array of x1,y1,x2,y2."""
        if self._segments is None:
            segs = [seg for obs in self.obstacles for seg in obs.segments()]
            arr = np.array(segs, dtype=np.float64) if segs else np.empty((0, 4))
            object.__setattr__(self, "_segments", arr)
        return self._segments


def footprint_corners(state: PlantState, params: PlantParams) -> list[tuple[float, float]]:
    """Vehicle rectangle, front edge at the state position, extending rearward."""
    fx, fy = math.cos(state.heading), math.sin(state.heading)
    lx, ly = -fy, fx
    hw = params.footprint_width_m / 2.0
    ln = params.footprint_length_m
    front_l = (state.x + lx * hw, state.y + ly * hw)
    front_r = (state.x - lx * hw, state.y - ly * hw)
    rear_r = (front_r[0] - fx * ln, front_r[1] - fy * ln)
    rear_l = (front_l[0] - fx * ln, front_l[1] - fy * ln)
    return [front_l, front_r, rear_r, rear_l]


def _project(points: list[tuple[float, float]], ax: float, ay: float) -> tuple[float, float]:
    dots = [px * ax + py * ay for px, py in points]
    return min(dots), max(dots)


def _convex_overlap(pts_a: list[tuple[float, float]], pts_b: list[tuple[float, float]]) -> bool:
    """Separating-axis test over the edges of two convex point sets."""
    axes = []
    for pts in (pts_a, pts_b):
        n = len(pts)
        for i in range(n if n > 2 else n - 1):
            ex = pts[(i + 1) % n][0] - pts[i][0]
            ey = pts[(i + 1) % n][1] - pts[i][1]
            if ex == 0.0 and ey == 0.0:
                continue
            axes.append((-ey, ex))
            if n == 2:  # a bare segment also separates along its own direction
                axes.append((ex, ey))
    for ax, ay in axes:
        a_lo, a_hi = _project(pts_a, ax, ay)
        b_lo, b_hi = _project(pts_b, ax, ay)
        if a_hi < b_lo or b_hi < a_lo:
            return False
    return True


def collision(state: PlantState, world: World,
              params: PlantParams = PlantParams()) -> bool:
    """True iff the vehicle footprint intersects any obstacle."""
    rect = footprint_corners(state, params)
    return any(_convex_overlap(rect, obs.corners()) for obs in world.obstacles)
