"""Simulated 2D LiDAR: 270 degree field of view, 10 m range, 1081 beams.

Ray casting runs against the world's obstacle edges. Beam 540 points along
the vehicle heading; angles grow counter-clockwise. Ranges are exact
ray-segment intersections capped at the maximum range, with optional
Gaussian noise for detector experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accel import USING_NUMBA, maybe_njit
from .plant import PlantState, World

N_BEAMS = 1081
FOV_DEG = 270.0
ANGLE_MIN_RAD = -math.radians(FOV_DEG / 2.0)
ANGLE_INCREMENT_RAD = math.radians(0.25)
MAX_RANGE_M = 10.0
SCAN_PERIOD_US = 25_000

_REL_ANGLES = ANGLE_MIN_RAD + ANGLE_INCREMENT_RAD * np.arange(N_BEAMS)


@dataclass(frozen=True)
class LidarScan:
    ranges: np.ndarray  # exactly 1081 entries, each in (0, 10.0]
    stamp_us: int
    angle_min_rad: float = ANGLE_MIN_RAD
    angle_increment_rad: float = ANGLE_INCREMENT_RAD

    def __post_init__(self) -> None:
        if self.ranges.shape != (N_BEAMS,):
            raise ValueError(f"scan must have {N_BEAMS} ranges")


@maybe_njit
def _cast_rays_loop(px, py, heading, rel_angles, segs, max_range, out):
    for i in range(rel_angles.size):
        ang = heading + rel_angles[i]
        dx = math.cos(ang)
        dy = math.sin(ang)
        best = max_range
        for k in range(segs.shape[0]):
            ex = segs[k, 2] - segs[k, 0]
            ey = segs[k, 3] - segs[k, 1]
            denom = dx * ey - dy * ex
            if abs(denom) < 1e-12:
                continue
            qx = segs[k, 0] - px
            qy = segs[k, 1] - py
            t = (qx * ey - qy * ex) / denom
            s = (qx * dy - qy * dx) / denom
            if t > 0.0 and 0.0 <= s <= 1.0 and t < best:
                best = t
        out[i] = best


def _cast_rays_numpy(px, py, heading, rel_angles, segs, max_range, out):
    ang = heading + rel_angles
    dx = np.cos(ang)[:, None]
    dy = np.sin(ang)[:, None]
    ex = (segs[:, 2] - segs[:, 0])[None, :]
    ey = (segs[:, 3] - segs[:, 1])[None, :]
    qx = (segs[:, 0] - px)[None, :]
    qy = (segs[:, 1] - py)[None, :]
    denom = dx * ey - dy * ex
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qx * ey - qy * ex) / denom
        s = (qx * dy - qy * dx) / denom
    hit = (np.abs(denom) >= 1e-12) & (t > 0.0) & (s >= 0.0) & (s <= 1.0)
    t = np.where(hit, t, np.inf)
    out[:] = np.minimum(t.min(axis=1), max_range)


_cast_rays = _cast_rays_loop if USING_NUMBA else _cast_rays_numpy


def lidar_scan(state: PlantState, world: World, noise_sigma: float = 0.0,
               rng: np.random.Generator | None = None) -> LidarScan:
    """One full scan from the vehicle pose at the state's current time."""
    ranges = np.empty(N_BEAMS, dtype=np.float64)
    segs = world.segment_array()
    if segs.shape[0] == 0:
        ranges.fill(MAX_RANGE_M)
    else:
        _cast_rays(state.x, state.y, state.heading, _REL_ANGLES, segs,
                   MAX_RANGE_M, ranges)
    if noise_sigma > 0.0:
        if rng is None:
            raise ValueError("noise requires an explicit rng for reproducibility")
        ranges = np.clip(ranges + rng.normal(0.0, noise_sigma, N_BEAMS),
                         1e-3, MAX_RANGE_M)
    return LidarScan(ranges, stamp_us=state.time_us)


def min_forward_range(scan: LidarScan, half_width_deg: float) -> float:
    """Minimum range among beams within +-half_width_deg of the heading."""
    if not 0.0 < half_width_deg <= FOV_DEG / 2.0:
        raise ValueError(f"half width {half_width_deg} outside (0, {FOV_DEG / 2}]")
    half = math.radians(half_width_deg) + 1e-12
    rel = scan.angle_min_rad + scan.angle_increment_rad * np.arange(N_BEAMS)
    return float(scan.ranges[np.abs(rel) <= half].min())
