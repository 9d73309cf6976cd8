#!/usr/bin/env python3
"""Benchmark the hot kernels with numba against the pure numpy/Python path.

Usage:
    python benchmarks/bench_kernels.py            # compares both modes
    python benchmarks/bench_kernels.py --inner    # one mode, honoring
                                                  # HACKCAR_SIM_NO_NUMBA
"""

import argparse
import json
import os
import subprocess
import sys
import time

CASES = ("lidar_burst", "plant_burst", "wire_burst", "full_run_60s")


def bench_one_mode() -> dict:
    import numpy as np

    import hackcar_sim as hs
    from hackcar_sim.codec import CanFrame
    from hackcar_sim.lidar import lidar_scan
    from hackcar_sim.plant import Actuation, PlantParams, PlantState, World, Box, advance
    from hackcar_sim.wire import serialize_wire_bits

    results = {"numba": hs.USING_NUMBA}

    world = World(obstacles=[Box(2.0 + k, -3.0, 2.4 + k, 3.0) for k in range(6)])
    state = PlantState()
    lidar_scan(state, world)  # warm any JIT before timing
    t0 = time.perf_counter()
    for _ in range(2400):  # one 60 s run worth of scans
        lidar_scan(state, world)
    results["lidar_burst"] = time.perf_counter() - t0

    params = PlantParams()
    act = Actuation(target_rpm=6000)
    advance(state, act, params, 10)
    t0 = time.perf_counter()
    s = PlantState()
    for _ in range(6000):  # 60 s of 10 ms cycles
        s = advance(s, act, params, 10)
    results["plant_burst"] = time.perf_counter() - t0

    rng = np.random.default_rng(0)
    frames = [CanFrame(int(rng.integers(0x800)),
                       bytes(rng.integers(0, 256, int(rng.integers(0, 9))).tolist()))
              for _ in range(400)]
    serialize_wire_bits(frames[0])
    t0 = time.perf_counter()
    for _ in range(25):
        for frame in frames:
            serialize_wire_bits(frame)
    results["wire_burst"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    hs.run(hs.approach_scenario())
    results["full_run_60s"] = time.perf_counter() - t0
    return results


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--inner", action="store_true")
    args = parser.parse_args()

    if args.inner:
        print(json.dumps(bench_one_mode()))
        return 0

    rows = {}
    for label, env_value in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, HACKCAR_SIM_NO_NUMBA=env_value)
        out = subprocess.run([sys.executable, __file__, "--inner"], env=env,
                             capture_output=True, text=True, check=True)
        rows[label] = json.loads(out.stdout.strip().splitlines()[-1])
    if rows["numba"]["numba"] is False:
        print("note: numba unavailable, both columns ran the fallback path")

    print(f"{'kernel':<14} {'numba (s)':>10} {'numpy (s)':>10} {'speedup':>8}")
    for case in CASES:
        a, b = rows["numba"][case], rows["numpy"][case]
        print(f"{case:<14} {a:>10.3f} {b:>10.3f} {b / a:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
