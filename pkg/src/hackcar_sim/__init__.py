"""hackcar-sim: a deterministic virtual CAN testbed.

A software twin of a small automotive platform: a discrete-event CAN bus,
four virtual ECUs (sensing controller, main controller, attacker,
detector), a vehicle plant with a LiDAR-based emergency-braking loop, and
a scenario runner that reproduces attack-free and under-attack
experiments with bit-identical logs.
"""

from .accel import USING_NUMBA
from .bus import BusConfig, BusEvent, EventKind, VirtualCanBus, parse_candump
from .codec import (
    CanFrame,
    Catalog,
    CatalogMessage,
    Mode,
    SignalValue,
    decode_frame,
    default_catalog,
    encode_frame,
)
from .lidar import LidarScan, lidar_scan, min_forward_range
from .plant import Actuation, Box, PlantParams, PlantState, Wall, World, collision, step
from .scenario import (
    AttackPlan,
    ConfigError,
    RunReport,
    ScenarioConfig,
    approach_scenario,
    attack_effect_metrics,
    cruise_scenario,
    load_catalog,
    load_catalog_file,
    load_scenario,
    load_scenario_file,
    run,
)
from .wire import frame_bit_length, serialize_wire_bits

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "BusConfig",
    "BusEvent",
    "EventKind",
    "VirtualCanBus",
    "parse_candump",
    "CanFrame",
    "Catalog",
    "CatalogMessage",
    "Mode",
    "SignalValue",
    "decode_frame",
    "default_catalog",
    "encode_frame",
    "LidarScan",
    "lidar_scan",
    "min_forward_range",
    "Actuation",
    "Box",
    "PlantParams",
    "PlantState",
    "Wall",
    "World",
    "collision",
    "step",
    "AttackPlan",
    "ConfigError",
    "RunReport",
    "ScenarioConfig",
    "approach_scenario",
    "attack_effect_metrics",
    "cruise_scenario",
    "load_catalog",
    "load_catalog_file",
    "load_scenario",
    "load_scenario_file",
    "run",
    "frame_bit_length",
    "serialize_wire_bits",
]
