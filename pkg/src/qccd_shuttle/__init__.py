"""Shuttling-schedule compiler for grid-shaped trapped-ion QCCD architectures."""
from .arch_graph import ArchGraph, Cycle, GridSpec, build_grid_graph, find_cycle, free_edge_search
from .circuit import Circuit, Gate, builtin, compile_circuit, parse_circuit
from .exceptions import (
    BudgetExceededError,
    LivelockError,
    NoCycleError,
    QasmSyntaxError,
    SaturationError,
    ScheduleFormatError,
    ShuttleError,
    UnknownElementError,
    UnsupportedFeatureError,
    ValidationError,
)
from .gate_selection import PriorityQueue, best_gate, build_priority_queue
from .placement import IonPlacement, chains_for_occupancy, random_placement
from .scheduler import Schedule, SchedulerConfig, TimeStep, run_schedule
from .verifier_oracle import OracleResult, ViolationReport, optimal_schedule_length, verify_schedule

__version__ = "0.1.0"

__all__ = [
    "ArchGraph",
    "BudgetExceededError",
    "Circuit",
    "Cycle",
    "Gate",
    "GridSpec",
    "IonPlacement",
    "LivelockError",
    "NoCycleError",
    "OracleResult",
    "PriorityQueue",
    "QasmSyntaxError",
    "SaturationError",
    "Schedule",
    "ScheduleFormatError",
    "SchedulerConfig",
    "ShuttleError",
    "TimeStep",
    "UnknownElementError",
    "UnsupportedFeatureError",
    "ValidationError",
    "ViolationReport",
    "best_gate",
    "build_grid_graph",
    "build_priority_queue",
    "builtin",
    "chains_for_occupancy",
    "compile_circuit",
    "find_cycle",
    "free_edge_search",
    "optimal_schedule_length",
    "parse_circuit",
    "random_placement",
    "run_schedule",
    "verify_schedule",
]
