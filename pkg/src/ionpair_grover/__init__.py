"""Grover search with ion-pair qubits: gates, simulation and trapped-ion physics."""

__version__ = "0.1.0"

from .gates import (  # noqa: E402
    TargetIndex,
    build_diffusion,
    build_m,
    build_p,
    build_v,
    build_w,
    is_unitary,
    rotation_x,
)
from .engine import (  # noqa: E402
    SearchReport,
    Trajectory,
    optimal_iterations,
    prepare_initial,
    recurrence_period,
    run_search,
    search_report,
)

__all__ = [
    "TargetIndex",
    "build_diffusion",
    "build_m",
    "build_p",
    "build_v",
    "build_w",
    "is_unitary",
    "rotation_x",
    "SearchReport",
    "Trajectory",
    "optimal_iterations",
    "prepare_initial",
    "recurrence_period",
    "run_search",
    "search_report",
]
