"""
Quasi-Newton iteration, a-posteriori validation and phase alignment.
"""
from newton.alignment import AlignmentReport, aligned_distance, phase_align
from newton.aposteriori import AposterioriLedger, LedgerLine, aposteriori_check
from newton.iteration import (
    DistanceEstimate,
    QuadraticFit,
    distance_estimate,
    initial_state,
    newton_step,
    quadratic_fit,
    residual_norm,
    run,
)
from newton.schedule import Schedule
from newton.state import (
    NewtonState,
    RunReport,
    StepRecord,
    dump_state,
    load_solution,
    load_state,
    save_solution,
)

__all__ = [
    "AlignmentReport", "aligned_distance", "phase_align",
    "AposterioriLedger", "LedgerLine", "aposteriori_check",
    "DistanceEstimate", "QuadraticFit", "distance_estimate", "initial_state", "newton_step",
    "quadratic_fit", "residual_norm", "run",
    "Schedule",
    "NewtonState", "RunReport", "StepRecord", "dump_state", "load_solution", "load_state", "save_solution",
]
