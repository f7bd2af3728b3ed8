"""
Uniqueness workflow: two Newton runs from phase-shifted seeds, then phase alignment
of the limits. Both runs share ω, so the limits must coincide up to a phase.
"""
import asyncio
from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from config import Config
from fourier.torus_map import phase_shift
from newton.alignment import AlignmentReport, phase_align
from newton.iteration import run
from newton.schedule import Schedule
from newton.state import save_solution
from utils.errors import NewtonDivergenceError
from workflows.base import BaseStage, Emit, _silent
from workflows.common import current_model, make_seed, output_path, write_text


class UniquenessReport(BaseModel):
    tau0: List[float]
    alignment: AlignmentReport
    tau_error: float
    residuals: List[float]
    steps: List[int]


def circle_distance(a: np.ndarray, b: np.ndarray) -> float:
    """max_i of the distance between a_i and b_i on ℝ/ℤ."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 1.0)
    return float(np.max(np.minimum(d, 1.0 - d)))


class UniquenessStage(BaseStage):
    """Converge K₀ and K₀(· + τ₀) concurrently and recover τ₀ from the limits."""

    def __init__(self):
        super().__init__("Uniqueness")

    async def _run(self, emit: Optional[Emit] = None) -> UniquenessReport:
        emit = emit or _silent
        model = current_model()
        schedule = Schedule.from_config()
        _, seed, omega = make_seed(model)
        tau0 = np.full(seed.ell, Config.PHASE_SHIFT)
        shifted = phase_shift(seed, tau0)

        emit("PAIRED_RUNS_STARTED")
        (state1, report1), (state2, report2) = await asyncio.gather(
            self.offload(run, model, seed, omega, schedule),
            self.offload(run, model, shifted, omega, schedule),
        )
        for label, state, report in (("reference", state1, report1), ("shifted", state2, report2)):
            if not report.converged:
                raise NewtonDivergenceError(f"{label} run did not converge (‖E‖_Y={state.residual:.3e})")
        save_solution(model, state1.K, state1.omega, str(output_path("torus_reference.json", Config.TORUS_DIR)))
        save_solution(model, state2.K, state2.omega, str(output_path("torus_shifted.json", Config.TORUS_DIR)))

        emit("PHASE_ALIGNMENT_STARTED")
        alignment = await self.offload(phase_align, state1.K, state2.K, state1.omega, state2.omega)
        report = UniquenessReport(
            tau0=tau0.tolist(),
            alignment=alignment,
            tau_error=circle_distance(alignment.tau, tau0),
            residuals=[state1.residual, state2.residual],
            steps=[state1.m, state2.m],
        )
        write_text("uniqueness.json", report.model_dump_json(indent=2))
        emit(f"PHASE_RECOVERED: τ*={alignment.tau} (error {report.tau_error:.2e})")
        return report


# Singleton instance
_uniqueness_stage = UniquenessStage()


async def run_uniqueness(emit: Optional[Emit] = None) -> UniquenessReport:
    """Wrapper for easy import."""
    return await _uniqueness_stage.execute(emit=emit)
