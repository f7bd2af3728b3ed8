"""
KAM run workflow: precheck, quasi-Newton iteration with per-step state dumps,
final torus and run report.
"""
import logging
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from config import Config
from fourier.torus_map import TorusMap
from hyperbolic.graph_transform import refinement_check
from hyperbolic.splitting import SplittingReport, splitting_report
from models.base import ModelSpec
from models.boussinesq import get_model
from newton.aposteriori import aposteriori_check
from newton.iteration import initial_state, run
from newton.schedule import Schedule
from newton.state import NewtonState, RunReport, dump_state, load_solution, load_state, save_solution
from utils.errors import NewtonDivergenceError, ValidationFailure
from workflows.base import BaseStage, Emit, _silent
from workflows.common import current_model, frequency_override, make_seed, output_path, write_csv, write_text

logger = logging.getLogger(__name__)


def state_path(m: int) -> str:
    return str(Path(Config.STATE_DIR) / f"state_{m:03d}.json")


def steps_frame(report: RunReport) -> pd.DataFrame:
    rows = []
    for record in report.steps:
        row = {"m": record.m, "rho": record.rho, "delta": record.delta, "resid_Y": record.resid_Y,
               "avgS_inv": record.avgS_inv, "beta1": record.rates.beta1, "beta2": record.rates.beta2}
        row.update({f"defect_{name}": value for name, value in record.defects.items()})
        rows.append(row)
    return pd.DataFrame(rows)


def final_splitting_report(model: ModelSpec, state: NewtonState) -> SplittingReport:
    """Diagnostics of the splitting at the last iterate; the Kx doubling check only on request."""
    report = splitting_report(state.splitting, state.op)
    if Config.REFINEMENT_CHECK:
        report.refinement = refinement_check(model, state.K, state.omega)
    return report


def load_seed(model: ModelSpec, seed_path: Optional[str]) -> Tuple[ModelSpec, TorusMap, np.ndarray, dict]:
    """Seed from a torus file, or generated inline from the Lindstedt series."""
    if seed_path:
        name, mu, K, omega = load_solution(seed_path)
        return get_model(name, mu), K, frequency_override(omega), {}
    series, K, omega = make_seed(model)
    return model, K, omega, {"epsilon": Config.EPSILON, "seed_order": series.order}


class KamRunStage(BaseStage):
    """Drive the Newton iteration from a seed or from a dumped state."""

    def __init__(self):
        super().__init__("KamRun")

    async def _run(self, seed_path: Optional[str] = None, resume: Optional[str] = None,
                   emit: Optional[Emit] = None) -> Tuple[NewtonState, RunReport]:
        emit = emit or _silent
        model = current_model()
        schedule = Schedule.from_config()
        meta: dict = {}
        forced = False

        if resume:
            emit(f"RESUMING_FROM: {resume}")
            state = await self.offload(load_state, model, resume)
            K, omega = state.K, state.omega
        else:
            model, K, omega, meta = load_seed(model, seed_path)
            emit("PRECHECK_STARTED")
            ledger = await self.offload(aposteriori_check, model, K, omega, schedule)
            write_text("precheck.json", ledger.to_json())
            if not ledger.passed:
                failed = [line.name for line in ledger.lines if not line.passed]
                if not Config.FORCE:
                    emit(f"PRECHECK_FAILED: {failed}")
                    raise ValidationFailure(f"a-posteriori precheck failed on {failed}; use --force to run anyway",
                                            details={"failed": failed})
                logger.warning(f"Precheck failed on {failed}; continuing because of --force")
                forced = True
            emit("BUILDING_INITIAL_FRAMES")
            state = await self.offload(initial_state, model, K, omega, schedule)
            dump_state(state, state_path(0))

        def on_step(new_state: NewtonState) -> None:
            dump_state(new_state, state_path(new_state.m))

        state, report = await self.offload(run, model, K, omega, schedule, state=state, on_step=on_step, emit=emit)
        report.epsilon = meta.get("epsilon")
        report.seed_order = meta.get("seed_order")
        report.heuristic = forced

        torus_file = str(output_path("torus.json", Config.TORUS_DIR))
        save_solution(model, state.K, state.omega, torus_file)
        report.K_final_ref = torus_file
        write_text("run_report.json", report.to_json())
        write_csv("steps.csv", steps_frame(report))
        splitting = await self.offload(final_splitting_report, model, state)
        write_text("splitting.json", splitting.to_json())
        if not report.converged:
            raise NewtonDivergenceError(f"no convergence after {state.m} steps (‖E‖_Y={state.residual:.3e})",
                                        details={"residuals": list(state.residuals)})
        emit(f"CONVERGED: steps={state.m}")
        return state, report


# Singleton instance
_kam_run_stage = KamRunStage()


async def run_kam(seed_path: Optional[str] = None, resume: Optional[str] = None,
                  emit: Optional[Emit] = None) -> Tuple[NewtonState, RunReport]:
    """Wrapper for easy import."""
    return await _kam_run_stage.execute(seed_path=seed_path, resume=resume, emit=emit)
