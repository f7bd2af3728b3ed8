"""
Lindstedt workflow: series to the configured order, the seed at ε and the residual slope.
"""
from typing import Optional

import pandas as pd

from config import Config
from lindstedt.multiplier import nonresonance_check
from lindstedt.recursion import (
    assemble_seed,
    build_series,
    frequency_combination,
    residual_slope,
    twist_coefficient,
)
from lindstedt.series import LindstedtReport, save_series
from models.boussinesq import BoussinesqScalar
from newton.state import save_solution
from utils.errors import ResonanceError
from workflows.base import BaseStage, Emit, _silent
from workflows.common import amplitudes_for, checked_spectrum, current_model, output_path, write_csv, write_text


class LindstedtStage(BaseStage):
    """Non-resonance scan, recursion, seed assembly and the ε log-log fit."""

    def __init__(self):
        super().__init__("Lindstedt")

    async def _run(self, emit: Optional[Emit] = None) -> LindstedtReport:
        emit = emit or _silent
        model = current_model()
        spectrum = checked_spectrum(model)
        amplitudes = amplitudes_for(spectrum.ell)
        order = Config.LINDSTEDT_ORDER

        emit("NONRESONANCE_SCAN_STARTED")
        check = await self.offload(nonresonance_check, model, spectrum.omega0, order)
        report = LindstedtReport(
            model=model.name,
            mu=model.mu,
            order=order,
            omega0=spectrum.omega0,
            amplitudes=amplitudes.tolist(),
            nonresonance=check,
        )
        if not check.passed:
            emit(f"NONRESONANCE_FAILED: {len(check.resonances)} resonant pairs")
            write_text("lindstedt.json", report.model_dump_json(indent=2))
            write_csv("resonances.csv", pd.DataFrame([r.model_dump() for r in check.resonances]))
            first = check.resonances[0]
            raise ResonanceError(f"non-resonance fails at k={first.k} j={first.j} (μ={model.mu!r})",
                                 details={"resonances": [r.model_dump() for r in check.resonances]})

        emit("RECURSION_STARTED")
        series = await self.offload(build_series, model, amplitudes, order)
        emit(f"RECURSION_COMPLETED: order={series.order}")
        report.companion = None if series.companion is None else series.companion.tolist()
        report.frequency_terms = [list(map(float, w)) for w in series.frequency_terms]
        report.kernel_components = list(series.kernel_components)
        if order >= 3:
            report.twist_coefficient = twist_coefficient(series).tolist()
            if isinstance(model, BoussinesqScalar):
                report.frequency_combination = frequency_combination(series)

        emit("RESIDUAL_SLOPE_STARTED")
        slope = await self.offload(residual_slope, model, series, Config.EPSILON_GRID, Config.RHO0,
                                   Config.SOBOLEV_M)
        report.fitted_slope = float(slope["fitted_slope"].iloc[0])
        emit(f"RESIDUAL_SLOPE_COMPLETED: slope={report.fitted_slope:.3f}")

        K, omega = assemble_seed(series, Config.EPSILON, Config.K_THETA, Config.K_X)
        save_series(series, str(output_path("series.json")))
        save_solution(model, K, omega, str(output_path("seed.json")))
        write_csv("slope.csv", slope)
        write_text("lindstedt.json", report.model_dump_json(indent=2))
        return report


# Singleton instance
_lindstedt_stage = LindstedtStage()


async def run_lindstedt(emit: Optional[Emit] = None) -> LindstedtReport:
    """Wrapper for easy import."""
    return await _lindstedt_stage.execute(emit=emit)
