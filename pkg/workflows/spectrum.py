"""
Spectrum workflow: center/hyperbolic classification of the linear operator.
"""
from typing import Optional

from config import Config
from models.spectrum import SpectrumReport, center_analysis, ill_posedness_witness, spectrum_report_json
from workflows.base import BaseStage, Emit, _silent
from workflows.common import current_model, write_csv, write_text


class SpectrumStage(BaseStage):
    """Classify j = 1..Kx and write the JSON report and the dispersion CSV."""

    def __init__(self):
        super().__init__("Spectrum")

    async def _run(self, emit: Optional[Emit] = None) -> SpectrumReport:
        emit = emit or _silent
        model = current_model()
        emit("CENTER_ANALYSIS_STARTED")
        report = await self.offload(center_analysis, model, Config.K_X)
        emit(f"CENTER_ANALYSIS_COMPLETED: ell={report.ell}")

        write_text("spectrum.json", spectrum_report_json(report))
        write_csv("spectrum.csv", report.to_frame())
        witness, slope = ill_posedness_witness(model, max(Config.K_X, report.largest_center_j + 1))
        witness["fitted_exponent"] = slope
        write_csv("growth.csv", witness)
        return report


# Singleton instance
_spectrum_stage = SpectrumStage()


async def run_spectrum(emit: Optional[Emit] = None) -> SpectrumReport:
    """Wrapper for easy import."""
    return await _spectrum_stage.execute(emit=emit)
