"""
PDE models: the Boussinesq equation and the Boussinesq system.
"""
from models.base import ModelSpec
from models.boussinesq import MODELS, BoussinesqScalar, BoussinesqSystem, get_model
from models.spectrum import (
    SpectrumReport,
    center_analysis,
    dispersion,
    ill_posedness_witness,
    require_center,
    spectrum_report_json,
)

__all__ = [
    "ModelSpec", "MODELS", "BoussinesqScalar", "BoussinesqSystem", "get_model",
    "SpectrumReport", "center_analysis", "dispersion", "ill_posedness_witness",
    "require_center", "spectrum_report_json",
]
