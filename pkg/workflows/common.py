"""
Helpers shared by the workflow stages: model set-up, inline seeding and file output.
"""
import logging
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from config import Config
from fourier.torus_map import TorusMap
from lindstedt.recursion import assemble_seed, build_series
from lindstedt.series import LindstedtSeries
from models.base import ModelSpec
from models.boussinesq import get_model
from models.spectrum import SpectrumReport, center_analysis, require_center
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def current_model() -> ModelSpec:
    return get_model(Config.MODEL, Config.MU)


def checked_spectrum(model: ModelSpec) -> SpectrumReport:
    """Center analysis at the configured Kx, rejecting truncations too small for the center modes."""
    return require_center(center_analysis(model, Config.K_X), Config.K_X)


def amplitudes_for(ell: int) -> np.ndarray:
    """Configured order-one amplitudes; a single value is used for every center mode."""
    values = list(Config.AMPLITUDES)
    if len(values) == 1 and ell > 1:
        values = values * ell
    if len(values) != ell:
        raise ConfigError(f"{len(values)} amplitudes given for {ell} center modes")
    return np.asarray(values, dtype=float)


def frequency_override(omega: np.ndarray) -> np.ndarray:
    if Config.OMEGA is None:
        return omega
    override = np.asarray(Config.OMEGA, dtype=float)
    if override.shape != omega.shape:
        raise ConfigError(f"omega override has {override.size} entries, the torus has {omega.size} angles")
    logger.info(f"Using frequency override ω={override.tolist()} instead of ω_ε={omega.tolist()}")
    return override


def make_seed(model: ModelSpec) -> Tuple[LindstedtSeries, TorusMap, np.ndarray]:
    """Lindstedt series of the configured order and its seed at ε = Config.EPSILON."""
    spectrum = checked_spectrum(model)
    series = build_series(model, amplitudes_for(spectrum.ell), Config.LINDSTEDT_ORDER)
    K, omega = assemble_seed(series, Config.EPSILON, Config.K_THETA, Config.K_X)
    return series, K, frequency_override(omega)


def output_path(name: str, directory: Optional[str] = None) -> Path:
    path = Path(directory or Config.OUT_DIR) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_text(name: str, text: str, directory: Optional[str] = None) -> str:
    path = output_path(name, directory)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")
    return str(path)


def write_csv(name: str, frame: pd.DataFrame, directory: Optional[str] = None) -> str:
    path = output_path(name, directory)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {path}")
    return str(path)
