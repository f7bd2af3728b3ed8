"""
Symplectic diagnostics of the splitting: conservation of Ω by the center
cocycle and Ω-orthogonality of the hyperbolic and center bundles.
"""
import logging
from typing import Optional

import numpy as np

from hyperbolic.cocycle import bundle_tables, reduced_cocycle
from hyperbolic.rates import theta_samples
from hyperbolic.splitting import SplittingData
from models.base import ModelSpec
from models.fiber import symplectic_fiber

logger = logging.getLogger(__name__)

DRIFT_SAMPLES = 26


def center_symplectic_drift(model: ModelSpec, splitting: SplittingData, t_max: float = 50.0,
                            n_theta: int = 4, samples: Optional[int] = None) -> float:
    """
    max |Ω(U^c_θ(t)u, U^c_θ(t)v) − Ω(u, v)| over center basis vectors u, v,
    sampled angles θ and t ∈ [0, t_max].
    """
    tables = bundle_tables(splitting, "c")
    if tables.size == 0:
        return 0.0
    j_fiber = symplectic_fiber(model, splitting.k_x_max)
    times = np.linspace(0.0, t_max, samples or DRIFT_SAMPLES)
    worst = 0.0
    for theta in theta_samples(splitting.ell, n_theta):
        start = tables.basis_at(theta)
        form0 = start.T @ j_fiber @ start
        for t, phi in zip(times, reduced_cocycle(tables, theta, times)):
            moved = tables.basis_at(theta + tables.omega * t) @ phi
            worst = max(worst, float(np.abs(moved.T @ j_fiber @ moved - form0).max()))
    logger.debug(f"Center symplectic drift over [0, {t_max}]: {worst:.3e}")
    return worst


def cross_block_orthogonality(model: ModelSpec, splitting: SplittingData) -> float:
    """max over the grid of |Ω(u, v)| for unit u hyperbolic and v center."""
    j_fiber = symplectic_fiber(model, splitting.k_x_max)

    def unit(b: np.ndarray) -> np.ndarray:
        return b / np.linalg.norm(b, axis=-2, keepdims=True)

    center = unit(splitting.bundle_basis("c"))
    worst = 0.0
    for bundle in ("s", "u"):
        hyper = splitting.bundle_basis(bundle)
        if hyper.shape[-1] == 0:
            continue
        form = np.einsum("...ai,ab,...bj->...ij", unit(hyper), j_fiber, center)
        worst = max(worst, float(np.abs(form).max()))
    return worst
