"""
Small-divisor cohomological equation ∂_ω v = h on 𝕋^ℓ.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel

from center.diophantine import diophantine_estimate
from config import Config
from fourier.torus_map import TorusMap, k_grid, theta_l1, theta_mask
from utils.errors import ResonanceError, SolvabilityError

logger = logging.getLogger(__name__)


class CohomologyReport(BaseModel):
    """Measured ‖v‖_{ρ−δ}/‖h‖_ρ against κδ^{−ν}; constant is their quotient."""

    rho: float
    delta: float
    ratio: float
    bound: float
    constant: float


def analytic_norm(modes: np.ndarray, ell: int, rho: float) -> float:
    """Σ_k e^{2πρ|k|₁} ‖modes[k]‖₂ for a mode table of any trailing shape."""
    k_max = (modes.shape[0] - 1) // 2
    mags = np.sqrt((np.abs(modes) ** 2).reshape(modes.shape[:ell] + (-1,)).sum(axis=-1))
    weights = np.exp(2.0 * np.pi * rho * theta_l1(ell, k_max)) * theta_mask(ell, k_max)
    return math.fsum((mags * weights).ravel())


def small_divisors(ell: int, k_max: int, omega: Sequence[float]) -> np.ndarray:
    """Table of 2πi k·ω over the diamond."""
    return 2j * np.pi * (k_grid(ell, k_max) @ np.asarray(omega, dtype=float))


def cohomology_modes(modes: np.ndarray, ell: int, omega: Sequence[float], tol: Optional[float] = None) -> np.ndarray:
    """
    Zero-average solution of ∂_ω v = h for a θ-mode table of any trailing shape.

    Raises:
        SolvabilityError: |avg(h)| exceeds tol (default Config.TAU_AVG).
        ResonanceError: k·ω = 0 for a k ≠ 0 carrying a nonzero coefficient.
    """
    tol = Config.TAU_AVG if tol is None else tol
    k_max = (modes.shape[0] - 1) // 2
    centre = (k_max,) * ell
    avg = float(np.abs(modes[centre]).max(initial=0.0))
    if avg > tol:
        raise SolvabilityError(f"cohomological equation with average {avg:.3e} above {tol:.1e}",
                               details={"average": avg, "tolerance": tol})
    divisor = small_divisors(ell, k_max, omega)
    divisor = divisor.reshape(divisor.shape + (1,) * (modes.ndim - ell))
    divisor = np.broadcast_to(divisor, modes.shape)
    resonant = (divisor == 0) & (np.abs(modes) > 0)
    resonant[centre] = False
    if resonant.any():
        k = np.argwhere(resonant)[0][:ell] - k_max
        raise ResonanceError(f"k·ω = 0 at k={tuple(int(c) for c in k)} with a nonzero coefficient",
                             details={"k": [int(c) for c in k]})
    out = np.divide(modes, divisor, out=np.zeros(modes.shape, dtype=np.complex128), where=divisor != 0)
    out[centre] = 0.0
    return out


def cohomology_solve(h: TorusMap, omega: Sequence[float], delta: Optional[float] = None,
                     rho: Optional[float] = None, tol: Optional[float] = None) -> TorusMap:
    """
    v with ω·∂_θ v = h and avg(v) = 0, by division of the Fourier coefficients.

    Args:
        h: Right-hand side; its θ-average must vanish to within tol.
        omega: Frequency vector.
        delta: Analyticity loss; when given the Rüssmann ratio is logged.
        rho: Strip width of h (default Config.RHO0).
        tol: Admissible |avg(h)| (default Config.TAU_AVG).
    """
    # coefficient axes: (d, θ..., x); move x next to d so θ leads
    arr = np.moveaxis(np.asarray(h.coeffs), 0, -1)
    solved = cohomology_modes(arr, h.ell, omega, tol)
    parity = tuple((pt.flipped(), px) for pt, px in h.parity)
    v = h.with_coeffs(np.moveaxis(solved, -1, 0), parity=parity)
    if delta is not None:
        report = cohomology_bound(h, v, omega, Config.RHO0 if rho is None else rho, delta)
        logger.debug(f"Cohomology solve: ratio {report.ratio:.3e}, constant {report.constant:.3e}")
    return v


def cohomology_bound(h: TorusMap, v: TorusMap, omega: Sequence[float], rho: float, delta: float,
                     nu: Optional[float] = None) -> CohomologyReport:
    """Measured Rüssmann ratio ‖v‖_{ρ−δ}/‖h‖_ρ and the implied constant C in Cκδ^{−ν}."""
    if not 0 < delta < rho:
        raise ValueError("the loss δ must lie in (0, ρ)")
    nu = (h.ell - 1 if Config.NU is None else Config.NU) if nu is None else nu
    h_arr = np.moveaxis(np.asarray(h.coeffs), 0, -1)
    v_arr = np.moveaxis(np.asarray(v.coeffs), 0, -1)
    h_norm = analytic_norm(h_arr, h.ell, rho)
    ratio = 0.0 if h_norm == 0 else analytic_norm(v_arr, v.ell, rho - delta) / h_norm
    kappa = diophantine_estimate(omega, nu, max(1, h.k_theta_max)).kappa_hat
    bound = kappa * delta ** (-nu)
    return CohomologyReport(rho=rho, delta=delta, ratio=ratio, bound=bound, constant=ratio / bound)
