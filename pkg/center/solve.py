"""
Approximate solve of the linearized equation on the center bundle.

With ζ = 𝔪ξ the center equation ∂_ωζ − Γζ = −e becomes, up to the
reducibility defect,

    ∂_ω ξ₁ + S ξ₂ = −ê₁
    ∂_ω ξ₂        = −ê₂,        ê = 𝔪⁻¹e,

solved by two cohomological equations; avg(ξ₂) is fixed by the twist and
avg(ξ₁) = 0 removes the tangent ambiguity.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from center.cohomology import analytic_norm, cohomology_modes
from center.frame import CONDITION_LIMIT, CenterFrame
from config import Config
from fourier.grid import grid_average, grid_to_modes, omega_derivative_grid, real_grid, resize_modes
from utils.errors import ExactnessViolationError, TwistError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CenterSolution:
    """ξ as θ-modes, Δ^c = C𝔪ξ as fiber modes, and the defects of the solve."""

    xi1: np.ndarray
    xi2: np.ndarray
    delta: np.ndarray
    avg_xi2: np.ndarray
    exactness_defect: float
    subtracted_mass: float
    quadratic_defect: float
    twist_condition: float


def _apply(mats: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    return np.einsum("...ab,...b->...a", mats, vecs)


def _swap(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2)


def exactness_threshold(residual_norm: float) -> float:
    return max(Config.TAU_AVG, residual_norm ** 1.5)


def solve_center(frame: CenterFrame, e_modes: np.ndarray, omega: Optional[Sequence[float]] = None,
                 delta: Optional[float] = None) -> CenterSolution:
    """
    Δ^c with (∂_ω − A)Δ^c = −Π^c E up to a defect quadratic in the residual.

    Args:
        frame: Center frame built at the current torus.
        e_modes: θ-modes of the fiber residual E (only Π^c E is used).
        omega: Frequency vector (default: the frame's).
        delta: Analyticity loss, used only for the logged bound ratio.

    Returns:
        CenterSolution; its delta field holds Δ^c at radius Kθ.

    Raises:
        TwistError: avg(S) is singular.
        ExactnessViolationError: the obstruction avg(ê₂) is not small
            compared with ‖E‖^{3/2}.
    """
    omega = frame.omega if omega is None else np.asarray(omega, dtype=float)
    ell, kt, n = frame.ell, frame.k_theta_max, frame.n_grid
    e_modes = resize_modes(e_modes, ell, kt)
    e_norm = analytic_norm(e_modes, ell, 0.0)
    if e_norm == 0.0:
        zeros = np.zeros((2 * kt + 1,) * ell + (ell,), dtype=np.complex128)
        return CenterSolution(zeros, zeros.copy(), np.zeros_like(e_modes), np.zeros(ell), 0.0, 0.0, 0.0,
                              float(np.linalg.cond(frame.avg_twist)))
    e = _apply(frame.restriction, real_grid(e_modes, ell, n))
    hat = _apply(frame.frame_inv, e)
    hat1, hat2 = hat[..., :ell], hat[..., ell:]

    exactness = float(np.abs(grid_average(_apply(_swap(frame.dk), _apply(frame.jc, e)), ell)).max(initial=0.0))
    mass = grid_average(hat2, ell)
    mass_size = float(np.abs(mass).max(initial=0.0))
    threshold = exactness_threshold(e_norm)
    if mass_size > threshold:
        raise ExactnessViolationError(
            f"center obstruction {mass_size:.3e} exceeds {threshold:.3e}",
            details={"obstruction": mass_size, "residual": e_norm})

    twist_condition = float(np.linalg.cond(frame.avg_twist))
    if not np.isfinite(twist_condition) or twist_condition > CONDITION_LIMIT:
        raise TwistError(f"avg(S) is singular (cond {twist_condition:.3e})",
                         details={"avgS": np.asarray(frame.avg_twist).tolist()})

    centre = (kt,) * ell
    h2 = grid_to_modes(-(hat2 - mass), ell, kt)
    h2[centre] = 0.0
    xi2_perp = cohomology_modes(h2, ell, omega)
    s_xi2_perp = _apply(frame.twist, real_grid(xi2_perp, ell, n))
    avg_xi2 = np.linalg.solve(frame.avg_twist, -grid_average(hat1, ell) - grid_average(s_xi2_perp, ell))

    xi2 = xi2_perp.copy()
    xi2[centre] = avg_xi2
    xi2_grid = real_grid(xi2, ell, n)
    h1 = grid_to_modes(-hat1 - _apply(frame.twist, xi2_grid), ell, kt)
    # the average vanishes by the choice of avg(ξ₂), up to round-off
    h1[centre] = 0.0
    xi1 = cohomology_modes(h1, ell, omega)

    xi_grid = np.concatenate([real_grid(xi1, ell, n), xi2_grid], axis=-1)
    zeta = _apply(frame.frame, xi_grid)
    d_zeta = omega_derivative_grid(zeta, ell, omega, (n - 1) // 2)
    quadratic = float(np.abs(d_zeta - _apply(frame.generator, zeta) + e).max(initial=0.0))
    delta_modes = grid_to_modes(_apply(frame.basis, zeta), ell, kt)

    if delta is not None and e_norm > 0:
        ratio = analytic_norm(xi2, ell, 0.0) / e_norm
        logger.debug(f"Center solve: ‖ξ₂‖/‖E‖={ratio:.3e} at δ={delta:.3e}")
    logger.debug(f"Center solve: obstruction {mass_size:.2e}, quadratic defect {quadratic:.2e}")
    return CenterSolution(
        xi1=xi1,
        xi2=xi2,
        delta=delta_modes,
        avg_xi2=avg_xi2,
        exactness_defect=exactness,
        subtracted_mass=mass_size,
        quadratic_defect=quadratic,
        twist_condition=twist_condition,
    )
