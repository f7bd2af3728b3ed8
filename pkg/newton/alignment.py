"""
Phase alignment of two tori with the same frequency.

‖phase_shift(K₁, τ) − K₂‖² = ‖K₁‖² + ‖K₂‖² − 2f(τ) with
f(τ) = Re Σ_k g(k) e^{2πik·τ}, g(k) = Σ_{c,j} c₁(c,k,j) conj(c₂(c,k,j)),
so the alignment maximizes the trigonometric polynomial f: a coarse scan on
a grid, then a trust-region Newton refinement to a root of ∇f.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.optimize import minimize

from config import Config
from fourier.grid import grid_nodes, real_grid
from fourier.torus_map import TorusMap, k_grid, phase_shift, theta_mask
from utils.errors import PhaseAlignmentError, StructuralError

logger = logging.getLogger(__name__)

SCAN_POINTS = 64
GRADIENT_TOLERANCE = 1e-10


class AlignmentReport(BaseModel):
    tau: List[float]
    distance: float
    relative_distance: float
    gradient_norm: float


def _common(a: TorusMap, b: TorusMap) -> Tuple[TorusMap, TorusMap]:
    kt, kx = max(a.k_theta_max, b.k_theta_max), max(a.k_x_max, b.k_x_max)
    return a.pad(kt, kx), b.pad(kt, kx)


def _l2(coeffs: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))


def aligned_distance(K1: TorusMap, K2: TorusMap, tau: Sequence[float]) -> float:
    """‖phase_shift(K₁, τ) − K₂‖ in L² (Parseval over all coefficients)."""
    a, b = _common(K1, K2)
    return _l2(phase_shift(a, tau).coeffs - b.coeffs)


def phase_align(K1: TorusMap, K2: TorusMap, omega1: Optional[Sequence[float]] = None,
                omega2: Optional[Sequence[float]] = None, align_tol: Optional[float] = None) -> AlignmentReport:
    """
    τ* minimizing ‖phase_shift(K₁, τ) − K₂‖ over 𝕋^ℓ, so that K₂(θ) ≈ K₁(θ + τ*).

    Raises:
        PhaseAlignmentError: different frequencies, no stationary point
            found, or a relative aligned distance above align_tol.
    """
    align_tol = Config.ALIGN_TOL if align_tol is None else align_tol
    if K1.ell != K2.ell or K1.d != K2.d:
        raise StructuralError("tori with different shapes cannot be aligned")
    if omega1 is not None and omega2 is not None:
        w1, w2 = np.asarray(omega1, dtype=float), np.asarray(omega2, dtype=float)
        if not np.allclose(w1, w2, rtol=1e-12, atol=0.0):
            raise PhaseAlignmentError("tori at different frequencies are distinct",
                                      details={"omega1": w1.tolist(), "omega2": w2.tolist()})
    a, b = _common(K1, K2)
    ell, kt = a.ell, a.k_theta_max
    g = np.einsum("c...j,c...j->...", a.coeffs, np.conj(b.coeffs)) * theta_mask(ell, kt)
    ks = k_grid(ell, kt).astype(float)

    def value_grad_hess(tau: np.ndarray):
        phase = g * np.exp(2j * np.pi * (ks @ tau))
        value = float(np.sum(phase).real)
        flat_ks = ks.reshape(-1, ks.shape[-1])
        grad = np.einsum("n,ni->i", (phase * 2j * np.pi).ravel(), flat_ks).real
        hess = np.einsum("n,ni,nj->ij", (phase * (2j * np.pi) ** 2).ravel(), flat_ks, flat_ks).real
        return -value, -grad, -hess

    n = max(SCAN_POINTS, 4 * kt + 4)
    scan = real_grid(g, ell, n)
    start = grid_nodes(ell, n)[np.unravel_index(int(np.argmax(scan)), scan.shape)]
    result = minimize(lambda t: value_grad_hess(t)[0], start, method="trust-exact",
                      jac=lambda t: value_grad_hess(t)[1], hess=lambda t: value_grad_hess(t)[2],
                      options={"gtol": GRADIENT_TOLERANCE * max(1.0, float(np.abs(g).sum()))})
    tau = np.mod(result.x, 1.0)
    grad_norm = float(np.linalg.norm(value_grad_hess(tau)[1]))
    if grad_norm > 1e3 * GRADIENT_TOLERANCE * max(1.0, float(np.abs(g).sum())):
        raise PhaseAlignmentError(f"no stationary phase found (|∇| = {grad_norm:.3e})",
                                  details={"tau": tau.tolist()})

    distance = aligned_distance(a, b, tau)
    scale = max(_l2(a.coeffs), _l2(b.coeffs))
    relative = distance / scale if scale > 0 else 0.0
    report = AlignmentReport(tau=tau.tolist(), distance=distance, relative_distance=relative,
                             gradient_norm=grad_norm)
    logger.info(f"Phase alignment: τ*={report.tau}, distance {distance:.3e} (relative {relative:.3e})")
    if relative > align_tol:
        raise PhaseAlignmentError(f"aligned distance {relative:.3e} exceeds {align_tol:.1e}: tori are distinct",
                                  details=report.model_dump())
    return report
