"""
Automatic-reducibility frame on the center bundle.

Center vectors are written in an orthonormal basis C(θ) of range(Π^c),
obtained from the adapted basis 𝔅^c by Löwdin orthonormalization. In these
2ℓ coordinates the center cocycle has generator Γ = Cᵀ(AC − ∂_ωC), the
symplectic form is J_c = CᵀJC and the tangent frame is dk = CᵀΠ^c DK. The
frame 𝔪 = [dk, J_c⁻¹ dk N] with N = (dkᵀdk)⁻¹ brings Γ to the upper
triangular form [[0, S], [0, 0]] up to the residual.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from center.cohomology import analytic_norm
from fourier.grid import default_grid_size, grid_average, grid_to_modes, omega_derivative_grid, real_grid
from fourier.torus_map import TorusMap, partial_theta
from hyperbolic.galerkin import GalerkinOperator, linearize
from hyperbolic.splitting import SplittingData
from models.base import ModelSpec
from models.fiber import symplectic_fiber, to_fiber
from utils.errors import DegenerateEmbeddingError, GeometryError, StructuralError

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...jk->...ik", a, b)


def _t(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2)


@dataclass(frozen=True)
class CenterFrame:
    """Grid tables of the center-bundle geometry, shape (n,)*ℓ + matrix shape."""

    ell: int
    omega: np.ndarray
    k_theta_max: int
    k_x_max: int
    basis: np.ndarray
    restriction: np.ndarray
    generator: np.ndarray
    tangent: np.ndarray
    dk: np.ndarray
    n_mat: np.ndarray
    jc: np.ndarray
    jc_inv: np.ndarray
    frame: np.ndarray
    frame_inv: np.ndarray
    twist: np.ndarray
    avg_twist: np.ndarray
    cond_dktdk: float
    tangent_defect: float
    reducibility_defect: float
    gram_defect: float
    isotropy_norm: float

    @property
    def n_grid(self) -> int:
        return self.basis.shape[0]

    @property
    def full_frame(self) -> np.ndarray:
        """M = C𝔪 as D×2ℓ fiber matrices."""
        return _mm(self.basis, self.frame)

    @property
    def avg_twist_inv_norm(self) -> float:
        try:
            return float(np.linalg.norm(np.linalg.inv(self.avg_twist), 2))
        except np.linalg.LinAlgError:
            return float("inf")


class TwistReport(BaseModel):
    avgS: List[List[float]]
    avgS_inv_norm: float
    cond_DKtDK: float
    isotropy_norm: float
    exactness_defect: float = 0.0


def tangent_modes(model: ModelSpec, K: TorusMap) -> np.ndarray:
    """θ-modes of DK on the fiber, shape (2Kθ+1,)*ℓ + (D, ℓ)."""
    cols = [to_fiber(partial_theta(K, i), model.fiber_kinds) for i in range(K.ell)]
    return np.stack(cols, axis=-1)


def isotropy_defect(model: ModelSpec, K: TorusMap, rho: float = 0.0) -> Tuple[np.ndarray, float]:
    """
    L(θ) = DK(θ)ᵀ J DK(θ) as θ-modes of ℓ×ℓ matrices, and its analytic norm.

    The product is evaluated on a grid that resolves it exactly.

    Raises:
        GeometryError: L fails to be antisymmetric.
    """
    kt, ell = K.k_theta_max, K.ell
    n = default_grid_size(kt)
    j_fiber = symplectic_fiber(model, K.k_x_max)
    dk = real_grid(tangent_modes(model, K), ell, n)
    values = _mm(_t(dk), np.einsum("ab,...bc->...ac", j_fiber, dk))
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    asym = float(np.abs(values + _t(values)).max(initial=0.0))
    if asym > 1e-10 * scale:
        raise GeometryError(f"isotropy form is not antisymmetric (defect {asym:.3e})")
    modes = grid_to_modes(values, ell, 2 * kt)
    return modes, analytic_norm(modes, ell, rho)


def lowdin_basis(basis: np.ndarray) -> np.ndarray:
    """C = B(BᵀB)^{−1/2}, the orthonormal basis of range(B) closest to B."""
    w, v = np.linalg.eigh(_mm(_t(basis), basis))
    if float(w.min(initial=1.0)) <= 0.0:
        raise GeometryError("center basis is rank deficient")
    inv_sqrt = _mm(v * (1.0 / np.sqrt(w))[..., None, :], _t(v))
    return _mm(basis, inv_sqrt)


def _max_cond(mats: np.ndarray) -> float:
    cond = np.linalg.cond(mats)
    return float(np.max(cond)) if np.all(np.isfinite(cond)) else float("inf")


def build_center_frame(model: ModelSpec, K: TorusMap, omega: Sequence[float], splitting: SplittingData,
                       op: Optional[GalerkinOperator] = None) -> CenterFrame:
    """
    Tangent frame, twist S(θ) and the reducibility defects on the center bundle.

    Args:
        model: The PDE model.
        K: Embedding of the torus.
        omega: Frequency vector.
        splitting: Invariant splitting of the linearization at K.
        op: The linearization at K (recomputed when None).

    Raises:
        DegenerateEmbeddingError: DKᵀDK is singular on the center fiber.
        GeometryError: the symplectic form is degenerate on the center fiber.
    """
    omega = np.asarray(omega, dtype=float)
    ell = K.ell
    if K.k_x_max != splitting.k_x_max or ell != splitting.ell:
        raise StructuralError("torus and splitting use different truncations")
    if splitting.dims[1] != 2 * ell:
        raise GeometryError(f"center fiber of dimension {splitting.dims[1]} for an ℓ={ell} torus")
    op = op or linearize(model, K)
    n = splitting.n_grid
    radius = splitting.interpolation_radius

    basis = lowdin_basis(splitting.bundle_basis("c"))
    restriction = _mm(_t(basis), splitting.projection("c"))
    d_basis = omega_derivative_grid(basis, ell, omega, radius)
    generator = _mm(_t(basis), _mm(op.grid(n), basis) - d_basis)

    tangent = real_grid(tangent_modes(model, K), ell, n)
    dk = _mm(restriction, tangent)
    gram = _mm(_t(dk), dk)
    cond_dktdk = _max_cond(gram)
    if cond_dktdk > CONDITION_LIMIT:
        raise DegenerateEmbeddingError(f"DKᵀDK is singular on the center fiber (cond {cond_dktdk:.3e})",
                                       details={"cond": cond_dktdk})
    n_mat = np.linalg.inv(gram)

    j_fiber = symplectic_fiber(model, K.k_x_max)
    jc = _mm(_t(basis), np.einsum("ab,...bc->...ac", j_fiber, basis))
    cond_jc = _max_cond(jc)
    if cond_jc > CONDITION_LIMIT:
        raise GeometryError(f"symplectic form is degenerate on the center fiber (cond {cond_jc:.3e})",
                            details={"cond": cond_jc})
    jc_inv = np.linalg.inv(jc)

    normal = _mm(jc_inv, _mm(dk, n_mat))
    frame = np.concatenate([dk, normal], axis=-1)
    frame_inv = np.linalg.inv(frame)

    d_dk = omega_derivative_grid(dk, ell, omega, radius)
    d_normal = omega_derivative_grid(normal, ell, omega, radius)
    e1 = d_dk - _mm(generator, dk)
    blocks = _mm(frame_inv, d_normal - _mm(generator, normal))
    twist = blocks[..., :ell, :]
    e2 = blocks[..., ell:, :]

    eye = np.eye(ell)
    closed = np.block([[np.zeros((ell, ell)), eye], [-eye, np.zeros((ell, ell))]])
    closed = np.broadcast_to(closed, frame.shape).copy()
    closed[..., ell:, ell:] = -_mm(n_mat, _mm(_t(dk), _mm(jc_inv, _mm(dk, n_mat))))
    gram_defect = float(np.abs(_mm(_t(frame), _mm(jc, frame)) - closed).max())

    isotropy = _mm(_t(tangent), np.einsum("ab,...bc->...ac", j_fiber, tangent))

    center = CenterFrame(
        ell=ell,
        omega=omega,
        k_theta_max=K.k_theta_max,
        k_x_max=K.k_x_max,
        basis=basis,
        restriction=restriction,
        generator=generator,
        tangent=tangent,
        dk=dk,
        n_mat=n_mat,
        jc=jc,
        jc_inv=jc_inv,
        frame=frame,
        frame_inv=frame_inv,
        twist=twist,
        avg_twist=grid_average(twist, ell),
        cond_dktdk=cond_dktdk,
        tangent_defect=float(np.abs(e1).max()),
        reducibility_defect=float(np.abs(e2).max()),
        gram_defect=gram_defect,
        isotropy_norm=float(np.abs(isotropy).max()),
    )
    logger.debug(f"Center frame: cond(DKᵀDK)={cond_dktdk:.3e}, |avgS⁻¹|={center.avg_twist_inv_norm:.3e}, "
                 f"defects e₁={center.tangent_defect:.2e} e₂={center.reducibility_defect:.2e}")
    return center


def twist_report(frame: CenterFrame, exactness_defect: float = 0.0) -> TwistReport:
    return TwistReport(
        avgS=np.asarray(frame.avg_twist, dtype=float).tolist(),
        avgS_inv_norm=frame.avg_twist_inv_norm,
        cond_DKtDK=frame.cond_dktdk,
        isotropy_norm=frame.isotropy_norm,
        exactness_defect=exactness_defect,
    )
