"""
Galerkin realization of the linearized vector field A(θ) = D𝒳(K(θ)).

A(θ) acts on the x-symmetric fiber (see models.fiber) and is stored as a
θ-mode table of D×D matrices. The constant part is the block-diagonal
linear symbol; the θ-dependent part is the convolution D𝒩(K(θ)) = 2Q(K, ·),
truncated back to the retained harmonics j ≤ Kx.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from fourier.grid import grid_to_modes, interpolate, real_grid
from fourier.torus_map import TorusMap, theta_mask
from models.base import ModelSpec
from models.fiber import basis_function, fiber_dimension, fiber_matrix, to_fiber

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GalerkinOperator:
    """θ-mode table of the fiber matrices of A, shape (2Kθ+1,)*ℓ + (D, D)."""

    modes: np.ndarray
    ell: int
    k_theta_max: int
    k_x_max: int
    model_name: str = ""

    @property
    def dimension(self) -> int:
        return self.modes.shape[-1]

    @property
    def constant(self) -> np.ndarray:
        """The θ-average of A."""
        return self.modes[(self.k_theta_max,) * self.ell].real

    def grid(self, n: int) -> np.ndarray:
        return real_grid(self.modes, self.ell, n)

    def at(self, theta: Sequence[float]) -> np.ndarray:
        return interpolate(self.modes, self.ell, theta).real

    def apply(self, v_modes: np.ndarray, k_max: Optional[int] = None) -> np.ndarray:
        """Modes of A(θ)v(θ) for a fiber mode table v, truncated to k_max (default: v's radius)."""
        kv = (v_modes.shape[0] - 1) // 2
        k_out = kv if k_max is None else k_max
        n = 2 * (self.k_theta_max + kv) + 2
        values = np.einsum("...ab,...b->...a", self.grid(n), real_grid(v_modes, self.ell, n))
        return grid_to_modes(values, self.ell, k_out)

    def perturbation_size(self, other: "GalerkinOperator") -> float:
        """Σ_k ‖Â(k) − Ã(k)‖₂, the analytic norm of the difference at zero strip width."""
        k_max = max(self.k_theta_max, other.k_theta_max)
        diff = _padded(self, k_max) - _padded(other, k_max)
        mask = theta_mask(self.ell, k_max)
        return math.fsum(float(np.linalg.norm(diff[pos], 2)) for pos in zip(*np.nonzero(mask)))


def _padded(op: GalerkinOperator, k_max: int) -> np.ndarray:
    out = np.zeros((2 * k_max + 1,) * op.ell + op.modes.shape[op.ell:], dtype=np.complex128)
    off = k_max - op.k_theta_max
    out[(slice(off, off + 2 * op.k_theta_max + 1),) * op.ell] = op.modes
    return out


def linearize(model: ModelSpec, K: TorusMap) -> GalerkinOperator:
    """
    Build A(θ) column by column: A e_i = 𝒜e_i + 2Q(K, e_i) for each fiber basis vector e_i.

    Args:
        model: The PDE model.
        K: Torus embedding with the model's x-parities.

    Returns:
        GalerkinOperator with K's θ radius and fiber dimension 2Kx.
    """
    kt, kx = K.k_theta_max, K.k_x_max
    dim = fiber_dimension(kx)
    modes = np.zeros((2 * kt + 1,) * K.ell + (dim, dim), dtype=np.complex128)
    modes[(kt,) * K.ell] = fiber_matrix(model, kx)
    if not K.is_zero():
        for i in range(dim):
            column, _ = model.nonlinear_derivative(K, basis_function(model, K.ell, kx, i)).truncate(kt, kx)
            modes[..., :, i] += to_fiber(column, model.fiber_kinds)
    logger.debug(f"Linearized {model.name} at Kθ={kt}, Kx={kx} (D={dim})")
    return GalerkinOperator(modes, K.ell, kt, kx, model.name)


def unperturbed_operator(model: ModelSpec, ell: int, k_x_max: int, k_theta_max: int = 0) -> GalerkinOperator:
    """The linearization at K = 0."""
    return linearize(model, TorusMap.zeros(ell, 2, k_theta_max, k_x_max, parity=model.component_parity,
                                           zero_mean=True))
