"""
The x-symmetric fiber used by the Galerkin linear algebra.

A zero-mean 2-component function of x with the model's x-parities is
written in the L²-orthonormal basis √2 cos(2πjx) (even components) or
√2 sin(2πjx) (odd components), j = 1..Kx. Fiber index of (j, c) is
2(j−1) + c, so D = 2Kx and the linear part is block diagonal.
"""
import math
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from fourier.torus_map import ParityPair, TorusMap
from models.base import ModelSpec

SQRT2 = math.sqrt(2.0)


def fiber_dimension(k_x_max: int) -> int:
    return 2 * k_x_max


def fiber_index(j: int, c: int) -> int:
    return 2 * (j - 1) + c


def to_fiber(z: TorusMap, kinds: Sequence[str]) -> np.ndarray:
    """
    θ-mode table of fiber coordinates, shape (2Kθ+1,)*ℓ + (D,).

    Only the j > 0 half of the x-spectrum is read; z is assumed to carry
    the declared x-parities.
    """
    kx = z.k_x_max
    out = np.zeros(z.coeffs.shape[1:-1] + (fiber_dimension(kx),), dtype=np.complex128)
    for c, kind in enumerate(kinds):
        factor = SQRT2 if kind == "cos" else 1j * SQRT2
        out[..., c::2] = factor * z.coeffs[c, ..., kx + 1:]
    return out


def from_fiber(modes: np.ndarray, ell: int, k_theta_max: int, k_x_max: int, kinds: Sequence[str],
               parity: Tuple[ParityPair, ...]) -> TorusMap:
    """Inverse of to_fiber; rebuilds both x-halves of the spectrum."""
    shape = (len(kinds),) + (2 * k_theta_max + 1,) * ell + (2 * k_x_max + 1,)
    coeffs = np.zeros(shape, dtype=np.complex128)
    for c, kind in enumerate(kinds):
        b = modes[..., c::2]
        if kind == "cos":
            pos, neg = b / SQRT2, b / SQRT2
        else:
            pos, neg = -1j * b / SQRT2, 1j * b / SQRT2
        coeffs[c, ..., k_x_max + 1:] = pos
        coeffs[c, ..., :k_x_max] = neg[..., ::-1]
    return TorusMap(coeffs, ell, k_theta_max, k_x_max, parity, zero_mean=True)


def basis_function(model: ModelSpec, ell: int, k_x_max: int, index: int) -> TorusMap:
    """The θ-constant fiber basis vector with the given index, as a table with Kθ = 0."""
    modes = np.zeros((1,) * ell + (fiber_dimension(k_x_max),), dtype=np.complex128)
    modes[(0,) * ell + (index,)] = 1.0
    return from_fiber(modes, ell, 0, k_x_max, model.fiber_kinds, model.component_parity)


def fiber_matrix(model: ModelSpec, k_x_max: int) -> np.ndarray:
    """Block-diagonal D×D matrix of the linear part on the fiber."""
    return linalg.block_diag(*[model.fiber_block(j) for j in range(1, k_x_max + 1)])


def symplectic_fiber(model: ModelSpec, k_x_max: int) -> np.ndarray:
    """Block-diagonal D×D matrix of J on the fiber; Ω(a, b) = aᵀ J b."""
    return linalg.block_diag(*[model.fiber_j(j) for j in range(1, k_x_max + 1)])


def fiber_weights(k_x_max: int, indices: Sequence[int], rho: float = 0.0) -> np.ndarray:
    """
    Diagonal of the H^{ρ,m} weight on the fiber, e^{2πρj}(j^{2m_c}+1)^{1/2}.

    The basis is L²-orthonormal, so the weighted Euclidean norm of a fiber
    vector equals the x-norm of the corresponding table.
    """
    out = np.empty(fiber_dimension(k_x_max))
    for j in range(1, k_x_max + 1):
        for c, m in enumerate(indices):
            out[fiber_index(j, c)] = math.exp(2.0 * math.pi * rho * j) * math.sqrt(float(j) ** (2 * m) + 1.0)
    return out
