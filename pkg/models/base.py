"""
Base class for the PDE models.

A model is the decomposition 𝒳 = 𝒜 + 𝒩 of a vector field on zero-mean
2-component functions of x, with 𝒜 a Fourier multiplier (one 2×2 block per
harmonic j) and 𝒩(z) = Q(z, z) a quadratic form.
"""
import math
from abc import ABC, abstractmethod
from typing import Sequence, Tuple

import numpy as np

from fourier.torus_map import (
    NO_PARITY,
    Parity,
    ParityPair,
    TorusMap,
    j_values,
    omega_derivative,
    scale,
    symmetrize,
)
from utils.errors import ConstraintError, DegenerateParameterError

MEAN_TOLERANCE = 1e-13


class ModelSpec(ABC):
    """Abstract base class for PDE models."""

    name: str = ""
    # x-basis of the fiber components: √2 cos or √2 sin
    fiber_kinds: Tuple[str, str] = ("cos", "cos")
    # (θ-parity, x-parity) of each component of a symmetric torus
    component_parity: Tuple[ParityPair, ParityPair] = (
        (Parity.EVEN, Parity.EVEN), (Parity.ODD, Parity.EVEN))

    def __init__(self, mu: float):
        if not mu > 0:
            raise DegenerateParameterError(f"μ must be positive, got {mu}")
        self.mu = float(mu)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(mu={self.mu!r})"

    # ------------------------------------------------------------------
    # Model data

    @abstractmethod
    def linear_block(self, j: int) -> np.ndarray:
        """Complex 2×2 matrix of 𝒜 on the mode e^{2πijx}."""

    @abstractmethod
    def fiber_block(self, j: int) -> np.ndarray:
        """Real 2×2 matrix of 𝒜 on the fiber basis of harmonic j ≥ 1."""

    @abstractmethod
    def j_symbol(self, j: int) -> np.ndarray:
        """Fourier symbol of the symplectic operator J, with Ω(u, v) = ⟨u, Jv⟩."""

    @abstractmethod
    def fiber_j(self, j: int) -> np.ndarray:
        """Real 2×2 block of J on the fiber basis of harmonic j ≥ 1."""

    @abstractmethod
    def bilinear(self, a: TorusMap, b: TorusMap) -> TorusMap:
        """Symmetric quadratic form Q with 𝒩(z) = Q(z, z)."""

    @abstractmethod
    def hamiltonian(self, z: TorusMap) -> float:
        """Energy of an x-slice (table with Kθ = 0)."""

    @abstractmethod
    def space_indices(self, m: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Sobolev indices (X, Y) per component for the base index m."""

    # ------------------------------------------------------------------
    # Shared realizations

    def resonance_gap(self, j: int) -> float:
        """1 − 4π²μj²; center iff ≥ 0, excluded iff = 0."""
        return 1.0 - 4.0 * math.pi ** 2 * self.mu * j * j

    def dispersion_sq(self, j: int) -> float:
        """σ² = −(2πj)²(1 − 4π²μj²), the determinant relation of the j-block."""
        return -((2.0 * math.pi * j) ** 2) * self.resonance_gap(j)

    def linear_blocks(self, k_x_max: int) -> np.ndarray:
        return np.stack([self.linear_block(int(j)) for j in j_values(k_x_max)])

    def _apply_blocks(self, blocks: np.ndarray, z: TorusMap) -> np.ndarray:
        return np.einsum("jab,b...j->a...j", blocks, z.coeffs)

    def _vector_parity(self, z: TorusMap) -> Tuple[ParityPair, ...]:
        return tuple((pt.flipped(), px) for pt, px in z.parity)

    def check_mean(self, z: TorusMap) -> None:
        mean = np.abs(z.coeffs[..., z.k_x_max])
        scale_ = max(1.0, float(np.abs(z.coeffs).max(initial=0.0)))
        if float(mean.max(initial=0.0)) > MEAN_TOLERANCE * scale_:
            raise ConstraintError("zero-mean constraint violated: c(k, 0) ≠ 0")

    def apply_linear(self, z: TorusMap) -> TorusMap:
        out = self._apply_blocks(self.linear_blocks(z.k_x_max), z)
        return z.with_coeffs(out, parity=self._vector_parity(z))

    def nonlinearity(self, z: TorusMap) -> TorusMap:
        return self.bilinear(z, z)

    def nonlinear_derivative(self, z: TorusMap, w: TorusMap) -> TorusMap:
        """D𝒩(z)w = 2Q(z, w)."""
        return scale(self.bilinear(z, w), 2.0)

    def apply_vectorfield(self, z: TorusMap) -> TorusMap:
        """
        Exact 𝒳(z) = 𝒜z + 𝒩(z) on the padded support of the quadratic term.
        """
        self.check_mean(z)
        nonlinear = self.nonlinearity(z)
        linear = self.apply_linear(z).pad(nonlinear.k_theta_max, nonlinear.k_x_max)
        coeffs = linear.coeffs + nonlinear.coeffs
        return linear.with_coeffs(coeffs, parity=self._vector_parity(z), zero_mean=True)

    def residual_with_tail(self, K: TorusMap, omega: Sequence[float]) -> Tuple[TorusMap, float]:
        """E = ∂_ωK − 𝒳(K) truncated to the radii of K, and the truncated tail."""
        field = self.apply_vectorfield(K)
        dK = omega_derivative(K, omega).pad(field.k_theta_max, field.k_x_max)
        full = dK.with_coeffs(dK.coeffs - field.coeffs, parity=self._vector_parity(K), zero_mean=True)
        return full.truncate(K.k_theta_max, K.k_x_max)

    def residual(self, K: TorusMap, omega: Sequence[float]) -> TorusMap:
        return self.residual_with_tail(K, omega)[0]

    def apply_j(self, z: TorusMap) -> TorusMap:
        blocks = np.stack([self.j_symbol(int(j)) for j in j_values(z.k_x_max)])
        return z.with_coeffs(self._apply_blocks(blocks, z), parity=(NO_PARITY,) * z.d)

    def symplectic_form(self, u: TorusMap, v: TorusMap) -> float:
        """Ω(u, v) = ⟨u, Jv⟩ in L², summed over all retained harmonics."""
        kt = max(u.k_theta_max, v.k_theta_max)
        kx = max(u.k_x_max, v.k_x_max)
        u, v = u.pad(kt, kx), v.pad(kt, kx)
        jv = self.apply_j(v)
        return math.fsum(np.real(u.coeffs * np.conj(jv.coeffs)).ravel())

    def enforce_constraints(self, z: TorusMap) -> TorusMap:
        """
        Remove the j = 0 modes and project onto the declared parity class.

        The x-parity is the model's; the θ-parity is the one declared on z
        (NONE leaves θ unconstrained, as for phase-shifted tori).
        """
        arr = np.array(z.coeffs)
        arr[..., z.k_x_max] = 0.0
        target = tuple((declared[0], model[1]) for declared, model in zip(z.parity, self.component_parity))
        return symmetrize(z.with_coeffs(arr, zero_mean=True), target)

    def declare_parity(self, z: TorusMap) -> TorusMap:
        """Attach the model's symmetric parity class to z."""
        return z.with_parity(self.component_parity)
