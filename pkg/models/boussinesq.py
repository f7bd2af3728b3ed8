"""
The Boussinesq equation and the Boussinesq system.

Scalar:  u_tt = u_xx + μ u_xxxx + (u²)_xx, written for z = (u, w = u_t).
System:  u_t = −v_x − μ v_xxx + (uv)_x,  v_t = −u_x.
"""
import math
from typing import Dict, Tuple, Type

import numpy as np

from fourier.torus_map import (
    Parity,
    TorusMap,
    component,
    inverse_partial_x,
    l2_inner,
    partial_x,
    product,
    stack,
)
from models.base import ModelSpec
from utils.errors import ConfigError, StructuralError


def _zero_like(t: TorusMap) -> TorusMap:
    return TorusMap.zeros(t.ell, 1, t.k_theta_max, t.k_x_max,
                          parity=((Parity.EVEN, Parity.EVEN),), zero_mean=True)


def _check_slice(z: TorusMap) -> None:
    if z.k_theta_max != 0:
        raise StructuralError("energy is defined on x-slices (Kθ = 0); use at_theta first")


class BoussinesqScalar(ModelSpec):
    """Boussinesq equation in first-order form z = (u, u_t)."""

    name = "boussinesq-scalar"
    fiber_kinds = ("cos", "cos")
    component_parity = ((Parity.EVEN, Parity.EVEN), (Parity.ODD, Parity.EVEN))

    def linear_block(self, j: int) -> np.ndarray:
        q = 2.0 * math.pi * j
        return np.array([[0.0, 1.0], [-q ** 2 + self.mu * q ** 4, 0.0]], dtype=np.complex128)

    def fiber_block(self, j: int) -> np.ndarray:
        return self.linear_block(j).real

    def j_symbol(self, j: int) -> np.ndarray:
        if j == 0:
            return np.zeros((2, 2), dtype=np.complex128)
        c = 1.0 / (2.0 * math.pi * j) ** 2
        return np.array([[0.0, c], [-c, 0.0]], dtype=np.complex128)

    def fiber_j(self, j: int) -> np.ndarray:
        return self.j_symbol(j).real

    def bilinear(self, a: TorusMap, b: TorusMap) -> TorusMap:
        uu = product(component(a, 0), component(b, 0))
        second = partial_x(uu, 2)
        return stack([_zero_like(second), second])

    def hamiltonian(self, z: TorusMap) -> float:
        """H = ∫ ½u² − ½μu_x² + ⅓u³ + ½(∂_x⁻¹w)²."""
        _check_slice(z)
        u, w = component(z, 0), component(z, 1)
        ux = partial_x(u, 1)
        wi = inverse_partial_x(w, 1)
        cubic = l2_inner(product(u, u), u)
        return (0.5 * l2_inner(u, u) - 0.5 * self.mu * l2_inner(ux, ux)
                + cubic / 3.0 + 0.5 * l2_inner(wi, wi))

    def space_indices(self, m: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return (m, m - 2), (m - 1, m - 3)


class BoussinesqSystem(ModelSpec):
    """Boussinesq system of water waves, z = (u, v)."""

    name = "boussinesq-system"
    fiber_kinds = ("cos", "sin")
    component_parity = ((Parity.EVEN, Parity.EVEN), (Parity.ODD, Parity.ODD))

    def linear_block(self, j: int) -> np.ndarray:
        q = 2.0 * math.pi * j
        return np.array([[0.0, -1j * q * self.resonance_gap(j)], [-1j * q, 0.0]], dtype=np.complex128)

    def fiber_block(self, j: int) -> np.ndarray:
        q = 2.0 * math.pi * j
        return np.array([[0.0, -q + self.mu * q ** 3], [q, 0.0]])

    def j_symbol(self, j: int) -> np.ndarray:
        if j == 0:
            return np.zeros((2, 2), dtype=np.complex128)
        c = 1j / (2.0 * math.pi * j)
        return np.array([[0.0, c], [c, 0.0]], dtype=np.complex128)

    def fiber_j(self, j: int) -> np.ndarray:
        c = 1.0 / (2.0 * math.pi * j)
        return np.array([[0.0, c], [-c, 0.0]])

    def bilinear(self, a: TorusMap, b: TorusMap) -> TorusMap:
        cross = product(component(a, 0), component(b, 1))
        other = product(component(a, 1), component(b, 0))
        summed = cross.with_coeffs(0.5 * (cross.coeffs + other.coeffs))
        first = partial_x(summed, 1)
        return stack([first, _zero_like(first)])

    def hamiltonian(self, z: TorusMap) -> float:
        """
        Quadratic energy H₂ = ∫ ½(u² + v² − μv_x²).

        J∇H₂ is the linear part of the field. The transport term (∂_x(uv), 0)
        has no potential under J: its derivative in (u, v) is not symmetric.
        The cubic ∫uv² would generate (−2∂_x(uv), −∂_x(v²)) instead, so it is
        not added.
        """
        _check_slice(z)
        u, v = component(z, 0), component(z, 1)
        vx = partial_x(v, 1)
        return 0.5 * (l2_inner(u, u) + l2_inner(v, v) - self.mu * l2_inner(vx, vx))

    def space_indices(self, m: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return (m, m + 1), (m - 1, m)


MODELS: Dict[str, Type[ModelSpec]] = {
    BoussinesqScalar.name: BoussinesqScalar,
    BoussinesqSystem.name: BoussinesqSystem,
}


def get_model(name: str, mu: float) -> ModelSpec:
    """Instantiate a registered model by name."""
    try:
        return MODELS[name](mu)
    except KeyError:
        raise ConfigError(f"unknown model '{name}'; choose one of {sorted(MODELS)}")
