"""
Analytic and Sobolev-type norms of Fourier tables.

The x-weight of H^{ρ,m} is applied per θ-harmonic and the θ-harmonics are
summed with the analytic weight e^{2πρ|k|₁}, which over-estimates the sup
over the complex strip of the H^{ρ,m} norm. All reductions use compensated
summation.
"""
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from fourier.torus_map import TorusMap, j_values, theta_l1, theta_mask

SobolevIndex = Union[int, Sequence[int]]


@dataclass(frozen=True)
class NormParams:
    """Strip half-width ρ, Sobolev index m, Diophantine exponent ν and constant κ on 𝕋^ℓ."""

    rho: float
    m: SobolevIndex = 0
    nu: float = 0.0
    kappa: float = 1.0
    ell: int = 1

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("ρ must be positive")
        if self.ell < 1:
            raise ValueError("ℓ must be ≥ 1")
        ms = [self.m] if isinstance(self.m, int) else list(self.m)
        if any(mi < 0 for mi in ms):
            raise ValueError("Sobolev index must be ≥ 0")
        if self.kappa <= 0:
            raise ValueError("κ must be positive")
        if self.nu < self.ell - 1:
            raise ValueError(f"ν must be ≥ ℓ−1 = {self.ell - 1}")

    def indices(self, d: int) -> list:
        if isinstance(self.m, int):
            return [self.m] * d
        if len(self.m) != d:
            raise ValueError(f"{len(self.m)} Sobolev indices for {d} components")
        return list(self.m)

    def shrink(self, delta: float) -> "NormParams":
        return NormParams(self.rho - delta, self.m, self.nu, self.kappa, self.ell)


def x_weights(k_x_max: int, rho: float, m: float) -> np.ndarray:
    """Squared H^{ρ,m} weights e^{4πρ|j|}(|j|^{2m}+1), indexed by j = −Kx..Kx."""
    js = np.abs(j_values(k_x_max)).astype(float)
    return np.exp(4.0 * np.pi * rho * js) * (np.power(js, 2.0 * m) + 1.0)


def norm_rho_m(a: TorusMap, p: NormParams) -> float:
    """
    Σ_k e^{2πρ|k|₁} (Σ_c Σ_j |c(k,j)|² e^{4πρ|j|}(|j|^{2m_c}+1))^{1/2}.

    Component indices come from p.m (one per component, or shared).
    """
    if a.is_zero():
        return 0.0
    ms = p.indices(a.d)
    weights = np.stack([x_weights(a.k_x_max, p.rho, m) for m in ms])
    weighted = np.abs(a.coeffs) ** 2 * weights.reshape((a.d,) + (1,) * a.ell + (-1,))
    mask = theta_mask(a.ell, a.k_theta_max)
    l1 = theta_l1(a.ell, a.k_theta_max)
    terms = []
    for pos in zip(*np.nonzero(mask)):
        inner = math.fsum(weighted[(slice(None),) + pos + (slice(None),)].ravel())
        if inner > 0.0:
            terms.append(math.exp(2.0 * np.pi * p.rho * l1[pos]) * math.sqrt(inner))
    return math.fsum(terms)


def sup_norm_strip(a: TorusMap, rho: float) -> float:
    """
    Rigorous upper estimate of the sup over |Im θ|, |Im x| ≤ ρ:
    Σ |c(k,j)| e^{2πρ(|k|₁+|j|)}, maximized over components.
    """
    if a.is_zero():
        return 0.0
    l1 = theta_l1(a.ell, a.k_theta_max)[..., None] + np.abs(j_values(a.k_x_max))
    weight = np.exp(2.0 * np.pi * rho * l1)
    return max(math.fsum((np.abs(a.coeffs[c]) * weight).ravel()) for c in range(a.d))


def space_norm(a: TorusMap, rho: float, indices: Sequence[int]) -> float:
    """Norm in a product space with per-component Sobolev indices (X or Y)."""
    return norm_rho_m(a, NormParams(rho=rho, m=list(indices)))
