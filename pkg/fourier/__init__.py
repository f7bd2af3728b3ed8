"""
Fourier core: coefficient tables on 𝕋^ℓ × 𝕋, calculus, norms and JSON encoding.
"""
from fourier.torus_map import (
    Parity,
    TorusMap,
    add,
    average,
    component,
    l2_inner,
    omega_derivative,
    partial_theta,
    partial_x,
    phase_shift,
    product,
    scale,
    stack,
    sub,
    symmetrize,
)
from fourier.norms import NormParams, norm_rho_m, space_norm, sup_norm_strip

__all__ = [
    "Parity", "TorusMap", "NormParams",
    "add", "average", "component", "l2_inner", "omega_derivative", "partial_theta",
    "partial_x", "phase_shift", "product", "scale", "stack", "sub", "symmetrize",
    "norm_rho_m", "space_norm", "sup_norm_strip",
]
