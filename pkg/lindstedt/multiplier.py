"""
Symbols of the order-by-order operator ω⁰·∂_θ-type operators and the
non-resonance scan.

Scalar model: ℳ₀ = (ω⁰·∂_θ)² − ∂²_x − μ∂⁴_x acts on cos(2πk·θ)cos(2πjx) by
F(k, j) = −(2πk·ω⁰)² + (2πj)² − μ(2πj)⁴.

System: ω⁰·∂_θ − 𝒜 maps the pair (a cos⊗cos, b sin⊗sin) to
(· sin⊗cos, · cos⊗sin) through a real 2×2 block.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from fourier.torus_map import k_grid
from lindstedt.series import NonresonanceReport, ResonanceRecord
from models.base import ModelSpec
from models.boussinesq import BoussinesqSystem
from models.spectrum import center_analysis

logger = logging.getLogger(__name__)

RESONANCE_TOLERANCE = 1e-10


def scalar_multiplier(mu: float, omega0: Sequence[float], k: Sequence[int], j: int) -> float:
    kappa = float(np.dot(k, omega0))
    q = 2.0 * math.pi * j
    return -(2.0 * math.pi * kappa) ** 2 + q ** 2 - mu * q ** 4


def system_multiplier(mu: float, omega0: Sequence[float], k: Sequence[int], j: int) -> np.ndarray:
    kappa = float(np.dot(k, omega0))
    q = 2.0 * math.pi * j
    return np.array([[-2.0 * math.pi * kappa, q - mu * q ** 3],
                     [-q, 2.0 * math.pi * kappa]])


def multiplier(model: ModelSpec, omega0: Sequence[float], k: Sequence[int], j: int) -> Union[float, np.ndarray]:
    """F(k, j) for the scalar model, the 2×2 block for the system."""
    if isinstance(model, BoussinesqSystem):
        return system_multiplier(model.mu, omega0, k, j)
    return scalar_multiplier(model.mu, omega0, k, j)


def _symbol_grid(model: ModelSpec, omega0: Sequence[float], k_max: int, j_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scalar symbol and its size scale on the (k, j ≥ 1) grid.

    For the system the scalar symbol is the determinant of the 2×2 block,
    which vanishes exactly where the block is singular.
    """
    ell = len(omega0)
    kappa = 2.0 * math.pi * (k_grid(ell, k_max) @ np.asarray(omega0, dtype=float))
    q = 2.0 * math.pi * np.arange(1, j_max + 1, dtype=float)
    gap_term = q ** 2 - model.mu * q ** 4
    values = -kappa[..., None] ** 2 + gap_term
    scale = kappa[..., None] ** 2 + q ** 2 + model.mu * q ** 4
    return values, scale


@dataclass
class MultiplierTable:
    """Sampled symbol values keyed by (k, j) on 1 ≤ |k|₁ ≤ N, 1 ≤ j ≤ N·j_c, kernel set excluded."""

    omega0: np.ndarray
    values: Dict[Tuple[Tuple[int, ...], int], float] = field(default_factory=dict)
    scales: Dict[Tuple[Tuple[int, ...], int], float] = field(default_factory=dict)

    def min_abs(self) -> Tuple[float, Tuple[Tuple[int, ...], int]]:
        key = min(self.values, key=lambda kj: abs(self.values[kj]))
        return abs(self.values[key]), key

    def resonant(self, tolerance: float = RESONANCE_TOLERANCE) -> List[Tuple[Tuple[int, ...], int]]:
        """Keys whose symbol vanishes relative to its size scale."""
        return [key for key, value in self.values.items() if abs(value) <= tolerance * self.scales[key]]


def kernel_set(ell: int, center_modes: Sequence[int]) -> set:
    """The (±e_i, j_i) pairs carrying the order-one solutions."""
    out = set()
    for i, j in enumerate(center_modes):
        for s in (1, -1):
            e = [0] * ell
            e[i] = s
            out.add((tuple(e), int(j)))
    return out


def multiplier_table(model: ModelSpec, omega0: Sequence[float], order: int,
                     center_modes: Sequence[int]) -> MultiplierTable:
    ell = len(omega0)
    j_max = order * max(center_modes)
    values, scale = _symbol_grid(model, omega0, order, j_max)
    ks = k_grid(ell, order)
    l1 = np.abs(ks).sum(axis=-1)
    kernel = kernel_set(ell, center_modes)
    table = MultiplierTable(np.asarray(omega0, dtype=float))
    for pos in zip(*np.nonzero((l1 >= 1) & (l1 <= order))):
        k = tuple(int(v) for v in ks[pos])
        for j in range(1, j_max + 1):
            if (k, j) not in kernel:
                table.values[(k, j)] = float(values[pos + (j - 1,)])
                table.scales[(k, j)] = float(scale[pos + (j - 1,)])
    return table


def nonresonance_check(model: ModelSpec, omega0: Sequence[float], order: int) -> NonresonanceReport:
    """
    Scan the symbol over 1 ≤ |k|₁ ≤ N, 1 ≤ j ≤ N·j_c outside the kernel set.

    Orders N ≤ 1 need no division and pass vacuously.
    """
    if order <= 1:
        return NonresonanceReport(passed=True, order=order)
    table = multiplier_table(model, omega0, order, center_analysis(model).center_modes)
    resonant = set(table.resonant())
    resonances = [ResonanceRecord(k=list(k), j=j, mu=model.mu, F=table.values[(k, j)])
                  for k, j in sorted(resonant)]
    regular = {key: value for key, value in table.values.items() if key not in resonant}
    best_key = min(regular, key=lambda kj: abs(regular[kj])) if regular else None
    if resonances:
        logger.warning(f"{len(resonances)} resonant modes up to order {order}, first at "
                       f"k={resonances[0].k} j={resonances[0].j}")
    return NonresonanceReport(
        passed=not resonances,
        order=order,
        min_abs_F=None if best_key is None else abs(regular[best_key]),
        argmin_k=None if best_key is None else list(best_key[0]),
        argmin_j=None if best_key is None else best_key[1],
        resonances=resonances,
    )
