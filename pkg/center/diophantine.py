"""
Measured Diophantine constant of a frequency vector.
"""
import logging
import math
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel

from fourier.torus_map import k_grid
from utils.errors import ResonanceError, StructuralError

logger = logging.getLogger(__name__)


class DiophantineReport(BaseModel):
    """κ̂ = max over 0 < |k|₁ ≤ Kmax of (|ω·k| |k|₁^ν)⁻¹ and the maximizing k."""

    omega: List[float]
    nu: float
    k_max: int
    kappa_hat: float
    argmax_k: List[int]


def _half_space(ks: np.ndarray) -> np.ndarray:
    """Keep one of k, −k: the first nonzero coordinate is positive."""
    keep = np.zeros(ks.shape[0], dtype=bool)
    for i, k in enumerate(ks):
        nz = np.nonzero(k)[0]
        keep[i] = nz.size > 0 and k[nz[0]] > 0
    return keep


def diophantine_estimate(omega: Sequence[float], nu: float, k_max: int) -> DiophantineReport:
    """
    Exhaustive scan of the small divisors ω·k over 0 < |k|₁ ≤ Kmax.

    Raises:
        ResonanceError: ω·k = 0 exactly for some scanned k.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or not np.any(omega != 0):
        raise StructuralError("the frequency vector must be nonzero")
    if k_max < 1:
        raise ValueError("Kmax must be at least 1")
    ell = omega.size
    ks = k_grid(ell, k_max).reshape(-1, ell)
    l1 = np.abs(ks).sum(axis=1)
    ks = ks[(l1 > 0) & (l1 <= k_max)]
    ks = ks[_half_space(ks)]
    # order by |k|₁, then lexicographically, so the reported argmax is reproducible
    order = np.lexsort(tuple(ks[:, i] for i in reversed(range(ell))) + (np.abs(ks).sum(axis=1),))
    ks = ks[order]

    divisors = np.array([abs(math.fsum(float(o) * int(c) for o, c in zip(omega, k))) for k in ks])
    hit = np.nonzero(divisors == 0.0)[0]
    if hit.size:
        k = ks[hit[0]]
        raise ResonanceError(f"ω·k = 0 at k={tuple(int(c) for c in k)}",
                             details={"k": [int(c) for c in k], "omega": omega.tolist()})
    values = 1.0 / (divisors * np.abs(ks).sum(axis=1).astype(float) ** nu)
    best = int(np.argmax(values))
    report = DiophantineReport(
        omega=omega.tolist(),
        nu=float(nu),
        k_max=int(k_max),
        kappa_hat=float(values[best]),
        argmax_k=[int(c) for c in ks[best]],
    )
    logger.debug(f"Diophantine scan to |k|₁={k_max}: κ̂={report.kappa_hat:.4e} at k={report.argmax_k}")
    return report
