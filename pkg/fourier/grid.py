"""
θ-grid utilities for matrix-valued functions on 𝕋^ℓ.

Mode tables have shape (2K+1,)*ℓ + tail, grids have shape (n,)*ℓ + tail,
where tail is any trailing shape (vectors, matrices).
"""
from typing import Sequence

import numpy as np

from fourier.torus_map import k_grid, theta_mask
from utils.errors import StructuralError


def default_grid_size(k_theta_max: int) -> int:
    """Smallest grid on which cubic products of Kθ-tables project without aliasing."""
    return 4 * k_theta_max + 4


def grid_nodes(ell: int, n: int) -> np.ndarray:
    """Uniform nodes, shape (n,)*ℓ + (ℓ,)."""
    ts = np.arange(n) / n
    return np.stack(np.meshgrid(*([ts] * ell), indexing="ij"), axis=-1)


def modes_to_grid(modes: np.ndarray, ell: int, n: int) -> np.ndarray:
    k_max = (modes.shape[0] - 1) // 2
    if n < 2 * k_max + 1:
        raise StructuralError(f"grid of {n} points cannot carry modes up to {k_max}")
    tail = modes.shape[ell:]
    buf = np.zeros((n,) * ell + tail, dtype=np.complex128)
    idx = np.arange(-k_max, k_max + 1) % n
    buf[np.ix_(*([idx] * ell))] = modes * theta_mask(ell, k_max).reshape(modes.shape[:ell] + (1,) * len(tail))
    return np.fft.ifftn(buf, axes=tuple(range(ell))) * n ** ell


def grid_to_modes(values: np.ndarray, ell: int, k_max: int) -> np.ndarray:
    n = values.shape[0]
    if n < 2 * k_max + 1:
        raise StructuralError(f"grid of {n} points cannot resolve modes up to {k_max}")
    spec = np.fft.fftn(values, axes=tuple(range(ell))) / n ** ell
    idx = np.arange(-k_max, k_max + 1) % n
    modes = spec[np.ix_(*([idx] * ell))]
    tail = values.shape[ell:]
    return modes * theta_mask(ell, k_max).reshape((2 * k_max + 1,) * ell + (1,) * len(tail))


def real_grid(modes: np.ndarray, ell: int, n: int) -> np.ndarray:
    """Grid values of a real function given by conjugate-symmetric modes."""
    return modes_to_grid(modes, ell, n).real


def omega_derivative_modes(modes: np.ndarray, ell: int, omega: Sequence[float]) -> np.ndarray:
    k_max = (modes.shape[0] - 1) // 2
    factor = 2j * np.pi * (k_grid(ell, k_max) @ np.asarray(omega, dtype=float))
    tail = modes.shape[ell:]
    return modes * factor.reshape(factor.shape + (1,) * len(tail))


def omega_derivative_grid(values: np.ndarray, ell: int, omega: Sequence[float], k_max: int) -> np.ndarray:
    """Spectral ∂_ω of grid values, resolved up to |k|₁ ≤ k_max."""
    n = values.shape[0]
    modes = grid_to_modes(values, ell, k_max)
    return real_grid(omega_derivative_modes(modes, ell, omega), ell, n)


def interpolate(modes: np.ndarray, ell: int, theta: Sequence[float]) -> np.ndarray:
    """Fourier interpolation Σ_k modes[k] e^{2πik·θ} at one point."""
    k_max = (modes.shape[0] - 1) // 2
    phase = np.exp(2j * np.pi * (k_grid(ell, k_max) @ np.asarray(theta, dtype=float).reshape(ell)))
    phase = phase * theta_mask(ell, k_max)
    return np.tensordot(phase, modes, axes=(tuple(range(ell)), tuple(range(ell))))


def interpolate_points(modes: np.ndarray, ell: int, thetas: np.ndarray) -> np.ndarray:
    """Fourier interpolation at every row of thetas (shape (m, ℓ)); returns (m,) + tail."""
    k_max = (modes.shape[0] - 1) // 2
    mask = theta_mask(ell, k_max).ravel()
    ks = k_grid(ell, k_max).reshape(-1, ell)[mask]
    flat = modes.reshape((-1,) + modes.shape[ell:])[mask]
    phase = np.exp(2j * np.pi * (np.asarray(thetas, dtype=float).reshape(-1, ell) @ ks.T))
    return np.tensordot(phase, flat, axes=(1, 0))


def translated_grid(modes: np.ndarray, ell: int, omega: Sequence[float], shifts: Sequence[float],
                    n: int) -> np.ndarray:
    """Grid values of θ ↦ f(θ + ωs) for every s in shifts, shape (n,)*ℓ + (len(shifts),) + tail."""
    k_max = (modes.shape[0] - 1) // 2
    tail = modes.shape[ell:]
    freq = k_grid(ell, k_max) @ np.asarray(omega, dtype=float)
    phase = np.exp(2j * np.pi * np.multiply.outer(freq, np.asarray(shifts, dtype=float)))
    shifted = modes[(slice(None),) * ell + (None,)] * phase.reshape(phase.shape + (1,) * len(tail))
    return real_grid(shifted, ell, n)


def grid_average(values: np.ndarray, ell: int) -> np.ndarray:
    return values.mean(axis=tuple(range(ell)))


def mode_decay_rate(modes: np.ndarray, ell: int) -> float:
    """
    Fitted strip width ρ̂ from the decay of max_{|k|₁=r} |modes[k]| ~ e^{−2πρ̂ r}.

    Returns +inf when the table has no decaying harmonics above round-off.
    """
    k_max = (modes.shape[0] - 1) // 2
    l1 = np.abs(k_grid(ell, k_max)).sum(axis=-1)
    mags = np.abs(modes).reshape(modes.shape[:ell] + (-1,)).max(axis=-1)
    radii, peaks = [], []
    floor = 1e-14 * max(float(mags.max()), 1e-300)
    for r in range(1, k_max + 1):
        peak = float(mags[l1 == r].max(initial=0.0))
        if peak > floor:
            radii.append(r)
            peaks.append(np.log(peak))
    if len(radii) < 2:
        return float("inf")
    slope = np.polyfit(radii, peaks, 1)[0]
    return float(-slope / (2.0 * np.pi)) if slope < 0 else 0.0


def resize_modes(modes: np.ndarray, ell: int, k_max: int) -> np.ndarray:
    """Pad or truncate a mode table (any trailing shape) to the diamond |k|₁ ≤ k_max."""
    k_old = (modes.shape[0] - 1) // 2
    tail = modes.shape[ell:]
    out = np.zeros((2 * k_max + 1,) * ell + tail, dtype=np.complex128)
    k = min(k_old, k_max)
    out[(slice(k_max - k, k_max + k + 1),) * ell] = modes[(slice(k_old - k, k_old + k + 1),) * ell]
    return out * theta_mask(ell, k_max).reshape((2 * k_max + 1,) * ell + (1,) * len(tail))
