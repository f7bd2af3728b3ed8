"""
Rate constants of the dichotomy, fitted on sampled cocycle norms.

‖U^s_θ(t)‖_{Y,X} is sampled on two deterministic t-windows: a short-time
window where the fast harmonics produce the t^{−α} smoothing envelope, and
a long-time window where the slowest decaying harmonic gives e^{−βt}.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from config import Config
from hyperbolic.cocycle import BundleTables, bundle_tables, reduced_cocycle
from hyperbolic.splitting import Rates, SplittingData
from models.base import ModelSpec
from models.fiber import fiber_weights
from utils.errors import NoDichotomyError

logger = logging.getLogger(__name__)

ALPHA_SAMPLES = 24
BETA_SAMPLES = 12
CENTER_SAMPLES = 16
HORIZON_TARGET = 1e-2


def bundle_decay_rates(splitting: SplittingData, bundle: str) -> np.ndarray:
    """Sorted decay rates of the averaged reduced generator (backward rates for u)."""
    gen = splitting.generators[bundle].mean(axis=tuple(range(splitting.ell)))
    if gen.shape[-1] == 0:
        return np.zeros(0)
    re = np.linalg.eigvals(gen).real
    return np.sort(-re if bundle == "s" else re)


def fit_windows(rates: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Log-spaced short-time window and linear long-time window.

    The short window spans t = 1/(2r) over the upper rates, where the
    maximizing harmonic moves with t; the long window starts once the
    slowest harmonic dominates the second one by e^{−10}.
    """
    r = np.sort(np.asarray(rates, dtype=float))
    n = r.size
    if n == 0 or r[0] <= 0:
        raise NoDichotomyError("no positive decay rate on a hyperbolic bundle",
                               details={"rates": [float(v) for v in r]})
    if n >= 4:
        t_lo, t_hi = 1.0 / (2.0 * r[n - 2]), 1.0 / (2.0 * r[2])
    else:
        t_lo, t_hi = 1.0 / (2.0 * r[-1]), 1.0 / (2.0 * r[0])
    if t_hi <= t_lo:
        t_hi = 4.0 * t_lo
    short = np.geomspace(t_lo, t_hi, ALPHA_SAMPLES)
    t0 = 20.0 / r[0] if n < 2 or r[1] - r[0] <= 0 else min(10.0 / (r[1] - r[0]), 20.0 / r[0])
    long = np.linspace(t0, t0 + 1.0, BETA_SAMPLES)
    return short, long


def theta_samples(ell: int, count: int) -> np.ndarray:
    """Deterministic sample angles spread over 𝕋^ℓ."""
    directions = np.array([1.0, math.sqrt(2.0), math.sqrt(3.0)])[:ell]
    return np.mod(np.outer((np.arange(count) + 0.5) / count, directions), 1.0)


def weighted_norms(tables: BundleTables, theta: np.ndarray, times: np.ndarray, w_x: np.ndarray,
                   w_y: np.ndarray) -> np.ndarray:
    """‖W_X U_θ(t) W_Y⁻¹‖₂ for each t."""
    phis = reduced_cocycle(tables, theta, times)
    right = tables.dual_at(theta) / w_y[None, :]
    out = np.empty(times.size)
    for i, t in enumerate(times):
        left = w_x[:, None] * tables.basis_at(theta + tables.omega * t)
        out[i] = np.linalg.norm(left @ phis[i] @ right, 2)
    return out


def _fit_bundle(tables: BundleTables, rates: np.ndarray, thetas: np.ndarray, w_x: np.ndarray,
                w_y: np.ndarray) -> Tuple[float, float, float, float]:
    """(C_h, β, α, fit residual) for one hyperbolic bundle."""
    short, long = fit_windows(rates)
    sign = 1.0 if tables.bundle == "s" else -1.0
    times = np.concatenate([short, long])
    norms = np.max([weighted_norms(tables, th, sign * times, w_x, w_y) for th in thetas], axis=0)
    log_short, log_long = np.log(norms[:short.size]), np.log(norms[short.size:])
    beta = -float(np.polyfit(long, log_long, 1)[0])
    if not beta > 0:
        raise NoDichotomyError(f"fitted decay rate β={beta:.3e} on bundle {tables.bundle} is not positive",
                               details={"bundle": tables.bundle, "beta": beta})
    slope, intercept = np.polyfit(np.log(short), log_short, 1)
    alpha = max(-float(slope), 0.0)
    residual = float(np.sqrt(np.mean((log_short - (intercept + slope * np.log(short))) ** 2)))
    c_h = float(np.max(norms * times ** alpha * np.exp(beta * times)))
    return c_h, beta, alpha, residual


def _center_growth(tables: BundleTables, thetas: np.ndarray, horizon: float, sign: float) -> float:
    if tables.size == 0:
        return 0.0
    times = sign * np.linspace(horizon / 2.0, horizon, CENTER_SAMPLES)
    logs = []
    for th in thetas:
        phis = reduced_cocycle(tables, th, times)
        logs.append([math.log(np.linalg.norm(p, 2)) for p in phis])
    slope = float(np.polyfit(np.abs(times), np.max(logs, axis=0), 1)[0])
    return max(slope, 0.0)


def rate_estimate(model: ModelSpec, splitting: SplittingData, m: Optional[int] = None, n_theta: Optional[int] = None,
                  center_horizon: Optional[float] = None) -> Rates:
    """
    Fit (C_h, β₁, β₂, β₃^±, α₁, α₂) from sampled cocycle norms.

    Y→X norms use the fiber weights of the model's space indices at zero
    strip width, where the analytic factors cancel.

    Args:
        model: The PDE model (for the space indices).
        splitting: Splitting whose reduced generators are evolved.
        m: Sobolev index of X (default Config.SOBOLEV_M).
        n_theta: Number of sampled angles (default Config.RATE_THETA_SAMPLES).
        center_horizon: Time horizon of the center growth fit.

    Returns:
        Rates, with the RMS residual of the short-time fits.
    """
    m = Config.SOBOLEV_M if m is None else m
    n_theta = Config.RATE_THETA_SAMPLES if n_theta is None else n_theta
    center_horizon = Config.CENTER_HORIZON if center_horizon is None else center_horizon
    x_idx, y_idx = model.space_indices(m)
    w_x, w_y = fiber_weights(splitting.k_x_max, x_idx), fiber_weights(splitting.k_x_max, y_idx)
    thetas = theta_samples(splitting.ell, n_theta)

    c_s, beta1, alpha1, res_s = _fit_bundle(bundle_tables(splitting, "s"), bundle_decay_rates(splitting, "s"),
                                            thetas, w_x, w_y)
    c_u, beta2, alpha2, res_u = _fit_bundle(bundle_tables(splitting, "u"), bundle_decay_rates(splitting, "u"),
                                            thetas, w_x, w_y)
    center = bundle_tables(splitting, "c")
    rates = Rates(
        C_h=max(c_s, c_u),
        beta1=beta1,
        beta2=beta2,
        beta3_plus=_center_growth(center, thetas, center_horizon, 1.0),
        beta3_minus=_center_growth(center, thetas, center_horizon, -1.0),
        alpha1=alpha1,
        alpha2=alpha2,
        fit_residual=max(res_s, res_u),
    )
    logger.info(f"Fitted rates: β₁={beta1:.4f} β₂={beta2:.4f} α₁={alpha1:.3f} α₂={alpha2:.3f} "
                f"β₃⁺={rates.beta3_plus:.2e} C_h={rates.C_h:.3e}")
    if not (rates.beta3_plus < beta1 and rates.beta3_minus < beta2):
        raise NoDichotomyError("center growth is not dominated by the hyperbolic rates",
                               details=rates.model_dump())
    return rates


def dispersion_rates(model: ModelSpec, splitting: SplittingData, decay_rates: Sequence[float],
                     m: Optional[int] = None) -> Rates:
    """
    Rates of the unperturbed splitting from the dispersion relation.

    β₁ = β₂ is the slowest hyperbolic rate, β₃^± = 0 and α₁ = α₂ = ½; C_h
    is the envelope constant of the exact per-harmonic decay over the
    sampling windows.
    """
    m = Config.SOBOLEV_M if m is None else m
    x_idx, y_idx = model.space_indices(m)
    w_x, w_y = fiber_weights(splitting.k_x_max, x_idx), fiber_weights(splitting.k_x_max, y_idx)
    beta, alpha = float(min(decay_rates)), 0.5
    short, long = fit_windows(decay_rates)
    times = np.concatenate([short, long])
    node = (0,) * splitting.ell
    c_h = 0.0
    for bundle in ("s", "u"):
        basis, dual = splitting.bundle_basis(bundle)[node], splitting.bundle_dual(bundle)[node]
        lam = np.diag(splitting.generators[bundle][node])
        sign = 1.0 if bundle == "s" else -1.0
        for t in times:
            u = (w_x[:, None] * basis) @ np.diag(np.exp(lam * sign * t)) @ (dual / w_y[None, :])
            c_h = max(c_h, float(np.linalg.norm(u, 2)) * t ** alpha * math.exp(beta * t))
    return Rates(C_h=c_h, beta1=beta, beta2=beta, alpha1=alpha, alpha2=alpha)


def horizon(rates: Rates, target: float = HORIZON_TARGET) -> float:
    """Smallest T with C_h T^{−α} e^{−βT} ≤ target, using the weaker of the two hyperbolic rates."""
    beta = min(rates.beta1, rates.beta2)
    alpha = max(rates.alpha1, rates.alpha2)
    if not beta > 0:
        raise NoDichotomyError("horizon needs positive decay rates")

    def excess(t: float) -> float:
        return math.log(rates.C_h) - alpha * math.log(t) - beta * t - math.log(target)

    lo = 1e-12
    if excess(lo) <= 0:
        return lo
    hi = 1.0 / beta
    while excess(hi) > 0:
        hi *= 2.0
    return float(brentq(excess, lo, hi, xtol=1e-12))
