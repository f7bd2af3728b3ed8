"""
Order-by-order construction of the Lindstedt series and the seeds it yields.

Scalar model: the recursion runs on the second-order form in u,

    ℳ₀ U_m = R_m − 2(ω^{m−1}·∂_θ)(ω⁰·∂_θ)U₁,

with R_m collecting ∂²_x(U_r U_s) and the known frequency terms. The
velocity of the seed is ω_ε·∂_θ u.

System: ω⁰·∂_θ W_m − 𝒜W_m = R_m − ω^{m−1}·∂_θ W₁, solved one complex
(k, j) mode at a time.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fourier.norms import space_norm
from fourier.torus_map import (
    Parity,
    TorusMap,
    component,
    j_values,
    k_grid,
    omega_derivative,
    partial_x,
    product,
    stack,
    theta_mask,
)
from lindstedt.multiplier import RESONANCE_TOLERANCE, kernel_set, nonresonance_check, scalar_multiplier
from lindstedt.series import LindstedtSeries
from models.base import ModelSpec
from models.boussinesq import BoussinesqSystem, get_model
from models.spectrum import center_analysis
from utils.errors import ConfigError, LindstedtConsistencyError, ResonanceError

logger = logging.getLogger(__name__)

EVEN_EVEN = (Parity.EVEN, Parity.EVEN)
# relative size of a kernel component treated as zero after matching
KERNEL_TOLERANCE = 1e-9


def _is_system(model: ModelSpec) -> bool:
    return isinstance(model, BoussinesqSystem)


def _accumulate(total: np.ndarray, term: TorusMap, k_theta_max: int, k_x_max: int, sign: float = 1.0) -> None:
    kept, _ = term.truncate(k_theta_max, k_x_max)
    total += sign * kept.coeffs


def first_order(model: ModelSpec, amplitudes: Sequence[float]) -> LindstedtSeries:
    """
    Order-one solution: Σ_i A_i cos(2πθ_i)cos(2πj_i x) in u, and for the
    system B_i sin(2πθ_i)sin(2πj_i x) in v with B_i = A_i j_i/ω⁰_i.
    """
    report = center_analysis(model)
    ell = report.ell
    amplitudes = np.asarray(amplitudes, dtype=float)
    if amplitudes.shape != (ell,):
        raise ConfigError(f"{amplitudes.size} amplitudes given for {ell} center modes")
    if np.any(amplitudes == 0):
        raise ConfigError("every order-one amplitude must be nonzero")
    omega0 = np.array(report.omega0)
    centers = tuple(report.center_modes)
    kx = max(centers)

    def mode(i: int, kind: str, amplitude: float) -> TorusMap:
        e = [0] * ell
        e[i] = 1
        return TorusMap.trig(ell, e, centers[i], theta=kind, x=kind, amplitude=amplitude,
                             k_theta_max=1, k_x_max=kx)

    u = TorusMap.zeros(ell, 1, 1, kx, parity=(EVEN_EVEN,), zero_mean=True)
    u = u.with_coeffs(sum(mode(i, "cos", a).coeffs for i, a in enumerate(amplitudes)))
    companion = None
    term = u
    if _is_system(model):
        companion = amplitudes * np.array(centers) / omega0
        v = TorusMap.zeros(ell, 1, 1, kx, parity=((Parity.ODD, Parity.ODD),), zero_mean=True)
        v = v.with_coeffs(sum(mode(i, "sin", b).coeffs for i, b in enumerate(companion)))
        term = stack([u, v])
    return LindstedtSeries(
        model_name=model.name,
        mu=model.mu,
        omega0=omega0,
        center_modes=centers,
        amplitudes=amplitudes,
        companion=companion,
        terms=(term,),
    )


def _frequencies(series: LindstedtSeries) -> list:
    """[ω⁰, ω¹, …] as ℓ-vectors."""
    return [np.asarray(series.omega0, dtype=float)] + list(series.frequency_terms)


def _scalar_step(model: ModelSpec, series: LindstedtSeries) -> Tuple[TorusMap, np.ndarray, float, float]:
    m = series.order + 1
    ell = series.ell
    kt, kx = m, m * series.max_center_j
    omegas = _frequencies(series)
    U = (None,) + series.terms

    total = np.zeros((1,) + (2 * kt + 1,) * ell + (2 * kx + 1,), dtype=np.complex128)
    for r in range(1, m):
        _accumulate(total, partial_x(product(U[r], U[m - r]), 2), kt, kx)
    for r in range(1, m):
        for p in range(0, m - r + 1):
            q = m - r - p
            if r == 1 and max(p, q) == m - 1:
                continue
            if not (np.any(omegas[p]) and np.any(omegas[q])):
                continue
            term = omega_derivative(omega_derivative(U[r], omegas[q]), omegas[p])
            _accumulate(total, term, kt, kx, sign=-1.0)
    R = TorusMap(total, ell, kt, kx, (EVEN_EVEN,), zero_mean=True)

    correction = np.zeros(ell)
    kernel_size = 0.0
    scale = max(1.0, float(np.abs(total).max(initial=0.0)))
    for i, j in enumerate(series.center_modes):
        e = np.zeros(ell, dtype=int)
        e[i] = 1
        c = complex(R.coeff(e, j)[0])
        kernel_size = max(kernel_size, abs(c))
        w0, a = float(series.omega0[i]), float(series.amplitudes[i])
        correction[i] = -c.real / (2.0 * math.pi ** 2 * w0 * a)
        # the matched term contributes −2π²ω⁰ωA to each of the four kernel coefficients
        for s in (1, -1):
            for t in (1, -1):
                left = complex(R.coeff(s * e, t * j)[0]) + 2.0 * math.pi ** 2 * w0 * correction[i] * a
                if abs(left) > KERNEL_TOLERANCE * scale:
                    raise LindstedtConsistencyError(
                        f"order {m}: kernel mode (k={list(s * e)}, j={t * j}) is not matched by ω^{m - 1}",
                        details={"order": m, "residual": abs(left)},
                    )

    ks = k_grid(ell, kt)
    kappa = 2.0 * math.pi * (ks @ np.asarray(series.omega0, dtype=float))
    q = 2.0 * math.pi * j_values(kx).astype(float)
    F = -kappa[..., None] ** 2 + q ** 2 - model.mu * q ** 4
    size = kappa[..., None] ** 2 + q ** 2 + model.mu * q ** 4
    skip = np.zeros(F.shape, dtype=bool)
    skip[..., kx] = True
    for k, j in kernel_set(ell, series.center_modes):
        for jj in (j, -j):
            skip[tuple(kk + kt for kk in k) + (jj + kx,)] = True
    live = ~skip & theta_mask(ell, kt)[..., None]
    small = live & (np.abs(F) <= RESONANCE_TOLERANCE * size) & (np.abs(total[0]) > 0)
    if np.any(small):
        pos = tuple(int(p) for p in np.argwhere(small)[0])
        raise ResonanceError(
            f"order {m}: resonant mode k={[p - kt for p in pos[:-1]]} j={pos[-1] - kx}",
            details={"order": m, "mu": model.mu},
        )
    coeffs = np.zeros_like(total)
    np.divide(total[0], F, out=coeffs[0], where=live & (np.abs(F) > 0))
    min_abs = float(np.abs(F[live & (np.abs(total[0]) > 0)]).min(initial=math.inf))
    term = TorusMap(coeffs, ell, kt, kx, (EVEN_EVEN,), zero_mean=True)
    return term, correction, kernel_size, min_abs


def _system_step(model: ModelSpec, series: LindstedtSeries) -> Tuple[TorusMap, np.ndarray, float, float]:
    m = series.order + 1
    ell = series.ell
    kt, kx = m, m * series.max_center_j
    omegas = _frequencies(series)
    W = (None,) + series.terms

    first = np.zeros((1,) + (2 * kt + 1,) * ell + (2 * kx + 1,), dtype=np.complex128)
    for r in range(1, m):
        _accumulate(first, partial_x(product(component(W[r], 0), component(W[m - r], 1)), 1), kt, kx)
    total = np.concatenate([first, np.zeros_like(first)])
    for n in range(1, m - 1):
        if np.any(omegas[n]):
            _accumulate(total, omega_derivative(W[m - n], omegas[n]), kt, kx, sign=-1.0)
    W1 = W[1].pad(kt, kx).coeffs

    ks = k_grid(ell, kt)
    kappa = ks @ np.asarray(series.omega0, dtype=float)
    blocks = np.stack([model.linear_block(int(j)) for j in j_values(kx)])
    # M(k, j) = 2πi(k·ω⁰)I − Â(j), shape (θ…, j, 2, 2)
    M = 2j * math.pi * kappa[..., None, None, None] * np.eye(2) - blocks
    det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    size = np.abs(M[..., 0, 0] * M[..., 1, 1]) + np.abs(M[..., 0, 1] * M[..., 1, 0])

    rhs = np.moveaxis(total, 0, -1)
    kernel_modes = set()
    for k, j in kernel_set(ell, series.center_modes):
        for jj in (j, -j):
            kernel_modes.add(tuple(kk + kt for kk in k) + (jj + kx,))

    correction = np.zeros(ell)
    kernel_size = 0.0
    scale = max(1.0, float(np.abs(total).max(initial=0.0)))
    for i, j in enumerate(series.center_modes):
        pos = tuple(kt + (1 if a == i else 0) for a in range(ell)) + (j + kx,)
        blk = M[pos]
        left = np.array([blk[1, 0], -blk[0, 0]])
        projected = complex(left @ rhs[pos])
        kernel_size = max(kernel_size, abs(projected))
        denom = 2j * math.pi * complex(left @ W1[(slice(None),) + pos])
        value = projected / denom
        if abs(value.imag) > KERNEL_TOLERANCE * max(1.0, abs(value)):
            raise LindstedtConsistencyError(f"order {m}: complex frequency correction {value}")
        correction[i] = value.real

    solution = np.zeros_like(rhs)
    live = theta_mask(ell, kt)[..., None] & (j_values(kx) != 0)
    regular = live & (np.abs(det) > RESONANCE_TOLERANCE * size)
    adj = np.stack([np.stack([M[..., 1, 1], -M[..., 0, 1]], -1),
                    np.stack([-M[..., 1, 0], M[..., 0, 0]], -1)], -2)
    inv_rhs = np.einsum("...ab,...b->...a", adj, rhs)
    np.divide(inv_rhs, det[..., None], out=solution, where=regular[..., None])

    shift = 2j * math.pi * (ks @ correction)
    for pos in kernel_modes:
        fixed = rhs[pos] - shift[pos[:-1]] * W1[(slice(None),) + pos]
        blk = M[pos]
        sol, *_ = np.linalg.lstsq(blk, fixed, rcond=1e-10)
        if np.abs(blk @ sol - fixed).max() > KERNEL_TOLERANCE * scale:
            raise LindstedtConsistencyError(
                f"order {m}: kernel mode {pos} is inconsistent after matching",
                details={"order": m},
            )
        solution[pos] = sol

    unresolved = live & ~regular & (np.abs(rhs).max(axis=-1) > 0)
    for pos in kernel_modes:
        unresolved[pos] = False
    if np.any(unresolved):
        pos = tuple(int(p) for p in np.argwhere(unresolved)[0])
        raise ResonanceError(
            f"order {m}: resonant mode k={[p - kt for p in pos[:-1]]} j={pos[-1] - kx}",
            details={"order": m, "mu": model.mu},
        )
    used = live & regular & (np.abs(rhs).max(axis=-1) > 0)
    min_abs = float((np.abs(det[used]) / (4.0 * math.pi ** 2)).min(initial=math.inf))
    term = TorusMap(np.moveaxis(solution, -1, 0), ell, kt, kx, model.component_parity, zero_mean=True)
    return term, correction, kernel_size, min_abs


def lindstedt_step(model: ModelSpec, series: LindstedtSeries) -> Tuple[TorusMap, np.ndarray]:
    """Next term U_m and frequency correction ω^{m−1}, m = series.order + 1."""
    term, correction, _, _ = _step(model, series)
    return term, correction


def _step(model: ModelSpec, series: LindstedtSeries):
    if series.order < 1:
        raise LindstedtConsistencyError("the recursion starts from the order-one solution")
    step = _system_step if _is_system(model) else _scalar_step
    return step(model, series)


def build_series(model: ModelSpec, amplitudes: Sequence[float], order: int) -> LindstedtSeries:
    """Run the recursion to order N after the non-resonance scan."""
    series = first_order(model, amplitudes)
    check = nonresonance_check(model, series.omega0, order)
    if not check.passed:
        first = check.resonances[0]
        raise ResonanceError(
            f"non-resonance fails at k={first.k} j={first.j} (μ={model.mu!r})",
            details={"resonances": [r.model_dump() for r in check.resonances]},
        )
    for m in range(2, order + 1):
        term, correction, kernel_size, min_abs = _step(model, series)
        logger.debug(f"Lindstedt order {m}: kernel component {kernel_size:.3e}, ω^{m - 1} = {correction}")
        series = series.extended(term, correction, kernel_size, min_abs)
    return series


def assemble_seed(series: LindstedtSeries, epsilon: float, k_theta_max: Optional[int] = None,
                  k_x_max: Optional[int] = None) -> Tuple[TorusMap, np.ndarray]:
    """
    K₀ = Σ εᵐ U_m (with the velocity ω_ε·∂_θ u for the scalar model) and ω_ε.

    The table is padded or truncated to the requested radii.
    """
    model = get_model(series.model_name, series.mu)
    omega = series.frequency_at(epsilon)
    kt = series.order if k_theta_max is None else k_theta_max
    kx = series.order * series.max_center_j if k_x_max is None else k_x_max
    big_t, big_x = max(kt, series.order), max(kx, series.order * series.max_center_j)
    d = series.terms[0].d
    total = np.zeros((d,) + (2 * big_t + 1,) * series.ell + (2 * big_x + 1,), dtype=np.complex128)
    for m, term in enumerate(series.terms, start=1):
        total += epsilon ** m * term.pad(big_t, big_x).coeffs
    if _is_system(model):
        K = TorusMap(total, series.ell, big_t, big_x, model.component_parity, zero_mean=True)
    else:
        u = TorusMap(total, series.ell, big_t, big_x, (EVEN_EVEN,), zero_mean=True)
        K = stack([u, omega_derivative(u, omega)])
    K, _ = K.truncate(kt, kx)
    return model.enforce_constraints(model.declare_parity(K)), omega


def residual_slope(model: ModelSpec, series: LindstedtSeries, epsilon_grid: Sequence[float],
                   rho: float, m: int) -> pd.DataFrame:
    """
    ‖E₀‖_Y of the assembled seed over an ε grid and the log-log slope.

    The slope is fitted over the whole grid and repeated on every row.
    """
    y_indices = model.space_indices(m)[1]
    # radii 2N hold the whole quadratic residual of an order-N seed
    kt, kx = 2 * series.order, 2 * series.order * series.max_center_j
    rows = []
    for epsilon in epsilon_grid:
        K, omega = assemble_seed(series, float(epsilon), kt, kx)
        E = model.residual(K, omega)
        rows.append({"epsilon": float(epsilon), "residual_Y": space_norm(E, rho, y_indices)})
    frame = pd.DataFrame(rows)
    positive = frame[frame["residual_Y"] > 0]
    slope = float("nan")
    if len(positive) >= 2:
        slope = float(np.polyfit(np.log(positive["epsilon"]), np.log(positive["residual_Y"]), 1)[0])
    frame["fitted_slope"] = slope
    return frame


def twist_coefficient(series: LindstedtSeries) -> np.ndarray:
    """ω²_i / A_i², the amplitude dependence of the frequency at order three."""
    if series.order < 3:
        raise LindstedtConsistencyError("the twist coefficient needs a series of order ≥ 3")
    return np.asarray(series.frequency_terms[1]) / np.asarray(series.amplitudes) ** 2


def frequency_combination(series: LindstedtSeries) -> float:
    """
    F(0, 2j) + 2F(2e, 2j) for the first center mode, the combination whose
    nonvanishing makes ω² ≠ 0 for the scalar model.
    """
    ell = series.ell
    j = series.center_modes[0]
    e2 = [2] + [0] * (ell - 1)
    zero = [0] * ell
    f02 = scalar_multiplier(series.mu, series.omega0, zero, 2 * j)
    f22 = scalar_multiplier(series.mu, series.omega0, e2, 2 * j)
    return f02 + 2.0 * f22
