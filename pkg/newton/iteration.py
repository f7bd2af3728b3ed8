"""
Quasi-Newton iteration for the invariance equation ∂_ωK = 𝒳(K).

Each step solves (∂_ω − A)Δ = −E approximately: exactly (up to the
truncation) on the hyperbolic bundles and up to a quadratic defect on the
center, then refreshes the splitting and the center frame at K + Δ.
"""
import logging
import math
from dataclasses import replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from center.diophantine import diophantine_estimate
from center.frame import build_center_frame
from center.solve import solve_center
from config import Config
from fourier.norms import space_norm
from fourier.torus_map import TorusMap, add, sub
from hyperbolic.galerkin import linearize
from hyperbolic.graph_transform import compute_splitting, graph_transform_update, splitting_from_graphs
from hyperbolic.solvers import solve_hyperbolic_direct, solve_stable, solve_unstable
from hyperbolic.splitting import invariance_defect, projection_defect
from models.base import ModelSpec
from models.fiber import from_fiber, to_fiber
from newton.schedule import Schedule
from newton.state import NewtonState, RunReport, StepRecord
from utils.errors import IntegrationError, NewtonDivergenceError, NewtonStepError, SolverError

logger = logging.getLogger(__name__)

# pairs whose second residual sits this close to the floor are excluded from the fit
FLOOR_MARGIN = 10.0


class QuadraticFit(BaseModel):
    """log₁₀ r_{m+1} ≈ 2 log₁₀ r_m + c over the pairs above the residual floor."""

    constant: Optional[float] = None
    deviations: List[float] = []
    pairs: int = 0

    @property
    def max_deviation(self) -> float:
        return max((abs(d) for d in self.deviations), default=0.0)


class DistanceEstimate(BaseModel):
    distance: float
    bound: float
    constant: float


def _nu(ell: int) -> float:
    return float(ell - 1) if Config.NU is None else float(Config.NU)


def residual_norm(model: ModelSpec, K: TorusMap, omega: Sequence[float], rho: float) -> float:
    """‖∂_ωK − 𝒳(K)‖_Y on the strip ρ."""
    y_indices = model.space_indices(Config.SOBOLEV_M)[1]
    return space_norm(model.residual(K, omega), rho, y_indices)


def _record(state: NewtonState, kappa_hat: float, defects: dict) -> StepRecord:
    return StepRecord(
        m=state.m,
        rho=state.rho,
        delta=state.delta,
        resid_Y=state.residual,
        avgS_inv=state.frame.avg_twist_inv_norm,
        kappa_hat=kappa_hat,
        rates=state.splitting.rates,
        defects=defects,
    )


def _frame_defects(state: NewtonState) -> dict:
    return {
        "invariance": invariance_defect(state.op, state.splitting),
        "projection": projection_defect(state.splitting),
        "tangent": state.frame.tangent_defect,
        "reducibility": state.frame.reducibility_defect,
        "isotropy": state.frame.isotropy_norm,
    }


def initial_state(model: ModelSpec, K: TorusMap, omega: Sequence[float], schedule: Optional[Schedule] = None,
                  kappa_hat: Optional[float] = None) -> NewtonState:
    """State 0: splitting from the unperturbed one, center frame and residual at ρ₀."""
    schedule = schedule or Schedule.from_config()
    omega = np.asarray(omega, dtype=float)
    K = model.enforce_constraints(K)
    op, splitting = compute_splitting(model, K, omega)
    frame = build_center_frame(model, K, omega, splitting, op)
    state = NewtonState(
        m=0,
        K=K,
        omega=omega,
        rho=schedule.rho(0),
        delta=schedule.delta(0),
        residuals=(residual_norm(model, K, omega, schedule.rho(0)),),
        op=op,
        splitting=splitting,
        frame=frame,
    )
    if kappa_hat is None:
        kappa_hat = diophantine_estimate(omega, _nu(K.ell), max(1, K.k_theta_max)).kappa_hat
    return replace(state, records=(_record(state, kappa_hat, _frame_defects(state)),))


def newton_step(model: ModelSpec, state: NewtonState, schedule: Optional[Schedule] = None,
                kappa_hat: Optional[float] = None) -> NewtonState:
    """
    One quasi-Newton correction K_{m+1} = K_m + Δ_m with refreshed frames.

    Raises:
        NewtonStepError: a sub-solver failed; the cause is chained.
        NewtonDivergenceError: the residual rose on two consecutive steps.
    """
    schedule = schedule or Schedule.from_config()
    m = state.m + 1
    try:
        return _step(model, state, schedule, m, kappa_hat)
    except (NewtonStepError, NewtonDivergenceError):
        raise
    except SolverError as exc:
        raise NewtonStepError(m, exc) from exc


def _hyperbolic_correction(state: NewtonState, e_modes: np.ndarray, m: int) -> np.ndarray:
    """Δ^s + Δ^u; the Duhamel integrals fall back to the direct solves when the cocycle integration fails."""
    if Config.HYPERBOLIC_SOLVER == "direct":
        return solve_hyperbolic_direct(state.splitting, e_modes)
    try:
        return solve_stable(state.splitting, e_modes) + solve_unstable(state.splitting, e_modes)
    except IntegrationError as exc:
        logger.warning(f"Duhamel solve failed at step {m} ({exc}); using the direct solves")
        return solve_hyperbolic_direct(state.splitting, e_modes)


def _step(model: ModelSpec, state: NewtonState, schedule: Schedule, m: int,
          kappa_hat: Optional[float]) -> NewtonState:
    K, omega = state.K, state.omega
    kinds = model.fiber_kinds
    E = model.residual(K, omega)
    e_modes = to_fiber(E, kinds)

    hyperbolic = _hyperbolic_correction(state, e_modes, m)
    center = solve_center(state.frame, e_modes, omega, state.delta)
    correction = from_fiber(hyperbolic + center.delta, K.ell, K.k_theta_max, K.k_x_max, kinds, K.parity)
    raw = add(K, correction)
    K_new = model.enforce_constraints(raw)

    op = linearize(model, K_new)
    if Config.FRAME_REFRESH == "every-step" or m % 2 == 0:
        splitting = graph_transform_update(state.splitting, op, model=model)
    else:
        # graphs lag one step; generators follow the new operator
        splitting = splitting_from_graphs(state.splitting, op, state.splitting.graphs,
                                          n_grid=state.splitting.n_grid)
    frame = build_center_frame(model, K_new, omega, splitting, op)

    rho = schedule.rho(m)
    if not rho < state.rho:
        raise NewtonDivergenceError(f"strip width did not decrease at step {m}")
    resid = residual_norm(model, K_new, omega, rho)
    rising = state.rising + 1 if resid > state.residual else 0
    if rising >= 2:
        raise NewtonDivergenceError(f"residual increased on two consecutive steps (‖E‖={resid:.3e})",
                                    details={"step": m, "residuals": list(state.residuals) + [resid]})

    new_state = NewtonState(
        m=m,
        K=K_new,
        omega=omega,
        rho=rho,
        delta=schedule.delta(m),
        residuals=state.residuals + (resid,),
        op=op,
        splitting=splitting,
        frame=frame,
        records=state.records,
        rising=rising,
    )
    defects = _frame_defects(new_state)
    defects.update({
        "exactness": center.exactness_defect,
        "center_quadratic": center.quadratic_defect,
        "correction": _l2(correction),
        "enforcement": _l2(sub(K_new, raw)),
    })
    kappa = kappa_hat if kappa_hat is not None else state.records[-1].kappa_hat if state.records else 0.0
    record = _record(new_state, kappa, defects)
    logger.info(f"Newton step m={m}: ρ={rho:.5f} ‖E‖_Y={resid:.3e} |avgS⁻¹|={record.avgS_inv:.3e}")
    return replace(new_state, records=state.records + (record,))


def _l2(tm: TorusMap) -> float:
    return float(np.sqrt(np.sum(np.abs(tm.coeffs) ** 2)))


def run(model: ModelSpec, seed: TorusMap, omega: Sequence[float], schedule: Optional[Schedule] = None,
        tol: Optional[float] = None, max_iter: Optional[int] = None, state: Optional[NewtonState] = None,
        on_step: Optional[Callable[[NewtonState], None]] = None,
        emit: Optional[Callable[[str], None]] = None) -> Tuple[NewtonState, RunReport]:
    """
    Iterate until ‖E_m‖_Y ≤ max(tol, floor) or max_iter steps.

    Args:
        model: The PDE model.
        seed: Initial embedding K₀.
        omega: Frequency, fixed along the run.
        schedule: Loss schedule (default from Config).
        tol: Target residual (default Config.NEWTON_TOL).
        max_iter: Step cap (default Config.MAX_ITER).
        state: Resume from this state instead of building state 0 from seed.
        on_step: Called with every new state, e.g. to dump it.
        emit: Progress callback.

    Returns:
        The last state and the run report.
    """
    schedule = schedule or Schedule.from_config()
    tol = Config.NEWTON_TOL if tol is None else tol
    max_iter = Config.MAX_ITER if max_iter is None else max_iter
    target = max(tol, Config.RESIDUAL_FLOOR)
    emit = emit or (lambda message: None)

    if state is None:
        emit("BUILDING_INITIAL_FRAMES")
        state = initial_state(model, seed, omega, schedule)
    kappa_hat = state.records[0].kappa_hat if state.records else None
    seed_state = state

    while state.residual > target and state.m < max_iter:
        emit(f"NEWTON_STEP_{state.m + 1}")
        state = newton_step(model, state, schedule, kappa_hat)
        if on_step is not None:
            on_step(state)

    converged = state.residual <= target
    report = RunReport(
        model=model.name,
        mu=model.mu,
        omega=[float(w) for w in state.omega],
        steps=list(state.records),
        converged=converged,
    )
    fit = quadratic_fit(state.residuals)
    report.quadratic_constant = fit.constant
    if converged and state.m > 0 and seed_state.m == 0:
        estimate = distance_estimate(model, state.K, seed_state, schedule)
        report.distance, report.distance_bound = estimate.distance, estimate.bound
    logger.info(f"Newton run {'converged' if converged else 'stopped'} after {state.m} steps, "
                f"‖E‖_Y={state.residual:.3e}")
    return state, report


def quadratic_fit(residuals: Sequence[float], floor: Optional[float] = None) -> QuadraticFit:
    """Fit c in log₁₀ r_{m+1} = 2 log₁₀ r_m + c and the per-step deviations."""
    floor = Config.RESIDUAL_FLOOR if floor is None else floor
    pairs = [(a, b) for a, b in zip(residuals[:-1], residuals[1:]) if a > 0 and b > FLOOR_MARGIN * floor]
    if not pairs:
        return QuadraticFit()
    offsets = [math.log10(b) - 2.0 * math.log10(a) for a, b in pairs]
    constant = float(np.mean(offsets))
    return QuadraticFit(constant=constant, deviations=[o - constant for o in offsets], pairs=len(pairs))


def distance_estimate(model: ModelSpec, K_final: TorusMap, seed_state: NewtonState,
                      schedule: Optional[Schedule] = None) -> DistanceEstimate:
    """
    ‖K_∞ − K₀‖_X at ρ_∞ against |avgS₀⁻¹|²κ²δ^{−2ν}‖E₀‖; the quotient is the measured constant.
    """
    schedule = schedule or Schedule.from_config()
    x_indices = model.space_indices(Config.SOBOLEV_M)[0]
    distance = space_norm(sub(K_final, seed_state.K), schedule.rho_inf, x_indices)
    kappa = seed_state.records[0].kappa_hat if seed_state.records else 1.0
    nu = _nu(K_final.ell)
    bound = (seed_state.frame.avg_twist_inv_norm ** 2 * kappa ** 2 * schedule.delta1 ** (-2.0 * nu)
             * seed_state.residual)
    return DistanceEstimate(distance=distance, bound=bound, constant=distance / bound if bound > 0 else math.inf)
