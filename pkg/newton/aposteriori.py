"""
A-posteriori ledger: every measurable hypothesis of the existence theorem
evaluated at a candidate torus, and the two smallness expressions.

The constant C of the smallness conditions is not known in closed form. The
ledger uses the measured heuristic C = C_h · max‖Π^σ‖ · cond(𝔪̂), with 𝔪̂
the column-normalized center frame, so the verdict is a heuristic one.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from center.diophantine import diophantine_estimate
from center.frame import CenterFrame, build_center_frame
from center.solve import exactness_threshold, solve_center
from config import Config
from fourier.norms import sup_norm_strip
from fourier.torus_map import TorusMap
from hyperbolic.galerkin import linearize
from hyperbolic.graph_transform import compute_splitting
from hyperbolic.splitting import BUNDLES, SplittingData, invariance_defect, projection_defect
from models.base import ModelSpec
from models.fiber import to_fiber
from newton.iteration import residual_norm
from newton.schedule import Schedule
from utils.errors import SolverError

logger = logging.getLogger(__name__)

INVARIANCE_LIMIT = 1e-6


class LedgerLine(BaseModel):
    name: str
    value: float
    threshold: Optional[float] = None
    passed: bool
    note: str = ""


class AposterioriLedger(BaseModel):
    lines: List[LedgerLine] = Field(default_factory=list)
    constant: float = 1.0
    passed: bool = False
    heuristic: bool = True
    trivial: bool = False

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def line(self, name: str) -> LedgerLine:
        return next(line for line in self.lines if line.name == name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([line.model_dump() for line in self.lines])


def _upper(name: str, value: float, threshold: float, note: str = "") -> LedgerLine:
    return LedgerLine(name=name, value=value, threshold=threshold, passed=bool(value <= threshold), note=note)


def _info(name: str, value: float, note: str = "") -> LedgerLine:
    return LedgerLine(name=name, value=value, passed=bool(np.isfinite(value)), note=note)


def heuristic_constant(splitting: SplittingData, frame: CenterFrame) -> float:
    """C_h · max‖Π^σ‖ · cond of the column-normalized center frame."""
    proj = max(float(np.linalg.norm(splitting.projection(b), ord=2, axis=(-2, -1)).max()) for b in BUNDLES)
    scaled = frame.frame / np.linalg.norm(frame.frame, axis=-2, keepdims=True)
    cond = float(np.max(np.linalg.cond(scaled)))
    return splitting.rates.C_h * proj * cond


def _guarded(lines: List[LedgerLine], name: str, fn: Callable[[], LedgerLine]) -> Optional[LedgerLine]:
    try:
        line = fn()
    except SolverError as exc:
        line = LedgerLine(name=name, value=math.inf, passed=False, note=f"{type(exc).__name__}: {exc}")
    lines.append(line)
    return line


def aposteriori_check(model: ModelSpec, K: TorusMap, omega: Sequence[float], schedule: Optional[Schedule] = None,
                      splitting: Optional[SplittingData] = None) -> AposterioriLedger:
    """
    Evaluate the ledger; never raises for numerical failures, which turn into red lines.

    Args:
        model: The PDE model.
        K: Candidate embedding.
        omega: Its frequency.
        schedule: Supplies ρ₀ and δ₁ (default from Config).
        splitting: Splitting at K, computed when None.
    """
    schedule = schedule or Schedule.from_config()
    omega = np.asarray(omega, dtype=float)
    ell = K.ell
    nu = float(ell - 1) if Config.NU is None else float(Config.NU)
    rho, delta = schedule.rho0, schedule.delta1
    lines: List[LedgerLine] = []

    resid = residual_norm(model, K, omega, rho)
    kappa = diophantine_estimate(omega, nu, max(1, K.k_theta_max)).kappa_hat
    if K.is_zero() and resid == 0.0:
        lines.append(_upper("residual", 0.0, 0.0, "trivial torus"))
        lines.append(_info("kappa_hat", kappa))
        lines.append(_upper("smallness", 0.0, 1.0, "trivial torus"))
        return AposterioriLedger(lines=lines, passed=True, trivial=True)

    lines.append(_info("kappa_hat", kappa))
    lines.append(LedgerLine(name="analyticity_margin", value=math.inf, passed=True,
                            note=f"polynomial field; sup on the strip = {sup_norm_strip(K, rho):.3e}"))
    try:
        if splitting is None:
            op, split = compute_splitting(model, K, omega)
        else:
            op, split = linearize(model, K), splitting
        frame = build_center_frame(model, K, omega, split, op)
    except SolverError as exc:
        lines.append(LedgerLine(name="residual", value=resid, passed=False,
                                note=f"frames unavailable: {type(exc).__name__}: {exc}"))
        lines.append(LedgerLine(name="smallness", value=math.inf, threshold=1.0, passed=False))
        return AposterioriLedger(lines=lines, passed=False)

    rates = split.rates
    lines.append(_upper("invariance_defect", invariance_defect(op, split), INVARIANCE_LIMIT))
    lines.append(_upper("projection_defect", projection_defect(split), Config.TAU_PROJ))
    lines.append(LedgerLine(name="beta_min", value=min(rates.beta1, rates.beta2), threshold=0.0,
                            passed=bool(min(rates.beta1, rates.beta2) > 0)))
    lines.append(LedgerLine(name="center_growth", value=max(rates.beta3_plus, rates.beta3_minus),
                            threshold=min(rates.beta1, rates.beta2),
                            passed=bool(max(rates.beta3_plus, rates.beta3_minus) < min(rates.beta1, rates.beta2))))
    lines.append(_info("cond_DKtDK", frame.cond_dktdk))
    lines.append(_info("avgS_inv", frame.avg_twist_inv_norm))
    lines.append(_upper("isotropy", frame.isotropy_norm,
                        max(Config.TAU_PROJ, kappa * delta ** (-(nu + 1.0)) * resid)))

    e_modes = to_fiber(model.residual(K, omega), model.fiber_kinds)
    _guarded(lines, "exactness", lambda: _upper(
        "exactness", solve_center(frame, e_modes, omega).exactness_defect, exactness_threshold(resid)))

    constant = heuristic_constant(split, frame)
    twist = frame.avg_twist_inv_norm
    factor = constant * twist ** 2 * kappa ** 4 * delta ** (-4.0 * nu)
    smallness = factor * resid
    lines.append(_upper("residual", resid, 1.0 / factor if factor > 0 else math.inf,
                        "threshold from the smallness condition"))
    lines.append(_upper("smallness", smallness, 1.0))
    distance = constant * twist ** 2 * kappa ** 2 * delta ** (-2.0 * nu) * resid
    lines.append(_upper("distance_bound", distance, 1.0, "Newton corrections stay in the unit ball of X"))

    ledger = AposterioriLedger(lines=lines, constant=constant, passed=all(line.passed for line in lines))
    logger.info(f"A-posteriori ledger {'passed' if ledger.passed else 'failed'}: ‖E‖_Y={resid:.3e}, "
                f"smallness={smallness:.3e}, C={constant:.3e}")
    return ledger
