"""
Newton iteration state, per-step records and their JSON form.
"""
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from center.frame import CenterFrame, build_center_frame
from fourier.serialization import array_from_dict, array_to_dict, torus_from_dict, torus_to_dict
from fourier.torus_map import TorusMap
from hyperbolic.galerkin import GalerkinOperator, linearize
from hyperbolic.graph_transform import splitting_from_graphs, unperturbed_splitting
from hyperbolic.splitting import GraphPair, Rates, SplittingData
from models.base import ModelSpec
from utils.errors import ConfigError


class StepRecord(BaseModel):
    m: int
    rho: float
    delta: float
    resid_Y: float
    avgS_inv: float
    kappa_hat: float
    rates: Rates
    defects: Dict[str, float] = Field(default_factory=dict)


class RunReport(BaseModel):
    model: str
    mu: float
    omega: List[float]
    epsilon: Optional[float] = None
    seed_order: Optional[int] = None
    steps: List[StepRecord] = Field(default_factory=list)
    converged: bool = False
    K_final_ref: Optional[str] = None
    distance: Optional[float] = None
    distance_bound: Optional[float] = None
    quadratic_constant: Optional[float] = None
    heuristic: bool = False

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


@dataclass(frozen=True)
class NewtonState:
    """Iterate K_m with the frames computed at it; ω is fixed along the run."""

    m: int
    K: TorusMap
    omega: np.ndarray
    rho: float
    delta: float
    residuals: Tuple[float, ...]
    op: GalerkinOperator
    splitting: SplittingData
    frame: CenterFrame
    records: Tuple[StepRecord, ...] = ()
    rising: int = 0

    @property
    def residual(self) -> float:
        return self.residuals[-1]


def dump_state(state: NewtonState, path: str) -> None:
    """Write everything needed to continue the run bit-identically."""
    data = {
        "m": state.m,
        "K": torus_to_dict(state.K),
        "omega": [float(w).hex() for w in state.omega],
        "rho": float(state.rho).hex(),
        "delta": float(state.delta).hex(),
        "residuals": [float(r).hex() for r in state.residuals],
        "rising": state.rising,
        "records": [r.model_dump(by_alias=True) for r in state.records],
        "rates": state.splitting.rates.model_dump(by_alias=True),
        "k_theta_max": state.splitting.k_theta_max,
        "n_grid": state.splitting.n_grid,
        "graphs": {
            b: {"graph": array_to_dict(g.graph), "iterations": g.iterations, "contraction": g.contraction,
                "residual": g.residual}
            for b, g in state.splitting.graphs.items()
        },
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(data, indent=1), encoding="utf-8")


def load_state(model: ModelSpec, path: str) -> NewtonState:
    """Rebuild a dumped state; the splitting is reassembled from the stored graphs."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    K = torus_from_dict(data["K"])
    omega = np.array([float.fromhex(w) for w in data["omega"]])
    graphs = {
        b: GraphPair(b, array_from_dict(g["graph"]), int(g["iterations"]), float(g["contraction"]),
                     float(g["residual"]))
        for b, g in data["graphs"].items()
    }
    op = linearize(model, K)
    base = unperturbed_splitting(model, K.k_x_max, omega, int(data["k_theta_max"]), n_grid=int(data["n_grid"]))
    splitting = splitting_from_graphs(base, op, graphs, n_grid=int(data["n_grid"]))
    splitting = replace(splitting, rates=Rates.model_validate(data["rates"]))
    return NewtonState(
        m=int(data["m"]),
        K=K,
        omega=omega,
        rho=float.fromhex(data["rho"]),
        delta=float.fromhex(data["delta"]),
        residuals=tuple(float.fromhex(r) for r in data["residuals"]),
        op=op,
        splitting=splitting,
        frame=build_center_frame(model, K, omega, splitting, op),
        records=tuple(StepRecord.model_validate(r) for r in data["records"]),
        rising=int(data.get("rising", 0)),
    )

def save_solution(model: ModelSpec, K: TorusMap, omega: Sequence[float], path: str) -> None:
    """A torus file: the embedding with its frequency and the model it solves."""
    data = {
        "model": model.name,
        "mu": float(model.mu).hex(),
        "omega": [float(w).hex() for w in omega],
        "K": torus_to_dict(K),
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(data, indent=1), encoding="utf-8")


def load_solution(path: str) -> Tuple[str, float, TorusMap, np.ndarray]:
    """(model name, μ, K, ω) from a torus file written by save_solution."""
    file = Path(path)
    if not file.exists():
        raise ConfigError(f"torus file not found: {path}")
    try:
        data = json.loads(file.read_text(encoding="utf-8"))
        omega = np.array([float.fromhex(w) for w in data["omega"]])
        return data["model"], float.fromhex(data["mu"]), torus_from_dict(data["K"]), omega
    except (KeyError, ValueError, TypeError) as e:
        raise ConfigError(f"malformed torus file {path}: {e}") from e
