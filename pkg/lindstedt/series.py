"""
Lindstedt series containers and their JSON form.
"""
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from fourier.serialization import torus_from_dict, torus_to_dict
from fourier.torus_map import TorusMap


@dataclass(frozen=True)
class LindstedtSeries:
    """
    Terms U_1..U_N of the formal expansion and the frequency corrections.

    For the scalar model the terms are 1-component tables of the position u;
    the velocity is rebuilt when a seed is assembled. For the system the
    terms are 2-component (u, v) tables.
    """

    model_name: str
    mu: float
    omega0: np.ndarray
    center_modes: Tuple[int, ...]
    amplitudes: np.ndarray
    companion: Optional[np.ndarray] = None
    terms: Tuple[TorusMap, ...] = ()
    # frequency_terms[n − 1] = ωⁿ, n = 1..N−1
    frequency_terms: Tuple[np.ndarray, ...] = ()
    # max |kernel component of R_m| before matching, m = 2..N
    kernel_components: Tuple[float, ...] = ()
    min_abs_multiplier: float = float("inf")

    @property
    def order(self) -> int:
        return len(self.terms)

    @property
    def ell(self) -> int:
        return len(self.omega0)

    @property
    def max_center_j(self) -> int:
        return max(self.center_modes)

    def frequency_at(self, epsilon: float) -> np.ndarray:
        """ω_ε = ω⁰ + Σ εⁿωⁿ over the computed corrections."""
        omega = np.array(self.omega0, dtype=float)
        for n, w in enumerate(self.frequency_terms, start=1):
            omega = omega + epsilon ** n * w
        return omega

    def extended(self, term: TorusMap, correction: np.ndarray, kernel_component: float,
                 min_abs_multiplier: float) -> "LindstedtSeries":
        return replace(
            self,
            terms=self.terms + (term,),
            frequency_terms=self.frequency_terms + (np.asarray(correction, dtype=float),),
            kernel_components=self.kernel_components + (float(kernel_component),),
            min_abs_multiplier=min(self.min_abs_multiplier, float(min_abs_multiplier)),
        )


class ResonanceRecord(BaseModel):
    k: List[int]
    j: int
    mu: float
    F: float


class NonresonanceReport(BaseModel):
    """Outcome of the multiplier scan over 1 < |k|₁ ≤ N."""

    passed: bool
    order: int
    min_abs_F: Optional[float] = None
    argmin_k: Optional[List[int]] = None
    argmin_j: Optional[int] = None
    resonances: List[ResonanceRecord] = Field(default_factory=list)


class LindstedtReport(BaseModel):
    model: str
    mu: float
    order: int
    omega0: List[float]
    amplitudes: List[float]
    companion: Optional[List[float]] = None
    frequency_terms: List[List[float]] = Field(default_factory=list)
    kernel_components: List[float] = Field(default_factory=list)
    twist_coefficient: Optional[List[float]] = None
    frequency_combination: Optional[float] = None
    fitted_slope: Optional[float] = None
    nonresonance: Optional[NonresonanceReport] = None


def series_to_dict(series: LindstedtSeries) -> Dict[str, Any]:
    return {
        "model": series.model_name,
        "mu": float(series.mu).hex(),
        "omega0": [float(w).hex() for w in series.omega0],
        "center_modes": list(series.center_modes),
        "amplitudes": [float(a).hex() for a in series.amplitudes],
        "companion": None if series.companion is None else [float(b).hex() for b in series.companion],
        "terms": [torus_to_dict(t) for t in series.terms],
        "frequency_terms": [[float(w).hex() for w in row] for row in series.frequency_terms],
        "kernel_components": list(series.kernel_components),
        "min_abs_multiplier": series.min_abs_multiplier,
    }


def series_from_dict(data: Dict[str, Any]) -> LindstedtSeries:
    def vec(values: List[str]) -> np.ndarray:
        return np.array([float.fromhex(v) for v in values])

    return LindstedtSeries(
        model_name=data["model"],
        mu=float.fromhex(data["mu"]),
        omega0=vec(data["omega0"]),
        center_modes=tuple(int(j) for j in data["center_modes"]),
        amplitudes=vec(data["amplitudes"]),
        companion=None if data.get("companion") is None else vec(data["companion"]),
        terms=tuple(torus_from_dict(t) for t in data["terms"]),
        frequency_terms=tuple(vec(row) for row in data["frequency_terms"]),
        kernel_components=tuple(float(v) for v in data.get("kernel_components", [])),
        min_abs_multiplier=float(data.get("min_abs_multiplier", float("inf"))),
    )


def series_json(series: LindstedtSeries) -> str:
    return json.dumps(series_to_dict(series), indent=1)


def save_series(series: LindstedtSeries, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(series_json(series), encoding="utf-8")


def load_series(path: str) -> LindstedtSeries:
    return series_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
