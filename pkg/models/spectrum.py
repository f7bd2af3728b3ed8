"""
Linear analysis of the models: dispersion, center/hyperbolic classification
and the frequencies of the center modes.

Eigenvalues are always taken from the linear blocks themselves.
"""
import math
from typing import List, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from models.base import ModelSpec
from utils.errors import ConfigError, DegenerateParameterError, StructuralError

# |1 − 4π²μj²| below this is the degenerate boundary σ = 0
DEGENERACY_TOLERANCE = 1e-12
MAX_TORUS_DIMENSION = 3


class ModeRecord(BaseModel):
    j: int
    sigma_re: float
    sigma_im: float
    klass: str = Field(alias="class", description="center, stable or unstable")

    model_config = {"populate_by_name": True}


class SpectrumReport(BaseModel):
    """Classification of the harmonics j = 1..Kx of the linear operator."""

    model: str
    mu: float
    ell: int
    center_modes: List[int] = Field(default_factory=list)
    omega0: List[float] = Field(default_factory=list, description="cycles per unit time")
    omega0_angular: List[float] = Field(default_factory=list, description="Im σ₊ of each center mode")
    modes: List[ModeRecord] = Field(default_factory=list)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, by_alias=True)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"j": m.j, "re_sigma": m.sigma_re, "im_sigma": m.sigma_im, "class": m.klass} for m in self.modes]
        )

    @property
    def largest_center_j(self) -> int:
        return max(self.center_modes, default=0)


def dispersion(model: ModelSpec, j: int) -> Tuple[complex, complex]:
    """
    Eigenvalues (σ₊, σ₋) of linear_block(j).

    σ₊ is the eigenvalue with the larger real part; for a center pair it is
    the one with positive imaginary part.
    """
    vals = np.linalg.eigvals(model.linear_block(j))
    # the blocks are [[0, a], [b, 0]]; clean the round-off of the conjugate pair
    vals = np.where(np.abs(vals.real) < 1e-14 * max(1.0, float(np.abs(vals).max())), 1j * vals.imag, vals)
    ordered = sorted(vals, key=lambda s: (round(s.real, 12), s.imag), reverse=True)
    return complex(ordered[0]), complex(ordered[1])


def classify(model: ModelSpec, j: int) -> str:
    gap = model.resonance_gap(j)
    if abs(gap) <= DEGENERACY_TOLERANCE:
        raise DegenerateParameterError(
            f"μ={model.mu!r} is degenerate: 4π²μj² = 1 at j={j}",
            details={"j": j, "mu": model.mu},
        )
    return "center" if gap > 0 else "hyperbolic"


def center_analysis(model: ModelSpec, k_x_max: int = 0) -> SpectrumReport:
    """
    Count the center pairs and list the classification of every j ≤ max(Kx, jc+1).

    The center harmonics are the j ≥ 1 with 1 − 4π²μj² > 0; they are a finite
    initial segment since the gap is decreasing in j.
    """
    j_center = int(math.floor(1.0 / (2.0 * math.pi * math.sqrt(model.mu)))) + 1
    j_top = max(k_x_max, j_center + 1)
    modes, centers, freqs = [], [], []
    for j in range(1, j_top + 1):
        kind = classify(model, j)
        plus, minus = dispersion(model, j)
        if kind == "center":
            centers.append(j)
            freqs.append(abs(plus.imag))
            modes.append(ModeRecord(j=j, sigma_re=0.0, sigma_im=abs(plus.imag), klass="center"))
        else:
            modes.append(ModeRecord(j=j, sigma_re=plus.real, sigma_im=0.0, klass="unstable"))
            modes.append(ModeRecord(j=j, sigma_re=minus.real, sigma_im=0.0, klass="stable"))
    return SpectrumReport(
        model=model.name,
        mu=model.mu,
        ell=len(centers),
        center_modes=centers,
        omega0=[f / (2.0 * math.pi) for f in freqs],
        omega0_angular=freqs,
        modes=modes,
    )


def require_center(report: SpectrumReport, k_x_max: int) -> SpectrumReport:
    """Reject settings that leave no torus to compute or a truncation that is too small."""
    if report.ell == 0:
        raise DegenerateParameterError(f"μ={report.mu!r} has no center modes; there is no torus to compute")
    if report.ell > MAX_TORUS_DIMENSION:
        raise StructuralError(f"{report.ell} center modes; tori of dimension > {MAX_TORUS_DIMENSION} are not supported")
    needed = 2 * report.largest_center_j + 2
    if k_x_max < needed:
        raise ConfigError(f"k_x = {k_x_max} is too small: need at least {needed} for {report.ell} center modes")
    return report


def center_eigenvector(model: ModelSpec, j: int) -> np.ndarray:
    """Eigenvector (1, σ₊/a₀₁) of the j-block for σ₊."""
    plus, _ = dispersion(model, j)
    a01 = model.linear_block(j)[0, 1]
    return np.array([1.0, plus / a01], dtype=np.complex128)


def ill_posedness_witness(model: ModelSpec, k_x_max: int) -> Tuple[pd.DataFrame, float]:
    """
    max Re σ₊ per harmonic and the fitted growth exponent in j.

    A diagnostic only; both models grow like j².
    """
    rows = []
    for j in range(1, k_x_max + 1):
        plus, _ = dispersion(model, j)
        rows.append({"j": j, "max_re_sigma": max(plus.real, 0.0)})
    frame = pd.DataFrame(rows)
    growing = frame[frame["max_re_sigma"] > 0]
    tail = growing.iloc[len(growing) // 2:]
    if len(tail) < 2:
        return frame, float("nan")
    slope = np.polyfit(np.log(tail["j"]), np.log(tail["max_re_sigma"]), 1)[0]
    return frame, float(slope)


def spectrum_report_json(report: SpectrumReport) -> str:
    """JSON {mu, ell, omega0, modes:[{j, sigma_re, sigma_im, class}]} plus the model name."""
    return report.to_json()
