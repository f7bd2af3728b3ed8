"""
Invariant splitting X = X^s ⊕ X^c ⊕ X^u of the linearized cocycle.

All bundle data live in the coordinates of the constant frame V₀ that
diagonalizes the linear part: columns of V₀ are ordered
[stable | center | unstable]. A perturbed bundle is the graph
E_σ + E_h M^σ(θ) over its unperturbed counterpart, h being the complement
of σ, so the adapted basis is 𝔅(θ) = V₀(I + Σ_σ E_h M^σ E_σᵀ).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from fourier.grid import grid_to_modes, mode_decay_rate, omega_derivative_grid
from hyperbolic.galerkin import GalerkinOperator
from models.base import ModelSpec
from models.fiber import fiber_dimension, fiber_index, fiber_matrix
from models.spectrum import DEGENERACY_TOLERANCE
from utils.errors import DegenerateParameterError

logger = logging.getLogger(__name__)

BUNDLES = ("s", "c", "u")


class Rates(BaseModel):
    """Dichotomy constants: ‖U^s_θ(t)‖_{Y,X} ≤ C_h t^{−α₁} e^{−β₁t} and the unstable analogue."""

    model_config = ConfigDict(populate_by_name=True)

    C_h: float = Field(alias="Ch")
    beta1: float = Field(alias="b1")
    beta2: float = Field(alias="b2")
    beta3_plus: float = Field(default=0.0, alias="b3p")
    beta3_minus: float = Field(default=0.0, alias="b3m")
    alpha1: float = Field(alias="a1")
    alpha2: float = Field(alias="a2")
    fit_residual: float = 0.0


@dataclass(frozen=True)
class GraphPair:
    """
    Graph M^σ of one perturbed bundle over the unperturbed one, as θ-modes of n_h × n_σ matrices.

    evolved is the table Nev of the bundle evolution N_θ(t) on the θ-grid at
    the signed times, shape (n,)*ℓ + (len(times), n_σ, n_σ).
    """

    bundle: str
    graph: np.ndarray
    iterations: int = 0
    contraction: float = 0.0
    residual: float = 0.0
    horizon: float = 0.0
    times: Optional[np.ndarray] = None
    evolved: Optional[np.ndarray] = None


@dataclass(frozen=True)
class UnperturbedFrame:
    """Spectral frame of the constant linear part on the fiber."""

    frame: np.ndarray
    normal_form: np.ndarray
    dims: Tuple[int, int, int]
    hyperbolic_j: Tuple[int, ...]
    center_j: Tuple[int, ...]
    decay_rates: Tuple[float, ...]


@dataclass(frozen=True)
class SplittingData:
    """Adapted basis, its inverse and the reduced generators on a uniform θ-grid."""

    model_name: str
    omega: np.ndarray
    k_theta_max: int
    k_x_max: int
    dims: Tuple[int, int, int]
    frame: np.ndarray
    normal_form: np.ndarray
    basis: np.ndarray
    dual: np.ndarray
    generators: Dict[str, np.ndarray]
    rates: Rates
    graphs: Dict[str, GraphPair] = field(default_factory=dict)

    @property
    def ell(self) -> int:
        return len(self.omega)

    @property
    def n_grid(self) -> int:
        return self.basis.shape[0]

    @property
    def dimension(self) -> int:
        return self.basis.shape[-1]

    @property
    def interpolation_radius(self) -> int:
        return (self.n_grid - 1) // 2

    def bundle_slice(self, bundle: str) -> slice:
        ns, nc, _ = self.dims
        return {"s": slice(0, ns), "c": slice(ns, ns + nc), "u": slice(ns + nc, self.dimension)}[bundle]

    def complement(self, bundle: str) -> np.ndarray:
        keep = np.ones(self.dimension, dtype=bool)
        keep[self.bundle_slice(bundle)] = False
        return np.nonzero(keep)[0]

    def bundle_basis(self, bundle: str) -> np.ndarray:
        return self.basis[..., :, self.bundle_slice(bundle)]

    def bundle_dual(self, bundle: str) -> np.ndarray:
        return self.dual[..., self.bundle_slice(bundle), :]

    def projection(self, bundle: str) -> np.ndarray:
        """Π^σ on the grid, shape (n,)*ℓ + (D, D)."""
        return np.einsum("...ab,...bc->...ac", self.bundle_basis(bundle), self.bundle_dual(bundle))

    def modes(self, values: np.ndarray) -> np.ndarray:
        """Fourier interpolation table of any grid quantity of this splitting."""
        return grid_to_modes(values, self.ell, self.interpolation_radius)

    def max_contraction(self) -> float:
        return max((g.contraction for g in self.graphs.values()), default=0.0)


class SplittingReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    rank_c: int
    rates: Rates
    invariance_defect: float
    proj_defect: float
    strip_width: Optional[float] = None
    contraction: float = 0.0
    horizon: float = 0.0
    iterations: Dict[str, int] = Field(default_factory=dict)
    refinement: Optional[float] = None

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def unperturbed_frame(model: ModelSpec, k_x_max: int) -> UnperturbedFrame:
    """
    Eigenvectors of the per-j fiber blocks [[0, a], [b, 0]].

    Hyperbolic blocks (ab > 0) contribute (a, ∓λ)/‖·‖ with λ = √(ab) to the
    stable and unstable groups; center blocks keep the two fiber unit
    vectors and their rotation block.
    """
    dim = fiber_dimension(k_x_max)
    stable: List[np.ndarray] = []
    unstable: List[np.ndarray] = []
    center: List[np.ndarray] = []
    hyperbolic_j, center_j, rates = [], [], []
    for j in range(1, k_x_max + 1):
        gap = model.resonance_gap(j)
        if abs(gap) <= DEGENERACY_TOLERANCE:
            raise DegenerateParameterError(f"4π²μj² = 1 at j={j}: the splitting is degenerate",
                                           details={"j": j, "mu": model.mu})
        i0, i1 = fiber_index(j, 0), fiber_index(j, 1)
        a, b = model.fiber_block(j)[0, 1], model.fiber_block(j)[1, 0]
        if gap > 0:
            for i in (i0, i1):
                e = np.zeros(dim)
                e[i] = 1.0
                center.append(e)
            center_j.append(j)
            continue
        lam = math.sqrt(a * b)
        for sign, group in ((-1.0, stable), (1.0, unstable)):
            v = np.zeros(dim)
            v[i0], v[i1] = a, sign * lam
            group.append(v / np.linalg.norm(v))
        hyperbolic_j.append(j)
        rates.append(lam)
    frame = np.column_stack(stable + center + unstable)
    normal_form = np.linalg.solve(frame, fiber_matrix(model, k_x_max) @ frame)
    ns, nc = len(stable), len(center)
    # the normal form is exactly block diagonal; drop round-off couplings
    cleaned = np.zeros_like(normal_form)
    cleaned[:ns, :ns] = np.diag(-np.asarray(rates))
    cleaned[ns + nc:, ns + nc:] = np.diag(np.asarray(rates))
    cleaned[ns:ns + nc, ns:ns + nc] = normal_form[ns:ns + nc, ns:ns + nc]
    return UnperturbedFrame(frame, cleaned, (ns, nc, len(unstable)), tuple(hyperbolic_j), tuple(center_j),
                            tuple(rates))


# ----------------------------------------------------------------------
# Diagnostics

def projection_defect(splitting: SplittingData) -> float:
    """max over nodes of ‖ΣΠ − I‖ and ‖Π^aΠ^b − δ_{ab}Π^a‖."""
    projections = {b: splitting.projection(b) for b in BUNDLES}
    eye = np.eye(splitting.dimension)
    worst = float(np.abs(sum(projections.values()) - eye).max())
    for a in BUNDLES:
        for b in BUNDLES:
            prod = np.einsum("...ij,...jk->...ik", projections[a], projections[b])
            target = projections[a] if a == b else 0.0
            worst = max(worst, float(np.abs(prod - target).max()))
    return worst


def center_rank(splitting: SplittingData) -> int:
    """Numerical rank of Π^c at the first node."""
    node = (0,) * splitting.ell
    return int(np.linalg.matrix_rank(splitting.projection("c")[node], tol=1e-8))


def invariance_defect(op: GalerkinOperator, splitting: SplittingData) -> float:
    """
    Relative defect of A𝔅^σ − ∂_ω𝔅^σ − 𝔅^σΛ^σ over the grid and the three bundles.

    It vanishes exactly when every bundle is invariant and Λ^σ is the
    reduced generator.
    """
    n = splitting.n_grid
    a_grid = op.grid(n)
    scale = max(1.0, float(np.linalg.norm(a_grid, axis=(-2, -1)).max()))
    worst = 0.0
    for bundle in BUNDLES:
        basis = splitting.bundle_basis(bundle)
        if basis.shape[-1] == 0:
            continue
        d_basis = omega_derivative_grid(basis, splitting.ell, splitting.omega, splitting.interpolation_radius)
        defect = (np.einsum("...ab,...bc->...ac", a_grid, basis) - d_basis
                  - np.einsum("...ab,...bc->...ac", basis, splitting.generators[bundle]))
        worst = max(worst, float(np.linalg.norm(defect, axis=(-2, -1)).max()))
    return worst / scale


def fitted_strip_width(splitting: SplittingData) -> float:
    """Smallest decay rate ρ̂ of the projection Fourier coefficients; +inf for θ-independent projections."""
    widths = [mode_decay_rate(splitting.modes(splitting.projection(b)), splitting.ell) for b in BUNDLES]
    return float(min(widths))


def splitting_report(splitting: SplittingData, op: Optional[GalerkinOperator] = None) -> SplittingReport:
    width = fitted_strip_width(splitting)
    return SplittingReport(
        rank_c=center_rank(splitting),
        rates=splitting.rates,
        invariance_defect=0.0 if op is None else invariance_defect(op, splitting),
        proj_defect=projection_defect(splitting),
        strip_width=None if math.isinf(width) else width,
        contraction=splitting.max_contraction(),
        horizon=max((g.horizon for g in splitting.graphs.values()), default=0.0),
        iterations={b: g.iterations for b, g in splitting.graphs.items()},
    )
