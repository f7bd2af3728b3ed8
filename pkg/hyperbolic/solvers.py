"""
Bounded solutions of (∂_ω − A)Δ = −E on the stable and unstable bundles.

On the bundle σ write Δ = 𝔅^σ η; invariance turns the equation into
∂_ω η − Λ^σ η = F with F = −R^σ E. The bounded solution is the Duhamel
integral along the reduced cocycle Φ,

    η(θ) = ∫₀^∞ Φ_{θ−ωτ}(τ) F(θ−ωτ) dτ           (stable)
    η(θ) = −∫₀^∞ Φ_{θ+ωτ}(−τ) F(θ+ωτ) dτ         (unstable)

In θ-modes, η̂_k = ±∫ e^{∓2πik·ωτ} ŷ_k(±τ) dτ where y_ϑ(t) = Φ_ϑ(t)F(ϑ) is
evolved from every grid node ϑ at once; the τ-integral uses graded
tanh-sinh nodes and stops at T_tail with e^{−βT_tail} ≤ τ_tail.

The direct solution inverts the Galerkin matrix −𝒢 of the same equation
over |k|₁ ≤ Kθ, 𝒢 = Conv(Λ^σ) − diag(2πik·ω), and serves as the
independent oracle.
"""
import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from config import Config
from fourier.grid import grid_nodes, grid_to_modes, real_grid, resize_modes
from fourier.torus_map import k_grid, theta_mask
from hyperbolic.cocycle import bundle_tables, evolve
from hyperbolic.quadrature import graded_rule
from hyperbolic.splitting import SplittingData
from utils.errors import NoDichotomyError, TruncationResonanceError

logger = logging.getLogger(__name__)

SINGULARITY_TOLERANCE = 1e-13


class BundleSolver:
    """Duhamel quadrature and Galerkin factorization for one hyperbolic bundle."""

    def __init__(self, splitting: SplittingData, bundle: str):
        if bundle not in ("s", "u"):
            raise ValueError("bundle solvers exist for the stable and unstable bundles only")
        self.splitting = splitting
        self.bundle = bundle
        self.direction = 1.0 if bundle == "s" else -1.0
        self.ell = splitting.ell
        self.k_theta_max = splitting.k_theta_max
        self.omega = np.asarray(splitting.omega, dtype=float)
        self.size = splitting.generators[bundle].shape[-1]
        self.mask = theta_mask(self.ell, self.k_theta_max)
        self.ks = k_grid(self.ell, self.k_theta_max)[self.mask]
        self.tables = bundle_tables(splitting, bundle)
        self._generator: Optional[np.ndarray] = None
        self._lu = None
        self._rules: Dict[float, Tuple[np.ndarray, np.ndarray, float]] = {}
        self._kernels: Dict[float, np.ndarray] = {}

    @property
    def generator(self) -> np.ndarray:
        """Galerkin matrix 𝒢 over |k|₁ ≤ Kθ."""
        if self._generator is None:
            self._generator = self._assemble()
        return self._generator

    def _assemble(self) -> np.ndarray:
        kt, ell, n_b = self.k_theta_max, self.ell, self.size
        gen_modes = grid_to_modes(self.splitting.generators[self.bundle], ell, 2 * kt)
        count = self.ks.shape[0]
        out = np.zeros((count * n_b, count * n_b), dtype=np.complex128)
        for a, ka in enumerate(self.ks):
            for b, kb in enumerate(self.ks):
                diff = ka - kb
                if np.abs(diff).sum() <= 2 * kt:
                    out[a * n_b:(a + 1) * n_b, b * n_b:(b + 1) * n_b] = gen_modes[tuple(diff + 2 * kt)]
        kappa = 2j * np.pi * (self.ks @ self.omega)
        out -= np.kron(np.diag(kappa), np.eye(n_b))
        return out

    # ------------------------------------------------------------------

    def _to_vector(self, modes: np.ndarray) -> np.ndarray:
        return resize_modes(modes, self.ell, self.k_theta_max)[self.mask].ravel()

    def _to_modes(self, vector: np.ndarray) -> np.ndarray:
        out = np.zeros((2 * self.k_theta_max + 1,) * self.ell + (self.size,), dtype=np.complex128)
        out[self.mask] = vector.reshape(-1, self.size)
        return out

    def direct(self, rhs: np.ndarray) -> np.ndarray:
        """η with ∂_ωη − Λ^σ η = F, by LU factorization of −𝒢."""
        if self._lu is None:
            lu, piv = linalg.lu_factor(-self.generator, check_finite=False)
            pivots = np.abs(np.diag(lu))
            if pivots.size and pivots.min() <= SINGULARITY_TOLERANCE * pivots.max():
                raise TruncationResonanceError(
                    f"truncated equation on bundle {self.bundle} is singular; try a larger Kθ",
                    details={"k_theta_max": self.k_theta_max})
            self._lu = (lu, piv)
        return self._to_modes(linalg.lu_solve(self._lu, self._to_vector(rhs)))

    def _rule(self, tau_tail: float) -> Tuple[np.ndarray, np.ndarray, float]:
        """Graded nodes and weights on (0, T_tail]."""
        if tau_tail not in self._rules:
            rates = self.splitting.rates
            beta = rates.beta1 if self.bundle == "s" else rates.beta2
            if not beta > 0:
                raise NoDichotomyError(f"decay rate β={beta:.3e} of bundle {self.bundle} is not positive",
                                       details={"bundle": self.bundle, "beta": beta})
            t_tail = math.log(1.0 / tau_tail) / beta
            mean = self.splitting.generators[self.bundle].mean(axis=tuple(range(self.ell)))
            eigs = np.linalg.eigvals(mean) if self.size else np.zeros(0)
            first = 1.0 / max(1.0, float(np.abs(eigs).max(initial=0.0)))
            # the phases e^{2πik·ωτ} set the panel cap
            oscillation = (2.0 * np.pi * float(np.abs(self.ks @ self.omega).max(initial=0.0))
                           + float(np.abs(eigs.imag).max(initial=0.0)))
            cap = None if oscillation == 0.0 else 2.0 / oscillation
            nodes, weights = graded_rule(t_tail, first, cap)
            self._rules[tau_tail] = (nodes, weights, t_tail)
            logger.debug(f"Bundle {self.bundle}: T_tail={t_tail:.3f} with {nodes.size} nodes")
        return self._rules[tau_tail]

    def _phases(self, tau_tail: float) -> np.ndarray:
        """w_i e^{∓2πik·ωτ_i}, shape (2Kθ+1,)*ℓ + (nodes,)."""
        nodes, weights, _ = self._rule(tau_tail)
        freq = k_grid(self.ell, self.k_theta_max) @ self.omega
        return np.exp(-2j * np.pi * self.direction * np.multiply.outer(freq, nodes)) * weights

    def _kernel(self, tau_tail: float) -> np.ndarray:
        """Σ_i w_i e^{∓2πik·ωτ_i} Φ(±τ_i) for a θ-constant generator."""
        if tau_tail not in self._kernels:
            nodes = self._rule(tau_tail)[0]
            phis = evolve(self.tables.generator, self.ell, self.omega, self.bundle, np.zeros((1, self.ell)),
                          self.direction * nodes, integrator="expm")[:, 0]
            self._kernels[tau_tail] = np.einsum("...i,iab->...ab", self._phases(tau_tail), phis)
        return self._kernels[tau_tail]

    def duhamel(self, rhs: np.ndarray, tau_tail: Optional[float] = None) -> np.ndarray:
        """η by quadrature of the Duhamel integral along the cocycle, tail beyond e^{−βT} ≤ τ_tail dropped."""
        tau_tail = Config.TAU_TAIL if tau_tail is None else tau_tail
        ell, kt = self.ell, self.k_theta_max
        rhs = resize_modes(rhs, ell, kt)
        if self.size == 0:
            return self._to_modes(np.zeros(0))
        if self.tables.is_constant:
            eta = np.einsum("...ab,...b->...a", self._kernel(tau_tail), rhs)
        else:
            nodes = self._rule(tau_tail)[0]
            n = self.splitting.n_grid
            start = real_grid(rhs, ell, n).reshape(-1, self.size, 1)
            ys = evolve(self.tables.generator, ell, self.omega, self.bundle, grid_nodes(ell, n).reshape(-1, ell),
                        self.direction * nodes, initial=start)[..., 0]
            ys = np.moveaxis(ys, 0, 1).reshape((n,) * ell + (nodes.size, self.size))
            eta = np.einsum("...i,...ia->...a", self._phases(tau_tail), grid_to_modes(ys, ell, kt))
        return self.direction * eta * self.mask[..., None]

    def tail_time(self, tau_tail: Optional[float] = None) -> float:
        return self._rule(Config.TAU_TAIL if tau_tail is None else tau_tail)[2]


# ----------------------------------------------------------------------
# Fiber-level entry points

def reduced_rhs(splitting: SplittingData, bundle: str, e_modes: np.ndarray) -> np.ndarray:
    """F = −R^σ E as θ-modes of the bundle coordinates."""
    n, kt = splitting.n_grid, splitting.k_theta_max
    e_grid = real_grid(resize_modes(e_modes, splitting.ell, kt), splitting.ell, n)
    values = -np.einsum("...ab,...b->...a", splitting.bundle_dual(bundle), e_grid)
    return grid_to_modes(values, splitting.ell, kt)


def lift(splitting: SplittingData, bundle: str, eta: np.ndarray) -> np.ndarray:
    """Δ = 𝔅^σ η as θ-modes of fiber vectors."""
    n, kt = splitting.n_grid, splitting.k_theta_max
    values = np.einsum("...ab,...b->...a", splitting.bundle_basis(bundle), real_grid(eta, splitting.ell, n))
    return grid_to_modes(values, splitting.ell, kt)


def project(splitting: SplittingData, bundle: str, e_modes: np.ndarray) -> np.ndarray:
    """Π^σ E as θ-modes of fiber vectors."""
    return lift(splitting, bundle, -reduced_rhs(splitting, bundle, e_modes))


def _solve_bundle(splitting: SplittingData, bundle: str, e_modes: np.ndarray, method: Optional[str],
                  tau_tail: Optional[float], solver: Optional[BundleSolver]) -> np.ndarray:
    method = Config.HYPERBOLIC_SOLVER if method is None else method
    solver = solver or BundleSolver(splitting, bundle)
    rhs = reduced_rhs(splitting, bundle, e_modes)
    eta = solver.direct(rhs) if method == "direct" else solver.duhamel(rhs, tau_tail)
    return lift(splitting, bundle, eta)


def solve_stable(splitting: SplittingData, e_modes: np.ndarray, method: Optional[str] = None,
                 tau_tail: Optional[float] = None, solver: Optional[BundleSolver] = None) -> np.ndarray:
    """
    Bounded Δ^s with (∂_ω − A)Δ^s = −Π^s E.

    Args:
        splitting: Invariant splitting of A.
        e_modes: θ-modes of the fiber residual E (only Π^s E is used).
        method: "duhamel" or "direct" (default Config.HYPERBOLIC_SOLVER).
        tau_tail: Tail tolerance of the Duhamel quadrature.
        solver: Prebuilt BundleSolver to reuse across right-hand sides.
    """
    return _solve_bundle(splitting, "s", e_modes, method, tau_tail, solver)


def solve_unstable(splitting: SplittingData, e_modes: np.ndarray, method: Optional[str] = None,
                   tau_tail: Optional[float] = None, solver: Optional[BundleSolver] = None) -> np.ndarray:
    """Bounded Δ^u with (∂_ω − A)Δ^u = −Π^u E."""
    return _solve_bundle(splitting, "u", e_modes, method, tau_tail, solver)


def solve_hyperbolic_direct(splitting: SplittingData, e_modes: np.ndarray) -> np.ndarray:
    """Δ^s + Δ^u by direct solves on both hyperbolic bundles."""
    return (solve_stable(splitting, e_modes, method="direct")
            + solve_unstable(splitting, e_modes, method="direct"))
