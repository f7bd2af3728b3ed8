"""
Splitting of the unperturbed operator and its update under a change of A.

In the frame V₀ the operator is G(θ) = Λ₀ + B(θ). The bundle σ is the graph
of M^σ : E_σ → E_h over its unperturbed counterpart, h the complement of σ,
and the evolution on the new bundle is w(t) = N_θ(t) w(0). The pair (M, N)
is the fixed point of

    𝒯₂:  N_θ(t) = e^{Λ_σ t} + ∫₀ᵗ e^{Λ_σ(t−τ)} (B_σσ + B_σh M)(θ+ωτ) N_θ(τ) dτ
    𝒯₁:  M_g(θ) = e^{−dΛ_g T} M_g(θ+dωT) N_θ(dT)
                   − d ∫₀ᵀ e^{−dΛ_g t} (B_gσ + B_gh M)(θ+dωt) N_θ(dt) dt

for each row group g of h, with d = +1 on the rows of the bundles less
stable than σ and d = −1 on the more stable ones. For a given M, 𝒯₂ is
solved by evolving its differential form from every grid node at once; 𝒯₁
uses graded quadrature on (0, T]. The horizon T makes C_h T^{−α}e^{−βT}
about 10⁻², which bounds the contraction of the pair.

The Sylvester form of the same invariance equation,

    ∂_ω M − Λ_h M + M Λ_σ = B_hσ + B_hh M − M B_σσ − M B_σh M,

is diagonal per θ-mode and supplies the starting point of the iteration.
The reduced generator of the bundle is Λ^σ = Λ_σ + B_σσ + B_σh M^σ.
"""
import logging
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from config import Config
from fourier.grid import default_grid_size, grid_nodes, grid_to_modes, real_grid, resize_modes, translated_grid
from fourier.torus_map import TorusMap, k_grid
from hyperbolic.cocycle import evolve
from hyperbolic.galerkin import GalerkinOperator, linearize
from hyperbolic.quadrature import graded_rule
from hyperbolic.rates import dispersion_rates, horizon, rate_estimate
from hyperbolic.splitting import BUNDLES, GraphPair, Rates, SplittingData, unperturbed_frame
from models.base import ModelSpec
from models.spectrum import center_analysis
from utils.errors import PerturbationTooLargeError, StructuralError, TruncationResonanceError

logger = logging.getLogger(__name__)

MAX_GRAPH_ITERATIONS = 200
MAX_TRANSFER_ITERATIONS = 40
DIVERGENCE_FACTOR = 1e3
# quadrature nodes per einsum block in 𝒯₁
NODE_CHUNK = 64
TRANSFER_ORDER = 12
TRANSFER_STEP = 0.25


def _grid_size(k_theta_max: int, n_grid: Optional[int] = None) -> int:
    n = n_grid or Config.N_GRID or 0
    return max(n, default_grid_size(k_theta_max))


def unperturbed_splitting(model: ModelSpec, k_x_max: int, omega: Optional[Sequence[float]] = None,
                          k_theta_max: int = 0, n_grid: Optional[int] = None) -> SplittingData:
    """
    θ-independent spectral splitting of the linear part.

    Args:
        model: The PDE model.
        k_x_max: Number of retained harmonics.
        omega: Frequency of the torus (default: the linear frequencies ω⁰).
        k_theta_max: θ radius used by later updates.
        n_grid: Grid points per angle (default 4Kθ+4 or Config.N_GRID).
    """
    frame = unperturbed_frame(model, k_x_max)
    if omega is None:
        omega = center_analysis(model).omega0
    omega = np.asarray(omega, dtype=float)
    ell = omega.size
    if frame.dims[1] != 2 * ell:
        raise StructuralError(f"center fiber of dimension {frame.dims[1]} cannot carry an ℓ={ell} torus",
                              details={"center_j": list(frame.center_j)})
    n = _grid_size(k_theta_max, n_grid)
    shape = (n,) * ell
    dim = frame.frame.shape[0]
    ns, nc, _ = frame.dims
    slices = {"s": slice(0, ns), "c": slice(ns, ns + nc), "u": slice(ns + nc, dim)}
    generators = {b: np.broadcast_to(frame.normal_form[slices[b], slices[b]],
                                     shape + (slices[b].stop - slices[b].start,) * 2).copy()
                  for b in BUNDLES}
    graphs = {b: GraphPair(b, np.zeros((2 * k_theta_max + 1,) * ell + (dim - generators[b].shape[-1],
                                                                     generators[b].shape[-1])))
              for b in BUNDLES}
    beta = float(min(frame.decay_rates))
    provisional = Rates(C_h=1.0, beta1=beta, beta2=beta, alpha1=0.5, alpha2=0.5)
    splitting = SplittingData(
        model_name=model.name,
        omega=omega,
        k_theta_max=k_theta_max,
        k_x_max=k_x_max,
        dims=frame.dims,
        frame=frame.frame,
        normal_form=frame.normal_form,
        basis=np.broadcast_to(frame.frame, shape + (dim, dim)).copy(),
        dual=np.broadcast_to(np.linalg.inv(frame.frame), shape + (dim, dim)).copy(),
        generators=generators,
        rates=provisional,
        graphs=graphs,
    )
    return replace(splitting, rates=dispersion_rates(model, splitting, frame.decay_rates))


def _block(values: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    return values[..., rows[:, None], cols[None, :]]


def _sylvester_graph(bundle: str, perturbation: np.ndarray, normal_form: np.ndarray, rows: np.ndarray,
                     cols: np.ndarray, omega: np.ndarray, k_theta_max: int, warm: np.ndarray,
                     tol: float, max_iter: int) -> np.ndarray:
    """Fixed point of the Sylvester form of the invariance equation for the graph of one bundle."""
    ell = omega.size
    n = perturbation.shape[0]
    b_hs = _block(perturbation, rows, cols)
    b_hh = _block(perturbation, rows, rows)
    b_ss = _block(perturbation, cols, cols)
    b_sh = _block(perturbation, cols, rows)
    eig_h, vec_h = linalg.eig(normal_form[np.ix_(rows, rows)])
    eig_s, vec_s = linalg.eig(normal_form[np.ix_(cols, cols)])
    inv_h, inv_s = np.linalg.inv(vec_h), np.linalg.inv(vec_s)
    kappa = 2j * np.pi * (k_grid(ell, k_theta_max) @ omega)
    denom = kappa[..., None, None] - eig_h[:, None] + eig_s[None, :]
    scale = max(1.0, float(np.abs(eig_h).max(initial=0.0)), float(np.abs(eig_s).max(initial=0.0)))
    if float(np.abs(denom).min(initial=np.inf)) <= 1e-12 * scale:
        raise TruncationResonanceError(f"Sylvester operator of bundle {bundle} is singular on the truncation")

    graph = warm
    first, prev, growing = None, None, 0
    for it in range(1, max_iter + 1):
        m_grid = real_grid(graph, ell, n)
        rhs = (b_hs + b_hh @ m_grid - m_grid @ b_ss - m_grid @ b_sh @ m_grid)
        rhs_modes = grid_to_modes(rhs, ell, k_theta_max)
        updated = vec_h @ ((inv_h @ rhs_modes @ vec_s) / denom) @ inv_s
        diff = float(np.abs(updated - graph).max())
        size = float(np.abs(updated).max(initial=0.0))
        graph = updated
        if not np.isfinite(diff):
            raise PerturbationTooLargeError(f"graph equation of bundle {bundle} overflowed")
        first = diff if first is None else first
        if prev is not None and prev > 100.0 * tol * max(1.0, size):
            ratio = diff / prev
            growing = growing + 1 if ratio >= 1.0 else 0
            if growing >= 2 or diff > DIVERGENCE_FACTOR * first:
                raise PerturbationTooLargeError(
                    f"graph equation of bundle {bundle} is not contracting (ratio {ratio:.3f})",
                    details={"bundle": bundle, "ratio": ratio, "iteration": it})
        prev = diff
        if diff <= tol * max(1.0, size):
            logger.debug(f"Bundle {bundle}: Sylvester start after {it} iterations")
            return graph
    raise PerturbationTooLargeError(f"graph equation of bundle {bundle} did not reach {tol:.1e} "
                                    f"in {max_iter} iterations", details={"bundle": bundle})


class TransferMap:
    """
    The maps 𝒯₁, 𝒯₂ of one bundle on the θ-grid of the perturbation.

    Calling it with the θ-modes of M returns the θ-modes of 𝒯₁(M, N(M)),
    the signed times and the table N(M) on the grid at those times.
    """

    def __init__(self, bundle: str, base: SplittingData, perturbation: np.ndarray, k_theta_max: int,
                 t_horizon: float):
        dim = base.dimension
        self.bundle = bundle
        self.ell = base.ell
        self.omega = np.asarray(base.omega, dtype=float)
        self.k_theta_max = k_theta_max
        self.n = perturbation.shape[0]
        self.horizon = t_horizon
        cols = np.arange(dim)[base.bundle_slice(bundle)]
        rows = base.complement(bundle)
        normal_form = base.normal_form
        self.lam = normal_form[np.ix_(cols, cols)]
        self.b_ss, self.b_sh = _block(perturbation, cols, cols), _block(perturbation, cols, rows)
        self.b_hs, self.b_hh = _block(perturbation, rows, cols), _block(perturbation, rows, rows)

        rank = BUNDLES.index(bundle)
        self.groups: List[Tuple[np.ndarray, float]] = []
        for sign in (1.0, -1.0):
            members = [r for r in BUNDLES if r != bundle and (BUNDLES.index(r) > rank) == (sign > 0)]
            inside = np.zeros(rows.size, dtype=bool)
            for r in members:
                inside |= np.isin(rows, np.arange(dim)[base.bundle_slice(r)])
            if inside.any():
                self.groups.append((np.nonzero(inside)[0], sign))

        eigs = np.linalg.eigvals(normal_form)
        first = 1.0 / max(1.0, float(np.abs(eigs).max()))
        oscillation = (2.0 * np.pi * k_theta_max * float(np.abs(self.omega).sum())
                       + float(np.abs(eigs.imag).max(initial=0.0)))
        cap = None if oscillation == 0.0 else 2.0 / oscillation
        self.nodes, self.weights = graded_rule(t_horizon, first, cap, TRANSFER_ORDER, TRANSFER_STEP)
        self.times = np.append(self.nodes, t_horizon)
        self.thetas = grid_nodes(self.ell, self.n).reshape(-1, self.ell)
        # e^{−dΛ_g t} at the nodes and at T
        self.propagators = [linalg.expm(-sign * self.times[:, None, None] * normal_form[np.ix_(rows[pos], rows[pos])])
                            for pos, sign in self.groups]

    @property
    def signs(self) -> List[float]:
        return sorted({sign for _, sign in self.groups})

    def evolved(self, graph: np.ndarray) -> Dict[float, np.ndarray]:
        """𝒯₂ solved for the given M: N_θ(±t) per direction, shape (n,)*ℓ + (len(times), n_σ, n_σ)."""
        ell, n = self.ell, self.n
        m_grid = real_grid(resize_modes(graph, ell, self.k_theta_max), ell, n)
        generator = grid_to_modes(self.lam + self.b_ss + self.b_sh @ m_grid, ell, (n - 1) // 2)
        out = {}
        for sign in self.signs:
            table = evolve(generator, ell, self.omega, self.bundle, self.thetas, sign * self.times)
            out[sign] = np.moveaxis(table, 0, 1).reshape((n,) * ell + table.shape[:1] + table.shape[2:])
        return out

    def __call__(self, graph: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        ell, n, kt = self.ell, self.n, self.k_theta_max
        graph = resize_modes(graph, ell, kt)
        m_grid = real_grid(graph, ell, n)
        h_modes = grid_to_modes(self.b_hs + self.b_hh @ m_grid, ell, (n - 1) // 2)
        evolved = self.evolved(graph)
        updated = np.zeros(m_grid.shape)
        for (pos, sign), props in zip(self.groups, self.propagators):
            table = evolved[sign]
            m_end = translated_grid(graph[..., pos, :], ell, self.omega, [sign * self.horizon], n)[..., 0, :, :]
            value = props[-1] @ m_end @ table[..., -1, :, :]
            integral = np.zeros(value.shape)
            for start in range(0, self.nodes.size, NODE_CHUNK):
                sl = slice(start, min(start + NODE_CHUNK, self.nodes.size))
                h_t = translated_grid(h_modes[..., pos, :], ell, self.omega, sign * self.nodes[sl], n)
                integral += np.einsum("i,iab,...ibc,...icd->...ad", self.weights[sl], props[sl], h_t,
                                      table[..., sl, :, :], optimize=True)
            updated[..., pos, :] = value - sign * integral
        times = np.concatenate([sign * self.times for sign in self.signs])
        table = np.concatenate([evolved[sign] for sign in self.signs], axis=ell)
        return grid_to_modes(updated, ell, kt), times, table


def _iterate_transfer(transfer: TransferMap, start: np.ndarray, tol: float,
                      max_iter: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int, List[float], float]:
    """Picard iteration of (𝒯₁, 𝒯₂) from start to a step below tol."""
    bundle = transfer.bundle
    graph = start
    first, prev, ratios, growing = None, None, [], 0
    for it in range(1, max_iter + 1):
        updated, times, table = transfer(graph)
        diff = float(np.abs(updated - graph).max(initial=0.0))
        size = float(np.abs(updated).max(initial=0.0))
        graph = updated
        if not np.isfinite(diff):
            raise PerturbationTooLargeError(f"graph transform of bundle {bundle} overflowed")
        first = diff if first is None else first
        if prev is not None and prev > 100.0 * tol * max(1.0, size):
            ratio = diff / prev
            ratios.append(ratio)
            growing = growing + 1 if ratio >= 1.0 else 0
            if growing >= 2 or diff > DIVERGENCE_FACTOR * first:
                raise PerturbationTooLargeError(
                    f"graph transform of bundle {bundle} is not contracting (ratio {ratio:.3f})",
                    details={"bundle": bundle, "ratio": ratio, "iteration": it})
        prev = diff
        if diff <= tol * max(1.0, size):
            return graph, times, table, it, ratios, diff
    raise PerturbationTooLargeError(f"graph transform of bundle {bundle} did not reach {tol:.1e} "
                                    f"in {max_iter} iterations", details={"bundle": bundle})


def _secant_contraction(transfer: TransferMap, graph: np.ndarray, other: np.ndarray, tol: float) -> float:
    """‖𝒯₁(M') − M‖/‖M' − M‖ at the fixed point M, along other − M or a constant direction."""
    size = max(1.0, float(np.abs(graph).max(initial=0.0)))
    direction = other - graph
    if float(np.abs(direction).max(initial=0.0)) <= 100.0 * tol * size:
        direction = np.zeros_like(graph)
        direction[(transfer.k_theta_max,) * transfer.ell] = 1e-3 * size
    image = transfer(graph + direction)[0]
    return float(np.abs(image - graph).max()) / float(np.abs(direction).max())


def _transfer_graph(bundle: str, base: SplittingData, perturbation: np.ndarray, k_theta_max: int,
                    t_horizon: float, tol: float, max_iter: int, accelerate: bool) -> GraphPair:
    ell = base.ell
    cols = np.arange(base.dimension)[base.bundle_slice(bundle)]
    rows = base.complement(bundle)
    warm = np.zeros((2 * k_theta_max + 1,) * ell + (rows.size, cols.size), dtype=np.complex128)
    previous = base.graphs.get(bundle)
    if previous is not None and previous.graph.shape[ell:] == warm.shape[ell:]:
        warm = resize_modes(previous.graph, ell, k_theta_max)
    if rows.size == 0 or cols.size == 0:
        return GraphPair(bundle, warm, horizon=t_horizon)

    transfer = TransferMap(bundle, base, perturbation, k_theta_max, t_horizon)
    start = warm
    if accelerate:
        start = _sylvester_graph(bundle, perturbation, base.normal_form, rows, cols, base.omega, k_theta_max,
                                 warm, tol, MAX_GRAPH_ITERATIONS)
    graph, times, table, iterations, ratios, residual = _iterate_transfer(transfer, start, tol, max_iter)
    contraction = max(ratios) if ratios else _secant_contraction(transfer, graph, warm, tol)
    if contraction >= 1.0:
        raise PerturbationTooLargeError(f"graph transform of bundle {bundle} has contraction factor "
                                        f"{contraction:.3f} ≥ 1", details={"bundle": bundle,
                                                                            "contraction": contraction})
    logger.debug(f"Bundle {bundle}: transfer converged in {iterations} iterations (factor {contraction:.3e})")
    return GraphPair(bundle, graph, iterations, contraction, residual, t_horizon, times, table)


def _perturbation(base: SplittingData, op: GalerkinOperator, n: int) -> np.ndarray:
    """B = V₀⁻¹ A V₀ − Λ₀ on the grid."""
    return np.linalg.inv(base.frame) @ op.grid(n) @ base.frame - base.normal_form


def splitting_from_graphs(base: SplittingData, op: GalerkinOperator, graphs: Dict[str, GraphPair],
                          n_grid: Optional[int] = None) -> SplittingData:
    """
    Adapted basis and reduced generators of op for given bundle graphs.

    The rates of base are carried over unchanged.
    """
    ell, kt = base.ell, op.k_theta_max
    n = _grid_size(kt, n_grid)
    perturbation = _perturbation(base, op, n)
    normal_form = base.normal_form
    dim = base.frame.shape[0]
    adapted = np.broadcast_to(np.eye(dim), (n,) * ell + (dim, dim)).copy()
    generators: Dict[str, np.ndarray] = {}
    for bundle in BUNDLES:
        cols = np.arange(dim)[base.bundle_slice(bundle)]
        rows = base.complement(bundle)
        m_grid = real_grid(resize_modes(graphs[bundle].graph, ell, kt), ell, n)
        adapted[..., rows[:, None], cols[None, :]] = m_grid
        generators[bundle] = (normal_form[np.ix_(cols, cols)] + _block(perturbation, cols, cols)
                              + _block(perturbation, cols, rows) @ m_grid)
    basis = base.frame @ adapted
    return replace(base, k_theta_max=kt, basis=basis, dual=np.linalg.inv(basis), generators=generators,
                   graphs=dict(graphs))


def graph_transform_update(base: SplittingData, op: GalerkinOperator, model: Optional[ModelSpec] = None,
                           t_horizon: Optional[float] = None, tol: Optional[float] = None,
                           max_iter: int = MAX_TRANSFER_ITERATIONS, refresh_rates: bool = True,
                           n_grid: Optional[int] = None, accelerate: bool = True) -> SplittingData:
    """
    Invariant splitting of the new operator by iteration of 𝒯₁, 𝒯₂ over [0, T].

    Args:
        base: Splitting of a nearby operator; supplies the frame V₀, the
            warm start and the rates that fix the horizon.
        op: The new linearization Ã.
        model: Needed to refit the rate constants; without it base.rates are kept.
        t_horizon: Horizon T (default: C_h T^{−α}e^{−βT} = 10⁻² for base.rates).
        tol: Fixed-point tolerance (default Config.TAU_FP).
        max_iter: Iteration cap of the transfer iteration per bundle.
        refresh_rates: Refit rates by sampling the new cocycles.
        n_grid: Grid points per angle.
        accelerate: Start from the Sylvester fixed point instead of the warm start.

    Returns:
        SplittingData for op; every GraphPair carries M, Nev and the
        contraction factor of its iteration.

    Raises:
        PerturbationTooLargeError: the fixed-point maps do not contract.
    """
    tol = Config.TAU_FP if tol is None else tol
    if op.k_x_max != base.k_x_max or op.ell != base.ell:
        raise StructuralError("operator and splitting use different truncations")
    t_horizon = horizon(base.rates) if t_horizon is None else float(t_horizon)
    if not t_horizon > 0:
        raise ValueError("the horizon T must be positive")
    kt = op.k_theta_max
    n = _grid_size(kt, n_grid)
    perturbation = _perturbation(base, op, n)
    graphs = {bundle: _transfer_graph(bundle, base, perturbation, kt, t_horizon, tol, max_iter, accelerate)
              for bundle in BUNDLES}
    updated = splitting_from_graphs(base, op, graphs, n_grid=n)
    logger.info(f"Graph transform converged: T={t_horizon:.3e}, contraction {updated.max_contraction():.3e}, "
                f"iterations { {b: g.iterations for b, g in graphs.items()} }")
    if refresh_rates and model is not None:
        updated = replace(updated, rates=rate_estimate(model, updated))
    return updated


def compute_splitting(model: ModelSpec, K: TorusMap, omega: Sequence[float], base: Optional[SplittingData] = None,
                      refresh_rates: bool = True) -> Tuple[GalerkinOperator, SplittingData]:
    """Linearize at K and update the splitting (from the unperturbed one when base is None)."""
    op = linearize(model, K)
    if base is None:
        base = unperturbed_splitting(model, K.k_x_max, omega, K.k_theta_max)
    return op, graph_transform_update(base, op, model=model, refresh_rates=refresh_rates)


def refinement_check(model: ModelSpec, K: TorusMap, omega: Sequence[float]) -> float:
    """
    Change of Π^c on the retained harmonics when Kx is doubled.

    A small value means the Galerkin splitting has converged in x.
    """
    _, coarse = compute_splitting(model, K, omega, refresh_rates=False)
    _, fine = compute_splitting(model, K.pad(K.k_theta_max, 2 * K.k_x_max), omega, refresh_rates=False)
    dim = coarse.dimension
    diff = float(np.abs(fine.projection("c")[..., :dim, :dim] - coarse.projection("c")).max())
    logger.info(f"Refinement check Kx={K.k_x_max}→{2 * K.k_x_max}: ΔΠ^c = {diff:.3e}")
    return diff
