import math

import numpy as np
import pytest

from fourier.grid import grid_to_modes
from fourier.torus_map import scale
from hyperbolic.cocycle import bundle_tables, cocycle_evolve, reduced_cocycle
from hyperbolic.galerkin import linearize, unperturbed_operator
from hyperbolic.graph_transform import (
    TransferMap,
    compute_splitting,
    graph_transform_update,
    unperturbed_splitting,
)
from hyperbolic.quadrature import integrate_graded
from hyperbolic.rates import horizon, rate_estimate
from hyperbolic.solvers import BundleSolver, reduced_rhs, solve_stable, solve_unstable
from hyperbolic.splitting import BUNDLES, Rates, center_rank, invariance_defect, projection_defect, splitting_report
from models.spectrum import dispersion
from utils.errors import CocycleDirectionError, NoDichotomyError, PerturbationTooLargeError


def _dispersion_minimum(model, k_x_max):
    rates = [dispersion(model, j)[0].real for j in range(1, k_x_max + 1)]
    return min(r for r in rates if r > 0)


def test_unperturbed_splitting_dimensions(scalar):
    splitting = unperturbed_splitting(scalar, 8)
    ns, nc, nu = splitting.dims
    # j = 1 is the only center harmonic; j = 2..8 are hyperbolic
    assert nc == 2
    assert ns == nu == 7
    assert splitting.dimension == 16
    assert center_rank(splitting) == 2


def test_unperturbed_projections_are_exact(scalar):
    splitting = unperturbed_splitting(scalar, 8, k_theta_max=2)
    assert projection_defect(splitting) < 1e-12


def test_unperturbed_splitting_is_invariant(scalar):
    splitting = unperturbed_splitting(scalar, 8, k_theta_max=2)
    op = unperturbed_operator(scalar, 1, 8, 2)
    assert invariance_defect(op, splitting) < 1e-12


def test_dispersion_rates_at_zero_torus(scalar):
    splitting = unperturbed_splitting(scalar, 16)
    rates = splitting.rates
    assert rates.beta1 == pytest.approx(_dispersion_minimum(scalar, 16))
    assert rates.beta2 == rates.beta1
    assert rates.alpha1 == rates.alpha2 == 0.5
    assert rates.beta3_plus == rates.beta3_minus == 0.0


def test_fitted_rates_reproduce_smoothing(scalar):
    splitting = unperturbed_splitting(scalar, 16)
    rates = rate_estimate(scalar, splitting)
    assert 0.4 <= rates.alpha1 <= 0.6
    assert rates.beta1 == pytest.approx(_dispersion_minimum(scalar, 16), rel=0.05)
    assert rates.beta3_plus < 1e-6


def test_horizon_meets_target():
    rates = Rates(C_h=5.0, beta1=2.0, beta2=3.0, alpha1=0.5, alpha2=0.5)
    t = horizon(rates)
    assert rates.C_h * t ** -0.5 * math.exp(-2.0 * t) <= 1e-2 * (1 + 1e-9)


def test_horizon_requires_decay():
    with pytest.raises(NoDichotomyError):
        horizon(Rates(C_h=1.0, beta1=0.0, beta2=1.0, alpha1=0.5, alpha2=0.5))


def test_graded_quadrature_of_singular_integrand():
    # ∫₀^∞ τ^{-1/2} e^{-τ} dτ = √π
    value = integrate_graded(lambda t: t ** -0.5 * np.exp(-t), 40.0, 1e-2)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-9)


def _random_rhs(rng, splitting):
    n = splitting.n_grid
    values = rng.standard_normal((n,) * splitting.ell + (splitting.dimension,))
    return grid_to_modes(values, splitting.ell, splitting.k_theta_max)


@pytest.mark.parametrize("bundle", ["s", "u"])
def test_duhamel_matches_direct_solve(scalar, bundle):
    splitting = unperturbed_splitting(scalar, 8, k_theta_max=3)
    solver = BundleSolver(splitting, bundle)
    rng = np.random.default_rng(7)
    for _ in range(20):
        rhs = reduced_rhs(splitting, bundle, _random_rhs(rng, splitting))
        direct = solver.direct(rhs)
        quad = solver.duhamel(rhs)
        assert np.abs(quad - direct).max() <= 1e-8 * max(1.0, np.abs(direct).max())


def test_bundle_solutions_satisfy_equation(scalar):
    splitting = unperturbed_splitting(scalar, 8, k_theta_max=2)
    op = unperturbed_operator(scalar, 1, 8, 2)
    rng = np.random.default_rng(3)
    e_modes = _random_rhs(rng, splitting)
    delta = solve_stable(splitting, e_modes, method="direct") + solve_unstable(splitting, e_modes, method="direct")
    kappa = 2j * np.pi * np.arange(-2, 3) * splitting.omega[0]
    lhs = kappa[:, None] * delta - op.apply(delta)
    # (∂_ω − A)Δ = −(Π^s + Π^u)E, the center part of E is untouched
    hyperbolic = np.concatenate([np.arange(0, 7), np.arange(9, 16)])
    frame = splitting.frame
    dual = np.linalg.inv(frame)
    e_h = (frame[:, hyperbolic] @ dual[hyperbolic, :] @ e_modes.T).T
    assert np.abs(lhs + e_h).max() < 1e-8 * max(1.0, np.abs(e_h).max())


def test_unknown_bundle_rejected(scalar):
    splitting = unperturbed_splitting(scalar, 8)
    with pytest.raises(ValueError):
        BundleSolver(splitting, "c")


def test_splitting_at_seed_is_invariant(scalar, scalar_seed):
    _, K, omega = scalar_seed
    op, splitting = compute_splitting(scalar, K, omega, refresh_rates=False)
    assert splitting.dims == (7, 2, 7)
    assert projection_defect(splitting) < 1e-9
    assert invariance_defect(op, splitting) < 1e-7
    assert center_rank(splitting) == 2


def test_linearization_at_zero_is_constant(scalar):
    op = unperturbed_operator(scalar, 1, 4, 2)
    assert np.abs(op.modes[1]).max() == 0.0
    assert np.abs(op.modes[2] - op.constant).max() == 0.0


def test_linearization_perturbation_scales_with_torus(scalar, scalar_seed):
    _, K, _ = scalar_seed
    base = unperturbed_operator(scalar, 1, K.k_x_max, K.k_theta_max)
    small = linearize(scalar, scale(K, 0.1))
    large = linearize(scalar, K)
    ratio = base.perturbation_size(large) / base.perturbation_size(small)
    assert ratio == pytest.approx(10.0, rel=1e-9)


def test_stable_cocycle_is_the_exponential_at_zero_torus(scalar):
    splitting = unperturbed_splitting(scalar, 8, k_theta_max=2)
    tables = bundle_tables(splitting, "s")
    rates = np.diag(splitting.normal_form)[:7]
    times = [0.1, 0.5, 2.0]
    for integrator in ("expm", "ivp"):
        for t, phi in zip(times, reduced_cocycle(tables, [0.3], times, integrator)):
            assert np.allclose(phi, np.diag(np.exp(rates * t)), rtol=1e-9, atol=1e-12)
    # the full-space evolution scales the stable eigenvector by e^{σt}
    v = splitting.frame[:, 0]
    moved = cocycle_evolve(splitting, [0.3], 0.5, "s") @ v
    assert np.allclose(moved, math.exp(rates[0] * 0.5) * v, atol=1e-12)


def test_cocycle_direction_is_enforced(scalar):
    splitting = unperturbed_splitting(scalar, 8)
    with pytest.raises(CocycleDirectionError):
        cocycle_evolve(splitting, [0.0], -1.0, "s")
    with pytest.raises(CocycleDirectionError):
        cocycle_evolve(splitting, [0.0], 1.0, "u")
    assert cocycle_evolve(splitting, [0.0], -1.0, "c").shape == (16, 16)


@pytest.fixture
def seed_splitting(scalar, scalar_seed):
    _, K, omega = scalar_seed
    return compute_splitting(scalar, K, omega, refresh_rates=False)


def test_cocycle_semigroup_law_at_seed(seed_splitting):
    _, splitting = seed_splitting
    theta = np.array([0.2])
    for bundle, sign in (("s", 1.0), ("c", 1.0), ("c", -1.0), ("u", -1.0)):
        tables = bundle_tables(splitting, bundle)
        assert not tables.is_constant
        t, s = sign * 0.3, sign * 0.45
        full = reduced_cocycle(tables, theta, [t + s])[0]
        first = reduced_cocycle(tables, theta, [t])[0]
        second = reduced_cocycle(tables, theta + splitting.omega * t, [s])[0]
        assert np.abs(full - second @ first).max() <= 1e-8 * max(1.0, np.abs(full).max())


def test_duhamel_matches_direct_solve_at_seed(seed_splitting):
    _, splitting = seed_splitting
    kt = splitting.k_theta_max
    rng = np.random.default_rng(11)
    e_modes = np.zeros((2 * kt + 1, splitting.dimension), dtype=np.complex128)
    e_modes[kt] = rng.standard_normal(splitting.dimension)
    e_modes[kt + 1] = rng.standard_normal(splitting.dimension) + 1j * rng.standard_normal(splitting.dimension)
    e_modes[kt - 1] = np.conj(e_modes[kt + 1])
    for bundle in ("s", "u"):
        solver = BundleSolver(splitting, bundle)
        assert not solver.tables.is_constant
        rhs = reduced_rhs(splitting, bundle, e_modes)
        direct = solver.direct(rhs)
        quad = solver.duhamel(rhs)
        assert np.abs(quad - direct).max() <= 1e-8 * max(1.0, np.abs(direct).max())


def test_graph_transform_at_zero_torus(scalar):
    base = unperturbed_splitting(scalar, 8, k_theta_max=2)
    op = unperturbed_operator(scalar, 1, 8, 2)
    updated = graph_transform_update(base, op, refresh_rates=False)
    t_h = horizon(base.rates)
    signs = {"s": {1.0}, "c": {1.0, -1.0}, "u": {-1.0}}
    for bundle in BUNDLES:
        pair = updated.graphs[bundle]
        size = base.generators[bundle].shape[-1]
        assert np.abs(pair.graph).max() < 1e-14
        assert pair.horizon == pytest.approx(t_h)
        assert 0.0 <= pair.contraction < 1.0
        assert set(np.sign(pair.times)) == signs[bundle]
        assert pair.evolved.shape == (base.n_grid, pair.times.size, size, size)
    # N_θ(t) on the stable bundle is e^{Λ_s t}
    pair = updated.graphs["s"]
    rates = np.diag(base.normal_form)[:7]
    expected = np.exp(np.multiply.outer(pair.times, rates))
    diagonal = np.diagonal(pair.evolved[0], axis1=-2, axis2=-1)
    assert np.allclose(diagonal, expected, rtol=1e-9, atol=1e-14)
    assert invariance_defect(op, updated) < 1e-12


def test_transfer_iteration_matches_the_sylvester_start(scalar, scalar_seed):
    _, K, omega = scalar_seed
    base = unperturbed_splitting(scalar, K.k_x_max, omega, K.k_theta_max)
    op = linearize(scalar, K)
    fast = graph_transform_update(base, op, refresh_rates=False)
    slow = graph_transform_update(base, op, refresh_rates=False, accelerate=False)
    for bundle in BUNDLES:
        assert np.abs(fast.graphs[bundle].graph - slow.graphs[bundle].graph).max() < 1e-8
        assert slow.graphs[bundle].iterations >= 2
        assert 0.0 < slow.graphs[bundle].contraction < 1.0
    assert invariance_defect(op, slow) < 1e-7
    assert projection_defect(slow) < 1e-9


def test_graph_does_not_depend_on_the_horizon(scalar, scalar_seed):
    _, K, omega = scalar_seed
    base = unperturbed_splitting(scalar, K.k_x_max, omega, K.k_theta_max)
    op = linearize(scalar, K)
    t_h = horizon(base.rates)
    short = graph_transform_update(base, op, t_horizon=t_h, refresh_rates=False)
    long = graph_transform_update(base, op, t_horizon=2.0 * t_h, refresh_rates=False)
    for bundle in BUNDLES:
        assert long.graphs[bundle].horizon == pytest.approx(2.0 * t_h)
        assert np.abs(short.graphs[bundle].graph - long.graphs[bundle].graph).max() < 1e-8


def test_horizon_must_be_positive(scalar):
    base = unperturbed_splitting(scalar, 4, k_theta_max=1)
    with pytest.raises(ValueError):
        graph_transform_update(base, unperturbed_operator(scalar, 1, 4, 1), t_horizon=0.0)


def test_projection_change_is_linear_in_the_perturbation(scalar, scalar_seed):
    _, K, omega = scalar_seed
    base = unperturbed_splitting(scalar, K.k_x_max, omega, K.k_theta_max)
    op0 = unperturbed_operator(scalar, 1, K.k_x_max, K.k_theta_max)
    unit = op0.perturbation_size(linearize(scalar, K))
    ratios, alphas = [], []
    for size in (1e-4, 1e-3, 1e-2):
        op = linearize(scalar, scale(K, size / unit))
        assert op0.perturbation_size(op) == pytest.approx(size, rel=1e-9)
        updated = graph_transform_update(base, op, model=scalar)
        change = max(float(np.abs(updated.projection(b) - base.projection(b)).max()) for b in BUNDLES)
        ratios.append(change / size)
        alphas.append([updated.rates.alpha1, updated.rates.alpha2])
    assert max(ratios) <= 1.1 * min(ratios)
    assert np.allclose(alphas, alphas[0], atol=0.02)


def test_large_perturbation_is_rejected(scalar, scalar_seed):
    _, K, omega = scalar_seed
    base = unperturbed_splitting(scalar, K.k_x_max, omega, K.k_theta_max)
    with pytest.raises(PerturbationTooLargeError):
        graph_transform_update(base, linearize(scalar, scale(K, 100.0)), refresh_rates=False)


def test_splitting_report_at_seed(seed_splitting):
    op, splitting = seed_splitting
    report = splitting_report(splitting, op)
    assert report.rank_c == 2
    assert report.invariance_defect < 1e-7
    assert 0.0 < report.contraction < 1.0
    assert report.horizon == pytest.approx(horizon(splitting.rates))
    assert report.strip_width is not None and report.strip_width > 0
    assert report.refinement is None


def test_transfer_map_contracts_at_zero_torus(scalar):
    base = unperturbed_splitting(scalar, 8, k_theta_max=2)
    t_h = horizon(base.rates)
    perturbation = np.zeros((base.n_grid, 16, 16))
    transfer = TransferMap("c", base, perturbation, 2, t_h)
    assert transfer.signs == [-1.0, 1.0]
    zero = np.zeros((5, 14, 2), dtype=np.complex128)
    image, times, table = transfer(zero)
    assert np.abs(image).max() == 0.0
    assert times.size == 2 * transfer.times.size
    assert table.shape == (base.n_grid, times.size, 2, 2)
    # a constant graph is damped by the hyperbolic propagators over [0, T]
    bump = zero.copy()
    bump[2] = 1e-3
    assert np.abs(transfer(bump)[0]).max() < 0.5e-3
