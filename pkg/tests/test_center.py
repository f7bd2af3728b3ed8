import dataclasses
import math

import numpy as np
import pytest

from center.cohomology import cohomology_bound, cohomology_modes, cohomology_solve
from center.diophantine import diophantine_estimate
from center.frame import build_center_frame, isotropy_defect, twist_report
from center.solve import solve_center
from center.symplectic import center_symplectic_drift, cross_block_orthogonality
from fourier.torus_map import TorusMap
from hyperbolic.graph_transform import compute_splitting, unperturbed_splitting
from lindstedt.recursion import assemble_seed, build_series
from models.fiber import fiber_index, to_fiber
from utils.errors import ExactnessViolationError, ResonanceError, SolvabilityError, StructuralError, TwistError

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def test_single_frequency_constant():
    omega0 = math.sqrt(0.5)
    report = diophantine_estimate([omega0], 0.0, 10)
    assert report.kappa_hat == pytest.approx(1.0 / omega0)
    assert report.argmax_k == [1]


def test_golden_frequency_stays_bounded():
    # |q − pg|(p + q) stays near 2.618/√5 > 1, so k = (1, 0) keeps the maximum
    short = diophantine_estimate([1.0, GOLDEN], 1.0, 10)
    long = diophantine_estimate([1.0, GOLDEN], 1.0, 40)
    assert short.kappa_hat == pytest.approx(1.0)
    assert long.kappa_hat == pytest.approx(1.0)
    assert long.argmax_k == [1, 0]


def test_rational_frequency_is_resonant():
    with pytest.raises(ResonanceError) as exc:
        diophantine_estimate([1.0, 1.0], 1.0, 4)
    assert exc.value.details["k"] == [1, -1]


def test_zero_frequency_rejected():
    with pytest.raises(StructuralError):
        diophantine_estimate([0.0], 0.0, 4)


def test_cohomology_of_a_cosine():
    h = TorusMap.trig(1, [1], 1)
    v = cohomology_solve(h, [0.5])
    expected = TorusMap.trig(1, [1], 1, theta="sin", amplitude=1.0 / math.pi)
    assert np.allclose(v.coeffs, expected.coeffs, atol=1e-15)
    assert v.parity_defect() < 1e-15


def test_cohomology_of_zero():
    h = TorusMap.zeros(1, 1, 3, 2)
    v = cohomology_solve(h, [0.5])
    assert v.is_zero()


def test_cohomology_rejects_nonzero_average():
    modes = np.array([0.0, 1.0, 0.0], dtype=np.complex128)
    with pytest.raises(SolvabilityError):
        cohomology_modes(modes, 1, [0.5])


def test_cohomology_rejects_resonant_coefficient():
    modes = np.zeros((3, 3), dtype=np.complex128)
    modes[2, 0] = 1.0  # k = (1, −1)
    with pytest.raises(ResonanceError):
        cohomology_modes(modes, 2, [1.0, 1.0])


def test_cohomology_bound_ratio():
    h = TorusMap.trig(1, [1], 1)
    v = cohomology_solve(h, [0.5])
    report = cohomology_bound(h, v, [0.5], 0.02, 0.01, nu=0.0)
    # one mode: ‖v‖/‖h‖ = e^{−2πδ}/(2π·½)
    assert report.ratio == pytest.approx(math.exp(-2 * math.pi * 0.01) / math.pi)
    assert report.bound == pytest.approx(1.0 / 0.5)


def test_single_angle_torus_is_isotropic(scalar, scalar_seed):
    _, K, _ = scalar_seed
    _, norm = isotropy_defect(scalar, K)
    assert norm < 1e-12


def test_hyperbolic_and_center_bundles_are_orthogonal(scalar, system):
    for model in (scalar, system):
        assert cross_block_orthogonality(model, unperturbed_splitting(model, 8)) < 1e-14


def test_center_cocycle_preserves_symplectic_form(scalar):
    drift = center_symplectic_drift(scalar, unperturbed_splitting(scalar, 8), t_max=20.0)
    assert drift < 1e-8


@pytest.fixture
def seed_frame(scalar, scalar_seed):
    _, K, omega = scalar_seed
    op, splitting = compute_splitting(scalar, K, omega, refresh_rates=False)
    return build_center_frame(scalar, K, omega, splitting, op)


def test_center_frame_at_seed(seed_frame):
    assert np.all(np.isfinite(seed_frame.frame))
    assert seed_frame.cond_dktdk < 1e6
    assert seed_frame.gram_defect < 1e-8
    report = twist_report(seed_frame)
    assert np.isfinite(report.avgS_inv_norm)
    assert abs(report.avgS[0][0]) > 0


def test_zero_residual_gives_zero_correction(seed_frame):
    kt = seed_frame.k_theta_max
    e_modes = np.zeros((2 * kt + 1, 2 * seed_frame.k_x_max), dtype=np.complex128)
    solution = solve_center(seed_frame, e_modes)
    assert np.abs(solution.xi1).max() == 0.0
    assert np.abs(solution.xi2).max() == 0.0
    assert np.abs(solution.delta).max() == 0.0


def test_residual_at_seed_passes_exactness(scalar, scalar_seed, seed_frame):
    _, K, omega = scalar_seed
    e_modes = to_fiber(scalar.residual(K, omega), scalar.fiber_kinds)
    solution = solve_center(seed_frame, e_modes)
    assert np.all(np.isfinite(solution.delta))
    assert solution.exactness_defect >= 0.0


def test_constant_center_forcing_violates_exactness(seed_frame):
    kt = seed_frame.k_theta_max
    e_modes = np.zeros((2 * kt + 1, 2 * seed_frame.k_x_max), dtype=np.complex128)
    e_modes[kt, fiber_index(1, 0)] = 1e-3
    e_modes[kt, fiber_index(1, 1)] = 1e-3
    with pytest.raises(ExactnessViolationError) as exc:
        solve_center(seed_frame, e_modes)
    assert exc.value.details["obstruction"] > 0


def test_singular_twist_is_rejected(scalar, scalar_seed, seed_frame):
    _, K, omega = scalar_seed
    e_modes = to_fiber(scalar.residual(K, omega), scalar.fiber_kinds)
    flat = dataclasses.replace(seed_frame, avg_twist=np.zeros_like(seed_frame.avg_twist))
    with pytest.raises(TwistError):
        solve_center(flat, e_modes)


def test_exactness_defect_is_quadratic_in_the_residual(scalar, small_config):
    # order-one seeds keep the defect well above round-off
    series = build_series(scalar, [1.0], 1)
    residuals, defects = [], []
    for epsilon in (1e-2, 10 ** -2.25, 10 ** -2.5):
        K, omega = assemble_seed(series, epsilon, 8, 8)
        op, splitting = compute_splitting(scalar, K, omega, refresh_rates=False)
        frame = build_center_frame(scalar, K, omega, splitting, op)
        e_modes = to_fiber(scalar.residual(K, omega), scalar.fiber_kinds)
        residuals.append(float(np.abs(e_modes).max()))
        defects.append(solve_center(frame, e_modes).exactness_defect)
    slope = np.polyfit(np.log(residuals), np.log(defects), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.15)


def test_center_drift_at_converged_torus(scalar, converged_scalar):
    _, state, _ = converged_scalar
    assert center_symplectic_drift(scalar, state.splitting, t_max=50.0) <= 1e-9
