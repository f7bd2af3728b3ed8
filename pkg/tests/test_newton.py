import numpy as np
import pytest

from config import Config
from fourier.torus_map import TorusMap, phase_shift, scale
from hyperbolic.graph_transform import compute_splitting, refinement_check
from lindstedt.recursion import twist_coefficient
from models.spectrum import center_analysis
from newton.alignment import phase_align
from newton.aposteriori import aposteriori_check
from newton.iteration import initial_state, newton_step, quadratic_fit, residual_norm
from newton.schedule import Schedule
from newton.state import dump_state, load_solution, load_state, save_solution
from utils.errors import ConfigError, IntegrationError, PhaseAlignmentError, ScheduleExhaustedError


def _circle_distance(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


class TestSchedule:
    def test_strips_decrease_to_the_floor(self):
        schedule = Schedule(0.02, 0.02 / 12)
        rhos = [schedule.rho(m) for m in range(12)]
        assert rhos[0] == 0.02
        assert all(b < a for a, b in zip(rhos, rhos[1:]))
        assert all(r > schedule.rho_inf for r in rhos)
        assert schedule.rho_inf == pytest.approx(0.01)
        assert schedule.delta(3) == pytest.approx(0.02 / 96)

    def test_exhausted_schedule(self):
        with pytest.raises(ScheduleExhaustedError):
            Schedule(0.02, 0.02 / 12).rho(80)

    @pytest.mark.parametrize("rho0, delta1", [(0.0, 0.001), (0.02, 0.01), (0.02, 0.0)])
    def test_invalid_schedule(self, rho0, delta1):
        with pytest.raises(ValueError):
            Schedule(rho0, delta1)

    def test_from_config_uses_default_loss(self):
        schedule = Schedule.from_config(rho0=0.06)
        assert schedule.delta1 == pytest.approx(0.005)


def test_quadratic_fit_of_exact_sequence():
    # r_{m+1} = 10 r_m²
    fit = quadratic_fit([1e-2, 1e-3, 1e-5, 1e-9])
    assert fit.pairs == 3
    assert fit.constant == pytest.approx(1.0)
    assert fit.max_deviation == pytest.approx(0.0, abs=1e-12)


def test_quadratic_fit_ignores_floor_pairs():
    fit = quadratic_fit([1e-3, 1e-5, 1e-13], floor=1e-12)
    assert fit.pairs == 1


def test_quadratic_fit_needs_pairs():
    assert quadratic_fit([1e-3]).constant is None


class TestPhaseAlign:
    def test_recovers_shift(self, scalar_seed):
        _, K, omega = scalar_seed
        report = phase_align(K, phase_shift(K, [0.1]), omega, omega)
        assert _circle_distance(report.tau[0], 0.1) < 1e-7
        assert report.relative_distance < 1e-10

    def test_different_frequencies_are_distinct(self, scalar_seed):
        _, K, omega = scalar_seed
        with pytest.raises(PhaseAlignmentError):
            phase_align(K, K, omega, np.asarray(omega) * (1 + 1e-6))

    def test_different_amplitudes_are_distinct(self, scalar_seed):
        _, K, omega = scalar_seed
        with pytest.raises(PhaseAlignmentError):
            phase_align(K, scale(K, 1.1), omega, omega)


def _zero_torus(model, k_max):
    return TorusMap.zeros(1, 2, k_max, k_max, parity=model.component_parity, zero_mean=True)


def test_ledger_of_trivial_torus(scalar, small_config):
    omega = center_analysis(scalar).omega0
    ledger = aposteriori_check(scalar, _zero_torus(scalar, 8), omega)
    assert ledger.passed
    assert ledger.trivial
    assert ledger.line("residual").value == 0.0


def test_ledger_at_seed_has_every_line(scalar, scalar_seed):
    _, K, omega = scalar_seed
    ledger = aposteriori_check(scalar, K, omega)
    names = {line.name for line in ledger.lines}
    assert {"kappa_hat", "invariance_defect", "projection_defect", "beta_min", "isotropy",
            "residual", "smallness", "distance_bound"} <= names
    assert ledger.heuristic
    assert ledger.line("beta_min").passed
    assert len(ledger.to_frame()) == len(ledger.lines)


def test_solution_file_round_trip(scalar, scalar_seed, tmp_path):
    _, K, omega = scalar_seed
    path = tmp_path / "torus.json"
    save_solution(scalar, K, omega, str(path))
    name, mu, K2, omega2 = load_solution(str(path))
    assert name == scalar.name
    assert mu == scalar.mu
    assert np.array_equal(K2.coeffs, K.coeffs)
    assert np.array_equal(omega2, omega)


def test_missing_solution_file(tmp_path):
    with pytest.raises(ConfigError):
        load_solution(str(tmp_path / "absent.json"))


def test_resumed_state_repeats_the_step(scalar, scalar_seed, tmp_path):
    _, K, omega = scalar_seed
    state = initial_state(scalar, K, omega)
    path = tmp_path / "state_000.json"
    dump_state(state, str(path))
    restored = load_state(scalar, str(path))
    assert restored.m == 0
    assert restored.residuals == state.residuals
    assert np.array_equal(restored.K.coeffs, state.K.coeffs)

    direct = newton_step(scalar, state)
    resumed = newton_step(scalar, restored)
    assert np.array_equal(direct.K.coeffs, resumed.K.coeffs)
    assert direct.residual == resumed.residual


@pytest.mark.parametrize("fixture", ["converged_scalar", "converged_system"])
def test_newton_converges_quadratically(request, fixture):
    _, state, report = request.getfixturevalue(fixture)
    assert report.converged
    assert state.m <= 6
    assert state.residual <= 1e-11
    residuals = state.residuals
    assert residuals[1] < residuals[0]
    assert quadratic_fit(residuals).max_deviation <= 0.5
    assert [step.m for step in report.steps] == list(range(state.m + 1))
    assert report.distance is not None and report.distance > 0


def test_isotropy_follows_the_residual(converged_scalar):
    _, state, report = converged_scalar
    floor = Config.RESIDUAL_FLOOR
    assert state.frame.isotropy_norm <= 10.0 * max(state.residual, floor)
    for step in report.steps:
        assert step.defects["isotropy"] <= 10.0 * max(step.resid_Y, floor)


def test_frequency_correction_matches_converged_runs(converged_scalar, converged_scalar_small):
    series, big, _ = converged_scalar
    _, small, _ = converged_scalar_small
    unit = abs(series.terms[0].coeff([1], 1)[0])
    # first-harmonic amplitude of each converged torus, in units of the order-one term
    a_big = abs(big.K.coeff([1], 1)[0]) / unit
    a_small = abs(small.K.coeff([1], 1)[0]) / unit
    oracle = (big.omega[0] - small.omega[0]) / (a_big ** 2 - a_small ** 2)
    computed = twist_coefficient(series)[0]
    assert computed != 0.0
    assert oracle == pytest.approx(computed, rel=0.05)


def test_converged_torus_is_stable_under_space_refinement(scalar, converged_scalar, small_config):
    _, state, _ = converged_scalar
    K, omega = state.K, state.omega
    assert refinement_check(scalar, K, omega) <= 1e-9
    fine = K.pad(K.k_theta_max, 2 * K.k_x_max)
    assert residual_norm(scalar, fine, omega, state.rho) <= 1e-9
    _, refined = compute_splitting(scalar, fine, omega, base=None)
    assert refined.rates.beta1 == pytest.approx(state.splitting.rates.beta1, rel=0.01)
    assert refined.rates.beta2 == pytest.approx(state.splitting.rates.beta2, rel=0.01)


def test_direct_hyperbolic_solver_matches_duhamel(scalar, scalar_seed, monkeypatch):
    _, K, omega = scalar_seed
    state = initial_state(scalar, K, omega)
    quad = newton_step(scalar, state)
    monkeypatch.setattr(Config, "HYPERBOLIC_SOLVER", "direct")
    direct = newton_step(scalar, state)
    assert np.abs(quad.K.coeffs - direct.K.coeffs).max() <= 1e-8 * np.abs(K.coeffs).max()
    assert direct.residual == pytest.approx(quad.residual, rel=1e-3)


def test_failed_cocycle_integration_falls_back_to_direct(scalar, scalar_seed, monkeypatch):
    _, K, omega = scalar_seed
    state = initial_state(scalar, K, omega)
    monkeypatch.setattr(Config, "HYPERBOLIC_SOLVER", "direct")
    direct = newton_step(scalar, state)
    monkeypatch.setattr(Config, "HYPERBOLIC_SOLVER", "duhamel")

    def broken(*args, **kwargs):
        raise IntegrationError("step size underflow")

    monkeypatch.setattr("newton.iteration.solve_stable", broken)
    fallback = newton_step(scalar, state)
    assert np.array_equal(fallback.K.coeffs, direct.K.coeffs)
