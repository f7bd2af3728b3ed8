import math

import numpy as np
import pytest

from lindstedt.multiplier import kernel_set, multiplier, multiplier_table, nonresonance_check, scalar_multiplier
from lindstedt.recursion import (
    assemble_seed,
    build_series,
    first_order,
    frequency_combination,
    residual_slope,
    twist_coefficient,
)
from lindstedt.series import load_series, save_series
from models.boussinesq import BoussinesqScalar
from models.spectrum import center_analysis
from utils.errors import ConfigError, ResonanceError

EPSILON_GRID = [1e-4, 10 ** -3.5, 1e-3, 10 ** -2.5, 1e-2]


def test_first_order_solution(scalar):
    series = first_order(scalar, [1.0])
    assert series.order == 1
    assert series.center_modes == (1,)
    assert series.omega0[0] == pytest.approx(math.sqrt(0.5))
    assert series.terms[0].coeff([1], 1)[0] == pytest.approx(0.25)


def test_first_order_system_companion(system):
    series = first_order(system, [1.0])
    # B = A j / ω⁰
    assert series.companion[0] == pytest.approx(1.0 / math.sqrt(0.5))
    assert series.terms[0].d == 2


def test_amplitude_count_checked(scalar):
    with pytest.raises(ConfigError):
        first_order(scalar, [1.0, 2.0])


def test_kernel_set():
    assert kernel_set(2, [1, 2]) == {((1, 0), 1), ((-1, 0), 1), ((0, 1), 2), ((0, -1), 2)}


def test_scalar_multiplier_vanishes_on_the_kernel(scalar):
    omega0 = [math.sqrt(0.5)]
    assert multiplier(scalar, omega0, [1], 1) == pytest.approx(0.0, abs=1e-10)
    assert multiplier(scalar, omega0, [2], 2) < 0


def test_constructed_resonance_is_listed(scalar):
    # (2ω)² = ½ makes F(2, 1) vanish
    report = nonresonance_check(scalar, [math.sqrt(0.125)], 2)
    assert not report.passed
    assert any(r.k == [2] and r.j == 1 for r in report.resonances)


def test_default_parameters_are_nonresonant(scalar):
    report = nonresonance_check(scalar, [math.sqrt(0.5)], 3)
    assert report.passed
    assert report.min_abs_F > 0


def test_resonant_mu_stops_the_recursion():
    # a = 4π²μ = 5/77 gives 4(1 − a) = 9(1 − 9a): F((2,0,0), 3) = 0
    model = BoussinesqScalar(5.0 / (308.0 * math.pi ** 2))
    with pytest.raises(ResonanceError, match="k="):
        build_series(model, [1.0, 1.0, 1.0], 2)


@pytest.mark.parametrize("model_name", ["scalar", "system"])
def test_first_frequency_correction_vanishes(model_name, request):
    model = request.getfixturevalue(model_name)
    series = build_series(model, [1.0], 3)
    assert series.kernel_components[0] < 1e-12
    assert np.all(np.abs(series.frequency_terms[0]) < 1e-12)


def test_second_frequency_correction_is_a_twist(scalar):
    series = build_series(scalar, [1.0], 3)
    assert abs(series.frequency_terms[1][0]) > 1e-6
    assert math.isfinite(frequency_combination(series))
    assert frequency_combination(series) != 0.0


def test_frequency_correction_from_the_multiplier_combination(scalar):
    # order-three solvability: ω² = −π²A²(F(0,2) + 2F(2,2)) / (ω⁰ F(0,2) F(2,2))
    amplitude = 1.5
    series = build_series(scalar, [amplitude], 3)
    w0 = series.omega0[0]
    f02 = scalar_multiplier(scalar.mu, series.omega0, [0], 2)
    f22 = scalar_multiplier(scalar.mu, series.omega0, [2], 2)
    assert frequency_combination(series) == pytest.approx(f02 + 2.0 * f22)
    expected = -math.pi ** 2 * amplitude ** 2 * frequency_combination(series) / (w0 * f02 * f22)
    assert series.frequency_terms[1][0] == pytest.approx(expected, rel=1e-9)


def test_multiplier_table_excludes_the_kernel(scalar):
    omega0 = center_analysis(scalar).omega0
    table = multiplier_table(scalar, omega0, 3, [1])
    assert ((1,), 1) not in table.values and ((-1,), 1) not in table.values
    assert table.values[((2,), 2)] == pytest.approx(scalar_multiplier(scalar.mu, omega0, [2], 2))
    assert table.resonant() == []
    value, key = table.min_abs()
    assert value == pytest.approx(nonresonance_check(scalar, omega0, 3).min_abs_F)
    assert list(key[0]) == nonresonance_check(scalar, omega0, 3).argmin_k


def test_twist_coefficient_is_amplitude_independent(scalar):
    one = twist_coefficient(build_series(scalar, [1.0], 3))
    two = twist_coefficient(build_series(scalar, [2.0], 3))
    assert np.allclose(one, two, rtol=1e-9)


@pytest.mark.parametrize("model_name", ["scalar", "system"])
@pytest.mark.parametrize("order", [1, 2, 3])
def test_residual_slope_is_order_plus_one(model_name, order, request):
    model = request.getfixturevalue(model_name)
    series = build_series(model, [1.0], order)
    frame = residual_slope(model, series, EPSILON_GRID, 0.02, 3)
    assert list(frame["epsilon"]) == EPSILON_GRID
    assert frame["fitted_slope"].iloc[0] == pytest.approx(order + 1, abs=0.1)


def test_seed_shape_and_frequency(scalar):
    series = build_series(scalar, [1.0], 3)
    K, omega = assemble_seed(series, 1e-2, 8, 8)
    assert (K.d, K.k_theta_max, K.k_x_max) == (2, 8, 8)
    assert K.parity_defect() < 1e-15
    assert K.reality_defect() < 1e-15
    assert omega[0] == pytest.approx(series.omega0[0] + 1e-4 * series.frequency_terms[1][0])


def test_series_file_is_bit_exact(scalar, tmp_path):
    series = build_series(scalar, [1.0], 3)
    path = tmp_path / "series.json"
    save_series(series, str(path))
    back = load_series(str(path))
    assert back.order == 3
    for a, b in zip(series.terms, back.terms):
        assert np.array_equal(a.coeffs, b.coeffs)
    assert np.array_equal(series.frequency_at(1e-2), back.frequency_at(1e-2))
