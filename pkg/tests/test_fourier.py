import math

import numpy as np
import pytest

from fourier.grid import grid_to_modes, interpolate, mode_decay_rate, modes_to_grid
from fourier.norms import NormParams, norm_rho_m, sup_norm_strip
from fourier.serialization import array_from_dict, array_to_dict, dumps, loads
from fourier.torus_map import (
    Parity,
    TorusMap,
    add,
    average,
    omega_derivative,
    partial_x,
    phase_shift,
    product,
    stack,
    symmetrize,
)
from utils.errors import StructuralError


def cos_theta(ell=1, k=(1,), kt=None):
    return TorusMap.trig(ell, list(k), 0, k_theta_max=kt)


def test_trig_coefficients():
    t = TorusMap.trig(1, [1], 1)
    for s1 in (1, -1):
        for s2 in (1, -1):
            assert t.coeff([s1], s2)[0] == pytest.approx(0.25)
    assert t.reality_defect() == 0.0
    assert t.parity_defect() == 0.0
    assert t.parity == ((Parity.EVEN, Parity.EVEN),)


def test_diamond_truncation_is_enforced():
    coeffs = np.ones((1, 5, 5, 3), dtype=complex)
    t = TorusMap(coeffs, 2, 2, 1)
    assert t.coeff([2, 1], 0)[0] == 0.0
    assert t.coeff([1, 1], 0)[0] == 1.0


def test_angle_dimension_limits():
    with pytest.raises(StructuralError):
        TorusMap.zeros(4, 1, 1, 1)


def test_mismatched_dimensions_rejected():
    with pytest.raises(StructuralError):
        add(TorusMap.zeros(1, 1, 1, 1), TorusMap.zeros(2, 1, 1, 1))


def test_product_is_exact():
    # cos² = ½ + ½ cos(2·)
    c = cos_theta()
    sq = product(c, c)
    assert sq.k_theta_max == 2
    assert sq.coeff([0], 0)[0] == pytest.approx(0.5)
    assert sq.coeff([2], 0)[0] == pytest.approx(0.25)
    assert sq.coeff([1], 0)[0] == pytest.approx(0.0)
    assert sq.parity == ((Parity.EVEN, Parity.EVEN),)


def test_partial_x_multiplier():
    t = TorusMap.trig(1, [0], 2, k_theta_max=0)
    dx = partial_x(t, 1)
    assert dx.coeff([0], 2)[0] == pytest.approx(0.5 * 2j * math.pi * 2)
    assert dx.parity[0][1] is Parity.ODD


def test_omega_derivative_and_average():
    t = cos_theta(ell=2, k=(1, 2))
    d = omega_derivative(t, [1.0, 0.5])
    assert d.coeff([1, 2], 0)[0] == pytest.approx(0.5 * 2j * math.pi * 2.0)
    assert np.allclose(average(d), 0.0)
    assert average(product(t, t))[0] == pytest.approx(0.5)


def test_omega_length_checked():
    with pytest.raises(StructuralError):
        omega_derivative(cos_theta(), [1.0, 2.0])


def test_phase_shift_rotates_coefficients():
    shifted = phase_shift(cos_theta(), [0.1])
    assert shifted.coeff([1], 0)[0] == pytest.approx(0.5 * np.exp(2j * math.pi * 0.1))
    assert shifted.parity[0][0] is Parity.NONE
    back = phase_shift(shifted, [-0.1])
    assert np.allclose(back.coeffs, cos_theta().coeffs, atol=1e-15)


def test_symmetrize_projects_parity():
    mixed = add(TorusMap.trig(1, [1], 1, theta="cos"),
                TorusMap.trig(1, [1], 1, theta="sin").with_parity(((Parity.ODD, Parity.EVEN),)))
    even = symmetrize(mixed, ((Parity.EVEN, Parity.EVEN),))
    assert np.allclose(even.coeffs, TorusMap.trig(1, [1], 1).coeffs)


def test_truncate_reports_tail():
    t = product(cos_theta(), cos_theta())
    kept, tail = t.truncate(1, 0)
    assert tail == pytest.approx(math.sqrt(2 * 0.25 ** 2))
    assert kept.coeff([0], 0)[0] == pytest.approx(0.5)


def test_norm_rho_m_of_a_single_mode():
    t = TorusMap.trig(1, [1], 1)
    assert norm_rho_m(t, NormParams(rho=1e-12, m=0)) == pytest.approx(1.0)
    rho = 0.01
    assert norm_rho_m(t, NormParams(rho=rho, m=0)) == pytest.approx(math.exp(4 * math.pi * rho))
    assert sup_norm_strip(t, rho) == pytest.approx(math.exp(4 * math.pi * rho))


def test_norm_is_monotone_in_rho_and_m():
    t = add(TorusMap.trig(1, [2], 3), TorusMap.trig(1, [1], 1).pad(2, 3))
    assert norm_rho_m(t, NormParams(0.01, 2)) > norm_rho_m(t, NormParams(0.001, 2)) > norm_rho_m(t, NormParams(0.001, 0))


def test_norm_params_validation():
    with pytest.raises(ValueError):
        NormParams(rho=-0.1)
    with pytest.raises(ValueError):
        NormParams(rho=0.0)
    with pytest.raises(ValueError):
        NormParams(rho=0.1, nu=0.5, ell=2)
    assert NormParams(rho=0.1, nu=1.0, ell=2).shrink(0.05).ell == 2
    with pytest.raises(ValueError):
        NormParams(rho=0.1).shrink(0.1)
    with pytest.raises(ValueError):
        NormParams(rho=0.1, m=[1, -1])


def test_grid_transforms_invert():
    rng = np.random.default_rng(0)
    modes = rng.normal(size=(7, 7, 2)) + 1j * rng.normal(size=(7, 7, 2))
    back = grid_to_modes(modes_to_grid(modes, 2, 16), 2, 3)
    mask = np.abs(np.arange(-3, 4)[:, None]) + np.abs(np.arange(-3, 4)[None, :]) <= 3
    assert np.allclose(back, modes * mask[..., None])


def test_interpolate_matches_grid():
    modes = cos_theta().coeffs[0, :, 0]
    assert interpolate(modes, 1, [0.25]) == pytest.approx(0.0, abs=1e-15)
    assert interpolate(modes, 1, [0.0]) == pytest.approx(1.0)


def test_mode_decay_rate_recovers_strip_width():
    rho = 0.05
    ks = np.arange(-10, 11)
    modes = np.exp(-2 * math.pi * rho * np.abs(ks)).astype(complex)
    assert mode_decay_rate(modes, 1) == pytest.approx(rho, rel=1e-6)


def test_serialization_is_bit_exact():
    t = stack([phase_shift(TorusMap.trig(2, [1, -1], 2), [0.3, 0.1]), TorusMap.trig(2, [0, 1], 1, x="sin")])
    back = loads(dumps(t))
    assert np.array_equal(back.coeffs, t.coeffs)
    assert back.parity == t.parity
    assert back.zero_mean == t.zero_mean

    arr = np.array([[1 / 3, 2.0], [np.pi, -0.0]])
    assert np.array_equal(array_from_dict(array_to_dict(arr)), arr)
