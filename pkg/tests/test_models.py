import math

import numpy as np
import pytest

from fourier.torus_map import Parity, TorusMap, stack
from models.boussinesq import BoussinesqScalar, BoussinesqSystem, get_model
from models.fiber import from_fiber, symplectic_fiber, to_fiber
from models.spectrum import center_analysis, dispersion, ill_posedness_witness, require_center
from utils.errors import ConfigError, ConstraintError, DegenerateParameterError

MU = 1.0 / (8.0 * math.pi ** 2)


def test_scalar_has_one_center_mode(scalar):
    report = center_analysis(scalar, 16)
    assert report.ell == 1
    assert report.center_modes == [1]
    # σ² = −(2π)²(1 − 4π²μ) = −2π², so ω⁰ = √½ cycles per unit time
    assert report.omega0[0] == pytest.approx(math.sqrt(0.5))
    classes = {(m.j, m.klass) for m in report.modes}
    assert (2, "stable") in classes and (2, "unstable") in classes


def test_spectrum_frame_columns(scalar):
    frame = center_analysis(scalar, 4).to_frame()
    assert list(frame.columns) == ["j", "re_sigma", "im_sigma", "class"]
    assert len(frame) == 1 + 2 * 3


def test_resonant_mu_is_degenerate():
    with pytest.raises(DegenerateParameterError):
        center_analysis(BoussinesqScalar(1.0 / (4.0 * math.pi ** 2)), 8)


def test_nonpositive_mu_rejected():
    with pytest.raises(DegenerateParameterError):
        BoussinesqScalar(0.0)


def test_system_dispersion_matches_mode_substitution(system):
    for j in range(1, 6):
        q = 2 * math.pi * j
        plus, minus = dispersion(system, j)
        gap = 1 - 4 * math.pi ** 2 * MU * j * j
        if gap > 0:
            assert plus.imag == pytest.approx(q * math.sqrt(gap))
            assert plus.real == pytest.approx(0.0, abs=1e-12)
        else:
            assert plus.real == pytest.approx(q * math.sqrt(-gap))
            assert minus.real == pytest.approx(-q * math.sqrt(-gap))


def test_both_models_share_the_spectrum(scalar, system):
    a = center_analysis(scalar, 8)
    b = center_analysis(system, 8)
    assert a.center_modes == b.center_modes
    assert np.allclose(a.omega0, b.omega0)


def test_require_center_checks_truncation(scalar):
    report = center_analysis(scalar, 2)
    with pytest.raises(ConfigError):
        require_center(report, 3)
    assert require_center(report, 4).ell == 1


def test_ill_posedness_growth_is_quadratic(scalar):
    frame, slope = ill_posedness_witness(scalar, 64)
    assert frame["max_re_sigma"].iloc[0] == 0.0
    assert slope == pytest.approx(2.0, abs=0.05)


def test_unknown_model():
    with pytest.raises(ConfigError):
        get_model("kdv", MU)
    assert isinstance(get_model("boussinesq-system", MU), BoussinesqSystem)


def test_space_indices(scalar, system):
    assert scalar.space_indices(3) == ((3, 1), (2, 0))
    assert system.space_indices(3) == ((3, 4), (2, 3))


def test_linear_part_on_a_single_mode(scalar):
    u = TorusMap.trig(1, [0], 1, k_theta_max=0)
    z = stack([u, TorusMap.zeros(1, 1, 0, 1)])
    out = scalar.apply_linear(z)
    q = 2 * math.pi
    assert np.allclose(out.coeffs[0], 0.0)
    assert out.coeff([0], 1)[1] == pytest.approx(0.5 * (-q ** 2 + MU * q ** 4))


def test_zero_torus_is_invariant(scalar, system):
    for model in (scalar, system):
        K = TorusMap.zeros(1, 2, 4, 4, parity=model.component_parity, zero_mean=True)
        assert model.residual(K, [math.sqrt(0.5)]).is_zero()


def test_mean_constraint(scalar):
    K = TorusMap.constant(1, [1.0, 0.0], 1, 2)
    with pytest.raises(ConstraintError):
        scalar.apply_vectorfield(K)
    cleaned = scalar.enforce_constraints(K)
    assert np.all(cleaned.coeffs[..., cleaned.k_x_max] == 0)


def test_fiber_coordinates_invert(system):
    u = TorusMap.trig(1, [1], 2, k_theta_max=2, k_x_max=3)
    v = TorusMap.trig(1, [1], 1, theta="sin", x="sin", k_theta_max=2, k_x_max=3)
    z = stack([u, v])
    back = from_fiber(to_fiber(z, system.fiber_kinds), 1, 2, 3, system.fiber_kinds, system.component_parity)
    assert np.allclose(back.coeffs, z.coeffs)
    assert back.parity[1] == (Parity.ODD, Parity.ODD)


def test_symplectic_fiber_is_antisymmetric(scalar, system):
    for model in (scalar, system):
        J = symplectic_fiber(model, 6)
        assert np.allclose(J, -J.T)
        assert np.linalg.matrix_rank(J) == 12


def test_scalar_hamiltonian_of_a_linear_mode(scalar):
    # u = a cos(2πx), w = 0: H = ½·a²/2 − ½μ(2π)²a²/2
    a = 0.1
    z = stack([TorusMap.trig(1, [0], 1, amplitude=a, k_theta_max=0), TorusMap.zeros(1, 1, 0, 1)])
    expected = 0.25 * a ** 2 - 0.25 * MU * (2 * math.pi) ** 2 * a ** 2
    assert scalar.hamiltonian(z) == pytest.approx(expected)


def test_system_energy_is_the_quadratic_part(system):
    # u = a cos(2πx), v = b sin(2πx): H₂ = ¼a² + ¼b²(1 − μ(2π)²)
    a, b = 0.1, 0.3
    z = stack([TorusMap.trig(1, [0], 1, amplitude=a, k_theta_max=0),
               TorusMap.trig(1, [0], 1, x="sin", amplitude=b, k_theta_max=0)])
    expected = 0.25 * a ** 2 + 0.25 * b ** 2 * (1.0 - MU * (2 * math.pi) ** 2)
    assert system.hamiltonian(z) == pytest.approx(expected)
    # no cubic term: the energy is even in z
    assert system.hamiltonian(z.with_coeffs(-z.coeffs)) == pytest.approx(expected)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_system_linear_field_is_the_energy_gradient(system, j):
    # J·X = ∇H₂ per harmonic, with Hessian diag(1, 1 − μq²) on the fiber basis
    q = 2 * math.pi * j
    hessian = system.fiber_j(j) @ system.fiber_block(j)
    assert np.allclose(hessian, np.diag([1.0, 1.0 - MU * q ** 2]))
