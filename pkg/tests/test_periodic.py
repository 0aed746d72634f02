import math

import numpy as np
import pytest

from fputwaves.services import dispersion, lattice_core, periodic, spectral
from fputwaves.utils.errors import InvalidInputError

C = 1.45
MU = 0.05


@pytest.fixture(scope="module")
def small_wave():
    return periodic.solve_periodic(MU, C, 0.01)


def test_zero_amplitude_is_the_linear_kernel():
    wave = periodic.solve_periodic(MU, C, 0.0)
    d = dispersion.solve_omega(MU, C)
    assert wave.omega_a == pytest.approx(d.omega_mu, rel=1e-12)
    assert wave.coeffs2[0] == pytest.approx(1.0, abs=1e-12)
    assert wave.coeffs1[0] == pytest.approx(d.upsilon_mu, rel=1e-9)
    assert np.max(np.abs(wave.coeffs1[1:])) < 1e-12
    assert np.max(np.abs(wave.coeffs2[1:])) < 1e-12


def test_kernel_residuals_vanish():
    forward, adjoint = periodic.kernel_residuals(MU, C)
    assert forward < 1e-9
    assert adjoint < 1e-9


def test_small_amplitude_wave_solves_the_lattice_equation(small_wave):
    assert periodic.spatial_residual(small_wave) < 1e-9
    assert abs(small_wave.omega_a - small_wave.omega_mu) < 1.0
    assert periodic.projection_pi(small_wave.coeffs1, small_wave.coeffs2, MU, C) == pytest.approx(1.0, abs=1e-10)


def test_profile_parity(small_wave):
    x = np.linspace(0.1, 7.0, 25)
    p1, p2 = periodic.evaluate(small_wave, x)
    m1, m2 = periodic.evaluate(small_wave, -x)
    np.testing.assert_allclose(p1, m1, atol=1e-14)
    np.testing.assert_allclose(p2, -m2, atol=1e-14)


def test_evaluate_derivatives_match_spectral_derivative(small_wave):
    grid = periodic.commensurate_grid(small_wave)
    p1, p2 = periodic.evaluate(small_wave, grid.x)
    for order in (1, 2):
        d1, d2 = periodic.evaluate(small_wave, grid.x, derivative=order)
        scale = small_wave.a * small_wave.omega_a ** order
        assert np.max(np.abs(d1 - spectral.derivative(p1, grid, order))) < 1e-9 * scale
        assert np.max(np.abs(d2 - spectral.derivative(p2, grid, order))) < 1e-9 * scale


def test_transformed_profile_matches_T(small_wave):
    grid = periodic.commensurate_grid(small_wave)
    p1, p2 = periodic.evaluate(small_wave, grid.x, scaled=False)
    t1, t2 = lattice_core.T_values(MU, grid, p1, p2)
    q1, q2 = periodic.transformed(small_wave, grid.x, scaled=False)
    np.testing.assert_allclose(q1, t1, atol=1e-11)
    np.testing.assert_allclose(q2, t2, atol=1e-11)


def test_lipschitz_constants_are_finite():
    k_omega, k_coeff = periodic.lipschitz_constants(MU, C, [0.0, 0.005, 0.01])
    assert math.isfinite(k_omega) and math.isfinite(k_coeff)
    assert k_coeff > 0


def test_linear_solve_rejects_adjoint_component():
    g1 = np.zeros(periodic.MIN_MODES)
    g2 = np.zeros(periodic.MIN_MODES)
    g2[0] = 1.0
    with pytest.raises(InvalidInputError):
        periodic.solve_linear_periodic(MU, C, g1, g2)


@pytest.mark.parametrize("kwargs", [{"a": 0.01, "n_modes": 8}, {"a": float("inf")}])
def test_invalid_periodic_inputs(kwargs):
    with pytest.raises(InvalidInputError):
        periodic.solve_periodic(MU, C, **kwargs)


def test_block_bound_decreases_with_mode():
    assert periodic.block_bound(MU, C, 4) < periodic.block_bound(MU, C, 2)
