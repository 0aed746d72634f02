import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf

from fputwaves.models import GridFunction
from fputwaves.services import spectral
from fputwaves.utils.errors import GridTooCoarseError, InvalidInputError


def test_lattice_grid_is_commensurate():
    grid = spectral.lattice_grid(10, 8)
    assert grid.n_points == 160
    assert grid.dx == pytest.approx(0.125)
    assert grid.is_lattice_commensurate
    assert grid.x[grid.center_index] == pytest.approx(0.0)


def test_grid_for_frequency_resolves_frequency():
    grid = spectral.grid_for_frequency(20.0, 10)
    assert grid.resolves(20.0)
    assert grid.is_lattice_commensurate
    spectral.check_resolution(grid, 20.0)


def test_check_resolution_rejects_coarse_grid():
    with pytest.raises(GridTooCoarseError):
        spectral.check_resolution(spectral.lattice_grid(10, 1), 5.0)


def test_derivative_of_periodic_mode_is_exact():
    grid = spectral.lattice_grid(10, 8)
    k = 2 * math.pi * 3 / 20
    d = spectral.derivative(np.sin(k * grid.x), grid)
    np.testing.assert_allclose(d, k * np.cos(k * grid.x), atol=1e-11)
    d2 = spectral.derivative(np.sin(k * grid.x), grid, order=2)
    np.testing.assert_allclose(d2, -k ** 2 * np.sin(k * grid.x), atol=1e-10)


def test_antiderivative_of_gaussian_is_error_function():
    grid = spectral.lattice_grid(20, 8)
    F = spectral.antiderivative(np.exp(-grid.x ** 2), grid)
    np.testing.assert_allclose(F, 0.5 * math.sqrt(math.pi) * erf(grid.x), atol=1e-10)


def test_unit_shift_is_an_exact_roll():
    grid = spectral.lattice_grid(10, 8)
    f = np.exp(-grid.x ** 2)
    np.testing.assert_array_equal(spectral.shift_values(f, grid, 1.0), np.roll(f, -8))


def test_fractional_shift_of_periodic_mode():
    grid = spectral.lattice_grid(10, 8)
    k = 2 * math.pi / 20
    shifted = spectral.shift_values(np.cos(k * grid.x), grid, 0.3)
    np.testing.assert_allclose(shifted, np.cos(k * (grid.x + 0.3)), atol=1e-12)


def test_symmetrize_odd_zeroes_fixed_points():
    grid = spectral.lattice_grid(10, 8)
    odd = spectral.symmetrize(np.exp(grid.x / 3), "odd")
    assert odd[grid.center_index] == 0.0
    assert odd[0] == 0.0
    np.testing.assert_allclose(odd[1:], -spectral.reflect_values(odd)[1:])


def test_grid_function_rejects_wrong_parity():
    grid = spectral.lattice_grid(10, 8)
    with pytest.raises(ValueError):
        GridFunction(grid=grid, values=grid.x, parity="even")


def test_weighted_norm_matches_closed_form():
    grid = spectral.lattice_grid(20, 8)
    f = spectral.sample(grid, lambda x: np.exp(-x ** 2), "even")
    assert spectral.weighted_norm(f) == pytest.approx(math.sqrt(math.sqrt(math.pi / 2)), rel=1e-10)
    assert spectral.weighted_norm(f.with_values(np.zeros(grid.n_points)), s=2, b=0.5) == 0.0
    assert spectral.weighted_norm(f, s=1) > spectral.weighted_norm(f)


def test_grid_function_rejects_small_odd_contamination():
    grid = spectral.lattice_grid(20.0)
    values = np.exp(-grid.x ** 2) + 1e-10 * grid.x * np.exp(-grid.x ** 2 / 8)
    with pytest.raises(ValueError):
        GridFunction(grid=grid, values=values, parity="even")
    assert GridFunction(grid=grid, values=np.exp(-grid.x ** 2), parity="even").parity_defect() == 0.0


def test_with_values_projects_onto_parity():
    grid = spectral.lattice_grid(10, 8)
    f = spectral.sample(grid, lambda x: x ** 3, "odd")
    g = f.with_values(np.sin(grid.x) + 1e-9 * np.cos(grid.x))
    assert g.parity == "odd"
    assert g.parity_defect() == 0.0


def test_mean_zero_project_sends_constants_to_zero():
    grid = spectral.lattice_grid(40.0)
    f = spectral.sample(grid, lambda x: np.full_like(x, 3.5), "even")
    np.testing.assert_allclose(spectral.mean_zero_project(f).values, 0.0, atol=1e-14)


def test_mean_zero_project_is_idempotent():
    grid = spectral.lattice_grid(40.0)
    once = spectral.mean_zero_project(spectral.sample(grid, lambda x: 1 / np.cosh(x) ** 2, "even"))
    twice = spectral.mean_zero_project(once)
    np.testing.assert_allclose(twice.values, once.values, rtol=0, atol=1e-14)
    assert twice.parity == "even"


def test_mean_zero_project_removes_quadrature_mean():
    grid = spectral.lattice_grid(40.0)
    values = 1 / np.cosh(grid.x) ** 2 + 0.1
    projected = spectral.mean_zero_project(GridFunction(grid=grid, values=values))
    mean = grid.dx * math.fsum(values) / (2 * grid.half_length)
    assert mean == pytest.approx(0.1 + 2 / 80, rel=1e-12)
    np.testing.assert_allclose(projected.values, values - mean, rtol=0, atol=1e-14)


def test_mean_zero_project_rejects_odd_fields():
    grid = spectral.lattice_grid(10, 8)
    with pytest.raises(InvalidInputError):
        spectral.mean_zero_project(spectral.sample(grid, np.sin, "odd"))
    with pytest.raises(InvalidInputError):
        spectral.mean_zero_project(GridFunction(grid=grid, values=np.exp(grid.x / 5)))


def test_weighted_norm_against_adaptive_quadrature():
    grid = spectral.lattice_grid(40.0)
    f = spectral.sample(grid, lambda x: 1 / np.cosh(x), "even")
    assert spectral.weighted_norm(f) == pytest.approx(math.sqrt(2.0), rel=1e-8)
    reference, _ = quad(lambda x: (np.cosh(x) ** 0.5 / np.cosh(x)) ** 2, -40.0, 40.0, limit=200,
                        epsabs=1e-14, epsrel=1e-13)
    assert spectral.weighted_norm(f, b=0.5) == pytest.approx(math.sqrt(reference), rel=1e-8)
    # (1 + k²)² weight: ∫ f² + 2 f'² + f''² = 2 + 4/3 + 14/15 for sech
    assert spectral.weighted_norm(f, s=2) == pytest.approx(math.sqrt(64 / 15), rel=1e-8)


@pytest.mark.parametrize("b", [0.0, 0.25, 0.5])
def test_weighted_norm_grows_with_s(b):
    grid = spectral.lattice_grid(40.0)
    f = spectral.sample(grid, lambda x: 1 / np.cosh(x), "even")
    norms = [spectral.weighted_norm(f, s=s, b=b) for s in range(4)]
    assert all(lo <= hi for lo, hi in zip(norms, norms[1:]))


@pytest.mark.parametrize("s", [0, 1])
def test_weighted_norm_grows_with_b(s):
    grid = spectral.lattice_grid(40.0)
    f = spectral.sample(grid, lambda x: 1 / np.cosh(x), "even")
    norms = [spectral.weighted_norm(f, s=s, b=b) for b in (0.0, 0.25, 0.5)]
    assert all(lo <= hi for lo, hi in zip(norms, norms[1:]))


def test_weighted_norm_rejects_negative_index():
    grid = spectral.lattice_grid(10, 8)
    with pytest.raises(InvalidInputError):
        spectral.weighted_norm(spectral.sample(grid, np.cos), s=-1)


def test_auto_extend_doubles_until_decayed():
    grid, values = spectral.auto_extend(lambda g: np.exp(-0.5 * np.abs(g.x)), spectral.lattice_grid(10, 8))
    assert grid.half_length == 80
    assert spectral.boundary_ratio(values) < 1e-10


def test_smooth_step_and_cutoff():
    x = np.linspace(-3, 3, 601)
    step = spectral.smooth_step(x, 0.0, 1.0)
    assert np.all(np.diff(step) >= 0)
    assert step[0] == 0.0 and step[-1] == 1.0
    chi = spectral.cutoff_i1(x)
    np.testing.assert_allclose(chi, -chi[::-1])
    assert np.all(chi[np.abs(x) <= 0.5] == 0.0)
    np.testing.assert_array_equal(chi[np.abs(x) >= 2], np.sign(x[np.abs(x) >= 2]))


def test_interpolate_reproduces_samples_and_modes():
    grid = spectral.lattice_grid(10, 8)
    k = 2 * math.pi * 2 / 20
    f = spectral.sample(grid, lambda x: np.sin(k * x), "odd")
    np.testing.assert_allclose(spectral.interpolate(f, grid.x), f.values, atol=1e-12)
    x = np.array([-3.33, 0.1, 7.77])
    np.testing.assert_allclose(spectral.interpolate(f, x), np.sin(k * x), atol=1e-12)


def test_json_round_trip_keeps_metadata():
    grid = spectral.lattice_grid(4, 8)
    f = spectral.sample(grid, lambda x: np.exp(-x ** 2), "even", decay_rate=0.5)
    back = spectral.from_json(spectral.to_json(f))
    assert back.grid == grid
    assert back.parity == "even"
    np.testing.assert_array_equal(back.values, f.values)


def test_ensure_finite():
    with pytest.raises(InvalidInputError):
        spectral.ensure_finite(np.array([1.0, np.nan]))
