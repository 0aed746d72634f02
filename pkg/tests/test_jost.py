import math

import numpy as np
import pytest

from fputwaves.models import SolitaryWave
from fputwaves.services import jost, spectral
from fputwaves.utils.errors import GridTooCoarseError, InvalidInputError

C = 1.45
MU = 0.02


@pytest.fixture(scope="module")
def odd(core):
    return jost.integrate_jost(MU, C, core.base, 1, grid=core.grid)


@pytest.fixture(scope="module")
def even(core):
    return jost.integrate_jost(MU, C, core.base, 0, grid=core.grid)


def _flat_wave(grid):
    return SolitaryWave(c=C, profile=spectral.make_function(grid, np.zeros(grid.n_points), "even"),
                        measured_decay=0.0, decay_fit_r2=1.0, residual_norm=0.0)


def test_zero_potential_gives_pure_sinusoids():
    grid = spectral.lattice_grid(10, 32)
    flat = _flat_wave(grid)
    data = jost.integrate_jost(MU, C, flat, 1)
    np.testing.assert_allclose(data.r, 1.0, atol=1e-13)
    np.testing.assert_allclose(data.phi, 0.0, atol=1e-13)
    np.testing.assert_allclose(data.zeta.values[1:], np.sin(data.omega * grid.x[1:]), atol=1e-12)
    assert data.zeta.parity == "odd" and data.dzeta.parity == "even"


def test_jost_needs_a_resolving_grid(wave):
    with pytest.raises(GridTooCoarseError):
        jost.integrate_jost(MU, C, wave, 1)


def test_jost_rejects_bad_parity(core):
    with pytest.raises(InvalidInputError):
        jost.integrate_jost(MU, C, core.base, 2, grid=core.grid)


def test_initial_conditions(odd, even):
    assert odd.phi[0] == 0.0 and odd.r[0] == 1.0
    assert even.phi[0] == pytest.approx(math.pi / (2 * even.omega))
    assert even.zeta.values[even.zeta.grid.center_index] == pytest.approx(1.0)


def test_phase_is_nondecreasing(odd, even):
    for data in (odd, even):
        assert np.all(np.diff(data.phi) >= -1e-12)
        assert data.phi_inf >= data.phi[0]


def test_energy_is_nonincreasing(odd, core):
    energy = jost.energy_E1(odd, core.base)
    assert np.all(np.diff(energy) <= 1e-8 * energy.max())


def test_polar_form_matches_direct_shooting(odd, core):
    x = odd.x_half[odd.x_half <= 20.0]
    zeta, dzeta = jost.shoot_linear(MU, C, core.base, 1, x, omega=odd.omega)
    polar, dpolar = jost.reconstruct_zeta(x, odd.r[: x.size], odd.phi[: x.size], odd.omega)
    np.testing.assert_allclose(zeta, polar, atol=1e-7)
    np.testing.assert_allclose(dzeta, dpolar, atol=1e-7 * odd.omega)


def test_asymptotic_constants(odd):
    alpha, beta = jost.asymptotic_constants(odd)
    assert math.hypot(alpha, beta) == pytest.approx(odd.r_inf, rel=1e-14)
    bounds = jost.fit_bounds([odd])
    assert bounds["r_min"] <= odd.r_inf <= bounds["r_max"]


def test_gamma_is_odd_with_unit_tail(context):
    gamma = context.gamma
    assert gamma.gamma.parity == "odd"
    assert gamma.fit_residual < jost.FIT_FAIL
    assert gamma.contraction_ratio < jost.CONTRACTION_LIMIT
    assert jost.extract_theta(gamma, gamma.omega) == pytest.approx(gamma.theta_inf, abs=1e-8)
    alpha, beta = gamma.tail_coefficients
    assert math.hypot(alpha, beta) == pytest.approx(1.0)


def test_gamma_is_in_the_adjoint_kernel(context):
    assert context.gamma.adjoint_residual < 1e-5


def test_kappa_is_iota_of_chi(context):
    assert jost.iota(context.chi, context.gamma) == pytest.approx(context.kappa.kappa, rel=1e-14)
    assert context.kappa.sin_term == pytest.approx(math.sin(context.omega * context.gamma.theta_inf))
    doubled = context.chi.with_values(2.0 * context.chi.values)
    assert jost.iota(doubled, context.gamma) == pytest.approx(2.0 * context.kappa.kappa, rel=1e-14)


def test_chi_is_odd_and_localized(context):
    assert context.chi.parity == "odd"
    assert spectral.boundary_ratio(context.chi.values) < 1e-6


def test_leading_profile_shape(core):
    p = jost.leading_profile(MU, C, core.grid)
    assert p.f1.parity == "even" and p.f2.parity == "odd"
    assert np.max(np.abs(p.f2.values)) == pytest.approx(1.0, abs=1e-3)


def _synthetic_rows(mus, slope):
    return [{"mu": float(mu), "phase": -slope * math.log(mu)} for mu in mus]


def test_scan_finds_every_interval():
    mus = np.logspace(-3, -1, 60)
    intervals = jost.scan_mc(C, mus, rows=_synthetic_rows(mus, 3.0))
    assert len(intervals) == 5
    for interval in intervals[1:-1]:
        assert abs(math.sin(interval.phase_mid)) == pytest.approx(1.0, abs=1e-8)
        lo_phase = -3.0 * math.log(interval.lo)
        hi_phase = -3.0 * math.log(interval.hi)
        assert abs(math.sin(lo_phase)) == pytest.approx(0.5, abs=1e-8)
        assert abs(math.sin(hi_phase)) == pytest.approx(0.5, abs=1e-8)
        assert interval.lo < interval.midpoint < interval.hi
    assert intervals[0].lo == pytest.approx(mus[0])
    assert intervals[-1].hi == pytest.approx(mus[-1])


def test_scan_rejects_coarse_mu_grid():
    mus = np.logspace(-3, -1, 10)
    with pytest.raises(GridTooCoarseError):
        jost.scan_mc(C, mus, rows=_synthetic_rows(mus, 30.0))
