import math

import numpy as np
import pytest
from pydantic import ValidationError

from fputwaves.services import dispersion
from fputwaves.utils.errors import DomainError

C = 1.45


@pytest.mark.parametrize("mu", [1e-4, 0.004, 0.02, 0.1, 0.5])
def test_critical_frequency_lies_in_bracket(mu):
    d = dispersion.solve_omega(mu, C)
    lo, hi = dispersion.omega_bracket(mu, C)
    assert lo <= d.omega_mu <= hi
    relation = C ** 2 * mu * d.omega_mu ** 2 - dispersion.lambda_pm(mu, d.omega_mu, 1)
    assert abs(relation) < 1e-12 * C ** 2 * mu * d.omega_mu ** 2
    assert d.omega_tilde == pytest.approx(math.sqrt(2 / (C ** 2 * mu)))


@pytest.mark.parametrize("mu", [0.004, 0.05])
def test_determinant_vanishes_at_critical_frequency(mu):
    d = dispersion.solve_omega(mu, C)
    scale = (C * d.omega_mu) ** 2
    assert abs(d.det_residual) < 1e-10 * scale


def test_kernel_vectors(mu=0.03):
    d = dispersion.solve_omega(mu, C)
    m = dispersion.symbol_matrix(mu, d.omega_mu) - C ** 2 * d.omega_mu ** 2 * np.diag([1.0, mu])
    # kernel in unscaled form (μυ cos, sin)
    v = m @ np.array([mu * d.upsilon_mu, 1.0])
    assert np.max(np.abs(v)) < 1e-8 * np.max(np.abs(m))
    z = dispersion.adjoint_amplitude(mu, C, d.omega_mu)
    block = m @ np.diag([mu, 1.0])
    assert np.max(np.abs(block.T @ np.array([z, 1.0]))) < 1e-8 * np.max(np.abs(block))


@pytest.mark.parametrize("mu", [0.01, 0.05, 0.2])
def test_tau_matches_direct_formula(mu):
    d = dispersion.solve_omega(mu, C)
    w = d.omega_mu
    direct = (C ** 2 * mu * w ** 2 - 2 - 2 * mu * math.cos(w) ** 2) / (2 * mu ** 2)
    assert d.tau_mu == pytest.approx(direct, rel=1e-6, abs=1e-9)
    assert d.tau_mu >= 0


def test_lower_branch_rationalization():
    mu, w = 0.3, np.linspace(0.01, 3.0, 50)
    direct = 1 + mu - np.sqrt((1 + mu) ** 2 - 4 * mu * np.sin(w) ** 2)
    np.testing.assert_allclose(dispersion.lambda_pm(mu, w, -1), direct, rtol=1e-10)
    assert np.all(dispersion.lambda_pm(mu, w, 1) >= 2.0 - 1e-12)


def test_critical_frequency_grows_like_one_over_sqrt_mu():
    small = dispersion.solve_omega(1e-4, C).omega_mu
    assert small * math.sqrt(1e-4) == pytest.approx(math.sqrt(2) / C, rel=1e-3)


def test_invalid_parameters():
    with pytest.raises(DomainError):
        dispersion.solve_omega(0.0, C)
    with pytest.raises(ValidationError):
        dispersion.solve_omega(0.01, 1.4)
    with pytest.raises(ValidationError):
        dispersion.solve_omega(1.2, C)


def test_dispersion_table_columns():
    table = dispersion.dispersion_table(C, [0.01, 0.02])
    assert list(table.columns) == ["mu", "omega_mu", "upsilon_mu", "tau_mu", "lambda_plus"]
    assert table["omega_mu"].is_monotonic_decreasing
