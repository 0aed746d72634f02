import math

import numpy as np
import pytest

from fputwaves.utils import krylov
from fputwaves.utils.errors import (EXIT_SOLVER, EXIT_VALIDATION, ConvergenceError, DomainError, FitError,
                                    InvalidInputError, NotInMcError, require)
from fputwaves.utils.fitting import fit_exponential_tail, fit_line, fit_sech2, fit_sinusoid, loglog_slope
from fputwaves.utils.grids import parse_mu_grid
from fputwaves.utils.workers import SweepPool


def test_parse_log_grid():
    values = parse_mu_grid("log:1e-4:1e-1:4")
    np.testing.assert_allclose(values, [1e-4, 1e-3, 1e-2, 1e-1])


def test_parse_list_grid():
    assert parse_mu_grid("list:0.01, 0.02") == [0.01, 0.02]


@pytest.mark.parametrize("spec", ["log:0.1:0.01:5", "log:1e-3:2:5", "list:", "list:0.5,abc", "lin:0.1:0.2:3",
                                  "log:1e-3:1e-2"])
def test_parse_rejects_bad_grids(spec):
    with pytest.raises(InvalidInputError):
        parse_mu_grid(spec)


def test_exit_codes_follow_error_family():
    assert DomainError("x").exit_code == EXIT_VALIDATION
    assert NotInMcError("x").exit_code == EXIT_SOLVER
    assert ConvergenceError("x", {"history": [1.0]}).diagnostics == {"history": [1.0]}


def test_require():
    require(True, "fine")
    with pytest.raises(FitError):
        require(False, "broken", FitError)


def test_fit_line_and_loglog_slope():
    x = np.linspace(1, 5, 20)
    fit = fit_line(x, 3 * x - 2)
    assert fit.slope == pytest.approx(3.0)
    assert fit.intercept == pytest.approx(-2.0)
    assert fit.r2 == pytest.approx(1.0)
    assert loglog_slope(x, 7 * x ** 2.5).slope == pytest.approx(2.5)
    with pytest.raises(FitError):
        loglog_slope([1.0, 2.0], [0.0, 1.0])


def test_exponential_tail_rate():
    x = np.linspace(10, 20, 30)
    assert fit_exponential_tail(x, 4 * np.exp(-0.7 * x)).slope == pytest.approx(0.7)


def test_fit_sinusoid_recovers_amplitude_and_phase():
    omega, theta = 6.0, 0.2
    x = np.linspace(30, 50, 400)
    fit = fit_sinusoid(x, 2.5 * np.sin(omega * (x + theta)), omega, phase_near=0.1)
    assert fit.amplitude == pytest.approx(2.5)
    assert fit.phase == pytest.approx(theta)
    assert fit.residual < 1e-12
    shifted = fit_sinusoid(x, 2.5 * np.sin(omega * (x + theta)), omega, phase_near=theta + 2 * math.pi / omega)
    assert shifted.phase == pytest.approx(theta + 2 * math.pi / omega)


def test_fit_sech2():
    x = np.linspace(-5, 5, 101)
    amplitude, width, misfit = fit_sech2(x, 0.8 / np.cosh(0.6 * x) ** 2, p0=(0.75, 0.5))
    assert amplitude == pytest.approx(0.8, rel=1e-6)
    assert width == pytest.approx(0.6, rel=1e-6)
    assert misfit < 1e-8


def test_krylov_solves_a_diagonal_system():
    d = np.linspace(1, 2, 50)
    rhs = np.ones(50)
    np.testing.assert_allclose(krylov.solve(lambda v: d * v, rhs, rtol=1e-13), 1 / d, rtol=1e-10)


def test_pool_runs_serially_in_order():
    pool = SweepPool(n_jobs=1)
    assert pool.map(pow, [1, 2, 3], exp=2) == [1, 4, 9]
    assert pool.map(pow, []) == []
    with pytest.raises(ValueError):
        pool.configure(0)
