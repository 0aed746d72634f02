"""
services/dispersion.py

Linear dispersion of the dimer: the branches λ±_μ(ω), the critical
frequency ω_μ at which the light equation resonates with the wave speed,
the kernel amplitude υ_μ, the adjoint amplitude z_μ and the detuning τ_μ.
"""

import logging
import math
from typing import Iterable

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from fputwaves.models import DispersionData, ModelParams
from fputwaves.services import lattice_core
from fputwaves.utils.errors import DomainError

logger = logging.getLogger(__name__)


def lambda_pm(mu: float, omega, sign: int = 1):
    """1 + μ ± √((1+μ)² − 4μ sin²ω)."""
    disc = (1.0 + mu) ** 2 - 4.0 * mu * np.sin(omega) ** 2
    root = np.sqrt(np.maximum(disc, 0.0))
    if sign < 0:
        # rationalized so small ω keeps full precision
        return 4.0 * mu * np.sin(omega) ** 2 / (1.0 + mu + root)
    return 1.0 + mu + root


def omega_tilde(mu: float, c: float) -> float:
    return math.sqrt(2.0 / (c ** 2 * mu))


def omega_bracket(mu: float, c: float):
    return omega_tilde(mu, c), math.sqrt((2.0 + 2.0 * mu) / (c ** 2 * mu))


def symbol_matrix(mu: float, k: float) -> np.ndarray:
    """
    Real 2×2 matrix of L_μ on the pair (cos kx in component 1, sin kx in
    component 2).
    """
    l11, l12, l21, l22 = lattice_core.l_symbols(mu, np.array([k]))
    return np.array([[l11[0].real, (-1j * l12[0]).real],
                     [(1j * l21[0]).real, l22[0].real]])


def det_residual(mu: float, c: float, omega: float) -> float:
    """det(−c²ω² I_μ + L̃_μ(ω))."""
    m = symbol_matrix(mu, omega) - c ** 2 * omega ** 2 * np.diag([1.0, mu])
    return float(np.linalg.det(m))


def upsilon(mu: float, c: float, omega_mu: float) -> float:
    """First-component amplitude of the kernel ν_μ = (υ cos X, sin X)."""
    m = symbol_matrix(mu, omega_mu)
    lam = c ** 2 * mu * omega_mu ** 2
    return float(m[0, 1] / (lam - mu * m[0, 0]))


def adjoint_amplitude(mu: float, c: float, omega_mu: float) -> float:
    """z_μ of the adjoint kernel ν*_μ = (z cos X, sin X), second component normalized to 1."""
    m = symbol_matrix(mu, omega_mu)
    lam = c ** 2 * mu * omega_mu ** 2
    return float(mu * m[1, 0] / (lam - mu * m[0, 0]))


def tau(mu: float, c: float, omega_mu: float) -> float:
    """
    (c²μω² − 2 − 2μcos²ω)/(2μ²), evaluated as
    2cos²ω sin²ω / (√((1−μ)² + 4μcos²ω) + 1 − μ + 2μcos²ω), which has no cancellation.
    """
    cos2 = math.cos(omega_mu) ** 2
    sin2 = math.sin(omega_mu) ** 2
    return 2.0 * cos2 * sin2 / (math.sqrt((1.0 - mu) ** 2 + 4.0 * mu * cos2) + 1.0 - mu + 2.0 * mu * cos2)


def solve_omega(mu: float, c: float) -> DispersionData:
    ModelParams(c=c, mu=mu)
    if mu <= 0:
        raise DomainError("the critical frequency needs mu > 0")
    lo, hi = omega_bracket(mu, c)

    def f(w):
        return c ** 2 * mu * w ** 2 - lambda_pm(mu, w, 1)

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        omega = lo
    elif f_hi == 0.0:
        omega = hi
    elif f_lo * f_hi > 0:
        raise DomainError(f"no sign change of the dispersion relation in [{lo}, {hi}] (mu too large)")
    else:
        omega = float(brentq(f, lo, hi, xtol=1e-15 * hi, rtol=1e-15, maxiter=200))
    data = DispersionData(
        mu=mu,
        c=c,
        omega_mu=omega,
        upsilon_mu=upsilon(mu, c, omega),
        tau_mu=tau(mu, c, omega),
        lambda_plus_at_omega=float(lambda_pm(mu, omega, 1)),
        omega_tilde=lo,
        det_residual=det_residual(mu, c, omega),
    )
    logger.debug("omega_mu(mu=%.4g, c=%.4g) = %.15g", mu, c, omega)
    return data


def dispersion_table(c: float, mu_grid: Iterable[float]) -> pd.DataFrame:
    rows = []
    for mu in mu_grid:
        d = solve_omega(mu, c)
        rows.append({
            "mu": d.mu,
            "omega_mu": d.omega_mu,
            "upsilon_mu": d.upsilon_mu,
            "tau_mu": d.tau_mu,
            "lambda_plus": d.lambda_plus_at_omega,
        })
    return pd.DataFrame(rows, columns=["mu", "omega_mu", "upsilon_mu", "tau_mu", "lambda_plus"])
