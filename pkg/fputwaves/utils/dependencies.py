"""
utils/dependencies.py

Cached providers for the objects every (c, μ) computation depends on. Commands
and sweeps ask for a context here instead of rebuilding the chain
σ_c → ξ_μ → Jost solutions → γ_μ → κ_μ each time.
"""

import logging
from functools import lru_cache
from typing import Optional

from fputwaves.config import settings
from fputwaves.models import LightContext, ModelParams, RefinedCore, SolitaryWave
from fputwaves.services import dispersion, jost, solitary, spectral

logger = logging.getLogger(__name__)


@lru_cache(maxsize=16)
def get_solitary(c: float, omega: float = 0.0, half_length: Optional[float] = None) -> SolitaryWave:
    """σ_c on a grid resolving frequency `omega` (plain lattice grid when omega is 0)."""
    half_length = half_length or settings.DEFAULT_HALF_LENGTH
    if omega > 0:
        grid = spectral.grid_for_frequency(omega, half_length)
    else:
        grid = spectral.lattice_grid(half_length)
    return solitary.solve_monatomic(c, grid)


@lru_cache(maxsize=16)
def get_core(c: float, mu: float, half_length: Optional[float] = None) -> RefinedCore:
    ModelParams(c=c, mu=mu)
    omega = dispersion.solve_omega(mu, c).omega_mu if mu > 0 else 0.0
    return solitary.refine_core(c, mu, get_solitary(c, omega, half_length))


@lru_cache(maxsize=16)
def get_light_context(c: float, mu: float, half_length: Optional[float] = None) -> LightContext:
    params = ModelParams(c=c, mu=mu)
    disp = dispersion.solve_omega(mu, c)
    core = get_core(c, mu, half_length)
    base = core.base
    grid = core.grid
    jost_even = jost.integrate_jost(mu, c, base, 0, grid=grid, omega=disp.omega_mu)
    jost_odd = jost.integrate_jost(mu, c, base, 1, grid=grid, omega=disp.omega_mu)
    gamma = jost.compute_gamma(mu, c, jost_odd, core, partner=jost_even)
    kappa, chi = jost.kappa(mu, c, gamma, core)
    logger.info("light context c=%.4g mu=%.4g: omega=%.8f theta=%.8f kappa=%.4e", c, mu, disp.omega_mu,
                gamma.theta_inf, kappa.kappa)
    return LightContext(params=params, dispersion=disp, core=core, jost_even=jost_even, jost_odd=jost_odd,
                        gamma=gamma, kappa=kappa, chi=chi)


def clear_caches() -> None:
    get_solitary.cache_clear()
    get_core.cache_clear()
    get_light_context.cache_clear()
