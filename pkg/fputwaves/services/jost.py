"""
services/jost.py

Jost solutions of the Schrödinger operator S_μ = c²μ(∂² + ω_μ²) + 4σ_c,
integrated in polar form, and the odd kernel function γ_μ of the adjoint
light operator L*_μ = S_μ + μΔ_μ + μK*_μ built from them by variation of
parameters and a Neumann series. γ_μ fixes the solvability functional
ι_μ, the constant κ_μ and the admissible set M_c of mass ratios.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from fputwaves.models import (
    GammaData, Grid, GridFunction, JostData, KappaData, McInterval, ModelParams,
    RefinedCore, SolitaryWave, TwoField,
)
from fputwaves.services import dispersion, lattice_core, solitary, spectral
from fputwaves.utils.errors import (
    FitError, GridTooCoarseError, NonContractionError, StiffnessError, require,
)
from fputwaves.utils.fitting import SinusoidFit, fit_sinusoid
from fputwaves.utils.workers import pool

logger = logging.getLogger(__name__)

ODE_RTOL = 1e-11
ODE_ATOL = 1e-13
STEPS_PER_PERIOD = 20
NEUMANN_TOLERANCE = 1e-10
NEUMANN_MAX_TERMS = 50
CONTRACTION_LIMIT = 0.9
WRAP_MARGIN = 3.0
FIT_WINDOW = (0.6, 0.9)
FIT_WARN = 1e-6
FIT_FAIL = 1e-4
PHASE_STEP_LIMIT = math.pi / 4


# ─── Jost solutions ──────────────────────────────────────────────────────────

def _half_line(grid: Grid) -> np.ndarray:
    """Stations 0, dx, …, L: the x >= 0 grid points plus the right end."""
    return grid.dx * np.arange(grid.n_points // 2 + 1)


def _potential(sigma: SolitaryWave) -> CubicSpline:
    grid = sigma.profile.grid
    x = _half_line(grid)
    values = np.empty(x.size)
    centre = grid.center_index
    values[:-1] = sigma.profile.values[centre:]
    values[-1] = sigma.profile.values[0]
    return CubicSpline(x, values, bc_type=((1, 0.0), "not-a-knot"))


def _integrate(rhs, y0, x_end: float, x_eval: np.ndarray, omega: float):
    period = 2.0 * math.pi / omega
    sol = solve_ivp(rhs, (0.0, x_end), y0, method="DOP853", t_eval=x_eval, rtol=ODE_RTOL,
                    atol=ODE_ATOL, max_step=period / STEPS_PER_PERIOD)
    if sol.status != 0:
        raise StiffnessError(f"Jost integration stopped at x={sol.t[-1] if sol.t.size else 0.0:.4g}: {sol.message}",
                             {"message": sol.message})
    return sol.y


def reconstruct_zeta(x, r, phi, omega: float) -> Tuple[np.ndarray, np.ndarray]:
    """ζ = r sin(ω(x + φ)), ζ' = ω r cos(ω(x + φ))."""
    theta = omega * (np.asarray(x) + np.asarray(phi))
    return r * np.sin(theta), omega * r * np.cos(theta)


def _extend(grid: Grid, half: np.ndarray, parity: str) -> GridFunction:
    n = grid.n_points
    centre = grid.center_index
    values = np.empty(n)
    values[centre:] = half[:-1]
    sign = 1.0 if parity == "even" else -1.0
    values[:centre] = sign * half[1:][::-1]
    return spectral.make_function(grid, values, parity)


def integrate_jost(mu: float, c: float, sigma: SolitaryWave, parity: int, grid: Optional[Grid] = None,
                   omega: Optional[float] = None) -> JostData:
    """
    Polar form of S_μζ = 0 on [0, L]:
        r' = -(2σ_c / (c²μω)) r sin 2θ,   φ' = (4σ_c / (c²μω²)) sin²θ,   θ = ω(x + φ),
    started from r = 1 and φ = 0 (odd solution) or φ = π/(2ω) (even solution).
    """
    require(parity in (0, 1), "parity must be 0 (even) or 1 (odd)")
    ModelParams(c=c, mu=mu)
    omega = omega or dispersion.solve_omega(mu, c).omega_mu
    grid = grid or sigma.profile.grid
    spectral.check_resolution(grid, omega)
    potential = _potential(sigma)
    x_sigma_end = sigma.profile.grid.half_length
    scale = c ** 2 * mu

    def rhs(x, y):
        s = float(potential(x)) if x <= x_sigma_end else 0.0
        theta = omega * (x + y[1])
        return [-2.0 * s / (scale * omega) * y[0] * math.sin(2.0 * theta),
                4.0 * s / (scale * omega ** 2) * math.sin(theta) ** 2]

    x_half = _half_line(grid)
    phi0 = 0.0 if parity == 1 else math.pi / (2.0 * omega)
    r, phi = _integrate(rhs, [1.0, phi0], x_half[-1], x_half, omega)

    tail = x_half >= 0.9 * x_half[-1]
    r_inf = float(np.mean(r[tail]))
    phi_inf = float(np.mean(phi[tail]))
    spread = float(max(np.ptp(r[tail]), np.ptp(phi[tail])))
    if spread > 1e-8:
        logger.warning("Jost polar variables still moving at the box end (spread %.2e)", spread)

    zeta, dzeta = reconstruct_zeta(x_half, r, phi, omega)
    z_parity, d_parity = ("odd", "even") if parity == 1 else ("even", "odd")
    logger.debug("jost mu=%.4g parity %d: r_inf=%.10f phi_inf=%.10f", mu, parity, r_inf, phi_inf)
    return JostData(mu=mu, c=c, omega=omega, parity=parity, x_half=x_half, r=r, phi=phi,
                    r_inf=r_inf, phi_inf=phi_inf, zeta=_extend(grid, zeta, z_parity),
                    dzeta=_extend(grid, dzeta, d_parity))


def shoot_linear(mu: float, c: float, sigma: SolitaryWave, parity: int, x: np.ndarray,
                 omega: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Direct integration of ζ'' = -ω²ζ - 4σ_cζ/(c²μ) in Cartesian variables."""
    omega = omega or dispersion.solve_omega(mu, c).omega_mu
    potential = _potential(sigma)
    x_sigma_end = sigma.profile.grid.half_length
    scale = c ** 2 * mu

    def rhs(t, y):
        s = float(potential(t)) if t <= x_sigma_end else 0.0
        return [y[1], -(omega ** 2 + 4.0 * s / scale) * y[0]]

    y0 = [0.0, omega] if parity == 1 else [1.0, 0.0]
    x = np.asarray(x, dtype=float)
    zeta, dzeta = _integrate(rhs, y0, float(x[-1]), x, omega)
    return zeta, dzeta


def energy_E1(jost: JostData, sigma: SolitaryWave) -> np.ndarray:
    """E(x) = c²μζ'² + (c²μω² + 4σ_c)ζ² along the stations x >= 0."""
    zeta, dzeta = reconstruct_zeta(jost.x_half, jost.r, jost.phi, jost.omega)
    s = _potential(sigma)(jost.x_half)
    s = np.where(jost.x_half <= sigma.profile.grid.half_length, s, 0.0)
    scale = jost.c ** 2 * jost.mu
    return scale * dzeta ** 2 + (scale * jost.omega ** 2 + 4.0 * s) * zeta ** 2


def fit_bounds(josts: Sequence[JostData]) -> Dict[str, float]:
    """Empirical constants bracketing r and φ^∞ across a sweep."""
    require(len(josts) > 0, "need at least one Jost solution")
    return {
        "r_min": float(min(j.r.min() for j in josts)),
        "r_max": float(max(j.r.max() for j in josts)),
        "phi_inf_min": float(min(j.phi_inf for j in josts)),
        "phi_inf_max": float(max(j.phi_inf for j in josts)),
    }


def asymptotic_constants(jost: JostData) -> Tuple[float, float]:
    """(α, β) with ζ ≈ α sin ωx + β cos ωx past the core: α = r∞cos ωφ∞, β = r∞sin ωφ∞."""
    phase = jost.omega * jost.phi_inf
    return jost.r_inf * math.cos(phase), jost.r_inf * math.sin(phase)


# ─── γ_μ ─────────────────────────────────────────────────────────────────────

def _fit_tail(values: np.ndarray, grid: Grid, omega: float, phase_near: float) -> SinusoidFit:
    lo, hi = (f * grid.half_length for f in FIT_WINDOW)
    window = (grid.x >= lo) & (grid.x <= hi)
    if window.sum() < 8:
        raise FitError("tail fit window holds too few samples")
    return fit_sinusoid(grid.x[window], values[window], omega, phase_near=phase_near)


def _tail_model(x: np.ndarray, omega: float, theta: float) -> np.ndarray:
    """Odd extension of sin(ω(x + ϑ)) from x > 0."""
    return np.sign(x) * np.sin(omega * (np.abs(x) + theta))


def compute_gamma(mu: float, c: float, jost: JostData, sigma_refined: RefinedCore,
                  partner: Optional[JostData] = None, tol: float = NEUMANN_TOLERANCE,
                  max_terms: int = NEUMANN_MAX_TERMS) -> GammaData:
    """
    γ = ζ1 + u with (1 - V)u = Vζ1, where
        V f = -(1/(c²ω)) [ζ1 ∫_0^x ζ0 F  -  ζ0 ∫_0^x ζ1 F],   F = Δ_μ f + K*_μ f.
    The series Σ V^n ζ1 is summed until a term drops below `tol`.
    """
    require(jost.parity == 1, "compute_gamma starts from the odd Jost solution")
    params = ModelParams(c=c, mu=mu)
    require(mu > 0, "γ_μ is defined for μ > 0")
    grid = sigma_refined.grid
    require(jost.zeta.grid == grid, "Jost solution and refined core must share a grid")
    omega = jost.omega
    if partner is None:
        partner = integrate_jost(mu, c, sigma_refined.base, 0, grid=grid, omega=omega)
    zeta1 = jost.zeta.values
    zeta0 = partner.zeta.values
    sigma = sigma_refined.sigma.arrays()
    sigma_c = sigma_refined.base.profile.values
    inside = np.abs(grid.x) <= grid.half_length - WRAP_MARGIN
    scale = 1.0 / (c ** 2 * omega)

    def V(f: np.ndarray) -> np.ndarray:
        forcing = lattice_core.Delta_values(omega, grid, f) + lattice_core.Kstar_values(mu, grid, sigma, sigma_c, f)
        forcing = np.where(inside, forcing, 0.0)
        i0 = spectral.antiderivative(forcing * zeta0, grid)
        i1 = spectral.antiderivative(forcing * zeta1, grid)
        return spectral.symmetrize(-scale * (zeta1 * i0 - zeta0 * i1), "odd")

    u = np.zeros(grid.n_points)
    term = zeta1
    norms: List[float] = []
    ratio = 0.0
    for n in range(1, max_terms + 1):
        term = V(term)
        norms.append(float(np.max(np.abs(term))))
        u += term
        if n >= 3:
            ratio = norms[-1] / max(norms[-2], 1e-300)
            if ratio >= CONTRACTION_LIMIT:
                raise NonContractionError(
                    f"Neumann series for γ does not contract at mu={mu} (ratio {ratio:.3f}); "
                    "use a smaller mu or a larger grid",
                    {"mu": mu, "c": c, "term_norms": norms},
                )
        logger.debug("gamma mu=%.4g: term %d sup-norm %.3e", mu, n, norms[-1])
        if norms[-1] < tol:
            break
    else:
        logger.warning("Neumann series for γ truncated at %d terms (last term %.2e)", max_terms, norms[-1])

    raw = zeta1 + u
    fit = _fit_tail(raw, grid, omega, jost.phi_inf)
    gamma_values = raw / fit.amplitude
    residual = fit.residual / fit.amplitude
    if residual > FIT_FAIL:
        raise FitError(f"γ tail is not sinusoidal on the fit window (misfit {residual:.2e})",
                       {"residual": residual})
    if residual > FIT_WARN:
        logger.warning("γ tail fit misfit %.2e above %.0e", residual, FIT_WARN)

    data = GammaData(
        gamma=spectral.make_function(grid, gamma_values, "odd"),
        omega=omega,
        theta_inf=fit.phase,
        amplitude=fit.amplitude,
        neumann_terms_used=len(norms),
        correction_norm=float(np.max(np.abs(u))),
        contraction_ratio=ratio,
        fit_residual=residual,
        fit_window=[f * grid.half_length for f in FIT_WINDOW],
    )
    adj = kernel_residual(data, params, sigma_refined, dispersion.tau(mu, c, omega))
    if adj > 1e-7:
        logger.warning("L*γ residual %.2e on the core region", adj)
    logger.info("gamma mu=%.4g: theta_inf=%.10f, %d Neumann terms, |u|=%.3e", mu, fit.phase, len(norms),
                data.correction_norm)
    return data.model_copy(update={"adjoint_residual": adj})


def extract_theta(gamma: Union[GammaData, GridFunction], omega_mu: float,
                  phase_near: Optional[float] = None) -> float:
    """Asymptotic phase ϑ of γ ≈ ϱ sin(ω(x + ϑ)), fitted on [0.6L, 0.9L]."""
    if isinstance(gamma, GammaData):
        values, grid = gamma.gamma.values, gamma.gamma.grid
        phase_near = gamma.theta_inf if phase_near is None else phase_near
    else:
        values, grid = gamma.values, gamma.grid
    fit = _fit_tail(values, grid, omega_mu, phase_near or 0.0)
    residual = fit.residual / max(fit.amplitude, 1e-300)
    if residual > FIT_FAIL:
        raise FitError(f"tail fit misfit {residual:.2e}; enlarge the box or refine the grid",
                       {"residual": residual})
    return fit.phase


def _tail_part(gamma: GammaData, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """s = α sin ωx + β tanh(x) cos ωx and s'' in closed form."""
    alpha, beta = gamma.tail_coefficients
    w = gamma.omega
    x = grid.x
    t = np.tanh(x)
    sech2 = 1.0 / np.cosh(x) ** 2
    sin, cos = np.sin(w * x), np.cos(w * x)
    s = alpha * sin + beta * t * cos
    s2 = -w ** 2 * alpha * sin + beta * (-2.0 * sech2 * t * cos - 2.0 * w * sech2 * sin - w ** 2 * t * cos)
    return s, s2


def kernel_residual(gamma: GammaData, params: ModelParams, core: RefinedCore, tau: float) -> float:
    """sup |L*_μγ| on |x| <= L/2, differentiating only the localized part of γ."""
    grid = gamma.gamma.grid
    g = gamma.gamma.values
    s, s2 = _tail_part(gamma, grid)
    w = (g - s) * spectral.taper(grid)
    k = spectral.wavenumbers(grid)
    mu = params.mu
    second = spectral.derivative(w, grid, 2) + s2
    zeroth = spectral.apply_symbol(g, grid, 2.0 * (1.0 + mu * np.cos(k) ** 2 + mu ** 2 * tau))
    coupled = lattice_core.sigma2_adjoint_values(mu, grid, core.sigma.arrays(), g)
    res = params.c ** 2 * mu * second + zeroth + coupled
    core_region = np.abs(grid.x) <= grid.half_length / 2
    return float(np.max(np.abs(res[core_region])))


# ─── ι_μ and κ_μ ─────────────────────────────────────────────────────────────

def iota(g: GridFunction, gamma: GammaData) -> float:
    """∫ g γ, with γ replaced by its fitted sinusoid beyond the fit window."""
    grid = gamma.gamma.grid
    require(g.grid == grid, "ι needs g on the grid of γ")
    spectral.ensure_finite(g.values)
    hi = gamma.fit_window[1]
    weight = np.where(np.abs(grid.x) > hi, _tail_model(grid.x, gamma.omega, gamma.theta_inf), gamma.gamma.values)
    # x = -L is its own mirror image
    weight[0] = 0.0
    return spectral.integrate(g.values * weight, grid)


def leading_profile(mu: float, c: float, grid: Grid, omega: Optional[float] = None) -> TwoField:
    """p⁰ = (μυ_μ cos ω_μx, sin ω_μx), the a = 0 limit of the periodic family."""
    if omega is None:
        omega = dispersion.solve_omega(mu, c).omega_mu
    ups = dispersion.upsilon(mu, c, omega)
    return TwoField.from_arrays(grid, mu * ups * np.cos(omega * grid.x), np.sin(omega * grid.x))


def chi(params: ModelParams, core: RefinedCore, leading: TwoField) -> GridFunction:
    """χ_μ = [2L_μQ_μ(σ_{c,μ}, p⁰)]_2 = Σ_{μ,2}p⁰_2 + μΩ_{μ,2}p⁰_1."""
    grid = core.grid
    sigma = core.sigma.arrays()
    p1, p2 = leading.arrays()
    values = 2.0 * lattice_core.LQ_values(params.mu, grid, sigma[0], sigma[1], p1, p2)[1]
    return spectral.make_function(grid, values, "odd")


def kappa(mu: float, c: float, gamma: GammaData, sigma_refined: RefinedCore,
          periodic_leading: Optional[TwoField] = None) -> Tuple[KappaData, GridFunction]:
    params = ModelParams(c=c, mu=mu)
    leading = periodic_leading or leading_profile(mu, c, sigma_refined.grid, gamma.omega)
    chi_mu = chi(params, sigma_refined, leading)
    value = iota(chi_mu, gamma)
    sin_term = math.sin(gamma.omega * gamma.theta_inf)
    comparator = 2.0 * c ** 2 * mu * gamma.omega * sin_term
    logger.info("kappa mu=%.4g: %.8e (closed form %.8e)", mu, value, comparator)
    return KappaData(kappa=value, comparator=comparator, sin_term=sin_term), chi_mu


# ─── M_c ─────────────────────────────────────────────────────────────────────

def base_wave_for(c: float, mus: Sequence[float]) -> SolitaryWave:
    """σ_c on a grid that resolves the largest ω_μ of the sweep."""
    omega_max = max(dispersion.solve_omega(mu, c).omega_mu for mu in mus)
    return solitary.solve_monatomic(c, spectral.grid_for_frequency(omega_max))


def mc_phase(mu: float, c: float, base: Optional[SolitaryWave] = None) -> Dict[str, float]:
    """One point of the M_c scan: ω_μ, ϑ_μ^∞, the phase ω_μϑ_μ^∞ and κ_μ."""
    disp = dispersion.solve_omega(mu, c)
    base = base or base_wave_for(c, [mu])
    core = solitary.refine_core(c, mu, base)
    odd = integrate_jost(mu, c, base, 1, grid=core.grid, omega=disp.omega_mu)
    gamma = compute_gamma(mu, c, odd, core)
    k, _ = kappa(mu, c, gamma, core)
    return {
        "mu": mu,
        "omega_mu": disp.omega_mu,
        "phi_inf": odd.phi_inf,
        "theta_inf": gamma.theta_inf,
        "phase": disp.omega_mu * gamma.theta_inf,
        "sin_term": k.sin_term,
        "kappa": k.kappa,
        "comparator": k.comparator,
    }


def _interpolant(log_mu: np.ndarray, phases: np.ndarray):
    if log_mu.size >= 4:
        return CubicSpline(log_mu, phases)
    return lambda t: np.interp(t, log_mu, phases)


def scan_mc(c: float, mu_grid: Sequence[float], base: Optional[SolitaryWave] = None,
            rows: Optional[List[Dict[str, float]]] = None) -> List[McInterval]:
    """
    Maximal μ-intervals of the sweep on which |sin(ω_μϑ_μ^∞)| > 1/2. Pass
    precomputed `rows` from `mc_phase` to skip the per-point solves.
    """
    mus = np.sort(np.asarray(list(mu_grid), dtype=float))
    require(mus.size >= 2 and np.all(mus > 0), "M_c scan needs at least two positive mass ratios")
    if rows is None:
        base = base or base_wave_for(c, mus)
        rows = pool.map(mc_phase, list(mus), c=c, base=base)
    rows = sorted(rows, key=lambda r: r["mu"])
    phases = np.array([r["phase"] for r in rows])
    steps = np.abs(np.diff(phases))
    if np.any(steps >= PHASE_STEP_LIMIT):
        worst = int(np.argmax(steps))
        raise GridTooCoarseError(
            f"phase ω_μϑ_μ changes by {steps[worst]:.3f} between mu={mus[worst]:.4g} and {mus[worst + 1]:.4g}; "
            "refine the mu grid",
            {"max_step": float(steps[worst])},
        )
    log_mu = np.log(mus)
    phase_of = _interpolant(log_mu, phases)

    def excess(t):
        return abs(math.sin(float(phase_of(t)))) - 0.5

    inside = np.abs(np.sin(phases)) > 0.5
    intervals: List[McInterval] = []
    start = log_mu[0] if inside[0] else None
    for i in range(1, mus.size):
        if inside[i] == inside[i - 1]:
            continue
        crossing = brentq(excess, log_mu[i - 1], log_mu[i], xtol=1e-14)
        if inside[i]:
            start = crossing
        else:
            intervals.append(_interval(start, crossing, phase_of))
            start = None
    if start is not None:
        intervals.append(_interval(start, log_mu[-1], phase_of))
    logger.info("M_c scan c=%.4g: %d intervals over [%.3g, %.3g]", c, len(intervals), mus[0], mus[-1])
    return intervals


def _interval(lo: float, hi: float, phase_of) -> McInterval:
    mid = 0.5 * (lo + hi)
    return McInterval(lo=math.exp(lo), hi=math.exp(hi), midpoint=math.exp(mid), phase_mid=float(phase_of(mid)))
