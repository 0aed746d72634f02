"""
services/solitary.py

The monatomic solitary wave σ_c (μ = 0 limit) and its refinement
σ_{c,μ} = σ_c e1 + μ ξ_μ, which solves the traveling-wave system with the
singular c²μ∂² term of the light equation dropped.

σ_c comes from Petviashvili iteration on the Fourier side with a
Newton–Krylov fallback; the refinement is a preconditioned Newton–GMRES
iteration started from (σ_c, 0).
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy import fft as sfft
from scipy.optimize import NoConvergence, brentq, newton_krylov

from fputwaves.config import settings
from fputwaves.models import SONIC_SPEED, Grid, ModelParams, RefinedCore, SolitaryWave, TwoField
from fputwaves.services import lattice_core, spectral
from fputwaves.utils import krylov
from fputwaves.utils.errors import ConvergenceError, DomainError, FitError
from fputwaves.utils.fitting import LineFit, fit_exponential_tail, fit_sech2

logger = logging.getLogger(__name__)

SOLITARY_TOLERANCE = 1e-10
REFINE_TOLERANCE = 1e-11
NOISE_FLOOR = 1e-12


# ─── Helpers ─────────────────────────────────────────────────────────────────

def kdv_guess(c: float, x: np.ndarray) -> np.ndarray:
    """Long-wave profile (3ε²/4) sech²(ε√6 x / 4), ε² = c² − 2."""
    eps = math.sqrt(c ** 2 - 2.0)
    return 0.75 * eps ** 2 / np.cosh(eps * math.sqrt(6.0) * x / 4.0) ** 2


def exact_decay_rate(c: float) -> float:
    """Root b > 0 of sinh(b)/b = |c|/√2, the decay rate of the linearized tail."""
    target = abs(c) / SONIC_SPEED
    if target <= 1.0:
        raise DomainError("decay rate exists only for supersonic speeds")
    return float(brentq(lambda b: math.sinh(b) / b - target, 1e-12, 60.0, xtol=1e-15))


def monatomic_residual_values(c: float, grid: Grid, v: np.ndarray) -> np.ndarray:
    """c²σ'' − 2δ²(σ + σ²)."""
    k = spectral.wavenumbers(grid)
    return spectral.apply_symbol(v, grid, -c ** 2 * k ** 2) + spectral.apply_symbol(
        v + v ** 2, grid, 2.0 * np.sin(k) ** 2
    )


def _fixed_point_symbol(c: float, k: np.ndarray) -> np.ndarray:
    denom = c ** 2 * k ** 2 - 2.0 * np.sin(k) ** 2
    sym = np.empty_like(k)
    sym[0] = 2.0 / (c ** 2 - 2.0)
    sym[1:] = 2.0 * np.sin(k[1:]) ** 2 / denom[1:]
    return sym


def is_unimodal(values: np.ndarray) -> bool:
    centre = int(np.argmax(values))
    left = np.diff(values[: centre + 1])
    right = np.diff(values[centre:])
    floor = NOISE_FLOOR * float(values.max())
    return bool(np.all(left >= -floor) and np.all(right <= floor))


def measure_decay(values: np.ndarray, grid: Grid) -> LineFit:
    """
    Exponential tail fit over the outer quarter of the region where the
    profile sits above the round-off floor.
    """
    x = grid.x
    right = x >= 0
    xs, vs = x[right], np.abs(values[right])
    above = vs > NOISE_FLOOR * vs.max()
    if above.sum() < 8:
        raise FitError("profile has no resolvable tail")
    x_end = float(xs[above].max())
    window = above & (xs >= 0.75 * x_end)
    return fit_exponential_tail(xs[window], vs[window])


# ─── Monatomic solitary wave ─────────────────────────────────────────────────

def _petviashvili(c: float, grid: Grid, u: np.ndarray, tol: float, max_iter: int):
    k = spectral.wavenumbers(grid)
    sym = _fixed_point_symbol(c, k)
    lin = c ** 2 * k ** 2 - 2.0 * np.sin(k) ** 2
    nonlin = 2.0 * np.sin(k) ** 2
    residual = math.inf
    for it in range(1, max_iter + 1):
        uh = sfft.rfft(u)
        u2h = sfft.rfft(u ** 2)
        num = np.sum(lin * np.abs(uh) ** 2)
        den = np.sum(nonlin * np.real(np.conj(uh) * u2h))
        if den <= 0:
            return u, it, residual, False
        stab = (num / den) ** 2
        u = spectral.symmetrize(stab * sfft.irfft(sym * u2h, n=grid.n_points), "even")
        residual = float(np.max(np.abs(monatomic_residual_values(c, grid, u))))
        logger.debug("petviashvili %d: stabilizer %.6f residual %.3e", it, stab, residual)
        if residual < tol:
            return u, it, residual, True
    return u, max_iter, residual, False


def _newton_krylov(c: float, grid: Grid, u: np.ndarray, tol: float) -> Tuple[np.ndarray, float]:
    def fn(v):
        return monatomic_residual_values(c, grid, spectral.symmetrize(v, "even"))

    try:
        v = newton_krylov(fn, u, f_tol=tol, method="lgmres", maxiter=100)
    except NoConvergence as exc:
        v = np.asarray(exc.args[0]) if exc.args else u
        res = float(np.max(np.abs(fn(v))))
        raise ConvergenceError(f"solitary wave did not converge (residual {res:.2e})", {"residual": res})
    v = spectral.symmetrize(v, "even")
    return v, float(np.max(np.abs(monatomic_residual_values(c, grid, v))))


def _solve_on(c: float, grid: Grid, tol: float, max_iter: int):
    u0 = kdv_guess(c, grid.x)
    u, iterations, residual, ok = _petviashvili(c, grid, u0, tol, max_iter)
    method = "petviashvili"
    if not ok:
        logger.warning("petviashvili stalled at residual %.2e after %d steps, switching to newton-krylov",
                       residual, iterations)
        u, residual = _newton_krylov(c, grid, u, tol)
        method = "newton-krylov"
    return u, iterations, residual, method


def solve_monatomic(c: float, grid: Optional[Grid] = None, tol: float = SOLITARY_TOLERANCE,
                    max_iter: int = 500) -> SolitaryWave:
    if not math.isfinite(c) or abs(c) <= SONIC_SPEED:
        raise DomainError(f"|c| = {abs(c)} is not above the speed of sound {SONIC_SPEED:.6f}")
    grid = grid or spectral.lattice_grid(settings.DEFAULT_HALF_LENGTH)
    state = {}

    def build(g: Grid) -> np.ndarray:
        state["solution"] = _solve_on(c, g, tol, max_iter)
        return state["solution"][0]

    grid, u = spectral.auto_extend(build, grid)
    _, iterations, residual, method = state["solution"]
    fit = measure_decay(u, grid)
    if fit.r2 < 0.99:
        logger.warning("tail fit R² = %.4f below 0.99", fit.r2)
    logger.info("solitary wave c=%.4f: residual %.2e, b_c=%.4f (%s, L=%g)",
                c, residual, fit.slope, method, grid.half_length)
    profile = spectral.make_function(grid, u, "even", decay_rate=max(fit.slope, 0.0))
    return SolitaryWave(c=c, profile=profile, measured_decay=fit.slope, decay_fit_r2=fit.r2,
                        residual_norm=residual, iterations=iterations, method=method)


def long_wave_fit(wave: SolitaryWave) -> Tuple[float, float, float]:
    """
    Fit α sech²(β X) to ς_ε(X) = ε^{-2} σ_c(X/ε). As ε -> 0 the fit tends to
    α = 3/4, β = √6/4 with misfit O(ε²).
    """
    eps = math.sqrt(wave.c ** 2 - 2.0)
    X = eps * wave.profile.grid.x
    scaled = wave.profile.values / eps ** 2
    keep = np.abs(X) <= 12.0
    return fit_sech2(X[keep], scaled[keep], p0=(0.75, math.sqrt(6.0) / 4.0))


# ─── Refined core σ_{c,μ} ────────────────────────────────────────────────────

def _g_mod(params: ModelParams, grid: Grid, h1, h2):
    g1, g2 = lattice_core.G_values(params, grid, h1, h2)
    # drop the singular c²μ h2'' term
    g2 = g2 - params.c ** 2 * params.mu * spectral.derivative(h2, grid, 2)
    return g1, g2


def _remainder_1(params: ModelParams, grid: Grid, h1, h2) -> np.ndarray:
    """First row of G_mod minus its heavy diagonal part d h1."""
    zero = np.zeros(grid.n_points)
    coupling = lattice_core.L_values(params.mu, grid, zero, h2)[0]
    return coupling + lattice_core.LQ_values(params.mu, grid, h1, h2, h1, h2)[0]


def refine_core(c: float, mu: float, base: SolitaryWave, tol: float = REFINE_TOLERANCE,
                max_newton: int = 30) -> RefinedCore:
    params = ModelParams(c=c, mu=mu)
    grid = base.profile.grid
    sigma_c = base.profile.values
    n = grid.n_points
    if mu == 0:
        xi = TwoField.zeros(grid)
        r1, r2 = lattice_core.G_values(params, grid, sigma_c, np.zeros(n))
        return RefinedCore(base=base, xi=xi, mu=0.0, residual_first_component=float(np.max(np.abs(r1))),
                           residual_second_component=float(np.max(np.abs(r2))), newton_steps=0)

    light_scale = 1.0 / (2.0 + 4.0 * sigma_c)
    h1, h2 = sigma_c.copy(), np.zeros(n)
    history = []
    steps = 0
    for steps in range(max_newton + 1):
        g1, g2 = _g_mod(params, grid, h1, h2)
        res = float(max(np.max(np.abs(g1)), np.max(np.abs(g2))))
        history.append(res)
        logger.debug("refine_core mu=%.3g newton %d: |G_mod| = %.3e", mu, steps, res)
        if res < tol:
            break
        if steps == max_newton or (len(history) > 3 and res > 10 * min(history)):
            raise ConvergenceError(f"refined core did not converge at mu={mu}", {"history": history})

        f1 = h1 + lattice_core.heavy_inverse_values(params, grid, _remainder_1(params, grid, h1, h2))
        f2 = g2 * light_scale
        rhs = -np.concatenate([f1, f2])

        def jac(v, h1=h1, h2=h2):
            v1, v2 = v[:n], v[n:]
            coupling = lattice_core.L_values(mu, grid, np.zeros(n), v2)[0]
            q1, q2 = lattice_core.LQ_values(mu, grid, h1, h2, v1, v2)
            j1 = v1 + lattice_core.heavy_inverse_values(params, grid, coupling + 2 * q1)
            j2 = lattice_core.L_values(mu, grid, v1, v2)[1] + 2 * q2
            return np.concatenate([j1, j2 * light_scale])

        step = krylov.solve(jac, rhs, rtol=1e-13, label="refine_core")
        h1 = spectral.symmetrize(h1 + step[:n], "even")
        h2 = spectral.symmetrize(h2 + step[n:], "odd")

    xi = TwoField.from_arrays(grid, (h1 - sigma_c) / mu, h2 / mu)
    r1, r2 = lattice_core.G_values(params, grid, h1, h2)
    logger.info("refined core mu=%.3g: %d newton steps, |G_1| = %.2e", mu, steps, np.max(np.abs(r1)))
    return RefinedCore(base=base, xi=xi, mu=mu, residual_first_component=float(np.max(np.abs(r1))),
                       residual_second_component=float(np.max(np.abs(r2))), newton_steps=steps)
