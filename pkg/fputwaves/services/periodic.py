"""
services/periodic.py

Small-amplitude periodic waves a·p_μ^a: Newton on a cosine/sine Galerkin basis
in X = ωx, normalized against the adjoint kernel ν*_μ.
"""

import functools
import logging
import math
from typing import Iterable, List, Tuple

import numpy as np
from scipy import fft as sfft

from fputwaves.models import Grid, ModelParams, PeriodicWave, TwoField
from fputwaves.services import dispersion, lattice_core
from fputwaves.utils.errors import ConvergenceError, InvalidInputError, ResolutionError

logger = logging.getLogger(__name__)

MIN_MODES = 16
MAX_MODES = 256
NEWTON_TOLERANCE = 1e-13
TAIL_TOLERANCE = 1e-12
CONTINUATION_STEPS = 8


# ─── Kernel and linear blocks ────────────────────────────────────────────────

def kernel_pair(mu: float, c: float) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    ν_μ = (υ_μ cos X, sin X) and ν*_μ = (z_μ cos X, sin X) as coefficient
    pairs (cos-coefficient of component 1, sin-coefficient of component 2).
    """
    d = dispersion.solve_omega(mu, c)
    z = dispersion.adjoint_amplitude(mu, c, d.omega_mu)
    return np.array([d.upsilon_mu, 1.0]), np.array([z, 1.0]), z


def mode_block(mu: float, c: float, omega: float, k: int) -> np.ndarray:
    """Real 2×2 block of c²ω²μ∂²_X + L_μ[ω] I^μ on (cos kX, sin kX)."""
    m = dispersion.symbol_matrix(mu, omega * k)
    return -c ** 2 * omega ** 2 * mu * k ** 2 * np.eye(2) + m @ np.diag([mu, 1.0])


def kernel_residuals(mu: float, c: float) -> Tuple[float, float]:
    """|Γ_μ ν_μ| and |Γ_μ^† ν*_μ| at mode 1."""
    nu, nu_star, _ = kernel_pair(mu, c)
    omega = dispersion.solve_omega(mu, c).omega_mu
    block = mode_block(mu, c, omega, 1)
    return float(np.max(np.abs(block @ nu))), float(np.max(np.abs(block.T @ nu_star)))


def block_bound(mu: float, c: float, k: int) -> float:
    """‖(c²ω_μ²μk²)^{-1} L̃_μ(ω_μ k) I^μ‖ in the spectral norm."""
    omega = dispersion.solve_omega(mu, c).omega_mu
    m = dispersion.symbol_matrix(mu, omega * k) @ np.diag([mu, 1.0])
    return float(np.linalg.norm(m, 2) / (c ** 2 * omega ** 2 * mu * k ** 2))


def projection_pi(alpha: np.ndarray, beta: np.ndarray, mu: float, c: float) -> float:
    """Coefficient of π_μφ along ν_μ: ⟨φ, ν*⟩ / ⟨ν, ν*⟩."""
    nu, nu_star, z = kernel_pair(mu, c)
    return float((z * alpha[0] + beta[0]) / (nu[0] * z + 1.0))


def solve_linear_periodic(mu: float, c: float, g1: np.ndarray, g2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mode-wise inverse of Γ_μ on the complement of ν_μ: solves Γ_μφ = g for g
    orthogonal to ν*_μ, returning φ with π_μφ = 0.
    """
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    nu, nu_star, z = kernel_pair(mu, c)
    omega = dispersion.solve_omega(mu, c).omega_mu
    if abs(nu_star @ np.array([g1[0], g2[0]])) > 1e-10 * max(1.0, float(np.abs(np.r_[g1, g2]).max())):
        raise InvalidInputError("right-hand side is not orthogonal to the adjoint kernel")
    alpha = np.zeros_like(g1)
    beta = np.zeros_like(g2)
    for k in range(1, len(g1) + 1):
        block = mode_block(mu, c, omega, k)
        rhs = np.array([g1[k - 1], g2[k - 1]])
        if k == 1:
            system = np.vstack([block, nu_star])
            sol = np.linalg.lstsq(system, np.r_[rhs, 0.0], rcond=None)[0]
        else:
            sol = np.linalg.solve(block, rhs)
        alpha[k - 1], beta[k - 1] = sol
    return alpha, beta


# ─── Galerkin residual ───────────────────────────────────────────────────────

def _spectra(alpha: np.ndarray, beta: np.ndarray, m: int):
    f1 = np.zeros(m, dtype=complex)
    f2 = np.zeros(m, dtype=complex)
    k = np.arange(1, len(alpha) + 1)
    f1[k] = 0.5 * m * alpha
    f1[-k] = 0.5 * m * alpha
    f2[k] = -0.5j * m * beta
    f2[-k] = 0.5j * m * beta
    return f1, f2


def _collocation_residual(mu: float, c: float, a: float, alpha, beta, omega: float, m: int):
    """Residual of the scaled equation, projected on cos kX (component 1) and sin kX (component 2)."""
    n_modes = len(alpha)
    n = sfft.fftfreq(m, d=1.0 / m)
    syms = lattice_core.l_symbols(mu, omega * n)
    ad = mu * lattice_core.a_delta_symbol(omega * n)
    f1, f2 = _spectra(alpha, beta, m)
    h1, h2 = mu * f1, f2                              # I^μ φ
    lin1 = syms[0] * h1 + syms[1] * h2
    lin2 = syms[2] * h1 + syms[3] * h2
    d2 = -(n ** 2)
    r1 = c ** 2 * omega ** 2 * mu * d2 * f1 + lin1
    r2 = c ** 2 * omega ** 2 * mu * d2 * f2 + lin2
    if a != 0.0:
        # T = [[1, -μAδ], [0, 1]] in spectral form
        t1 = sfft.ifft(h1 - ad * h2).real
        t2 = sfft.ifft(h2).real
        q1 = sfft.fft(t1 * t1 + t2 * t2)
        q2 = sfft.fft(2.0 * t1 * t2)
        q1 = q1 + ad * q2                              # T^{-1}
        r1 = r1 + a * (syms[0] * q1 + syms[1] * q2)
        r2 = r2 + a * (syms[2] * q1 + syms[3] * q2)
    k = np.arange(1, n_modes + 1)
    cos_part = 2.0 * r1[k].real / m
    sin_part = -2.0 * r2[k].imag / m
    return cos_part, sin_part


def _newton_system(mu, c, a, n_modes, nu, z, m):
    def residual(u):
        alpha, beta, omega = u[:n_modes], u[n_modes:2 * n_modes], u[-1]
        r1, r2 = _collocation_residual(mu, c, a, alpha, beta, omega, m)
        constraint = z * (alpha[0] - nu[0]) + (beta[0] - 1.0)
        return np.r_[r1, r2, constraint]

    return residual


def _fd_jacobian(fn, u: np.ndarray) -> np.ndarray:
    f0 = fn(u)
    jac = np.empty((f0.size, u.size))
    for j in range(u.size):
        step = 1e-6 * max(1.0, abs(u[j]))
        up = u.copy()
        dn = u.copy()
        up[j] += step
        dn[j] -= step
        jac[:, j] = (fn(up) - fn(dn)) / (2.0 * step)
    return jac


def _newton(fn, u: np.ndarray, tol: float, max_steps: int = 30):
    history = []
    for step in range(max_steps + 1):
        r = fn(u)
        res = float(np.max(np.abs(r)))
        history.append(res)
        if not math.isfinite(res):
            raise ConvergenceError("periodic Newton produced non-finite residual", {"history": history})
        if res < tol:
            return u, step, res
        if step == max_steps or (len(history) > 2 and res > 1e3 * min(history)):
            raise ConvergenceError("periodic Newton diverged", {"history": history})
        u = u - np.linalg.solve(_fd_jacobian(fn, u), r)
    raise ConvergenceError("periodic Newton did not converge", {"history": history})


def _pad(coeffs: np.ndarray, n_modes: int) -> np.ndarray:
    out = np.zeros(n_modes)
    out[: min(len(coeffs), n_modes)] = coeffs[:n_modes]
    return out


def _solve_fixed_modes(mu, c, a, n_modes, guess=None):
    d = dispersion.solve_omega(mu, c)
    nu, _, z = kernel_pair(mu, c)
    m = max(8 * n_modes, 64)
    fn = _newton_system(mu, c, a, n_modes, nu, z, m)
    if guess is None:
        u0 = np.zeros(2 * n_modes + 1)
        u0[0], u0[n_modes], u0[-1] = nu[0], nu[1], d.omega_mu
    else:
        alpha, beta, omega = guess
        u0 = np.r_[_pad(alpha, n_modes), _pad(beta, n_modes), omega]
    scale = max(1.0, c ** 2 * d.omega_mu ** 2 * mu)
    u, steps, res = _newton(fn, u0, NEWTON_TOLERANCE * scale)
    return u[:n_modes], u[n_modes:2 * n_modes], float(u[-1]), steps, res, d.omega_mu


def _tail_ok(alpha, beta) -> bool:
    lead = max(abs(alpha[0]), abs(beta[0]))
    return max(abs(alpha[-1]), abs(beta[-1])) < TAIL_TOLERANCE * lead


@functools.lru_cache(maxsize=256)
def _solve_cached(mu: float, c: float, a: float, n_modes: int) -> PeriodicWave:
    guess = None
    while True:
        try:
            alpha, beta, omega, steps, res, omega_mu = _solve_fixed_modes(mu, c, a, n_modes, guess)
        except ConvergenceError:
            if a == 0.0:
                raise
            logger.warning("direct periodic solve failed at a=%.3g, continuing from a=0", a)
            alpha, beta, omega, steps, res, omega_mu = _continuation(mu, c, a, n_modes)
        if _tail_ok(alpha, beta):
            break
        if 2 * n_modes > MAX_MODES:
            raise ResolutionError(f"Fourier tail does not decay below {TAIL_TOLERANCE} with {n_modes} modes")
        n_modes *= 2
        guess = (alpha, beta, omega)
        logger.info("doubling periodic truncation to %d modes", n_modes)
    logger.debug("periodic wave mu=%.3g a=%.3g: omega_a=%.12g (%d newton steps)", mu, a, omega, steps)
    return PeriodicWave(mu=mu, c=c, a=a, omega_a=omega, omega_mu=omega_mu, coeffs1=alpha, coeffs2=beta,
                        n_modes=n_modes, newton_steps=steps, residual=res)


def _continuation(mu, c, a, n_modes):
    guess = None
    result = None
    for a_k in np.linspace(0.0, a, CONTINUATION_STEPS + 1)[1:]:
        result = _solve_fixed_modes(mu, c, float(a_k), n_modes, guess)
        guess = result[:3]
    return result


def solve_periodic(mu: float, c: float, a: float, n_modes: int = MIN_MODES) -> PeriodicWave:
    ModelParams(c=c, mu=mu)
    if n_modes < MIN_MODES:
        raise InvalidInputError(f"n_modes must be at least {MIN_MODES}")
    if not math.isfinite(a):
        raise InvalidInputError("amplitude must be finite")
    return _solve_cached(float(mu), float(c), float(a), int(n_modes))


def find_a_max(mu: float, c: float, n_modes: int = MIN_MODES, a_start: float = 0.01,
               factor: float = 1.5, a_cap: float = 10.0, max_newton: int = 8) -> float:
    """Grow a geometrically until Newton needs more than `max_newton` steps; return the last good a."""
    a_good = 0.0
    guess = None
    a = a_start
    while a <= a_cap:
        try:
            alpha, beta, omega, steps, _, _ = _solve_fixed_modes(mu, c, a, n_modes, guess)
        except ConvergenceError:
            break
        if steps > max_newton or not _tail_ok(alpha, beta):
            break
        a_good = a
        guess = (alpha, beta, omega)
        a *= factor
    logger.info("a_max(mu=%.3g, c=%.3g) = %.4g", mu, c, a_good)
    return a_good


def lipschitz_constants(mu: float, c: float, amplitudes: Iterable[float], n_modes: int = MIN_MODES):
    """Largest |Δω|/|Δa| and sup |Δcoeffs|/|Δa| over all pairs of the given amplitudes."""
    waves: List[PeriodicWave] = [solve_periodic(mu, c, float(a), n_modes) for a in amplitudes]
    k_omega = 0.0
    k_coeff = 0.0
    for i, w in enumerate(waves):
        for v in waves[i + 1:]:
            da = abs(w.a - v.a)
            if da == 0:
                continue
            size = min(w.n_modes, v.n_modes)
            dc = max(np.max(np.abs(w.coeffs1[:size] - v.coeffs1[:size])),
                     np.max(np.abs(w.coeffs2[:size] - v.coeffs2[:size])))
            k_omega = max(k_omega, abs(w.omega_a - v.omega_a) / da)
            k_coeff = max(k_coeff, float(dc) / da)
    return k_omega, k_coeff


# ─── Evaluation in x ─────────────────────────────────────────────────────────

def evaluate(wave: PeriodicWave, x, derivative: int = 0, scaled: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Samples of a·p_μ^a(x) = a (μφ1(ωx), φ2(ωx)), or p itself when `scaled`
    is False, differentiated `derivative` times in x.
    """
    x = np.asarray(x, dtype=float)
    k = np.arange(1, wave.n_modes + 1)
    theta = wave.omega_a * k
    phase = np.outer(x, theta)
    factor = theta ** derivative
    # d^n/dx^n cos = cos(. + nπ/2), likewise for sin
    shift = derivative * math.pi / 2
    p1 = wave.mu * (np.cos(phase + shift) @ (wave.coeffs1 * factor))
    p2 = np.sin(phase + shift) @ (wave.coeffs2 * factor)
    amp = wave.a if scaled else 1.0
    return amp * p1, amp * p2


def transformed(wave: PeriodicWave, x, scaled: bool = True, derivative: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """T_μ applied mode by mode: Aδ sin(θx) = ½ sin(2θ) cos(θx)."""
    x = np.asarray(x, dtype=float)
    p1, p2 = evaluate(wave, x, derivative=derivative, scaled=scaled)
    k = np.arange(1, wave.n_modes + 1)
    theta = wave.omega_a * k
    shift = derivative * math.pi / 2
    correction = np.cos(np.outer(x, theta) + shift) @ (0.5 * np.sin(2 * theta) * wave.coeffs2 * theta ** derivative)
    amp = wave.a if scaled else 1.0
    return p1 - wave.mu * amp * correction, p2


def commensurate_grid(wave: PeriodicWave, n_periods: int = 4) -> Grid:
    """Grid holding a whole number of periods of ω_a, resolving the highest retained mode."""
    per_period = 2 ** int(math.ceil(math.log2(16 * wave.n_modes)))
    return Grid(half_length=n_periods * math.pi / wave.omega_a, n_points=n_periods * per_period)


def as_field(wave: PeriodicWave, grid: Grid, scaled: bool = True) -> TwoField:
    p1, p2 = evaluate(wave, grid.x, scaled=scaled)
    return TwoField.from_arrays(grid, p1, p2)


def spatial_residual(wave: PeriodicWave, n_periods: int = 4) -> float:
    """sup |G(a p_μ^a, μ)| on a grid commensurate with the wave."""
    grid = commensurate_grid(wave, n_periods)
    field = as_field(wave, grid)
    r = lattice_core.residual_G(ModelParams(c=wave.c, mu=wave.mu), field)
    return float(max(np.max(np.abs(r.f1.values)), np.max(np.abs(r.f2.values))))
