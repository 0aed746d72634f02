"""
services/lattice_core.py

Advance-delay operators of the dimer lattice and the traveling-wave residual.
`*_values` functions work on raw arrays; the named operations on records.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import fft as sfft

from fputwaves.models import Grid, GridFunction, ModelParams, TwoField
from fputwaves.services import spectral
from fputwaves.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

Pair = Tuple[np.ndarray, np.ndarray]


# ─── Symbols ─────────────────────────────────────────────────────────────────

def l_symbols(mu: float, k) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Entries of the symbol of L_μ (A -> cos k, δ -> i sin k)."""
    k = np.asarray(k, dtype=float)
    cos2 = np.cos(k) ** 2
    sin2 = np.sin(k) ** 2
    s2k = np.sin(2 * k)
    l11 = 2.0 * sin2 * (1.0 - mu * cos2) + 0j
    l12 = -1j * mu * s2k * (1.0 - 2.0 * cos2 - 0.25 * mu * s2k ** 2)
    l21 = 1j * mu * s2k
    l22 = 2.0 * (1.0 + mu * cos2 + 0.25 * mu ** 2 * s2k ** 2) + 0j
    return l11, l12, l21, l22


def theta_symbols(mu: float, k) -> Tuple[np.ndarray, np.ndarray]:
    """Off-diagonal entries of L_μ divided by μ; finite at μ = 0."""
    k = np.asarray(k, dtype=float)
    s2k = np.sin(2 * k)
    t12 = -1j * s2k * (1.0 - 2.0 * np.cos(k) ** 2 - 0.25 * mu * s2k ** 2)
    t21 = 1j * s2k + 0j * k
    return t12, t21


def d_symbols(mu: float, k):
    k = np.asarray(k, dtype=float)
    cs = np.cos(k) * np.sin(k)
    d11 = 2.0 * np.sin(k) ** 2 + 0j
    d12 = -2j * cs
    d21 = 2j * mu * cs
    d22 = 2.0 * (1.0 + mu * np.cos(k) ** 2) + 0j
    return d11, d12, d21, d22


def a_delta_symbol(k):
    return 0.5j * np.sin(2 * np.asarray(k, dtype=float))


def _adjoint(s11, s12, s21, s22):
    return np.conj(s11), np.conj(s21), np.conj(s12), np.conj(s22)


def matrix_apply(grid: Grid, symbols, v1: np.ndarray, v2: np.ndarray) -> Pair:
    s11, s12, s21, s22 = symbols
    f1 = sfft.rfft(v1)
    f2 = sfft.rfft(v2)
    n = grid.n_points
    return sfft.irfft(s11 * f1 + s12 * f2, n=n), sfft.irfft(s21 * f1 + s22 * f2, n=n)


# ─── Array-level operators ───────────────────────────────────────────────────

def L_values(mu: float, grid: Grid, v1, v2, adjoint: bool = False) -> Pair:
    syms = l_symbols(mu, spectral.wavenumbers(grid))
    if adjoint:
        syms = _adjoint(*syms)
    return matrix_apply(grid, syms, v1, v2)


def D_values(mu: float, grid: Grid, v1, v2) -> Pair:
    return matrix_apply(grid, d_symbols(mu, spectral.wavenumbers(grid)), v1, v2)


def T_values(mu: float, grid: Grid, v1, v2, inverse: bool = False, adjoint: bool = False) -> Pair:
    """
    T_μ = [[1, -μAδ], [0, 1]]. The adjoint moves the coupling to the lower
    corner; (Aδ)* = -Aδ.
    """
    sign = 1.0 if inverse else -1.0
    if adjoint:
        sign = -sign
    coupling = sign * mu * a_delta_symbol(spectral.wavenumbers(grid))
    if adjoint:
        return np.array(v1, dtype=float), v2 + spectral.apply_symbol(v1, grid, coupling)
    return v1 + spectral.apply_symbol(v2, grid, coupling), np.array(v2, dtype=float)


def Q0_values(g1, g2, h1, h2) -> Pair:
    return g1 * h1 + g2 * h2, g1 * h2 + g2 * h1


def Q_values(mu: float, grid: Grid, g1, g2, h1, h2) -> Pair:
    tg = T_values(mu, grid, g1, g2)
    th = T_values(mu, grid, h1, h2)
    q1, q2 = Q0_values(*tg, *th)
    return T_values(mu, grid, q1, q2, inverse=True)


def LQ_values(mu: float, grid: Grid, g1, g2, h1, h2) -> Pair:
    return L_values(mu, grid, *Q_values(mu, grid, g1, g2, h1, h2))


def G_values(params: ModelParams, grid: Grid, h1, h2) -> Pair:
    mu, c = params.mu, params.c
    lin1, lin2 = L_values(mu, grid, h1, h2)
    nl1, nl2 = LQ_values(mu, grid, h1, h2, h1, h2)
    r1 = c ** 2 * spectral.derivative(h1, grid, 2) + lin1 + nl1
    r2 = c ** 2 * mu * spectral.derivative(h2, grid, 2) + lin2 + nl2
    return r1, r2


def sigma_parts_values(mu: float, grid: Grid, sigma: Pair, f1, f2):
    """Returns ((Σ_μ f)_1, (Σ_μ f)_2, (μΩ_μ f)_1, (μΩ_μ f)_2)."""
    zero = np.zeros(grid.n_points)
    a1, a2 = LQ_values(mu, grid, sigma[0], sigma[1], f1, zero)
    b1, b2 = LQ_values(mu, grid, sigma[0], sigma[1], zero, f2)
    return 2 * a1, 2 * b2, 2 * b1, 2 * a2


def sigma1_values(mu: float, grid: Grid, sigma: Pair, f1) -> np.ndarray:
    zero = np.zeros(grid.n_points)
    return 2 * LQ_values(mu, grid, sigma[0], sigma[1], f1, zero)[0]


def sigma2_values(mu: float, grid: Grid, sigma: Pair, f2) -> np.ndarray:
    zero = np.zeros(grid.n_points)
    return 2 * LQ_values(mu, grid, sigma[0], sigma[1], zero, f2)[1]


def sigma2_adjoint_values(mu: float, grid: Grid, sigma: Pair, g) -> np.ndarray:
    """Σ*_{μ,2} g = [2 T* Q_0(Tσ, (T^{-1})* L* (g e2))]_2."""
    zero = np.zeros(grid.n_points)
    u1, u2 = L_values(mu, grid, zero, g, adjoint=True)
    u1, u2 = T_values(mu, grid, u1, u2, inverse=True, adjoint=True)
    ts1, ts2 = T_values(mu, grid, sigma[0], sigma[1])
    q1, q2 = Q0_values(ts1, ts2, u1, u2)
    return 2 * T_values(mu, grid, q1, q2, adjoint=True)[1]


def light_symbol(params: ModelParams, tau: float, k) -> np.ndarray:
    mu, c = params.mu, params.c
    return -c ** 2 * mu * k ** 2 + 2.0 * (1.0 + mu * np.cos(k) ** 2 + mu ** 2 * tau)


def light_values(params: ModelParams, tau: float, grid: Grid, sigma: Pair, f, adjoint: bool = False) -> np.ndarray:
    """The light operator c²μ∂² + 2(1 + μA² + μ²τ_μ) + Σ_{μ,2}, or its adjoint."""
    base = spectral.apply_symbol(f, grid, light_symbol(params, tau, spectral.wavenumbers(grid)))
    if adjoint:
        return base + sigma2_adjoint_values(params.mu, grid, sigma, f)
    return base + sigma2_values(params.mu, grid, sigma, f)


def heavy_symbol(params: ModelParams, k) -> np.ndarray:
    """Symbol d(k) of c²∂² + L_{μ,11}; negative for k ≠ 0, double zero at k = 0."""
    return -params.c ** 2 * k ** 2 + 2.0 * np.sin(k) ** 2 * (1.0 - params.mu * np.cos(k) ** 2)


def heavy_inverse_values(params: ModelParams, grid: Grid, g) -> np.ndarray:
    """
    d^{-1} g for a localized, even, mean-zero g. The zero mode is fixed by the
    second moment of g, which is the value the whole-line inverse takes.
    Stacked right-hand sides are taken along the last axis.
    """
    g = np.asarray(g, dtype=float)
    k = spectral.wavenumbers(grid)
    d = heavy_symbol(params, k)
    spec = sfft.rfft(g)
    out = np.zeros_like(spec)
    out[..., 1:] = spec[..., 1:] / d[1:]
    curvature = 2.0 * (params.c ** 2 - 2.0 * (1.0 - params.mu))
    # bin 0 holds the plain sum, so the dx of the moment integral cancels
    out[..., 0] = np.sum(grid.x ** 2 * g, axis=-1) / curvature
    return sfft.irfft(out, n=grid.n_points)


def Delta_values(omega: float, grid: Grid, f) -> np.ndarray:
    k = spectral.wavenumbers(grid)
    return spectral.apply_symbol(f, grid, 2.0 * np.cos(k) ** 2 - 2.0 * np.cos(omega) ** 2)


def Kstar_values(mu: float, grid: Grid, sigma: Pair, sigma_c, f) -> np.ndarray:
    if mu <= 0:
        raise InvalidInputError("K*_μ is defined for μ > 0")
    return (sigma2_adjoint_values(mu, grid, sigma, f) - 4.0 * sigma_c * f) / mu


# ─── Scalar operators ────────────────────────────────────────────────────────

def shift(f: GridFunction, d: float) -> GridFunction:
    if abs(d) > f.grid.half_length / 2:
        raise InvalidInputError(f"shift {d} exceeds half the half-length {f.grid.half_length}")
    if d == 0:
        return f
    return GridFunction(grid=f.grid, values=spectral.shift_values(f.values, f.grid, d), parity="none")


def apply_A(f: GridFunction) -> GridFunction:
    out = spectral.apply_symbol(f.values, f.grid, lambda k: np.cos(k) + 0j)
    return spectral.make_function(f.grid, out, f.parity)


_FLIP = {"even": "odd", "odd": "even", "none": "none"}


def apply_delta(f: GridFunction) -> GridFunction:
    out = spectral.apply_symbol(f.values, f.grid, lambda k: 1j * np.sin(k))
    return spectral.make_function(f.grid, out, _FLIP[f.parity])


# ─── Two-component operators ─────────────────────────────────────────────────

def _field(grid: Grid, pair: Pair) -> TwoField:
    return TwoField.from_arrays(grid, spectral.symmetrize(pair[0], "even"), spectral.symmetrize(pair[1], "odd"))


def apply_L(params: ModelParams, h: TwoField, adjoint: bool = False) -> TwoField:
    return _field(h.grid, L_values(params.mu, h.grid, *h.arrays(), adjoint=adjoint))


def apply_D(params: ModelParams, rho: TwoField) -> TwoField:
    return _field(rho.grid, D_values(params.mu, rho.grid, *rho.arrays()))


def apply_T(params: ModelParams, theta: TwoField, inverse: bool = False, adjoint: bool = False) -> TwoField:
    return _field(theta.grid, T_values(params.mu, theta.grid, *theta.arrays(), inverse=inverse, adjoint=adjoint))


def quadratic_Q0(g: TwoField, g_acute: TwoField) -> TwoField:
    if g.grid != g_acute.grid:
        raise InvalidInputError("Q needs both fields on the same grid")
    return _field(g.grid, Q0_values(*g.arrays(), *g_acute.arrays()))


def quadratic_Q(params: ModelParams, g: TwoField, g_acute: TwoField) -> TwoField:
    if g.grid != g_acute.grid:
        raise InvalidInputError("Q needs both fields on the same grid")
    return _field(g.grid, Q_values(params.mu, g.grid, *g.arrays(), *g_acute.arrays()))


def residual_G(params: ModelParams, h: TwoField) -> TwoField:
    """G(h, μ) = c² I_μ h'' + L_μ h + L_μ Q_μ(h, h)."""
    r1, r2 = G_values(params, h.grid, *h.arrays())
    r1 = spectral.symmetrize(r1, "even")
    # first row carries a δ in every term
    r1 = r1 - r1.mean()
    return TwoField.from_arrays(h.grid, r1, spectral.symmetrize(r2, "odd"))


def residual_rho(params: ModelParams, rho: TwoField) -> TwoField:
    """Untransformed residual c² I_μ ρ'' + D_μ ρ + D_μ Q_0(ρ, ρ)."""
    grid = rho.grid
    v1, v2 = rho.arrays()
    lin1, lin2 = D_values(params.mu, grid, v1, v2)
    nl1, nl2 = D_values(params.mu, grid, *Q0_values(v1, v2, v1, v2))
    r1 = params.c ** 2 * spectral.derivative(v1, grid, 2) + lin1 + nl1
    r2 = params.c ** 2 * params.mu * spectral.derivative(v2, grid, 2) + lin2 + nl2
    return _field(grid, (r1, r2))


def off_diagonal_Theta(params: ModelParams, eta: TwoField) -> TwoField:
    grid = eta.grid
    t12, t21 = theta_symbols(params.mu, spectral.wavenumbers(grid))
    e1, e2 = eta.arrays()
    return _field(grid, (spectral.apply_symbol(e2, grid, t12), spectral.apply_symbol(e1, grid, t21)))


def coefficient_Sigma_Omega(params: ModelParams, sigma_ref: TwoField, f: TwoField) -> Tuple[TwoField, TwoField]:
    """Diagonal part Σ_μ f and off-diagonal part μΩ_μ f of 2 L_μ Q_μ(σ_ref, f)."""
    if sigma_ref.grid != f.grid:
        raise InvalidInputError("reference profile and argument live on different grids")
    s1, s2, o1, o2 = sigma_parts_values(params.mu, f.grid, sigma_ref.arrays(), *f.arrays())
    return _field(f.grid, (s1, s2)), _field(f.grid, (o1, o2))


def Sigma2_adjoint(params: ModelParams, sigma_ref: TwoField, g: GridFunction) -> GridFunction:
    out = sigma2_adjoint_values(params.mu, g.grid, sigma_ref.arrays(), g.values)
    return spectral.make_function(g.grid, out, "odd")


def apply_light(params: ModelParams, sigma_ref: TwoField, tau: float, f: GridFunction,
                adjoint: bool = False) -> GridFunction:
    out = light_values(params, tau, f.grid, sigma_ref.arrays(), f.values, adjoint=adjoint)
    return spectral.make_function(f.grid, out, "odd")


def apply_light_adjoint(params: ModelParams, sigma_ref: TwoField, tau: float, f: GridFunction) -> GridFunction:
    return apply_light(params, sigma_ref, tau, f, adjoint=True)


def apply_Delta(omega: float, f: GridFunction) -> GridFunction:
    return spectral.make_function(f.grid, Delta_values(omega, f.grid, f.values), f.parity)


def apply_Kstar(params: ModelParams, sigma_ref: TwoField, sigma_c: GridFunction, f: GridFunction) -> GridFunction:
    out = Kstar_values(params.mu, f.grid, sigma_ref.arrays(), sigma_c.values, f.values)
    return spectral.make_function(f.grid, out, f.parity)


# ─── Particle form of the equations of motion ────────────────────────────────

def stretches(y: np.ndarray, left: float = None, right: float = None) -> np.ndarray:
    """
    r_j = y_{j+1} - y_j for j = -1..N-1, with clamped ghost particles at
    both ends (defaulting to the end particles' own positions).
    """
    y = np.asarray(y, dtype=float)
    padded = np.concatenate([[y[0] if left is None else left], y, [y[-1] if right is None else right]])
    return np.diff(padded)


def newton_accelerations(y: np.ndarray, mu: float, left: float = None, right: float = None) -> np.ndarray:
    """m_j ÿ_j = F(r_j) - F(r_{j-1}) with F(r) = r + r²; m_j = 1 on odd sites, μ on even ones."""
    r = stretches(y, left, right)
    force = r + r ** 2
    j = np.arange(len(y))
    masses = np.where(j % 2 == 1, 1.0, mu)
    return (force[1:] - force[:-1]) / masses


def rho_from_positions(y: np.ndarray) -> Pair:
    """ρ at the even sites j = 2, 4, ..., with ρ1 = (r_j + r_{j-1})/2 and ρ2 = -(r_j - r_{j-1})/2."""
    y = np.asarray(y, dtype=float)
    j = np.arange(2, len(y) - 1, 2)
    r_here = y[j + 1] - y[j]
    r_prev = y[j] - y[j - 1]
    return 0.5 * (r_here + r_prev), -0.5 * (r_here - r_prev)


def _even_site_ops(v: np.ndarray):
    # S^{±2} on the even sublattice is a one-index step
    up = np.roll(v, -1)
    down = np.roll(v, 1)
    a2 = 0.25 * (up + 2 * v + down)
    d2 = 0.25 * (up - 2 * v + down)
    ad = 0.25 * (up - down)
    return a2, d2, ad


def rho_form_accelerations(rho1: np.ndarray, rho2: np.ndarray, mu: float) -> Pair:
    """
    Second time derivatives of (ρ1, ρ2) from the even-sublattice system.
    The first and last entries use wrapped neighbours and are not meaningful.
    """
    a2_1, d2_1, ad_1 = _even_site_ops(rho1)
    a2_2, d2_2, ad_2 = _even_site_ops(rho2)
    sq = rho1 ** 2 + rho2 ** 2
    cross = rho1 * rho2
    a2_sq, d2_sq, ad_sq = _even_site_ops(sq)
    a2_x, d2_x, ad_x = _even_site_ops(cross)
    acc1 = 2 * d2_1 + 2 * ad_2 + 2 * d2_sq + 4 * ad_x
    acc2 = (-2 * mu * ad_1 - 2 * (rho2 + mu * a2_2) - 2 * mu * ad_sq - 4 * (cross + mu * a2_x)) / mu
    return acc1, acc2


def equations_of_motion_consistency(y: np.ndarray, mu: float) -> float:
    """Largest gap between ρ-form and particle-form accelerations at interior even sites."""
    y = np.asarray(y, dtype=float)
    if len(y) < 12:
        raise InvalidInputError("need at least 12 particles for the interior comparison")
    ydd = newton_accelerations(y, mu)
    j = np.arange(2, len(y) - 1, 2)
    from_newton_1 = 0.5 * (ydd[j + 1] - ydd[j - 1])
    from_newton_2 = -0.5 * (ydd[j + 1] - 2 * ydd[j] + ydd[j - 1])
    rho1, rho2 = rho_from_positions(y)
    acc1, acc2 = rho_form_accelerations(rho1, rho2, mu)
    inner = slice(2, -2)
    gap1 = np.max(np.abs(acc1[inner] - from_newton_1[inner]))
    gap2 = np.max(np.abs(acc2[inner] - from_newton_2[inner]))
    return float(max(gap1, gap2))
