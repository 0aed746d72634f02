"""
services/spectral.py

Grids, FFT differentiation and shifts, parity, quadrature and weighted norms.
Lattice grids use dx = 1/m so unit shifts are exact index rolls.
"""

import logging
import math
from typing import Callable, Optional, Union

import numpy as np
import pandas as pd
from scipy import fft as sfft

from fputwaves.config import settings
from fputwaves.models import PARITY_TOLERANCE, Grid, GridFunction, Parity, project_parity, reflect_values
from fputwaves.utils.errors import GridTooCoarseError, InvalidInputError

logger = logging.getLogger(__name__)

Symbol = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]

BOUNDARY_TOLERANCE = 1e-10
MAX_HALF_LENGTH = 640.0


# ─── Grids ───────────────────────────────────────────────────────────────────

def lattice_grid(half_length: float, points_per_unit: int = None) -> Grid:
    m = int(points_per_unit or settings.POINTS_PER_UNIT)
    if m < 1:
        raise InvalidInputError("points_per_unit must be a positive integer")
    L = float(math.ceil(half_length - 1e-9))
    return Grid(half_length=L, n_points=int(round(2 * L * m)))


def grid_for_frequency(omega: float, half_length: float = None) -> Grid:
    """Lattice-commensurate grid with dx <= π/(8ω)."""
    m = max(settings.POINTS_PER_UNIT, math.ceil(8.0 * abs(omega) / math.pi))
    return lattice_grid(half_length or settings.DEFAULT_HALF_LENGTH, m)


def check_resolution(grid: Grid, omega: float) -> None:
    if not grid.resolves(omega):
        raise GridTooCoarseError(
            f"dx={grid.dx:.4g} does not resolve frequency {omega:.4g} (need dx <= {math.pi / (8 * omega):.4g})"
        )


def wavenumbers(grid: Grid) -> np.ndarray:
    """Angular wavenumbers of the real FFT of a sample vector."""
    return 2.0 * np.pi * sfft.rfftfreq(grid.n_points, d=grid.dx)


# ─── Transforms ──────────────────────────────────────────────────────────────

def apply_symbol(values: np.ndarray, grid: Grid, symbol: Symbol) -> np.ndarray:
    """
    Fourier multiplier with symbol m(k). The symbol must be Hermitian,
    m(-k) = conj(m(k)), so the output is real.
    """
    k = wavenumbers(grid)
    mult = symbol(k) if callable(symbol) else symbol
    return sfft.irfft(sfft.rfft(values) * mult, n=grid.n_points)


def derivative(values: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    k = wavenumbers(grid)
    mult = (1j * k) ** order
    if order % 2:
        mult[-1] = 0.0
    return apply_symbol(values, grid, mult)


def antiderivative(values: np.ndarray, grid: Grid) -> np.ndarray:
    """
    F with F' = f and F(0) = 0. The mean of f integrates to a linear term,
    the rest through 1/(ik); exact for localized integrands.
    """
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    k = wavenumbers(grid)
    spec = sfft.rfft(values - mean)
    spec[0] = 0.0
    spec[1:] /= 1j * k[1:]
    spec[-1] = 0.0
    periodic = sfft.irfft(spec, n=grid.n_points)
    out = periodic + mean * grid.x
    return out - out[grid.center_index]


def shift_values(values: np.ndarray, grid: Grid, d: float) -> np.ndarray:
    """Samples of f(x + d): an index roll when d is a whole number of steps, a phase otherwise."""
    steps = d / grid.dx
    if abs(steps - round(steps)) < 1e-9:
        return np.roll(values, -int(round(steps)))
    return apply_symbol(values, grid, np.exp(1j * wavenumbers(grid) * d))


def integrate(values: np.ndarray, grid: Grid) -> float:
    # trapezoid on the periodic box
    return float(np.sum(values) * grid.dx)


# ─── Parity ──────────────────────────────────────────────────────────────────

def symmetrize(values: np.ndarray, parity: Parity) -> np.ndarray:
    return project_parity(values, parity)


def is_even(values: np.ndarray) -> bool:
    values = np.asarray(values, dtype=float)
    scale = max(float(np.max(np.abs(values))), 1e-300)
    return float(np.max(np.abs(values[1:] - reflect_values(values)[1:]))) <= PARITY_TOLERANCE * scale


def make_function(grid: Grid, values, parity: Parity = "none", decay_rate: float = 0.0) -> GridFunction:
    """Build a GridFunction, projecting the samples onto the requested parity first."""
    return GridFunction(grid=grid, values=symmetrize(values, parity), parity=parity, decay_rate=decay_rate)


def boundary_ratio(values: np.ndarray, fraction: float = 0.05) -> float:
    values = np.abs(np.asarray(values, dtype=float))
    peak = float(values.max())
    if peak == 0.0:
        return 0.0
    n_edge = max(1, int(round(fraction * values.size / 2)))
    edge = max(float(values[:n_edge].max()), float(values[-n_edge:].max()))
    return edge / peak


def ensure_finite(values: np.ndarray, what: str = "samples") -> None:
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"non-finite {what}")


# ─── Windows and cutoffs ─────────────────────────────────────────────────────

def _bump_ramp(t: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def smooth_step(x, x0: float, x1: float) -> np.ndarray:
    """C^∞ monotone step: 0 for x <= x0, 1 for x >= x1."""
    t = (np.asarray(x, dtype=float) - x0) / (x1 - x0)
    up = _bump_ramp(t)
    down = _bump_ramp(1.0 - t)
    return up / (up + down)


def cutoff_i1(x) -> np.ndarray:
    """Smooth odd cutoff, 0 on |x| <= 1/2 and sign(x) for |x| >= 2."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * smooth_step(np.abs(x), 0.5, 2.0)


def taper(grid: Grid, fraction: float = 0.1) -> np.ndarray:
    """Window equal to 1 on the interior and 0 on the outer `fraction` of the box."""
    L = grid.half_length
    return 1.0 - smooth_step(np.abs(grid.x), L * (1.0 - 2.0 * fraction), L * (1.0 - fraction))


# ─── Norms and projections ───────────────────────────────────────────────────

def weighted_norm(f: GridFunction, s: int = 0, b: float = 0.0) -> float:
    """
    Quadrature value of ‖cosh^b(x) f‖_{H^s}, with the H^s weight (1 + k²)^s on
    the Fourier side.

    Nondecreasing in s. Nondecreasing in b when s = 0; for s ≥ 1 the ordering
    in b holds only up to a constant.
    """
    if s < 0:
        raise InvalidInputError("Sobolev index must be nonnegative")
    ensure_finite(f.values)
    grid = f.grid
    g = np.cosh(grid.x) ** b * f.values
    if not np.all(np.isfinite(g)):
        raise InvalidInputError("weight cosh^b overflows on this grid")
    spec = sfft.fft(g)
    k = 2.0 * np.pi * sfft.fftfreq(grid.n_points, d=grid.dx)
    energy = np.sum((1.0 + k ** 2) ** s * np.abs(spec) ** 2) * grid.dx / grid.n_points
    return float(math.sqrt(energy))


def mean_zero_project(f: GridFunction) -> GridFunction:
    """
    Subtract the quadrature mean of an even field. On the periodic grid the
    trapezoid mean dx·Σf / 2L is exactly the sample mean.
    """
    ensure_finite(f.values)
    if f.parity == "odd" or (f.parity == "none" and not is_even(f.values)):
        raise InvalidInputError("mean-zero projection needs an even field")
    shifted = f.values - f.values.mean()
    return GridFunction(grid=f.grid, values=shifted, parity=f.parity, decay_rate=f.decay_rate)


def auto_extend(build: Callable[[Grid], np.ndarray], grid: Grid, tolerance: float = BOUNDARY_TOLERANCE):
    """
    Evaluate `build` on `grid`, doubling the box while the boundary amplitude
    exceeds `tolerance` of the peak.
    """
    values = build(grid)
    while boundary_ratio(values) > tolerance:
        if grid.half_length >= MAX_HALF_LENGTH:
            logger.warning("boundary ratio %.2e above tolerance at L=%g", boundary_ratio(values), grid.half_length)
            break
        grid = grid.doubled_domain()
        logger.warning("profile not decayed at the boundary, doubling box to L=%g", grid.half_length)
        values = build(grid)
    return grid, values


# ─── Serialization ───────────────────────────────────────────────────────────

def to_frame(f: GridFunction, name: str = "value") -> pd.DataFrame:
    return pd.DataFrame({"x": f.grid.x, name: f.values})


def to_json(f: GridFunction) -> dict:
    return {
        "grid": {"half_length": f.grid.half_length, "n_points": f.grid.n_points, "dx": f.grid.dx},
        "parity": f.parity,
        "decay_rate": f.decay_rate,
        "values": [float(v) for v in f.values],
    }


def from_json(payload: dict) -> GridFunction:
    grid = Grid(**{k: payload["grid"][k] for k in ("half_length", "n_points")})
    return GridFunction(grid=grid, values=payload["values"], parity=payload.get("parity", "none"),
                        decay_rate=payload.get("decay_rate", 0.0))


def sample(grid: Grid, fn: Callable[[np.ndarray], np.ndarray], parity: Parity = "none",
           decay_rate: float = 0.0) -> GridFunction:
    return make_function(grid, fn(grid.x), parity, decay_rate)


def interpolate(f: GridFunction, x: np.ndarray, values: Optional[np.ndarray] = None) -> np.ndarray:
    """Band-limited (trigonometric) interpolation of the samples at arbitrary points."""
    grid = f.grid
    v = f.values if values is None else values
    spec = sfft.fft(v) / grid.n_points
    k = 2.0 * np.pi * sfft.fftfreq(grid.n_points, d=grid.dx)
    spec[grid.n_points // 2] = 0.0
    phase = np.exp(1j * np.outer(np.asarray(x, dtype=float) + grid.half_length, k))
    return np.real(phase @ spec)
