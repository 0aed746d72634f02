"""
services/dynamics.py

Direct time integration of the diatomic lattice

    m_j ÿ_j = F(r_j) - F(r_{j-1}),   F(r) = r + r²,   r_j = y_{j+1} - y_j,

with m_j = μ on even (light) sites and 1 on odd (heavy) ones. Traveling
waves are seeded from their (ρ1, ρ2) profiles at t = 0 and followed with
velocity Verlet. The end particles see fixed ghost neighbours and a velocity
sponge over the outer sites.
"""

import logging
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import fft as sfft
from scipy.optimize import minimize_scalar

from fputwaves.models import GridFunction, LatticeState, NanopteronSolution, SimConfig, SolitaryWave, Trajectory
from fputwaves.services import dispersion, lattice_core, nanopteron, periodic, spectral
from fputwaves.utils.errors import InstabilityError, InvalidInputError, require

logger = logging.getLogger(__name__)

SPONGE_STRENGTH = 2.0
BLOWUP_STRETCH = 10.0
N_SNAPSHOTS = 64
CORE_WINDOW = 10.0
DECAY_TOLERANCE = 1e-8
ZERO_PAD = 8

Profile = Callable[[np.ndarray, int], Tuple[np.ndarray, np.ndarray]]


# ─── Profiles on the particle index ──────────────────────────────────────────

def _localized(f: GridFunction, x: np.ndarray, derivative: int) -> np.ndarray:
    """Trigonometric interpolation inside the box, zero outside it."""
    grid = f.grid
    values = spectral.derivative(f.values, grid, derivative) if derivative else f.values
    out = np.zeros_like(x, dtype=float)
    inside = np.abs(x) < grid.half_length
    out[inside] = spectral.interpolate(f, x[inside], values)
    return out


def _check_covers(f: GridFunction, x: np.ndarray) -> None:
    if np.max(np.abs(x)) >= f.grid.half_length and spectral.boundary_ratio(f.values) > DECAY_TOLERANCE:
        raise InvalidInputError("particle range exceeds the profile domain and the profile has not decayed there")


def wave_profile(solution: NanopteronSolution) -> Profile:
    """(ρ1, ρ2)(x) = (σ_c + Υ1 + Φ1, Υ2 + Φ2) and its x-derivatives."""
    phys = nanopteron.assemble_physical(solution)
    grid = solution.core.grid
    loc1 = spectral.make_function(grid, solution.core.base.profile.values + phys["upsilon1"])
    loc2 = spectral.make_function(grid, phys["upsilon2"])

    def profile(x: np.ndarray, derivative: int = 0):
        _check_covers(loc1, x)
        f1, f2 = periodic.transformed(solution.wave, x, derivative=derivative)
        return _localized(loc1, x, derivative) + f1, _localized(loc2, x, derivative) + f2

    return profile


def solitary_profile(wave: SolitaryWave) -> Profile:
    """(σ_c, 0), the unrefined seed."""
    def profile(x: np.ndarray, derivative: int = 0):
        _check_covers(wave.profile, x)
        return _localized(wave.profile, x, derivative), np.zeros_like(x, dtype=float)

    return profile


def _center(config: SimConfig) -> int:
    center = config.center if config.center is not None else 2 * (config.n_particles // 4)
    require(center % 2 == 0 and 0 < center < config.n_particles, "the wave center must be an interior even site")
    return center


# ─── Seeding ─────────────────────────────────────────────────────────────────

def seed_profile(profile: Profile, config: SimConfig) -> LatticeState:
    """
    Positions and velocities at t = 0 from the stretch relations
    r_j = ρ1(j) - ρ2(j), r_{j-1} = ρ1(j) + ρ2(j) at even j, with
    ∂_t = -c ∂_x for the traveling wave. y_0 and ẏ_0 are anchored at 0.
    """
    n = config.n_particles
    center = _center(config)
    x_even = np.arange(0, n - 1, 2) - center
    rho1, rho2 = profile(x_even.astype(float), 0)
    d1, d2 = profile(x_even.astype(float), 1)

    r = np.empty(n - 1)
    r[0::2] = rho1 - rho2
    r[1::2] = (rho1 + rho2)[1:]
    rdot = np.empty(n - 1)
    rdot[0::2] = -config.c * (d1 - d2)
    rdot[1::2] = -config.c * (d1 + d2)[1:]

    y = np.concatenate([[0.0], np.cumsum(r)])
    ydot = np.concatenate([[0.0], np.cumsum(rdot)])
    return LatticeState(y=y, ydot=ydot, mu=config.mu)


def seed_from_wave(solution: NanopteronSolution, config: SimConfig) -> LatticeState:
    require(abs(solution.params.mu - config.mu) < 1e-14 and abs(solution.params.c - config.c) < 1e-14,
            "simulation parameters must match the solution")
    return seed_profile(wave_profile(solution), config)


def seed_unrefined(wave: SolitaryWave, config: SimConfig) -> LatticeState:
    require(abs(wave.c - config.c) < 1e-14, "simulation speed must match the solitary wave")
    return seed_profile(solitary_profile(wave), config)


# ─── Integrator ──────────────────────────────────────────────────────────────

def accelerations(y: np.ndarray, masses: np.ndarray, left: Optional[float] = None,
                  right: Optional[float] = None) -> np.ndarray:
    r = lattice_core.stretches(y, left, right)
    force = r + r ** 2
    return (force[1:] - force[:-1]) / masses


def _verlet(y, v, acc, dt, masses, left, right, damping):
    v_half = v + 0.5 * dt * acc
    y_new = y + dt * v_half
    acc_new = accelerations(y_new, masses, left, right)
    v_new = v_half + 0.5 * dt * acc_new
    if damping is not None:
        v_new = v_new * np.exp(-damping * dt)
    return y_new, v_new, acc_new


def step_verlet(state: LatticeState, dt: float, masses: Optional[np.ndarray] = None,
                left: Optional[float] = None, right: Optional[float] = None,
                damping: Optional[np.ndarray] = None) -> LatticeState:
    masses = state.masses if masses is None else masses
    acc = accelerations(state.y, masses, left, right)
    y, v, _ = _verlet(state.y, state.ydot, acc, dt, masses, left, right, damping)
    return LatticeState(y=y, ydot=v, mu=state.mu, t=state.t + dt)


def sponge(n: int, fraction: float) -> Optional[np.ndarray]:
    width = int(fraction * n)
    if width == 0:
        return None
    j = np.arange(n)
    depth = np.maximum(width - np.minimum(j, n - 1 - j), 0) / width
    return SPONGE_STRENGTH * depth ** 2


def energy(state: LatticeState, left: Optional[float] = None, right: Optional[float] = None) -> float:
    """H = Σ ½m_jẏ_j² + Σ (½r_j² + ⅓r_j³)."""
    r = lattice_core.stretches(state.y, left, right)
    return float(0.5 * np.sum(state.masses * state.ydot ** 2) + np.sum(0.5 * r ** 2 + r ** 3 / 3.0))


def momentum(state: LatticeState) -> float:
    return float(np.sum(state.masses * state.ydot))


def reverse(state: LatticeState) -> LatticeState:
    return LatticeState(y=state.y.copy(), ydot=-state.ydot, mu=state.mu, t=state.t)


def _default_probe(config: SimConfig) -> int:
    """An even site behind the core, halfway to the sponge."""
    center = _center(config)
    width = int(config.sponge_fraction * config.n_particles)
    site = (center + width) // 2
    return site - site % 2


def run(config: SimConfig, state: LatticeState, probe: Optional[int] = None) -> Trajectory:
    n = config.n_particles
    require(state.y.size == n, "state size does not match n_particles")
    require(abs(state.mu - config.mu) < 1e-14, "state mass ratio does not match the configuration")
    spectral.ensure_finite(state.y, "positions")
    spectral.ensure_finite(state.ydot, "velocities")
    probe = _default_probe(config) if probe is None else probe
    require(0 <= probe < n, "probe site outside the lattice")

    steps = int(round(config.t_end / config.dt))
    masses = state.masses
    left, right = float(state.y[0]), float(state.y[-1])
    damping = sponge(n, config.sponge_fraction)
    n_samples = steps // config.stride + 1
    snapshot_every = max(1, n_samples // N_SNAPSHOTS)
    logger.info("simulating %d particles for %d steps (dt=%.2e, mu=%.4g)", n, steps, config.dt, config.mu)

    times, energies, momenta, probes, snap_t, snaps = [], [], [], [], [], []
    y, v = state.y.copy(), state.ydot.copy()
    acc = accelerations(y, masses, left, right)
    t = state.t

    for step in range(steps + 1):
        if step % config.stride == 0 or step == steps:
            current = LatticeState(y=y, ydot=v, mu=config.mu, t=t)
            r = lattice_core.stretches(y, left, right)
            if not np.all(np.isfinite(r)) or np.max(np.abs(r)) > BLOWUP_STRETCH:
                raise InstabilityError(f"lattice blew up at t={t:.4f}", {"t": t, "max_stretch": float(np.max(np.abs(r)))})
            times.append(t)
            energies.append(energy(current, left, right))
            momenta.append(momentum(current))
            probes.append(v[probe])
            if (len(times) - 1) % snapshot_every == 0 or step == steps:
                snap_t.append(t)
                snaps.append(y.copy())
        if step == steps:
            break
        y, v, acc = _verlet(y, v, acc, config.dt, masses, left, right, damping)
        t = state.t + (step + 1) * config.dt

    final = LatticeState(y=y, ydot=v, mu=config.mu, t=t)
    trajectory = Trajectory(config=config, initial=state, final=final, times=np.array(times),
                            energy=np.array(energies), momentum=np.array(momenta), probe_index=probe,
                            probe=np.array(probes), snapshot_times=np.array(snap_t), snapshots=np.array(snaps),
                            steps=steps)
    logger.info("simulation done: relative energy drift %.2e per unit time", trajectory.energy_drift)
    return trajectory


# ─── Diagnostics ─────────────────────────────────────────────────────────────

def dominant_frequency(signal: np.ndarray, dt: float, floor: float = 0.0) -> float:
    """Peak angular frequency above `floor` of a Hann-windowed, zero-padded spectrum."""
    signal = np.asarray(signal, dtype=float)
    require(signal.size >= 16, "need at least 16 samples for a frequency estimate")
    t = np.arange(signal.size)
    detrended = signal - np.polyval(np.polyfit(t, signal, 1), t)
    windowed = detrended * np.hanning(signal.size)
    n_pad = ZERO_PAD * signal.size
    magnitude = np.abs(sfft.rfft(windowed, n=n_pad))
    omega = 2.0 * np.pi * sfft.rfftfreq(n_pad, d=dt)
    band = np.nonzero(omega > floor)[0]
    require(band.size >= 3, "frequency floor leaves no usable band")
    i = band[np.argmax(magnitude[band])]
    if 0 < i < magnitude.size - 1:
        # parabolic refinement on log magnitude
        a, b, c = np.log(magnitude[i - 1:i + 2] + 1e-300)
        denom = a - 2 * b + c
        offset = 0.5 * (a - c) / denom if denom != 0 else 0.0
        return float(omega[i] + offset * (omega[1] - omega[0]))
    return float(omega[i])


def measure_nanopteron(trajectory: Trajectory, solution: NanopteronSolution) -> Dict[str, float]:
    """
    Co-moving profile error on the core window, ripple amplitude ahead of and
    behind the core, and the ripple frequency seen at the probe site.
    """
    config = trajectory.config
    mu, c = solution.params.mu, solution.params.c
    n = config.n_particles
    center = _center(config)
    width = int(config.sponge_fraction * n)
    final = trajectory.final

    j_even = np.arange(2, n - 1, 2)
    rho1, rho2 = lattice_core.rho_from_positions(final.y)
    x = (j_even - center) - c * final.t
    clear = (j_even >= width) & (j_even < n - width)
    core = clear & (np.abs(x) <= CORE_WINDOW)
    require(np.any(core), "the core has left the measurable part of the lattice")
    p1, p2 = wave_profile(solution)(x[core], 0)
    profile_error = float(max(np.max(np.abs(rho1[core] - p1)), np.max(np.abs(rho2[core] - p2))))

    ahead = clear & (x > CORE_WINDOW)
    behind = clear & (x < -CORE_WINDOW)
    ripple_ahead = float(np.max(np.abs(rho2[ahead]))) if np.any(ahead) else 0.0
    ripple_behind = float(np.max(np.abs(rho2[behind]))) if np.any(behind) else 0.0

    omega_mu = solution.wave.omega_mu
    sample_dt = config.dt * config.stride
    floor = 0.5 * c * dispersion.omega_tilde(mu, c)
    measured = dominant_frequency(trajectory.probe, sample_dt, floor) / c

    diagnostics = {
        "t": final.t,
        "profile_error": profile_error,
        "ripple_ahead": ripple_ahead,
        "ripple_behind": ripple_behind,
        "ripple_frequency": measured,
        "omega_mu": omega_mu,
        "frequency_error": abs(measured - omega_mu) / omega_mu,
        "energy_drift": trajectory.energy_drift,
        "momentum_change": float(np.max(np.abs(trajectory.momentum - trajectory.momentum[0]))),
        "eom_consistency": lattice_core.equations_of_motion_consistency(final.y, mu),
    }
    logger.info("co-moving error %.2e, ripple %.2e/%.2e, frequency %.6f vs omega_mu %.6f", profile_error,
                ripple_ahead, ripple_behind, measured, omega_mu)
    return diagnostics


# ─── Monatomic limit ─────────────────────────────────────────────────────────

def simulate_monatomic(sigma: SolitaryWave, t_end: float, dt: float = 0.01,
                       margin: float = 20.0) -> Dict[str, float]:
    """
    The μ = 0 lattice ü = 2δ²(u + u²) on the even sublattice (sites x = 2i),
    seeded with σ_c and its traveling-wave velocity. Returns the displacement
    of the best-aligned copy of σ_c at t_end and the measured speed.
    """
    require(t_end > 0 and dt > 0, "t_end and dt must be positive")
    c = sigma.c
    L = sigma.profile.grid.half_length
    x = np.arange(-L, L + c * t_end + margin, 2.0)
    u = _localized(sigma.profile, x, 0)
    v = -c * _localized(sigma.profile, x, 1)

    def acc(w):
        force = w + w ** 2
        padded = np.concatenate([[0.0], force, [0.0]])
        return 0.5 * (padded[2:] - 2.0 * force + padded[:-2])

    steps = int(round(t_end / dt))
    a = acc(u)
    for _ in range(steps):
        v_half = v + 0.5 * dt * a
        u = u + dt * v_half
        a = acc(u)
        v = v_half + 0.5 * dt * a
    if not np.all(np.isfinite(u)):
        raise InstabilityError("monatomic lattice blew up")
    t = steps * dt

    def misfit(s: float) -> float:
        shifted = np.zeros_like(x)
        inside = np.abs(x - s) < L
        shifted[inside] = spectral.interpolate(sigma.profile, x[inside] - s)
        return float(np.sum((u - shifted) ** 2))

    best = minimize_scalar(misfit, bounds=(c * t - 2.0, c * t + 2.0), method="bounded",
                           options={"xatol": 1e-10})
    speed = best.x / t
    logger.info("monatomic run: displacement %.6f over t=%.3f, speed %.6f (c=%.6f)", best.x, t, speed, c)
    return {"t": t, "displacement": float(best.x), "speed": float(speed), "relative_error": abs(speed - c) / c,
            "misfit": float(best.fun)}


def compare_ripple(solution: NanopteronSolution, base: SolitaryWave, config: SimConfig) -> Dict[str, float]:
    """Ripple behind the core for the nanopteron seed and for the unrefined (σ_c, 0) seed."""
    out = {}
    for name, state in (("nanopteron", seed_from_wave(solution, config)), ("unrefined", seed_unrefined(base, config))):
        trajectory = run(config, state)
        out[name] = measure_nanopteron(trajectory, solution)["ripple_behind"]
    return out
