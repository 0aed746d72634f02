"""
services/verification.py

The eleven checks behind `verify-all`, one function each.
"""

import json
import logging
import math
import time
from typing import Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd

from fputwaves.config import settings
from fputwaves.models import CheckReport, GridFunction, ModelParams, SimConfig, SolitaryWave
from fputwaves.services import dispersion, dynamics, jost, lattice_core, nanopteron, periodic, solitary, spectral
from fputwaves.utils.dependencies import get_core, get_light_context, get_solitary
from fputwaves.utils.errors import FputwavesError, NotInMcError, require
from fputwaves.utils.fitting import loglog_slope
from fputwaves.utils.workers import pool

logger = logging.getLogger(__name__)

Level = Literal["quick", "full"]

SWEEP_MUS = (0.004, 0.006, 0.009, 0.014, 0.02, 0.03, 0.045)


def _shrink(level: Level, full: int) -> int:
    return full if level == "full" else max(3, full // 4)


def _report(check_id: int, title: str, ok: bool, measured: Dict[str, object], target: str) -> CheckReport:
    return CheckReport(check_id=check_id, title=title, status="pass" if ok else "fail", measured=measured,
                       target=target)


def _random_field(grid, rng: np.random.Generator, parity: str, band: float = 0.25) -> np.ndarray:
    """Band-limited random samples with the requested parity."""
    n = grid.n_points
    spec = np.zeros(n // 2 + 1, dtype=complex)
    keep = int(band * (n // 2))
    spec[1:keep] = rng.normal(size=keep - 1) + 1j * rng.normal(size=keep - 1)
    values = np.fft.irfft(spec, n=n)
    values /= max(float(np.max(np.abs(values))), 1e-300)
    return spectral.symmetrize(values, parity)


def _contexts(c: float, mus, admissible: bool = True) -> List:
    """Light contexts at the sweep points, by default only those passing the κ floor."""
    contexts = []
    for mu in mus:
        try:
            ctx = get_light_context(c, mu)
        except FputwavesError as exc:
            logger.warning("skipping mu=%.4g: %s", mu, exc.detail)
            continue
        if not admissible or abs(ctx.kappa.kappa) > nanopteron.kappa_floor(ctx.params, ctx.omega):
            contexts.append(ctx)
    return contexts


def _sweep_mus(level: Level) -> Tuple[float, ...]:
    return SWEEP_MUS if level == "full" else SWEEP_MUS[2::2]


# ─── 1. Operator algebra ─────────────────────────────────────────────────────

def check_operator_algebra(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    rng = np.random.default_rng(0)
    grid = spectral.lattice_grid(20.0)
    params = ModelParams(c=c, mu=0.05)
    identity_gap, parity_gap, mean_gap = 0.0, 0.0, 0.0
    for _ in range(_shrink(level, 200)):
        f = spectral.make_function(grid, _random_field(grid, rng, "even"), "even")
        lhs = f.values + lattice_core.apply_delta(lattice_core.apply_delta(f)).values
        rhs = lattice_core.apply_A(lattice_core.apply_A(f)).values
        identity_gap = max(identity_gap, float(np.max(np.abs(lhs - rhs))))

        h1, h2 = _random_field(grid, rng, "even"), _random_field(grid, rng, "odd")
        g1, g2 = lattice_core.G_values(params, grid, 0.1 * h1, 0.1 * h2)
        scale = max(float(np.max(np.abs(g1))), float(np.max(np.abs(g2))), 1.0)
        parity_gap = max(parity_gap, float(np.max(np.abs(g1 - spectral.reflect_values(g1)))) / scale,
                         float(np.max(np.abs(g2 + spectral.reflect_values(g2)))) / scale)
        mean_gap = max(mean_gap, abs(float(g1.mean())) / scale)
    ok = max(identity_gap, parity_gap, mean_gap) < 1e-11
    return _report(1, "operator algebra", ok,
                   {"identity": identity_gap, "parity": parity_gap, "mean": mean_gap}, "< 1e-11")


# ─── 2. Solitary core ────────────────────────────────────────────────────────

def check_solitary_core(wave: Optional[SolitaryWave] = None, level: Level = "quick", c: float = None) -> CheckReport:
    """Checks a supplied profile as is, or solves for σ_c and adds a grid-doubling test."""
    c = c or settings.DEFAULT_C
    supplied = wave is not None
    wave = wave or get_solitary(c)
    grid = wave.profile.grid
    v = wave.profile.values
    residual = float(np.max(np.abs(solitary.monatomic_residual_values(wave.c, grid, v))))
    measured = {
        "residual": residual,
        "parity_defect": wave.profile.parity_defect() if wave.profile.parity == "even"
        else float(np.max(np.abs(v[1:] - spectral.reflect_values(v)[1:]))),
        "positive": bool(np.min(v) > -1e-13),
        "unimodal": solitary.is_unimodal(v),
        "decay_fit_r2": wave.decay_fit_r2,
        "decay_rate": wave.measured_decay,
        "exact_decay_rate": solitary.exact_decay_rate(wave.c),
    }
    ok = (residual < 1e-10 and measured["parity_defect"] < 1e-12 and measured["positive"]
          and measured["unimodal"] and wave.decay_fit_r2 > 0.99)
    if not supplied:
        fine = solitary.solve_monatomic(c, grid.refined())
        if fine.profile.grid.half_length == grid.half_length:
            gap = float(np.max(np.abs(fine.profile.values[::2] - v)))
        else:
            gap = float("nan")
        measured["self_convergence"] = gap
        ok = ok and gap < 1e-9
    return _report(2, "solitary core", ok, measured, "residual < 1e-10, R^2 > 0.99, doubling < 1e-9")


def _check_solitary_default(level: Level = "quick", c: float = None) -> CheckReport:
    return check_solitary_core(None, level, c)


# ─── 3. Refined core identity ────────────────────────────────────────────────

def check_refined_core(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    mus = (1e-3, 1e-2, 3e-2) if level == "full" else (1e-2,)
    measured = {}
    ok = True
    for mu in mus:
        core = get_core(c, mu)
        grid = core.grid
        params = ModelParams(c=c, mu=mu)
        g1, g2 = lattice_core.G_values(params, grid, *core.sigma.arrays())
        expected = c ** 2 * mu ** 2 * spectral.derivative(core.xi.f2.values, grid, 2)
        window = np.abs(grid.x) <= grid.half_length / 2
        first = float(np.max(np.abs(g1[window])))
        second = float(np.max(np.abs((g2 - expected)[window])))
        measured[f"mu={mu:g}"] = {"first": first, "second": second}
        ok = ok and first < 1e-11 and second < 1e-10
    return _report(3, "refined core identity", ok, measured, "first < 1e-11, second < 1e-10")


# ─── 4. Dispersion ───────────────────────────────────────────────────────────

def check_dispersion(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    worst_eq, worst_det, inside = 0.0, 0.0, True
    for mu in np.logspace(-4, -1, _shrink(level, 20)):
        d = dispersion.solve_omega(float(mu), c)
        lam = c ** 2 * mu * d.omega_mu ** 2
        worst_eq = max(worst_eq, abs(lam - d.lambda_plus_at_omega) / lam)
        worst_det = max(worst_det, abs(d.det_residual))
        lo, hi = dispersion.omega_bracket(float(mu), c)
        inside = inside and lo <= d.omega_mu <= hi
    ok = worst_eq < 1e-12 and worst_det < 1e-10 and inside
    return _report(4, "dispersion", ok, {"relation": worst_eq, "det": worst_det, "in_bracket": inside},
                   "relation < 1e-12, det < 1e-10, inside bracket")


# ─── 5. Periodic waves ───────────────────────────────────────────────────────

def check_periodic(level: Level = "quick", c: float = None, mu: float = 0.01) -> CheckReport:
    c = c or settings.DEFAULT_C
    a_max = periodic.find_a_max(mu, c)
    amplitudes = np.linspace(0.0, a_max, _shrink(level, 8) + 1)[1:]
    worst = max(periodic.spatial_residual(periodic.solve_periodic(mu, c, float(a))) for a in amplitudes)
    coarse = periodic.lipschitz_constants(mu, c, amplitudes)
    fine = periodic.lipschitz_constants(mu, c, amplitudes, n_modes=2 * periodic.MIN_MODES)
    drift = max(abs(x - y) / max(abs(y), 1e-300) for x, y in zip(coarse, fine))
    ok = bool(a_max > 0 and worst < 1e-9 and all(math.isfinite(k) for k in coarse) and drift < 0.05)
    return _report(5, "periodic waves", ok,
                   {"a_max": a_max, "residual": worst, "lipschitz": list(coarse), "refinement_drift": drift},
                   "residual < 1e-9 up to a_max, Lipschitz constants stable")


# ─── 6. Jost solutions and γ ─────────────────────────────────────────────────

def _zero_potential(c: float, grid) -> SolitaryWave:
    zero = GridFunction(grid=grid, values=np.zeros(grid.n_points), parity="even")
    return SolitaryWave(c=c, profile=zero, measured_decay=1.0, decay_fit_r2=1.0, residual_norm=0.0)


def check_jost(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    mu = 0.01
    omega = dispersion.solve_omega(mu, c).omega_mu
    grid = spectral.grid_for_frequency(omega, 20.0)
    free = jost.integrate_jost(mu, c, _zero_potential(c, grid), 1)
    zero_gap = max(float(np.max(np.abs(free.r - 1.0))), float(np.max(np.abs(free.phi))))

    base = get_solitary(c, omega)
    odd = jost.integrate_jost(mu, c, base, 1, omega=omega)
    monotone = bool(np.all(np.diff(odd.phi) >= -1e-14))
    zeta, dzeta = jost.shoot_linear(mu, c, base, 1, odd.x_half, omega)
    polar_gap = float(np.max(np.abs(np.sqrt(zeta ** 2 + (dzeta / omega) ** 2) - odd.r)))

    mus, gaps = [], []
    for ctx in _contexts(c, _sweep_mus(level), admissible=False):
        mus.append(ctx.params.mu)
        gaps.append(abs(ctx.gamma.theta_inf - ctx.jost_odd.phi_inf))
    slope = loglog_slope(mus, gaps).slope if len(mus) >= 3 else float("nan")
    ok = zero_gap < 1e-12 and monotone and polar_gap < 1e-10 and slope >= 0.7
    return _report(6, "jost solutions and gamma", ok,
                   {"zero_potential": zero_gap, "phi_monotone": monotone, "polar_identity": polar_gap,
                    "theta_slope": slope, "points": len(mus)},
                   "exact free case, polar < 1e-10, theta slope >= 0.7")


# ─── 7. κ_μ ──────────────────────────────────────────────────────────────────

def check_kappa(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    mus, gaps, scaled = [], [], []
    for ctx in _contexts(c, _sweep_mus(level), admissible=False):
        mu = ctx.params.mu
        mus.append(mu)
        gaps.append(abs(ctx.kappa.kappa - ctx.kappa.comparator))
        if abs(ctx.kappa.sin_term) >= 0.5:
            scaled.append(abs(ctx.kappa.kappa) / math.sqrt(mu))
    slope = loglog_slope(mus, gaps).slope if len(mus) >= 3 else float("nan")
    spread = max(scaled) / min(scaled) if scaled else float("nan")
    ok = slope >= 0.9 and spread <= 4.0
    return _report(7, "kappa", ok, {"comparator_slope": slope, "scaled_spread": spread, "points": len(mus)},
                   "comparator slope >= 0.9, |kappa|/sqrt(mu) bounded in M_c")


# ─── 8. M_c structure ────────────────────────────────────────────────────────

def check_mc(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    mu_grid = np.logspace(math.log10(2e-3), -1, 200 if level == "full" else 80)
    intervals = jost.scan_mc(c, mu_grid)
    phases = [iv.phase_mid for iv in intervals]
    steps = np.abs(np.diff(phases)) / math.pi if len(phases) > 1 else np.array([])
    ok = len(intervals) >= 3 and bool(np.all(np.abs(steps - 1.0) <= 0.15))
    return _report(8, "M_c structure", ok,
                   {"intervals": [[iv.lo, iv.hi] for iv in intervals], "phase_steps": steps.tolist()},
                   ">= 3 intervals, midpoints pi apart in phase (15%)")


# ─── 9. Inversion scaling ────────────────────────────────────────────────────

def _packet(ctx, width: float = 4.0) -> np.ndarray:
    x = ctx.grid.x
    return np.sin(ctx.omega * x) / np.cosh(x / width)


def check_inversion_scaling(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    mus, inverse, composed = [], [], []
    for ctx in _contexts(c, _sweep_mus(level)):
        solver = nanopteron.LightSolver(ctx)
        grid = ctx.grid
        f0 = spectral.make_function(grid, spectral.symmetrize(_packet(ctx), "odd"), "odd")
        g = f0.with_values(lattice_core.light_values(ctx.params, ctx.tau, grid, ctx.core.sigma.arrays(), f0.values))
        f = nanopteron.invert_L(g, ctx, solver)
        projected = nanopteron.project_P(f0, ctx.gamma, ctx.kappa.kappa, ctx.chi)
        h = nanopteron.invert_L(projected, ctx, solver)
        mus.append(ctx.params.mu)
        inverse.append(spectral.weighted_norm(f) / spectral.weighted_norm(g))
        composed.append(spectral.weighted_norm(h) / spectral.weighted_norm(f0))
    if len(mus) < 3:
        return _report(9, "inversion scaling", False, {"points": len(mus)}, "needs >= 3 points in M_c")
    s_inv = loglog_slope(mus, inverse).slope
    s_comp = loglog_slope(mus, composed).slope
    ok = abs(s_inv + 0.5) <= 0.15 and abs(s_comp + 1.0) <= 0.2
    return _report(9, "inversion scaling", ok, {"inverse_slope": s_inv, "composed_slope": s_comp, "points": len(mus)},
                   "slopes -0.5 +- 0.15 and -1 +- 0.2")


# ─── 10. Nanopteron fixed point ──────────────────────────────────────────────

def check_nanopteron(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    mus, eta1, eta2, amps, residuals = [], [], [], [], []
    for ctx in _contexts(c, _sweep_mus(level)):
        sol = nanopteron.iterate(ctx)
        mus.append(ctx.params.mu)
        eta1.append(spectral.weighted_norm(sol.eta.f1, 2, sol.b_star))
        eta2.append(spectral.weighted_norm(sol.eta.f2, 0, sol.b_star))
        amps.append(abs(sol.a))
        residuals.append(sol.residual_full)
    if len(mus) < 3:
        return _report(10, "nanopteron fixed point", False, {"points": len(mus)}, "needs >= 3 points in M_c")
    s1 = loglog_slope(mus, eta1).slope
    s2 = loglog_slope(mus, eta2).slope
    small = all(a < mu ** 4 for a, mu in zip(amps, mus))
    ok = max(residuals) < 1e-8 and s1 >= 3.0 and s2 >= 2.0 and small
    return _report(10, "nanopteron fixed point", ok,
                   {"mus": mus, "residual": max(residuals), "eta1_slope": s1, "eta2_slope": s2, "a": amps},
                   "residual < 1e-8, slopes >= 3 and >= 2, |a| < mu^4")


# ─── 11. Dynamics ────────────────────────────────────────────────────────────

def check_dynamics(level: Level = "quick", c: float = None) -> CheckReport:
    c = c or settings.DEFAULT_C
    contexts = _contexts(c, (0.01, 0.014, 0.02))
    if not contexts:
        raise NotInMcError("no admissible mass ratio near 0.01 for the dynamics run")
    ctx = contexts[0]
    sol = nanopteron.iterate(ctx)
    mu = ctx.params.mu
    config = SimConfig(n_particles=400 if level == "quick" else 600, dt=0.02 * math.sqrt(mu), t_end=50.0 / c,
                       mu=mu, c=c, stride=5, sponge_fraction=0.0)
    trajectory = dynamics.run(config, dynamics.seed_from_wave(sol, config))
    diag = dynamics.measure_nanopteron(trajectory, sol)
    ok = diag["profile_error"] < 1e-3 and diag["energy_drift"] < 1e-8 and diag["frequency_error"] < 0.02
    return _report(11, "dynamics", ok, diag, "profile error < 1e-3, drift < 1e-8, frequency within 2%")


# ─── Suite ───────────────────────────────────────────────────────────────────

CHECKS: List[Tuple[str, Callable[..., CheckReport]]] = [
    ("operator algebra", check_operator_algebra),
    ("solitary core", _check_solitary_default),
    ("refined core identity", check_refined_core),
    ("dispersion", check_dispersion),
    ("periodic waves", check_periodic),
    ("jost solutions and gamma", check_jost),
    ("kappa", check_kappa),
    ("M_c structure", check_mc),
    ("inversion scaling", check_inversion_scaling),
    ("nanopteron fixed point", check_nanopteron),
    ("dynamics", check_dynamics),
]


def run_check(index: int, level: Level = "quick", c: float = None) -> CheckReport:
    title, fn = CHECKS[index]
    started = time.perf_counter()
    try:
        report = fn(level=level, c=c)
    except FputwavesError as exc:
        report = CheckReport(check_id=index + 1, title=title, status="error", detail=exc.detail)
    except Exception as exc:
        logger.exception("check %d crashed", index + 1)
        report = CheckReport(check_id=index + 1, title=title, status="error", detail=repr(exc))
    report = report.model_copy(update={"runtime": time.perf_counter() - started})
    logger.info("check %d (%s): %s in %.1fs", report.check_id, title, report.status, report.runtime)
    return report


def run_suite(level: Level = "quick", c: float = None, only: Optional[List[int]] = None) -> List[CheckReport]:
    indices = [i - 1 for i in only] if only else list(range(len(CHECKS)))
    require(all(0 <= i < len(CHECKS) for i in indices), f"check ids run from 1 to {len(CHECKS)}")
    return pool.map(run_check, indices, level=level, c=c)


def report_frame(reports: List[CheckReport]) -> pd.DataFrame:
    rows = [{
        "id": r.check_id,
        "check": r.title,
        "status": r.status,
        "target": r.target,
        "runtime_s": round(r.runtime, 2),
        "measured": json.dumps(r.measured, default=float) if r.measured else (r.detail or ""),
    } for r in reports]
    return pd.DataFrame(rows, columns=["id", "check", "status", "target", "runtime_s", "measured"])
