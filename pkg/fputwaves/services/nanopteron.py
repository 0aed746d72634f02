"""
services/nanopteron.py

The full traveling wave h = σ_{c,μ} + a p_μ^a + η. The corrections solve
the fixed-point system

    η1 = H_μ^{-1}(j2 + j3 + j4 + j5)                      (heavy equation)
    η2 = L_μ^{-1} P_μ(l0 + l1 + l2 + l31 + l4 + l5)       (light equation)
    a  = κ_μ^{-1} ι_μ[l0 + l1 + l2 + l31 + l4 + l5]       (amplitude)

iterated from (η, a) = (0, 0). The heavy inverse is a GMRES solve of
(I + d^{-1}Σ_{μ,1})η1 = d^{-1}g; the light inverse is a dense LU of L_μ on
odd functions over a box whose length is detuned away from the resonance
of the ω_μ-tail.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from fputwaves.models import (
    Grid, GridFunction, LightContext, ModelParams, NanopteronSolution, PeriodicWave, RefinedCore, TwoField,
)
from fputwaves.services import jost, lattice_core, periodic, spectral
from fputwaves.utils import krylov
from fputwaves.utils.dependencies import get_light_context
from fputwaves.utils.errors import (
    ConvergenceError, InvalidInputError, NonContractionError, NotInMcError, RangeError, ResolutionError, require,
)
from fputwaves.utils.workers import pool

logger = logging.getLogger(__name__)

HEAVY_TOLERANCE = 1e-12
MEAN_TOLERANCE = 1e-11
RANGE_TOLERANCE = 1e-6
KAPPA_FLOOR = 0.25
RCOND_FLOOR = 1e-14
ITERATION_TOLERANCE = 1e-10
MAX_ITERATIONS = 60
STALL_LIMIT = 3
DETUNE_UNITS = 4
CHUNK = 256

J_TERMS = ("j2", "j3", "j4", "j5")
L_TERMS = ("l0", "l1", "l2", "l31", "l4", "l5")


# ─── Heavy equation ──────────────────────────────────────────────────────────

def heavy_values(params: ModelParams, core: RefinedCore, xi: np.ndarray) -> np.ndarray:
    """H_μξ = c²ξ'' + L_{μ,11}ξ + Σ_{μ,1}ξ."""
    grid = core.grid
    k = spectral.wavenumbers(grid)
    return (spectral.apply_symbol(xi, grid, lattice_core.heavy_symbol(params, k))
            + lattice_core.sigma1_values(params.mu, grid, core.sigma.arrays(), xi))


def _check_heavy_input(g: GridFunction) -> None:
    if g.parity != "even":
        raise InvalidInputError("invert_H needs an even right-hand side")
    spectral.ensure_finite(g.values)
    scale = max(1.0, float(np.max(np.abs(g.values))))
    if abs(float(g.values.mean())) > MEAN_TOLERANCE * scale:
        raise InvalidInputError(f"invert_H needs a mean-zero right-hand side (mean {g.values.mean():.2e})")


def invert_H(params: ModelParams, g: GridFunction, sigma_refined: RefinedCore) -> GridFunction:
    _check_heavy_input(g)
    grid = sigma_refined.grid
    require(g.grid == grid, "right-hand side and core must share a grid")
    sigma = sigma_refined.sigma.arrays()

    def matvec(v):
        return v + lattice_core.heavy_inverse_values(params, grid, lattice_core.sigma1_values(params.mu, grid, sigma, v))

    rhs = lattice_core.heavy_inverse_values(params, grid, g.values)
    xi = spectral.symmetrize(krylov.solve(matvec, rhs, rtol=HEAVY_TOLERANCE, label="invert_H"), "even")
    scale = max(float(np.max(np.abs(g.values))), 1e-300)
    residual = float(np.max(np.abs(heavy_values(params, sigma_refined, xi) - g.values))) / scale
    logger.debug("invert_H: relative residual %.2e", residual)
    if residual > 1e-8:
        raise ConvergenceError(f"heavy solve residual {residual:.2e}", {"relative_residual": residual})
    return spectral.make_function(grid, xi, "even")


def dense_invert_H(params: ModelParams, g: GridFunction, sigma_refined: RefinedCore) -> GridFunction:
    """Direct dense solve of the same preconditioned system; an oracle for small grids."""
    _check_heavy_input(g)
    grid = sigma_refined.grid
    n = grid.n_points
    sigma = sigma_refined.sigma.arrays()
    basis = np.eye(n)
    columns = lattice_core.heavy_inverse_values(params, grid, lattice_core.sigma1_values(params.mu, grid, sigma, basis))
    matrix = np.eye(n) + columns.T
    xi = np.linalg.solve(matrix, lattice_core.heavy_inverse_values(params, grid, g.values))
    return spectral.make_function(grid, xi, "even")


# ─── Light equation ──────────────────────────────────────────────────────────

def kappa_floor(params: ModelParams, omega: float) -> float:
    return KAPPA_FLOOR * params.c ** 2 * params.mu * omega


def project_P(g: GridFunction, gamma, kappa: float, chi: GridFunction, floor: float = 0.0) -> GridFunction:
    """P_μ g = g - κ^{-1} ι[g] χ; the result is orthogonal to γ."""
    if abs(kappa) <= floor or kappa == 0.0:
        raise NotInMcError(f"|kappa| = {abs(kappa):.3e} below {floor:.3e}: mu is not in M_c", {"kappa": kappa})
    coefficient = jost.iota(g, gamma) / kappa
    return g.with_values(g.values - coefficient * chi.values)


def _detuning_pad(grid: Grid, omega: float, theta: float) -> int:
    """Extra samples per side making |sin(ω(L' + ϑ))| as close to 1 as possible."""
    m = int(round(grid.points_per_unit))
    pads = np.arange(DETUNE_UNITS * m + 1)
    lengths = grid.half_length + pads * grid.dx
    return int(pads[np.argmax(np.abs(np.sin(omega * (lengths + theta))))])


class LightSolver:
    """Dense LU factorization of L_μ restricted to odd functions on a detuned box."""

    def __init__(self, ctx: LightContext):
        self.ctx = ctx
        base = ctx.grid
        self.pad = _detuning_pad(base, ctx.omega, ctx.gamma.theta_inf)
        self.grid = Grid(half_length=base.half_length + self.pad * base.dx, n_points=base.n_points + 2 * self.pad)
        s1, s2 = ctx.core.sigma.arrays()
        self.sigma = (spectral.symmetrize(self._padded(s1), "even"), spectral.symmetrize(self._padded(s2), "odd"))
        n = self.grid.n_points
        self.unknowns = np.arange(n // 2 + 1, n)
        self.mirror = n - self.unknowns
        self.lu, self.rcond = self._factor()
        logger.info("light solver: %d unknowns, pad %d, rcond %.2e", self.unknowns.size, self.pad, self.rcond)
        if self.rcond < RCOND_FLOOR:
            raise ResolutionError(f"light operator is numerically singular on this box (rcond {self.rcond:.1e})",
                                  {"rcond": self.rcond})

    def _padded(self, values: np.ndarray) -> np.ndarray:
        return np.pad(np.asarray(values, dtype=float), (self.pad, self.pad))

    def _apply(self, rows: np.ndarray) -> np.ndarray:
        return lattice_core.light_values(self.ctx.params, self.ctx.tau, self.grid, self.sigma, rows)

    def _factor(self):
        size = self.unknowns.size
        matrix = np.empty((size, size))
        for start in range(0, size, CHUNK):
            stop = min(start + CHUNK, size)
            rows = np.zeros((stop - start, self.grid.n_points))
            r = np.arange(stop - start)
            rows[r, self.unknowns[start:stop]] = 1.0
            rows[r, self.mirror[start:stop]] = -1.0
            matrix[:, start:stop] = self._apply(rows)[:, self.unknowns].T
        anorm = float(np.max(np.sum(np.abs(matrix), axis=0)))
        lu, piv = lu_factor(matrix)
        rcond, _ = lapack.dgecon(lu, anorm, norm="1")
        return (lu, piv), float(rcond)

    def solve(self, g: np.ndarray) -> np.ndarray:
        padded = self._padded(g)
        half = lu_solve(self.lu, padded[self.unknowns])
        out = np.zeros(self.grid.n_points)
        out[self.unknowns] = half
        out[self.mirror] = -half
        return out[self.pad:self.pad + self.ctx.grid.n_points]


def invert_L(g: GridFunction, ctx: LightContext, solver: Optional[LightSolver] = None) -> GridFunction:
    """
    The localized odd f with L_μf = g, for g already in the range (ι[g] = 0).
    L_μ is inverted by dense LU on odd functions over a box detuned off resonance.
    """
    require(g.parity == "odd", "invert_L needs an odd right-hand side")
    spectral.ensure_finite(g.values)
    grid = ctx.grid
    size = spectral.integrate(np.abs(g.values), grid)
    defect = abs(jost.iota(g, ctx.gamma))
    if defect > RANGE_TOLERANCE * max(size, 1e-300):
        raise RangeError(f"right-hand side is not in the range of the light operator (iota {defect:.2e})",
                         {"iota": defect, "l1_norm": size})
    solver = solver or LightSolver(ctx)
    f = spectral.symmetrize(solver.solve(g.values), "odd")
    out = lattice_core.light_values(ctx.params, ctx.tau, grid, ctx.core.sigma.arrays(), f)
    interior = np.abs(grid.x) <= grid.half_length - jost.WRAP_MARGIN
    scale = max(float(np.max(np.abs(g.values))), 1e-300)
    residual = float(np.max(np.abs(out - g.values)[interior])) / scale
    if residual > 1e-8:
        logger.warning("light solve relative residual %.2e", residual)
    return spectral.make_function(grid, f, "odd")


# ─── Right-hand sides ────────────────────────────────────────────────────────

def assemble_rhs(ctx: LightContext, eta: TwoField, a: float,
                 wave: PeriodicWave) -> Tuple[Dict[str, GridFunction], Dict[str, GridFunction]]:
    """
    First components j2..j5 and second components l0, l1, l2, l3, l31, l4, l5
    of the forcing terms at (η, a) with the periodic wave at amplitude a.
    """
    params, grid = ctx.params, ctx.grid
    mu, c = params.mu, params.c
    require(eta.grid == grid, "η must live on the context grid")
    s1, s2 = ctx.core.sigma.arrays()
    e1, e2 = eta.arrays()
    zero = np.zeros(grid.n_points)
    p1, p2 = periodic.evaluate(wave, grid.x, scaled=False)
    q1, q2 = jost.leading_profile(mu, c, grid, ctx.omega).arrays()

    def lq(g1, g2, h1, h2):
        return lattice_core.LQ_values(mu, grid, g1, g2, h1, h2)

    theta1 = lattice_core.L_values(mu, grid, zero, e2)[0]
    theta2 = lattice_core.L_values(mu, grid, e1, zero)[1]
    _, _, omega1, omega2 = lattice_core.sigma_parts_values(mu, grid, (s1, s2), e1, e2)
    j3, l3 = (-2.0 * a * v for v in lq(s1, s2, p1, p2))
    j4, l4 = (-2.0 * a * v for v in lq(p1, p2, e1, e2))
    j5, l5 = (-v for v in lq(e1, e2, e1, e2))
    l31 = -2.0 * a * lq(s1, s2, p1 - q1, p2 - q2)[1]
    l0 = -c ** 2 * mu ** 2 * spectral.derivative(ctx.core.xi.f2.values, grid, 2)
    k = spectral.wavenumbers(grid)
    l1 = mu ** 2 * spectral.apply_symbol(e2, grid, 2.0 * ctx.tau - 2.0 * np.cos(k) ** 2 * np.sin(k) ** 2)

    j_terms = {"j2": -theta1 - omega1, "j3": j3, "j4": j4, "j5": j5}
    l_terms = {"l0": l0, "l1": l1, "l2": -theta2 - omega2, "l3": l3, "l31": l31, "l4": l4, "l5": l5}
    js = {}
    for name, v in j_terms.items():
        v = spectral.symmetrize(v, "even")
        js[name] = spectral.make_function(grid, v - v.mean(), "even")
    ls = {name: spectral.make_function(grid, v, "odd") for name, v in l_terms.items()}
    return js, ls


def _total(terms: Dict[str, GridFunction], names) -> GridFunction:
    first = terms[names[0]]
    return first.with_values(sum(terms[n].values for n in names))


# ─── Fixed-point iteration ───────────────────────────────────────────────────

def x0_norm(eta: TwoField, a: float, b_star: float) -> float:
    """‖η1‖_{2,b*/2} + ‖η2‖_{0,b*/2} + |a|."""
    return (spectral.weighted_norm(eta.f1, 2, b_star / 2) + spectral.weighted_norm(eta.f2, 0, b_star / 2)
            + abs(a))


def amplitude_map(ctx: LightContext, eta: TwoField, a: float) -> float:
    """N3: κ^{-1} ι[l0 + l1 + l2 + l31 + l4 + l5]."""
    wave = periodic.solve_periodic(ctx.params.mu, ctx.params.c, a)
    _, ls = assemble_rhs(ctx, eta, a, wave)
    return jost.iota(_total(ls, L_TERMS), ctx.gamma) / ctx.kappa.kappa


def _light_step(ctx, solver, ls) -> GridFunction:
    floor = kappa_floor(ctx.params, ctx.omega)
    return invert_L(project_P(_total(ls, L_TERMS), ctx.gamma, ctx.kappa.kappa, ctx.chi, floor), ctx, solver)


def _heavy_step(ctx, js) -> GridFunction:
    return invert_H(ctx.params, _total(js, J_TERMS), ctx.core)


def iterate(ctx: LightContext, tol: float = ITERATION_TOLERANCE, max_iter: int = MAX_ITERATIONS,
            jacobi: bool = False, solver: Optional[LightSolver] = None) -> NanopteronSolution:
    params = ctx.params
    mu, c = params.mu, params.c
    if abs(ctx.kappa.kappa) <= kappa_floor(params, ctx.omega):
        raise NotInMcError(f"mu={mu} is not in M_c for c={c} (kappa {ctx.kappa.kappa:.3e})",
                           {"mu": mu, "c": c, "kappa": ctx.kappa.kappa})
    grid = ctx.grid
    b_star = ctx.core.base.measured_decay / 2
    solver = solver or LightSolver(ctx)
    eta = TwoField.zeros(grid)
    a = 0.0
    history: List[Dict[str, float]] = []
    previous_change = None
    stalls = 0

    for n in range(1, max_iter + 1):
        wave = periodic.solve_periodic(mu, c, a)
        js, ls = assemble_rhs(ctx, eta, a, wave)
        a_new = jost.iota(_total(ls, L_TERMS), ctx.gamma) / ctx.kappa.kappa
        if jacobi:
            eta2 = _light_step(ctx, solver, ls)
            eta1 = _heavy_step(ctx, js)
        else:
            wave = periodic.solve_periodic(mu, c, a_new)
            _, ls = assemble_rhs(ctx, eta, a_new, wave)
            eta2 = _light_step(ctx, solver, ls)
            js, _ = assemble_rhs(ctx, TwoField(f1=eta.f1, f2=eta2), a_new, wave)
            eta1 = _heavy_step(ctx, js)
        new_eta = TwoField(f1=eta1, f2=eta2)
        delta = TwoField.from_arrays(grid, eta1.values - eta.f1.values, eta2.values - eta.f2.values)
        change = x0_norm(delta, a_new - a, b_star)
        ratio = change / previous_change if previous_change else 0.0
        history.append({
            "iterate": n,
            "eta1": float(np.max(np.abs(eta1.values))),
            "eta2": float(np.max(np.abs(eta2.values))),
            "a": a_new,
            "change": change,
            "ratio": ratio,
        })
        logger.debug("nanopteron mu=%.4g iterate %d: change %.3e ratio %.3f a=%.3e", mu, n, change, ratio, a_new)
        eta, a = new_eta, a_new
        if change < tol:
            break
        stalls = stalls + 1 if previous_change and ratio >= 1.0 else 0
        if stalls >= STALL_LIMIT:
            raise NonContractionError(f"fixed-point map does not contract at mu={mu}, c={c}",
                                      {"mu": mu, "c": c, "history": history})
        previous_change = change
    else:
        raise ConvergenceError(f"nanopteron iteration did not converge in {max_iter} steps at mu={mu}",
                               {"history": history})

    wave = periodic.solve_periodic(mu, c, a)
    solution = NanopteronSolution(params=params, core=ctx.core, eta=eta, a=a, wave=wave, kappa=ctx.kappa.kappa,
                                  b_star=b_star, residual_full=0.0, iterates=len(history), history=history)
    residual = full_residual(solution)
    logger.info("nanopteron mu=%.4g c=%.4g: a=%.6e after %d iterates, residual %.2e", mu, c, a, len(history),
                residual)
    return solution.model_copy(update={"residual_full": residual})


# ─── Diagnostics ─────────────────────────────────────────────────────────────

def full_residual(solution: NanopteronSolution) -> float:
    """sup |G(σ_{c,μ} + a p^a + η)| on |x| <= L/2, as G(σ+η) + 2a L Q(σ+η, p^a)."""
    params = solution.params
    grid = solution.core.grid
    s1, s2 = solution.core.sigma.arrays()
    e1, e2 = solution.eta.arrays()
    h1, h2 = s1 + e1, s2 + e2
    g1, g2 = lattice_core.G_values(params, grid, h1, h2)
    p1, p2 = periodic.evaluate(solution.wave, grid.x)
    c1, c2 = lattice_core.LQ_values(params.mu, grid, h1, h2, p1, p2)
    r1, r2 = g1 + 2.0 * c1, g2 + 2.0 * c2
    core_region = np.abs(grid.x) <= grid.half_length / 2
    return float(max(np.max(np.abs(r1[core_region])), np.max(np.abs(r2[core_region]))))


def solvability_defect(ctx: LightContext, solution: NanopteronSolution) -> float:
    """ι[l0 + l1 + l2 + l3 + l4 + l5] at the converged point."""
    _, ls = assemble_rhs(ctx, solution.eta, solution.a, solution.wave)
    return abs(jost.iota(_total(ls, ("l0", "l1", "l2", "l3", "l4", "l5")), ctx.gamma))


def amplitude_consistency(ctx: LightContext, solution: NanopteronSolution) -> float:
    return abs(amplitude_map(ctx, solution.eta, solution.a) - solution.a)


def ball_ledger(history: List[Dict[str, float]], mu: float) -> Dict[str, float]:
    """Radii r1, r2, r3 with ‖η1‖ <= r1μ³, ‖η2‖ <= r2μ², |a| <= r3μ^{7/2} along the iterates."""
    require(len(history) > 0, "empty iteration history")
    return {
        "r1": max(h["eta1"] for h in history) / mu ** 3,
        "r2": max(h["eta2"] for h in history) / mu ** 2,
        "r3": max(abs(h["a"]) for h in history) / mu ** 3.5,
    }


def assemble_physical(solution: NanopteronSolution) -> Dict[str, np.ndarray]:
    """
    Υ = T_μ(μξ_μ + η) and Φ = a T_μ p_μ^a, so that ρ = σ_c e1 + Υ + Φ.
    Also returns the ρ-form residual on |x| <= L/2.
    """
    params = solution.params
    grid = solution.core.grid
    mu = params.mu
    x1, x2 = solution.core.xi.arrays()
    e1, e2 = solution.eta.arrays()
    u1, u2 = lattice_core.T_values(mu, grid, mu * x1 + e1, mu * x2 + e2)
    f1, f2 = periodic.transformed(solution.wave, grid.x)
    sigma_c = solution.core.base.profile.values
    r1, r2 = sigma_c + u1, u2

    # the periodic part solves the ρ-form on its own; keep the cross terms
    lin1, lin2 = lattice_core.D_values(mu, grid, r1, r2)
    n1, n2 = lattice_core.D_values(mu, grid, *lattice_core.Q0_values(r1, r2, r1, r2))
    m1, m2 = lattice_core.D_values(mu, grid, *lattice_core.Q0_values(r1, r2, f1, f2))
    res1 = params.c ** 2 * spectral.derivative(r1, grid, 2) + lin1 + n1 + 2.0 * m1
    res2 = params.c ** 2 * mu * spectral.derivative(r2, grid, 2) + lin2 + n2 + 2.0 * m2
    core_region = np.abs(grid.x) <= grid.half_length / 2
    residual = float(max(np.max(np.abs(res1[core_region])), np.max(np.abs(res2[core_region]))))
    return {"x": grid.x, "upsilon1": u1, "upsilon2": u2, "phi1": f1, "phi2": f2, "rho_residual": residual}


# ─── μ-sweeps ────────────────────────────────────────────────────────────────

def solve_at(mu: float, c: float, tol: float = ITERATION_TOLERANCE, max_iter: int = MAX_ITERATIONS,
             jacobi: bool = False) -> NanopteronSolution:
    return iterate(get_light_context(c, mu), tol=tol, max_iter=max_iter, jacobi=jacobi)


def _sweep_row(mu: float, c: float, tol: float, max_iter: int) -> Dict[str, object]:
    try:
        sol = solve_at(mu, c, tol, max_iter)
    except (NotInMcError, NonContractionError, ConvergenceError) as exc:
        logger.warning("sweep point mu=%.4g skipped: %s", mu, exc.detail)
        return {"mu": mu, "status": type(exc).__name__}
    return {
        "mu": mu,
        "status": "ok",
        "a": sol.a,
        "eta1": spectral.weighted_norm(sol.eta.f1, 2, sol.b_star),
        "eta2": spectral.weighted_norm(sol.eta.f2, 0, sol.b_star),
        "residual": sol.residual_full,
        "iterates": sol.iterates,
    }


def sweep(c: float, mus, tol: float = ITERATION_TOLERANCE, max_iter: int = MAX_ITERATIONS) -> List[Dict[str, object]]:
    """One row of norms per μ; points outside M_c are reported, not raised."""
    return pool.map(_sweep_row, sorted(mus), c=c, tol=tol, max_iter=max_iter)
