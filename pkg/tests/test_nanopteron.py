import numpy as np
import pytest

from fputwaves.models import ModelParams, TwoField
from fputwaves.services import jost, lattice_core, nanopteron, periodic, solitary, spectral
from fputwaves.utils.errors import InvalidInputError, NotInMcError, RangeError

C = 1.45


@pytest.fixture(scope="module")
def solver(context):
    return nanopteron.LightSolver(context)


def _even_bump(grid):
    return spectral.sample(grid, lambda x: np.exp(-x ** 2 / 8), "even")


def test_invert_H_recovers_a_localized_profile(core):
    params = ModelParams(c=C, mu=core.mu)
    xi0 = _even_bump(core.grid)
    g = spectral.make_function(core.grid, nanopteron.heavy_values(params, core, xi0.values), "even")
    xi = nanopteron.invert_H(params, g, core)
    np.testing.assert_allclose(xi.values, xi0.values, atol=1e-7)


def test_invert_H_matches_dense_solve(wave):
    core = solitary.refine_core(C, 0.0, wave)
    params = ModelParams(c=C, mu=0.0)
    x = core.grid.x
    g = spectral.make_function(core.grid, (1 - x ** 2 / 2) * np.exp(-x ** 2 / 4), "even")
    g = g.with_values(g.values - g.values.mean())
    iterative = nanopteron.invert_H(params, g, core)
    dense = nanopteron.dense_invert_H(params, g, core)
    np.testing.assert_allclose(iterative.values, dense.values, atol=1e-8)


def test_invert_H_rejects_bad_right_hand_sides(core):
    params = ModelParams(c=C, mu=core.mu)
    bump = _even_bump(core.grid)
    with pytest.raises(InvalidInputError):
        nanopteron.invert_H(params, bump, core)
    odd = spectral.sample(core.grid, lambda x: x * np.exp(-x ** 2), "odd")
    with pytest.raises(InvalidInputError):
        nanopteron.invert_H(params, odd, core)


def test_projection_removes_the_gamma_component(context):
    g = spectral.sample(context.grid, lambda x: np.sin(3 * x) * np.exp(-x ** 2 / 10), "odd")
    projected = nanopteron.project_P(g, context.gamma, context.kappa.kappa, context.chi)
    scale = spectral.integrate(np.abs(g.values), context.grid)
    assert abs(jost.iota(projected, context.gamma)) < 1e-10 * scale
    again = nanopteron.project_P(projected, context.gamma, context.kappa.kappa, context.chi)
    np.testing.assert_allclose(again.values, projected.values, atol=1e-12)
    killed = nanopteron.project_P(context.chi, context.gamma, context.kappa.kappa, context.chi)
    assert np.max(np.abs(killed.values)) < 1e-10 * np.max(np.abs(context.chi.values))


def test_projection_refuses_small_kappa(context):
    g = spectral.sample(context.grid, lambda x: x * np.exp(-x ** 2), "odd")
    with pytest.raises(NotInMcError):
        nanopteron.project_P(g, context.gamma, context.kappa.kappa, context.chi,
                             floor=abs(context.kappa.kappa) * 2)


def test_detuning_pad_stays_within_limits(context):
    pad = nanopteron._detuning_pad(context.grid, context.omega, context.gamma.theta_inf)
    assert 0 <= pad <= nanopteron.DETUNE_UNITS * round(context.grid.points_per_unit)


def test_light_solver_is_well_conditioned(solver):
    assert solver.rcond > nanopteron.RCOND_FLOOR
    assert solver.grid.n_points == solver.ctx.grid.n_points + 2 * solver.pad


def test_invert_L_recovers_a_localized_profile(context, solver):
    f0 = spectral.sample(context.grid, lambda x: x * np.exp(-x ** 2 / 8), "odd")
    g = spectral.make_function(context.grid, lattice_core.light_values(
        context.params, context.tau, context.grid, context.core.sigma.arrays(), f0.values), "odd")
    f = nanopteron.invert_L(g, context, solver)
    np.testing.assert_allclose(f.values, f0.values, atol=1e-6)


def test_invert_L_rejects_right_hand_side_outside_range(context, solver):
    with pytest.raises(RangeError):
        nanopteron.invert_L(context.chi, context, solver)


def test_assemble_rhs_at_the_origin(context):
    wave = periodic.solve_periodic(context.params.mu, C, 0.0)
    js, ls = nanopteron.assemble_rhs(context, TwoField.zeros(context.grid), 0.0, wave)
    assert set(js) == set(nanopteron.J_TERMS)
    assert set(ls) == {"l0", "l1", "l2", "l3", "l31", "l4", "l5"}
    for f in js.values():
        assert not np.any(f.values)
    for name in ("l1", "l2", "l3", "l31", "l4", "l5"):
        assert not np.any(ls[name].values)
    assert np.max(np.abs(ls["l0"].values)) > 0
    assert ls["l0"].parity == "odd"


def test_x0_norm():
    grid = spectral.lattice_grid(10, 8)
    assert nanopteron.x0_norm(TwoField.zeros(grid), 0.0, 0.2) == 0.0
    assert nanopteron.x0_norm(TwoField.zeros(grid), -0.5, 0.2) == 0.5


def test_ball_ledger_scales_by_powers_of_mu():
    history = [{"eta1": 1e-6, "eta2": 1e-4, "a": -1e-7}, {"eta1": 2e-6, "eta2": 5e-5, "a": 1e-8}]
    ledger = nanopteron.ball_ledger(history, 0.01)
    assert ledger["r1"] == pytest.approx(2.0)
    assert ledger["r2"] == pytest.approx(1.0)
    assert ledger["r3"] == pytest.approx(1e-7 / 0.01 ** 3.5)
    with pytest.raises(InvalidInputError):
        nanopteron.ball_ledger([], 0.01)


def test_sweep_reports_points_outside_mc(monkeypatch):
    def refuse(mu, c, tol, max_iter):
        raise NotInMcError("outside", {"mu": mu})

    monkeypatch.setattr(nanopteron, "solve_at", refuse)
    rows = nanopteron.sweep(C, [0.02])
    assert rows == [{"mu": 0.02, "status": "NotInMcError"}]


@pytest.mark.slow
def test_iteration_converges_to_a_nanopteron(context, solver):
    if abs(context.kappa.kappa) <= nanopteron.kappa_floor(context.params, context.omega):
        pytest.skip("mass ratio outside M_c at this speed")
    solution = nanopteron.iterate(context, solver=solver)
    assert solution.iterates < nanopteron.MAX_ITERATIONS
    assert solution.history[-1]["change"] < nanopteron.ITERATION_TOLERANCE
    assert solution.eta.f1.parity == "even" and solution.eta.f2.parity == "odd"
    assert nanopteron.amplitude_consistency(context, solution) < 1e-8
    assert nanopteron.solvability_defect(context, solution) < 1e-8
    assert solution.residual_full < 1e-6
    physical = nanopteron.assemble_physical(solution)
    assert physical["rho_residual"] < 1e-6
