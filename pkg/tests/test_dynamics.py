import math

import numpy as np
import pytest

from fputwaves.models import LatticeState, SimConfig
from fputwaves.services import dynamics, lattice_core, nanopteron
from fputwaves.utils.errors import InstabilityError, InvalidInputError

C = 1.45


def _bump_profile(x, derivative=0):
    g = np.exp(-x ** 2 / 50)
    if derivative == 0:
        return 0.1 * g, 0.01 * x * g
    dg = -2 * x / 50 * g
    return 0.1 * dg, 0.01 * (g + x * dg)


def test_seed_reproduces_the_stretch_profile():
    config = SimConfig(n_particles=64, dt=0.01, t_end=1.0, mu=0.1, c=C)
    state = dynamics.seed_profile(_bump_profile, config)
    assert state.y[0] == 0.0 and state.ydot[0] == 0.0
    rho1, rho2 = lattice_core.rho_from_positions(state.y)
    x = np.arange(2, 63, 2) - 32.0
    p1, p2 = _bump_profile(x)
    np.testing.assert_allclose(rho1, p1, atol=1e-14)
    np.testing.assert_allclose(rho2, p2, atol=1e-14)


def test_seed_rejects_odd_center():
    config = SimConfig(n_particles=64, dt=0.01, t_end=1.0, mu=0.1, c=C, center=31)
    with pytest.raises(InvalidInputError):
        dynamics.seed_profile(_bump_profile, config)


def test_equilibrium_stays_at_rest():
    state = LatticeState(y=np.zeros(16), ydot=np.zeros(16), mu=0.1)
    for _ in range(10):
        state = dynamics.step_verlet(state, 0.01)
    assert not np.any(state.y) and not np.any(state.ydot)
    assert state.t == pytest.approx(0.1)


def test_light_mass_between_pinned_neighbours_oscillates_at_sqrt_two_over_mu():
    mu, dt = 0.01, 1e-4
    masses = np.array([1e12, mu, 1e12])
    state = LatticeState(y=[0.0, 1e-4, 0.0], ydot=[0.0, 0.0, 0.0], mu=mu)
    crossings = []
    previous = state.y[1]
    for _ in range(6000):
        state = dynamics.step_verlet(state, dt, masses=masses)
        if previous > 0 >= state.y[1] or previous < 0 <= state.y[1]:
            frac = previous / (previous - state.y[1])
            crossings.append(state.t - dt + frac * dt)
        previous = state.y[1]
    period = 2 * (crossings[1] - crossings[0])
    assert period == pytest.approx(2 * math.pi / math.sqrt(2 / mu), rel=1e-3)


def test_verlet_is_time_reversible(wave):
    config = SimConfig(n_particles=120, dt=0.002, t_end=1.0, mu=0.02, c=C)
    start = dynamics.seed_unrefined(wave, config)
    state = start
    for _ in range(200):
        state = dynamics.step_verlet(state, config.dt)
    state = dynamics.reverse(state)
    for _ in range(200):
        state = dynamics.step_verlet(state, config.dt)
    back = dynamics.reverse(state)
    np.testing.assert_allclose(back.y, start.y, atol=1e-10)
    np.testing.assert_allclose(back.ydot, start.ydot, atol=1e-10)


def test_run_conserves_energy_and_momentum(wave):
    config = SimConfig(n_particles=200, dt=0.001, t_end=2.0, mu=0.02, c=C, stride=20, sponge_fraction=0.0)
    trajectory = dynamics.run(config, dynamics.seed_unrefined(wave, config))
    assert trajectory.steps == 2000
    assert trajectory.times[-1] == pytest.approx(2.0)
    assert trajectory.energy_drift < 1e-4
    assert np.max(np.abs(trajectory.momentum - trajectory.momentum[0])) < 1e-10
    assert trajectory.snapshots.shape[1] == 200
    assert trajectory.probe.size == trajectory.times.size


def test_run_detects_blow_up():
    config = SimConfig(n_particles=8, dt=0.01, t_end=0.1, mu=0.1, c=C)
    y = np.zeros(8)
    y[1] = 20.0
    with pytest.raises(InstabilityError):
        dynamics.run(config, LatticeState(y=y, ydot=np.zeros(8), mu=0.1))


def test_run_rejects_mismatched_state():
    config = SimConfig(n_particles=8, dt=0.01, t_end=0.1, mu=0.1, c=C)
    with pytest.raises(InvalidInputError):
        dynamics.run(config, LatticeState(y=np.zeros(10), ydot=np.zeros(10), mu=0.1))


def test_time_step_must_resolve_the_light_mass():
    with pytest.raises(ValueError):
        SimConfig(n_particles=64, dt=0.1, t_end=1.0, mu=0.01, c=C)


def test_sponge_profile():
    damping = dynamics.sponge(100, 0.1)
    assert damping[0] == pytest.approx(dynamics.SPONGE_STRENGTH)
    assert np.all(damping[10:90] == 0)
    assert dynamics.sponge(100, 0.0) is None


def test_dominant_frequency_of_a_sinusoid():
    dt = 0.05
    t = dt * np.arange(400)
    assert dynamics.dominant_frequency(np.sin(3 * t) + 0.2 * np.sin(0.5 * t), dt, floor=1.0) == pytest.approx(3.0, rel=1e-2)
    with pytest.raises(InvalidInputError):
        dynamics.dominant_frequency(np.ones(8), dt)


def test_monatomic_lattice_carries_the_solitary_wave_at_speed_c(wave):
    result = dynamics.simulate_monatomic(wave, t_end=5.0)
    assert result["relative_error"] < 1e-3
    assert result["displacement"] == pytest.approx(C * result["t"], rel=1e-3)


def test_unrefined_seed_needs_matching_speed(wave):
    config = SimConfig(n_particles=64, dt=0.01, t_end=1.0, mu=0.1, c=1.5)
    with pytest.raises(InvalidInputError):
        dynamics.seed_unrefined(wave, config)


@pytest.mark.slow
def test_nanopteron_seed_travels_coherently(context):
    if abs(context.kappa.kappa) <= nanopteron.kappa_floor(context.params, context.omega):
        pytest.skip("mass ratio outside M_c at this speed")
    solution = nanopteron.iterate(context)
    mu = context.params.mu
    config = SimConfig(n_particles=400, dt=0.02 * math.sqrt(mu), t_end=10.0 / C, mu=mu, c=C, sponge_fraction=0.0)
    trajectory = dynamics.run(config, dynamics.seed_from_wave(solution, config))
    report = dynamics.measure_nanopteron(trajectory, solution)
    assert report["energy_drift"] < 1e-4
    assert report["eom_consistency"] < 1e-8
    assert report["profile_error"] < 1e-2
