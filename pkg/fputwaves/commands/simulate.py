import math

import pandas as pd

from fputwaves import storage
from fputwaves.commands import add_mu, add_speed, flag, option
from fputwaves.models import SimConfig
from fputwaves.services import dynamics, nanopteron
from fputwaves.utils.dependencies import get_light_context
from fputwaves.utils.errors import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="velocity-Verlet run seeded with a computed wave")
    parser.add_argument("--from", dest="source", help="nanopteron.json written by the nanopteron command")
    add_speed(parser)
    add_mu(parser)
    parser.add_argument("--t-end", type=float, help="final time (default 50/c)")
    parser.add_argument("--dt", type=float, help="time step (default 0.02*sqrt(mu))")
    parser.add_argument("--n-particles", type=int, help="lattice size")
    parser.add_argument("--stride", type=int, help="steps between samples")
    parser.add_argument("--unrefined", action="store_true", help="seed with (σ_c, 0) instead")
    parser.add_argument("--snapshots", action="store_true", help="also write position snapshots")
    parser.set_defaults(handler=run)


def _source_params(args):
    source = option(args, "source")
    if source is None:
        return (option(args, "c", cast=float, required=True), option(args, "mu", cast=float, required=True),
                nanopteron.ITERATION_TOLERANCE, nanopteron.MAX_ITERATIONS)
    saved = storage.read_json(source)
    params = saved["provenance"]["params"]
    return float(params["c"]), float(params["mu"]), float(params["tol"]), int(params["max_iter"])


def run(args) -> int:
    c, mu, tol, max_iter = _source_params(args)
    config = SimConfig(
        n_particles=option(args, "n_particles", 400, int),
        dt=option(args, "dt", 0.02 * math.sqrt(mu), float),
        t_end=option(args, "t_end", 50.0 / c, float),
        mu=mu,
        c=c,
        stride=option(args, "stride", 10, int),
    )
    ctx = get_light_context(c, mu)
    solution = nanopteron.iterate(ctx, tol=tol, max_iter=max_iter)
    unrefined = flag(args, "unrefined")
    state = dynamics.seed_unrefined(ctx.core.base, config) if unrefined else dynamics.seed_from_wave(solution, config)
    trajectory = dynamics.run(config, state)
    diagnostics = dynamics.measure_nanopteron(trajectory, solution)

    meta = storage.provenance("simulate", {**config.model_dump(), "unrefined": unrefined, "tol": tol,
                                           "max_iter": max_iter})
    storage.write_csv("trajectory.csv", pd.DataFrame({
        "t": trajectory.times,
        "energy": trajectory.energy,
        "momentum": trajectory.momentum,
        "probe_velocity": trajectory.probe,
    }), meta)
    if flag(args, "snapshots"):
        frame = pd.DataFrame(trajectory.snapshots, columns=[f"y{j}" for j in range(config.n_particles)])
        frame.insert(0, "t", trajectory.snapshot_times)
        storage.write_csv("snapshots.csv", frame, meta)
    storage.write_json("simulate.json", {"probe_index": trajectory.probe_index, "steps": trajectory.steps,
                                         **diagnostics}, meta)
    return EXIT_OK
