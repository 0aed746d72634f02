import math

import numpy as np
import pandas as pd

from fputwaves import storage
from fputwaves.commands import add_mu, add_speed, flag, option
from fputwaves.services import periodic
from fputwaves.utils.errors import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("periodic", help="periodic traveling wave a·p_μ^a")
    add_speed(parser)
    add_mu(parser)
    parser.add_argument("--a", type=float, help="amplitude")
    parser.add_argument("--n-modes", type=int, help="Fourier modes retained")
    parser.add_argument("--a-max", action="store_true", help="also locate the largest amplitude reached")
    parser.set_defaults(handler=run)


def run(args) -> int:
    c = option(args, "c", cast=float, required=True)
    mu = option(args, "mu", cast=float, required=True)
    a = option(args, "a", 0.0, float)
    n_modes = option(args, "n_modes", periodic.MIN_MODES, int)
    wave = periodic.solve_periodic(mu, c, a, n_modes)

    params = {"c": c, "mu": mu, "a": a, "n_modes": wave.n_modes}
    payload = {
        "omega_a": wave.omega_a,
        "omega_mu": wave.omega_mu,
        "xi": wave.xi,
        "newton_steps": wave.newton_steps,
        "residual": wave.residual,
        "spatial_residual": periodic.spatial_residual(wave),
        "coeffs1": wave.coeffs1,
        "coeffs2": wave.coeffs2,
    }
    if flag(args, "a_max"):
        payload["a_max"] = periodic.find_a_max(mu, c, n_modes)
    meta = storage.provenance("periodic", params)
    storage.write_json("periodic.json", payload, meta)

    x = np.linspace(0.0, 2.0 * math.pi / wave.omega_a, 257)
    p1, p2 = periodic.evaluate(wave, x)
    storage.write_csv("periodic.csv", pd.DataFrame({"x": x, "p1": p1, "p2": p2}), meta)
    return EXIT_OK
