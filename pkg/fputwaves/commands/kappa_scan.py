import pandas as pd

from fputwaves import storage
from fputwaves.commands import add_mu, add_speed, mu_values, option
from fputwaves.services import jost
from fputwaves.utils.errors import EXIT_OK
from fputwaves.utils.workers import pool

COLUMNS = ["mu", "omega_mu", "phi_inf", "theta_inf", "phase", "sin_term", "kappa", "comparator"]


def register(subparsers) -> None:
    parser = subparsers.add_parser("kappa-scan", help="κ_μ and its closed-form comparator along a μ-grid")
    add_speed(parser)
    add_mu(parser, grid=True)
    parser.set_defaults(handler=run)


def scan_rows(c: float, mus):
    base = jost.base_wave_for(c, mus)
    return pool.map(jost.mc_phase, sorted(mus), c=c, base=base)


def run(args) -> int:
    c = option(args, "c", cast=float, required=True)
    mus = mu_values(args)
    rows = scan_rows(c, mus)
    frame = pd.DataFrame(rows, columns=COLUMNS)
    frame["gap"] = (frame["kappa"] - frame["comparator"]).abs()
    storage.write_csv("kappa_scan.csv", frame, storage.provenance("kappa-scan", {"c": c, "mu": mus}))
    return EXIT_OK
