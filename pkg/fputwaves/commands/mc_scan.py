import pandas as pd

from fputwaves import storage
from fputwaves.commands import add_mu, add_speed, mu_values, option
from fputwaves.commands.kappa_scan import COLUMNS, scan_rows
from fputwaves.services import jost
from fputwaves.utils.errors import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("mc-scan", help="admissible mass-ratio intervals M_c")
    add_speed(parser)
    add_mu(parser, grid=True)
    parser.set_defaults(handler=run)


def run(args) -> int:
    c = option(args, "c", cast=float, required=True)
    mus = mu_values(args)
    rows = scan_rows(c, mus)
    intervals = jost.scan_mc(c, mus, rows=rows)
    meta = storage.provenance("mc-scan", {"c": c, "mu": mus})
    storage.write_csv("mc_phases.csv", pd.DataFrame(rows, columns=COLUMNS), meta)
    storage.write_csv("mc_intervals.csv", pd.DataFrame([iv.model_dump() for iv in intervals],
                                                       columns=["lo", "hi", "midpoint", "phase_mid"]), meta)
    return EXIT_OK
