from fputwaves import storage
from fputwaves.commands import add_mu, add_speed, mu_values, option
from fputwaves.services import dispersion
from fputwaves.utils.errors import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("dispersion", help="critical frequency ω_μ and the kernel data")
    add_speed(parser)
    add_mu(parser, grid=True)
    parser.set_defaults(handler=run)


def run(args) -> int:
    c = option(args, "c", cast=float, required=True)
    mus = mu_values(args)
    frame = dispersion.dispersion_table(c, mus)
    lo_hi = [dispersion.omega_bracket(mu, c) for mu in mus]
    frame["omega_tilde"] = [b[0] for b in lo_hi]
    frame["omega_upper"] = [b[1] for b in lo_hi]
    storage.write_csv("dispersion.csv", frame, storage.provenance("dispersion", {"c": c, "mu": mus}))
    return EXIT_OK
