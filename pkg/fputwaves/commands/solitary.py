from fputwaves import storage
from fputwaves.commands import add_speed, option
from fputwaves.services import solitary, spectral
from fputwaves.utils.errors import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("solitary", help="monatomic solitary wave σ_c")
    add_speed(parser)
    parser.add_argument("--half-length", type=float, help="half width L of the computational box")
    parser.add_argument("--tol", type=float, help="residual tolerance")
    parser.set_defaults(handler=run)


def run(args) -> int:
    c = option(args, "c", cast=float, required=True)
    half_length = option(args, "half_length", cast=float)
    tol = option(args, "tol", solitary.SOLITARY_TOLERANCE, float)
    grid = spectral.lattice_grid(half_length) if half_length else None
    wave = solitary.solve_monatomic(c, grid, tol=tol)
    alpha, beta, misfit = solitary.long_wave_fit(wave)

    meta = storage.provenance("solitary", {"c": c, "half_length": wave.profile.grid.half_length, "tol": tol})
    storage.write_csv("solitary.csv", spectral.to_frame(wave.profile, "sigma"), meta)
    storage.write_json("solitary.json", {
        "c": c,
        "residual": wave.residual_norm,
        "measured_decay": wave.measured_decay,
        "exact_decay": solitary.exact_decay_rate(c),
        "decay_fit_r2": wave.decay_fit_r2,
        "method": wave.method,
        "iterations": wave.iterations,
        "long_wave_fit": {"alpha": alpha, "beta": beta, "misfit": misfit},
        "grid": wave.profile.grid,
    }, meta)
    return EXIT_OK
