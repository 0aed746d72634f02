import pandas as pd

from fputwaves import storage
from fputwaves.commands import add_mu, add_speed, option
from fputwaves.services import jost, spectral
from fputwaves.utils.dependencies import get_light_context
from fputwaves.utils.errors import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("jost", help="Jost solutions, γ_μ, ϑ_μ^∞ and κ_μ at one mass ratio")
    add_speed(parser)
    add_mu(parser)
    parser.add_argument("--half-length", type=float, help="half width L of the computational box")
    parser.set_defaults(handler=run)


def run(args) -> int:
    c = option(args, "c", cast=float, required=True)
    mu = option(args, "mu", cast=float, required=True)
    ctx = get_light_context(c, mu, option(args, "half_length", cast=float))
    even, odd = ctx.jost_even, ctx.jost_odd
    meta = storage.provenance("jost", {"c": c, "mu": mu, "half_length": ctx.grid.half_length})

    storage.write_csv("jost.csv", pd.DataFrame({
        "x": odd.x_half,
        "r_even": even.r,
        "phi_even": even.phi,
        "r_odd": odd.r,
        "phi_odd": odd.phi,
        "energy_odd": jost.energy_E1(odd, ctx.core.base),
    }), meta)
    gamma = spectral.to_frame(ctx.gamma.gamma, "gamma")
    gamma["chi"] = ctx.chi.values
    storage.write_csv("gamma.csv", gamma, meta)
    alpha, beta = jost.asymptotic_constants(odd)
    storage.write_json("jost.json", {
        "omega_mu": ctx.omega,
        "r_inf": {"even": even.r_inf, "odd": odd.r_inf},
        "phi_inf": {"even": even.phi_inf, "odd": odd.phi_inf},
        "asymptotic_constants": {"alpha": alpha, "beta": beta},
        "theta_inf": ctx.gamma.theta_inf,
        "gamma_amplitude": ctx.gamma.amplitude,
        "neumann_terms": ctx.gamma.neumann_terms_used,
        "contraction_ratio": ctx.gamma.contraction_ratio,
        "fit_residual": ctx.gamma.fit_residual,
        "adjoint_residual": ctx.gamma.adjoint_residual,
        "kappa": ctx.kappa,
    }, meta)
    return EXIT_OK
