import pandas as pd

from fputwaves import storage
from fputwaves.commands import add_mu, add_speed, flag, mu_values, option
from fputwaves.services import nanopteron
from fputwaves.utils.dependencies import get_light_context
from fputwaves.utils.errors import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("nanopteron", help="full traveling wave σ_{c,μ} + a p^a + η")
    add_speed(parser)
    add_mu(parser, grid=True)
    parser.add_argument("--tol", type=float, help="fixed-point tolerance")
    parser.add_argument("--max-iter", type=int, help="iteration cap")
    parser.add_argument("--jacobi", action="store_true", help="simultaneous instead of sequential updates")
    parser.set_defaults(handler=run)


def run(args) -> int:
    c = option(args, "c", cast=float, required=True)
    tol = option(args, "tol", nanopteron.ITERATION_TOLERANCE, float)
    max_iter = option(args, "max_iter", nanopteron.MAX_ITERATIONS, int)
    if option(args, "mu_grid") is not None:
        mus = mu_values(args)
        rows = nanopteron.sweep(c, mus, tol, max_iter)
        storage.write_csv("nanopteron_sweep.csv", pd.DataFrame(rows),
                          storage.provenance("nanopteron", {"c": c, "mu": mus, "tol": tol, "max_iter": max_iter}))
        return EXIT_OK

    mu = option(args, "mu", cast=float, required=True)
    jacobi = flag(args, "jacobi")
    ctx = get_light_context(c, mu)
    solution = nanopteron.iterate(ctx, tol=tol, max_iter=max_iter, jacobi=jacobi)
    physical = nanopteron.assemble_physical(solution)

    meta = storage.provenance("nanopteron", {"c": c, "mu": mu, "tol": tol, "max_iter": max_iter, "jacobi": jacobi})
    sigma1, sigma2 = solution.core.sigma.arrays()
    eta1, eta2 = solution.eta.arrays()
    storage.write_csv("nanopteron.csv", pd.DataFrame({
        "x": physical["x"],
        "sigma1": sigma1,
        "sigma2": sigma2,
        "eta1": eta1,
        "eta2": eta2,
        "upsilon1": physical["upsilon1"],
        "upsilon2": physical["upsilon2"],
        "phi1": physical["phi1"],
        "phi2": physical["phi2"],
    }), meta)
    storage.write_json("nanopteron.json", {
        "c": c,
        "mu": mu,
        "a": solution.a,
        "omega_a": solution.wave.omega_a,
        "kappa": solution.kappa,
        "b_star": solution.b_star,
        "residual_full": solution.residual_full,
        "rho_residual": physical["rho_residual"],
        "solvability_defect": nanopteron.solvability_defect(ctx, solution),
        "amplitude_consistency": nanopteron.amplitude_consistency(ctx, solution),
        "ball_ledger": nanopteron.ball_ledger(solution.history, mu),
        "iterates": solution.iterates,
        "history": solution.history,
    }, meta)
    return EXIT_OK
