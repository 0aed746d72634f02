from fputwaves import storage
from fputwaves.commands import add_speed, flag, option
from fputwaves.services import verification
from fputwaves.utils.errors import EXIT_OK, EXIT_SOLVER


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify-all", help="run the acceptance suite and print a pass/fail table")
    add_speed(parser)
    level = parser.add_mutually_exclusive_group()
    level.add_argument("--quick", action="store_true", help="reduced grids and sweeps (default)")
    level.add_argument("--full", action="store_true", help="full-size grids and sweeps")
    parser.add_argument("--check", type=int, action="append", help="run only this check id (repeatable)")
    parser.set_defaults(handler=run)


def run(args) -> int:
    c = option(args, "c", cast=float)
    level = "full" if flag(args, "full") else "quick"
    reports = verification.run_suite(level, c, only=args.check)
    frame = verification.report_frame(reports)
    print(frame.drop(columns=["measured"]).to_string(index=False))
    storage.write_json("verify.json", {"level": level, "reports": reports},
                       storage.provenance("verify-all", {"c": c, "level": level, "checks": args.check}))
    return EXIT_OK if all(r.status == "pass" for r in reports) else EXIT_SOLVER
