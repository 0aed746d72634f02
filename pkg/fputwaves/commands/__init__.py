"""
commands

One module per subcommand. Each exposes `register(subparsers)`, which adds its
parser and binds `handler`. Flags default to None so that a value from the
`--config` file can fill in whatever was not given on the command line.
"""

from typing import Any, List, Optional

from fputwaves.utils.errors import InvalidInputError
from fputwaves.utils.grids import parse_mu_grid


def option(args, name: str, default: Any = None, cast=None, required: bool = False):
    """Flag value, else config-file value, else `default`."""
    value = getattr(args, name, None)
    if value is None:
        value = args.file_values.get(name)
    if value is None:
        if required:
            raise InvalidInputError(f"missing required parameter --{name.replace('_', '-')}")
        return default
    return cast(value) if cast is not None else value


def flag(args, name: str) -> bool:
    if getattr(args, name, False):
        return True
    return str(args.file_values.get(name, "")).lower() in ("1", "true", "yes")


def mu_values(args, required: bool = True) -> Optional[List[float]]:
    """`--mu` as a one-point grid, or `--mu-grid` in the mini-language."""
    grid = option(args, "mu_grid")
    if grid is not None:
        return parse_mu_grid(grid)
    mu = option(args, "mu", cast=float, required=required)
    return None if mu is None else [mu]


def add_speed(parser) -> None:
    parser.add_argument("--c", type=float, help="wave speed, |c| > sqrt(2)")


def add_mu(parser, grid: bool = False) -> None:
    parser.add_argument("--mu", type=float, help="mass ratio in (0, 1)")
    if grid:
        parser.add_argument("--mu-grid", help="log:lo:hi:n or list:a,b,...")
