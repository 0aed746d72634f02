"""
main.py

Command-line front end. `dispatch(argv)` runs exactly one subcommand and
returns the process exit code: 0 on success, 2 on invalid input, 3 when a
solver fails.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

from pydantic import ValidationError

from fputwaves import __version__, storage
from fputwaves.commands import dispersion, jost, kappa_scan, mc_scan, nanopteron, periodic, simulate, solitary, verify_all
from fputwaves.config import settings
from fputwaves.utils.errors import EXIT_OK, EXIT_VALIDATION, FputwavesError, InvalidInputError
from fputwaves.utils.workers import pool

logger = logging.getLogger("fputwaves")

COMMANDS = (solitary, dispersion, periodic, jost, kappa_scan, mc_scan, nanopteron, simulate, verify_all)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fputwaves", description="Nanopteron traveling waves in diatomic FPUT lattices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key=value file; explicit flags override it")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--n-jobs", type=int, help="worker processes for sweeps (-1: all cores)")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for module in COMMANDS:
        module.register(subparsers)
    return parser


def read_config(path: Optional[str]) -> Dict[str, str]:
    if path is None:
        return {}
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config file {path}: {exc.strerror}")
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise InvalidInputError(f"{path}:{number}: expected key=value")
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def _configure(args) -> None:
    files = args.file_values
    level = args.log_level or files.get("log_level") or settings.LOG_LEVEL
    logger.setLevel(level.upper())
    storage.set_output_dir(args.out or files.get("out"))
    n_jobs = args.n_jobs if args.n_jobs is not None else files.get("n_jobs")
    pool.configure(int(n_jobs) if n_jobs is not None else None)


def dispatch(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    try:
        args.file_values = read_config(args.config)
        _configure(args)
        return args.handler(args)
    except FputwavesError as exc:
        logger.error("%s: %s", type(exc).__name__, exc.detail)
        return exc.exit_code
    except (ValidationError, ValueError) as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
