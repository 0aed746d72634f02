"""
utils/grids.py

μ-grid mini-language used by the sweep commands:

    log:1e-4:1e-1:25      25 log-spaced values, both ends included
    list:0.01,0.02        explicit values
"""

from typing import List

import numpy as np

from fputwaves.utils.errors import InvalidInputError


def parse_mu_grid(spec: str) -> List[float]:
    kind, _, body = spec.strip().partition(":")
    try:
        if kind == "log":
            lo, hi, count = body.split(":")
            lo, hi, n = float(lo), float(hi), int(count)
            if not (0 < lo < hi < 1) or n < 1:
                raise InvalidInputError(f"log grid needs 0 < lo < hi < 1 and a positive count: {spec!r}")
            return [float(v) for v in np.logspace(np.log10(lo), np.log10(hi), n)]
        if kind == "list":
            values = [float(v) for v in body.split(",") if v.strip()]
            if not values or any(not (0 < v < 1) for v in values):
                raise InvalidInputError(f"list grid needs values in (0, 1): {spec!r}")
            return values
    except ValueError:
        raise InvalidInputError(f"malformed mu grid {spec!r}")
    raise InvalidInputError(f"unknown mu grid kind {kind!r} (expected 'log' or 'list')")
