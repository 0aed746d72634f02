"""
utils/krylov.py

Thin wrapper over scipy's GMRES: matrix-free operators on flat arrays,
a uniform tolerance keyword across scipy releases, and failures raised as
ConvergenceError with the achieved residual attached.
"""

import logging
from typing import Callable

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from fputwaves.utils.errors import ConvergenceError

logger = logging.getLogger(__name__)


def solve(matvec: Callable[[np.ndarray], np.ndarray], rhs: np.ndarray, rtol: float = 1e-12,
          restart: int = 80, maxiter: int = 40, x0: np.ndarray = None, label: str = "gmres") -> np.ndarray:
    n = rhs.size
    op = LinearOperator((n, n), matvec=matvec, dtype=float)
    try:
        x, info = gmres(op, rhs, x0=x0, rtol=rtol, atol=0.0, restart=restart, maxiter=maxiter)
    except TypeError:
        # scipy < 1.12 spells it `tol`
        x, info = gmres(op, rhs, x0=x0, tol=rtol, atol=0.0, restart=restart, maxiter=maxiter)
    residual = float(np.linalg.norm(matvec(x) - rhs))
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    logger.debug("%s: info=%d relative residual %.3e", label, info, residual / scale)
    if info != 0 and residual > 1e3 * rtol * scale:
        raise ConvergenceError(
            f"{label} did not converge (relative residual {residual / scale:.2e})",
            {"info": int(info), "relative_residual": residual / scale},
        )
    return x
