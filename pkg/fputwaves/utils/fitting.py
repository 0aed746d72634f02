"""
utils/fitting.py

Least-squares helpers: straight lines in log coordinates (decay rates and
scaling exponents), the two-parameter asymptotic sinusoid, and the sech²
long-wave profile.
"""

import numpy as np
from pydantic import BaseModel
from scipy.optimize import curve_fit
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from fputwaves.utils.errors import FitError


class LineFit(BaseModel):
    slope: float
    intercept: float
    r2: float


class SinusoidFit(BaseModel):
    amplitude: float
    phase: float          # ϑ in  amplitude * sin(ω (x + ϑ))
    alpha: float          # coefficient of sin(ω x)
    beta: float           # coefficient of cos(ω x)
    residual: float       # sup-norm misfit on the window


def fit_line(x, y) -> LineFit:
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    y = np.asarray(y, dtype=float)
    if x.shape[0] < 2 or not np.all(np.isfinite(y)):
        raise FitError("line fit needs at least two finite samples")
    model = LinearRegression().fit(x, y)
    pred = model.predict(x)
    r2 = r2_score(y, pred) if x.shape[0] > 2 else 1.0
    return LineFit(slope=float(model.coef_[0]), intercept=float(model.intercept_), r2=float(r2))


def loglog_slope(x, y) -> LineFit:
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("log-log fit needs positive abscissae and nonzero ordinates")
    return fit_line(np.log(x), np.log(y))


def fit_exponential_tail(x, values) -> LineFit:
    """Fit log|f| = intercept - b |x|; the returned slope is the decay rate b (positive)."""
    x = np.abs(np.asarray(x, dtype=float))
    v = np.abs(np.asarray(values, dtype=float))
    keep = v > 0
    if keep.sum() < 3:
        raise FitError("tail fit window holds fewer than three nonzero samples")
    fit = fit_line(x[keep], np.log(v[keep]))
    return LineFit(slope=-fit.slope, intercept=fit.intercept, r2=fit.r2)


def fit_sinusoid(x, y, omega: float, phase_near: float = 0.0) -> SinusoidFit:
    """
    Linear least squares y ≈ α sin(ωx) + β cos(ωx), rewritten as ϱ sin(ω(x+ϑ)).
    ϑ is only defined modulo 2π/ω; the representative closest to `phase_near`
    is returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    design = np.column_stack([np.sin(omega * x), np.cos(omega * x)])
    model = LinearRegression(fit_intercept=False).fit(design, y)
    alpha, beta = (float(v) for v in model.coef_)
    residual = float(np.max(np.abs(model.predict(design) - y)))
    amplitude = float(np.hypot(alpha, beta))
    angle = np.arctan2(beta, alpha)
    period = 2.0 * np.pi / omega
    phase = angle / omega
    phase += period * np.round((phase_near - phase) / period)
    return SinusoidFit(amplitude=amplitude, phase=float(phase), alpha=alpha, beta=beta, residual=residual)


def sech2(x, amplitude, width):
    return amplitude / np.cosh(width * x) ** 2


def fit_sech2(x, y, p0):
    popt, _ = curve_fit(sech2, x, y, p0=p0, maxfev=20000)
    misfit = float(np.max(np.abs(sech2(x, *popt) - y)))
    return float(popt[0]), float(popt[1]), misfit
