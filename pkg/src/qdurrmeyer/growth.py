"""Maximum modulus of D f against the envelope (-r;q)_inf.

Everything is kept in log form: y(r) = ln M(r) - ln(-r;q)_inf is assembled
from a scaled evaluation F/exp(s) and the scale s, so radii whose M(r)
overflows a double are handled the same way as small ones.  The image is
evaluated through its Taylor series, whose coefficients are computed once
per profile with enough digits for the largest radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .funcspace import GridFunction, sup_norm
from .qcore import DomainError, QContext, log_qpoch_neg, neg_q_inf, qq_inf
from .taylor import TaylorEvaluator, taylor_series_for

DEFAULT_ANGLES = 1024
CSV_FIELDS = ("r", "log_M", "log_env", "y", "theta_max")


def default_grid(r_min: float = 1e1, r_max: float = 1e10, points: int = 40) -> np.ndarray:
    return np.geomspace(r_min, r_max, points)


def _check_grid(r_grid) -> np.ndarray:
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or len(r) == 0:
        raise DomainError("r_grid must be a nonempty sequence")
    if not np.all(r > 0) or not np.all(np.diff(r) > 0):
        raise DomainError("r_grid must be positive and strictly increasing")
    return r


def max_modulus_scaled(evaluator, r: float, n_angles: int, ctx: QContext):
    """(ln M(r), theta_max) from ``evaluator(r, thetas) -> (values, log_scale)``.

    The circle is sampled at n_angles equispaced angles; the best sample is
    then polished by a bounded scalar search within one grid step.
    """
    if not r > 0:
        raise DomainError("r must be positive")
    if n_angles < 8:
        raise DomainError("n_angles must be at least 8")
    thetas = 2 * np.pi * np.arange(n_angles) / n_angles
    vals, s = evaluator(r, thetas)
    mags = np.abs(vals)
    i = int(np.argmax(mags))
    best_t, best = float(thetas[i]), float(mags[i])
    if best == 0.0:
        return -math.inf, 0.0
    step = 2 * np.pi / n_angles
    if np.ptp(mags) > 1e-14 * best:
        res = minimize_scalar(lambda t: -abs(evaluator(r, [t])[0][0]),
                              bounds=(best_t - step, best_t + step), method="bounded",
                              options={"xatol": 1e-10})
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    return math.log(best) + s, best_t % (2 * np.pi)


@dataclass(frozen=True)
class GrowthProfile:
    q: float
    r_grid: np.ndarray
    log_M: np.ndarray
    log_env: np.ndarray
    y: np.ndarray
    theta_max: np.ndarray
    lambda_fit: float
    residual: float
    window: tuple          # (start, stop) index range of the fit

    def rows(self):
        for i in range(len(self.r_grid)):
            yield (self.r_grid[i], self.log_M[i], self.log_env[i], self.y[i], self.theta_max[i])


def top_decade(r_grid, min_points: int = 5) -> tuple:
    """Index range of the points within a factor 10 of the largest radius
    (widened to ``min_points`` if the grid is sparse there)."""
    r = np.asarray(r_grid, dtype=float)
    start = int(np.searchsorted(r, r[-1] / 10.0 * (1 - 1e-12)))
    start = min(start, max(len(r) - min_points, 0))
    return (start, len(r))


def fit_decay_exponent(profile: GrowthProfile, window=None):
    """Least-squares slope of y against ln r on ``window``; returns (-slope, rms)."""
    if window is None:
        window = top_decade(profile.r_grid)
    start, stop = window
    x = np.log(profile.r_grid[start:stop])
    yv = profile.y[start:stop]
    if len(x) < 5:
        raise DomainError("the fit window needs at least 5 points")
    if not np.all(np.isfinite(yv)):
        raise DomainError("y is not finite on the fit window")
    slope, icept = np.polyfit(x, yv, 1)
    resid = float(np.sqrt(np.mean((yv - (slope * x + icept)) ** 2)))
    return float(-slope), resid


def growth_profile(gf: GridFunction, r_grid=None, ctx: QContext | None = None,
                   n_angles: int = DEFAULT_ANGLES, evaluator=None) -> GrowthProfile:
    """Sampled max modulus of D f on every radius of ``r_grid``.

    ``evaluator`` defaults to the Taylor-series evaluator built for the
    largest radius of the grid.
    """
    if ctx is None:
        raise DomainError("a QContext is required")
    r = _check_grid(default_grid() if r_grid is None else r_grid)
    if evaluator is None:
        evaluator = TaylorEvaluator(taylor_series_for(gf, ctx, float(r[-1])))
    log_M = np.empty(len(r))
    theta = np.empty(len(r))
    for i, ri in enumerate(r):
        log_M[i], theta[i] = max_modulus_scaled(evaluator, float(ri), n_angles, ctx)
    log_env = np.array([log_qpoch_neg(float(ri), ctx) for ri in r])
    y = log_M - log_env
    window = top_decade(r) if len(r) >= 5 else (0, len(r))
    lam, resid = (math.nan, math.nan)
    if window[1] - window[0] >= 5 and np.all(np.isfinite(y)):
        lam, resid = fit_decay_exponent(
            GrowthProfile(ctx.q, r, log_M, log_env, y, theta, math.nan, math.nan, window), window)
    return GrowthProfile(ctx.q, r, log_M, log_env, y, theta, lam, resid, window)


def crude_bound(gf: GridFunction, ctx: QContext) -> float:
    """ln(sup|f| (-q;q)_inf / (q;q)_inf), an upper bound for y(r) at every r."""
    return math.log(sup_norm(gf) * neg_q_inf(ctx.q) / qq_inf(ctx.q))


# --- comparison functions ----------------------------------------------------

@dataclass(frozen=True)
class SandwichReport:
    mu: float
    r_grid: np.ndarray
    ratio: np.ndarray
    max: float
    min: float


def sandwich_zz2(mu: float, r_grid, ctx: QContext) -> SandwichReport:
    """ratio(r) = (-q^mu r;q)_inf r^mu / (-r;q)_inf on the grid, with its range."""
    if mu < 0:
        raise DomainError("mu must be nonnegative")
    r = _check_grid(r_grid)
    shift = math.exp(mu * math.log(ctx.q))
    logs = np.array([log_qpoch_neg(shift * ri, ctx) + mu * math.log(ri) - log_qpoch_neg(ri, ctx)
                     for ri in r])
    ratio = np.exp(logs)
    return SandwichReport(float(mu), r, ratio, float(ratio.max()), float(ratio.min()))


def sandwich_integer(m: int, r: float, ctx: QContext) -> float:
    """r^m / prod_{i<m} (1 + q^i r), the telescoped ratio for integer mu."""
    out = 1.0
    for i in range(m):
        out *= r / (1.0 + ctx.q ** i * r)
    return out


def zeng_ratio(r: float, ctx: QContext) -> float:
    """(-r;q)_inf / exp(ln^2 r / (2 ln(1/q)) + ln(r)/2)."""
    if not r > 0:
        raise DomainError("r must be positive")
    lr = math.log(r)
    return math.exp(log_qpoch_neg(r, ctx) - lr * lr / (2 * -ctx.log_q) - lr / 2)


@dataclass(frozen=True)
class OEstimateReport:
    lam: float
    window: tuple
    shifted: np.ndarray        # y + lam ln r over the whole grid
    decreasing: bool
    fall: float                # drop of y + lam ln r across the window
    profile: GrowthProfile

    @property
    def passed(self) -> bool:
        return self.decreasing


def o_estimate_check(gf: GridFunction, lam: float, r_grid=None, ctx: QContext | None = None,
                     n_angles: int = DEFAULT_ANGLES, top_decades: float | None = None,
                     profile: GrowthProfile | None = None) -> OEstimateReport:
    """Is y(r) + lam ln r strictly decreasing at the top of the grid?

    The window is the upper half of the grid, or the points within
    ``top_decades`` decades of the largest radius.  A finite grid cannot
    show an o(.) statement; steady decrease with a reported fall is the
    working stand-in.
    """
    if profile is None:
        r = _check_grid(default_grid() if r_grid is None else r_grid)
        if math.log10(r[-1] / r[0]) < 6 - 1e-9:
            raise DomainError("r_grid must span at least 6 decades")
        profile = growth_profile(gf, r, ctx, n_angles=n_angles)
    r = profile.r_grid
    if top_decades is None:
        start = len(r) // 2
    else:
        start = int(np.searchsorted(r, r[-1] * 10.0 ** (-top_decades) * (1 - 1e-12)))
    u = profile.y + lam * np.log(r)
    seg = u[start:]
    decreasing = bool(np.all(np.diff(seg) < 0))
    return OEstimateReport(float(lam), (start, len(r)), u, decreasing,
                           float(seg[0] - seg[-1]), profile)


def format_float(x: float) -> str:
    return f"{x:.17g}"


def profile_csv(profile: GrowthProfile) -> str:
    lines = [",".join(CSV_FIELDS)]
    for row in profile.rows():
        lines.append(",".join(format_float(float(v)) for v in row))
    return "\n".join(lines) + "\n"
