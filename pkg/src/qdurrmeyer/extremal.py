"""The sharpness family: for lambda > 1 the function with
f(q^j) = (q;q)_j s_j, s_j = sum_{k<=j} alpha^k/(q;q)_{j-k}, alpha = q^{lambda-1},
whose image grows no slower than r^{-lambda} (-r;q)_inf.

For this family g(z) = 1/(1 - alpha q z) exactly, so every divided
difference is known in closed form: g[x_0..x_k] = beta^k / prod (1 - beta x_i)
with beta = alpha q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .funcspace import SAMPLE_DPS, GridFunction, growth_dps, growth_nodes
from .qcore import DomainError, QContext, log_qpoch_neg, qfactorials_mp, qq_inf


@dataclass(frozen=True)
class ExtremalFamily:
    lam: float
    alpha: float
    s: tuple
    gf: GridFunction


def _check_lambda(lam):
    if not lam > 1:
        raise DomainError("the sharpness family needs lambda > 1")


def _alpha_mp(lam, q):
    # q^(lambda-1) through the log, so large lambda only underflows gracefully
    return mpmath.exp((mpmath.mpf(lam) - 1) * mpmath.log(q))


def _s_values(lam, q, J):
    """s_0..s_J via s_j = 1/(q;q)_j + alpha s_{j-1} (all terms positive)."""
    alpha = _alpha_mp(lam, q)
    qf = qfactorials_mp(q, J)
    s = [1 / qf[0]]
    for j in range(1, J + 1):
        s.append(1 / qf[j] + alpha * s[-1])
    return s, qf, alpha


def s_seq(j: int, lam: float, ctx: QContext) -> float:
    """s_j = sum_{k=0}^{j} alpha^k / (q;q)_{j-k}."""
    _check_lambda(lam)
    if j < 0:
        raise DomainError("j must be nonnegative")
    with mpmath.workdps(SAMPLE_DPS):
        s, _, _ = _s_values(lam, mpmath.mpf(ctx.q), j)
        return float(s[j])


def make_extremal(lam: float, ctx: QContext, J: int, dps: int = SAMPLE_DPS) -> ExtremalFamily:
    """Node data v_j = (q;q)_j s_j, j <= J, with limit 1/(1 - alpha)."""
    _check_lambda(lam)
    if J < 1:
        raise DomainError("J must be at least 1")
    with mpmath.workdps(dps):
        q = mpmath.mpf(ctx.q)
        s, qf, alpha = _s_values(lam, q, J)
        vals = tuple(qf[j] * s[j] for j in range(J + 1))
        limit = 1 / (1 - alpha)
        gf = GridFunction(ctx.q, vals, limit, f"sharp:{lam}")
        return ExtremalFamily(float(lam), float(alpha), tuple(s), gf)


def g_closed_form(lam: float, z, ctx: QContext) -> complex:
    """g(z) = 1/(1 - alpha q z); its only pole is at z = q^{-lambda}."""
    _check_lambda(lam)
    beta = math.exp(lam * math.log(ctx.q))  # alpha q
    den = 1.0 - beta * complex(z)
    if abs(den) <= 1e-15:
        raise DomainError(f"z = {z} is the pole q^(-lambda) of g")
    return 1.0 / den


def divdiff_closed_form(lam: float, k: int, ctx: QContext, dps: int = 50):
    """g[1; q; ...; q^k] = beta^k / (beta; q)_{k+1} as an mpf."""
    with mpmath.workdps(dps):
        q = mpmath.mpf(ctx.q)
        beta = mpmath.exp(mpmath.mpf(lam) * mpmath.log(q))
        den = mpmath.mpf(1)
        x = beta
        for _ in range(k + 1):
            den *= 1 - x
            x *= q
        return beta ** k / den


@dataclass(frozen=True)
class LowerBoundReport:
    lam: float
    q: float
    divdiff_slack: float        # min_k (g[1..q^k] - (alpha q)^k), k <= k_max
    bound_slack: np.ndarray     # y(r) - [ln(q;q)_inf + ln(-alpha q r;q)_inf - ln(-r;q)_inf]
    shifted: np.ndarray         # y(r) + lambda ln r
    floor: float                # ln(q;q)_inf + min over grid of the sandwich log-ratio
    lambda_hat: float
    residual: float
    profile: object

    @property
    def divdiffs_ok(self) -> bool:
        return self.divdiff_slack >= -1e-9

    @property
    def bound_ok(self) -> bool:
        return float(self.bound_slack.min()) >= -1e-9

    @property
    def bounded_below(self) -> bool:
        return float(self.shifted.min()) >= self.floor - 1e-9

    @property
    def c_estimate(self) -> float:
        """Empirical inf of y + lambda ln r over the grid (log of the constant)."""
        return float(self.shifted.min())

    @property
    def passed(self) -> bool:
        return self.divdiffs_ok and self.bound_ok and self.bounded_below


def lower_bound_check(lam: float, r_grid, ctx: QContext, k_max: int = 25,
                      n_angles: int = 1024, J: int | None = None) -> LowerBoundReport:
    """Check the lower-bound chain for the sharpness family on ``r_grid``.

    (i) divided differences of g at 1, q, ..., q^k dominate (alpha q)^k;
    (ii) ln M(r) >= ln(q;q)_inf + ln(-alpha q r;q)_inf at every radius;
    (iii) y + lambda ln r stays above ln(q;q)_inf plus the least log-ratio
    of the sandwich (-q^lambda r;q)_inf r^lambda / (-r;q)_inf on the grid.
    """
    from .growth import fit_decay_exponent, growth_profile, sandwich_zz2, top_decade
    from .taylor import taylor_coeffs

    _check_lambda(lam)
    r_grid = np.asarray(r_grid, dtype=float)
    if J is None:
        J = growth_nodes(ctx, float(r_grid.max()))
    fam = make_extremal(lam, ctx, J, dps=growth_dps(ctx, float(r_grid.max())))
    ext = ctx.replace(precision_tier="extended")
    series = taylor_coeffs(fam.gf, k_max, ext)
    with mpmath.workdps(series.dps):
        beta = _alpha_mp(lam, mpmath.mpf(ctx.q)) * mpmath.mpf(ctx.q)
        slack = min(float(series.divdiffs[k] - beta ** k) for k in range(k_max + 1))

    profile = growth_profile(fam.gf, r_grid, ext, n_angles=n_angles)
    beta_f = float(beta)
    log_qq = math.log(qq_inf(ctx.q))
    rhs = np.array([log_qq + log_qpoch_neg(beta_f * r, ctx) - log_qpoch_neg(r, ctx)
                    for r in r_grid])
    shifted = profile.y + lam * np.log(r_grid)
    sandwich = sandwich_zz2(lam, r_grid, ctx)
    floor = log_qq + math.log(sandwich.min)
    lam_hat, resid = fit_decay_exponent(profile, top_decade(r_grid))
    return LowerBoundReport(float(lam), ctx.q, slack, profile.y - rhs, shifted, floor,
                            lam_hat, resid, profile)
