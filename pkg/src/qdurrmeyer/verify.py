"""Named self-check suites run by ``qdurr verify``.

Each check returns (ok, detail); a suite prints one ``PASS name`` /
``FAIL name: detail`` line per check followed by a count.  Random points
come from fixed seeds so the output is reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import durrmeyer as dm
from . import growth as gr
from .extremal import lower_bound_check, make_extremal, s_seq
from .funcspace import sample, sample_for_growth, sup_norm
from .qcore import (QContext, euler_recip_series, euler_series, jackson_qintegral,
                    log_qpoch_neg, qpoch_inf, qq_inf)
from .taylor import (GFunction, contour_radius, divdiff_contour, divdiff_recursive,
                     eval_taylor, taylor_coeffs, taylor_series_for)

SEED = 20240611
CATALOG_SAMPLES = ("monomial:0", "monomial:1", "monomial:3", "poly:1,-2,3",
                   "power:0.5", "absshift:0.5", "exp", "sharp:2.0")
SUITES = ("identities", "operator", "taylor", "growth", "extremal", "all")


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"PASS {self.name}" if self.ok else f"FAIL {self.name}: {self.detail}"


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _disc(rng, n, radius):
    rad = radius * np.sqrt(rng.random(n))
    return rad * np.exp(2j * np.pi * rng.random(n))


# --- identities --------------------------------------------------------------

def check_euler_product(ctx, n=100, tol=1e-12):
    rng = np.random.default_rng(SEED)
    zs = list(_disc(rng, n, 0.9)) + list(-50 * rng.random(n // 2))
    worst = max(_rel(euler_series(z, ctx), qpoch_inf(z, ctx)[0]) for z in zs)
    return worst <= tol, f"max relative gap {worst:.3g}"


def check_euler_reciprocal(ctx, n=100, tol=1e-12):
    rng = np.random.default_rng(SEED + 1)
    zs = _disc(rng, n, 0.9)
    worst = max(_rel(euler_recip_series(z, ctx), 1 / qpoch_inf(z, ctx)[0]) for z in zs)
    return worst <= tol, f"max relative gap {worst:.3g}"


def check_jackson_moments(ctx, tol=1e-13):
    q = ctx.q
    worst = 0.0
    for n in range(6):
        exact = (1 - q) / (1 - q ** (n + 1))
        worst = max(worst, _rel(jackson_qintegral(lambda t: t ** n, 1.0, ctx), exact))
    return worst <= tol, f"max relative gap {worst:.3g}"


def check_log_envelope(ctx, tol=1e-12):
    rs = [1e-3, 0.5, 1.0, 7.0, 1e2, 1e3]
    worst = max(_rel(log_qpoch_neg(r, ctx), math.log(qpoch_inf(-r, ctx)[0])) for r in rs)
    return worst <= tol, f"max relative gap {worst:.3g}"


# --- operator --------------------------------------------------------------

def check_constants_reproduced(ctx, n=50):
    xs = np.linspace(0, 1, n)
    one = sample("monomial:0", ctx)
    ident = sample("monomial:1", ctx)
    e1 = max(abs(dm.eval_interval(one, x, ctx) - 1) for x in xs)
    e2 = max(abs(dm.eval_interval(ident, x, ctx) - ((1 - ctx.q) + ctx.q * x)) for x in xs)
    return e1 <= 1e-12 and e2 <= 1e-10, f"|D1-1| {e1:.3g}, |Dt-(1-q)-qt| {e2:.3g}"


def check_endpoint(ctx):
    worst = 0.0
    for spec in CATALOG_SAMPLES:
        gf = sample(spec, ctx)
        worst = max(worst, abs(dm.eval_interval(gf, 1.0, ctx) - float(gf.values[0])),
                    abs(dm.eval_entire(gf, 1.0, ctx) - float(gf.values[0])))
    return worst <= 1e-12, f"max |Df(1)-f(1)| {worst:.3g}"


def check_coefficient_routes(ctx, k_max=10, tol=1e-12):
    worst = 0.0
    for spec in CATALOG_SAMPLES:
        gf = sample(spec, ctx)
        A = dm.coeff_vector(gf, k_max, ctx)
        for k in range(k_max + 1):
            worst = max(worst, abs(A[k] - dm.coeff_A_qintegral(k, gf, ctx)) / max(sup_norm(gf), 1.0))
    return worst <= tol, f"max scaled gap {worst:.3g}"


def check_partition_of_unity(ctx, tol=1e-12):
    worst = 0.0
    for x in np.linspace(0, 0.99, 34):
        K = max(1, math.ceil(math.log(1e-18) / math.log(max(x, 1e-300))) if x > 0 else 1)
        total = math.fsum(dm.basis_p(k, x, ctx) for k in range(K + 1))
        worst = max(worst, abs(total - 1))
    return worst <= tol, f"max |sum p_k - 1| {worst:.3g}"


def check_interval_vs_entire(ctx, tol=1e-8):
    rng = np.random.default_rng(SEED + 2)
    xs = rng.random(20)
    worst = 0.0
    for spec in CATALOG_SAMPLES:
        gf = sample(spec, ctx)
        for x in xs:
            worst = max(worst, _rel(dm.eval_interval(gf, x, ctx), dm.eval_entire(gf, x, ctx).real))
    return worst <= tol, f"max relative gap {worst:.3g}"


def check_contraction(ctx):
    worst = -math.inf
    for spec in CATALOG_SAMPLES:
        gf = sample(spec, ctx)
        s = sup_norm(gf)
        for x in np.linspace(0, 1, 21):
            worst = max(worst, abs(dm.eval_interval(gf, x, ctx)) - s)
    return worst <= 1e-12, f"max |Df| - sup|f| = {worst:.3g}"


# --- taylor ------------------------------------------------------------------

def check_divdiff_agreement(ctx, k_max=20, specs=CATALOG_SAMPLES):
    ext = ctx.replace(precision_tier="extended")
    worst = 0.0
    for spec in specs:
        gf = sample(spec, ctx)
        series = taylor_coeffs(gf, k_max, ext)
        gvec = GFunction(gf, ctx)
        R = contour_radius(gf, ext)
        for k in range(k_max + 1):
            explicit = float(series.divdiffs[k])
            rec = float(divdiff_recursive(dm.coeff_A_mp(gf, k, series.dps), ext))
            cont = float(divdiff_contour(gvec, k, R, ctx=ext).real)
            for a, b in ((explicit, rec), (explicit, cont), (rec, cont)):
                scale = max(abs(a), abs(b))
                tol = 1e-10 if scale <= 1e-10 else 1e-6 * scale  # absolute near zero
                worst = max(worst, abs(a - b) / tol)
    return worst <= 1.0, f"worst gap / tolerance {worst:.3g}"


def check_taylor_vs_entire(ctx, n=30, radius=5.0, tol=1e-8):
    rng = np.random.default_rng(SEED + 3)
    zs = _disc(rng, n, radius)
    worst = 0.0
    for spec in CATALOG_SAMPLES:
        gf = sample(spec, ctx)
        series = taylor_series_for(gf, ctx, radius)
        for z in zs:
            worst = max(worst, _rel(eval_taylor(series, z), dm.eval_entire(gf, z, ctx)))
    return worst <= tol, f"max relative gap {worst:.3g}"


def check_degree_preservation(ctx, k_max=20):
    worst = 0.0
    for m in range(6):
        series = taylor_coeffs(sample(f"monomial:{m}", ctx), k_max, ctx)
        worst = max([worst] + [abs(float(c)) for c in series.coeffs[m + 1:]])
    return worst <= 1e-9, f"max |c_k| beyond the degree {worst:.3g}"


# --- growth ------------------------------------------------------------------

def check_sandwich_integer(ctx, tol=1e-12):
    grid = gr.default_grid(1.0, 1e12, 25)
    worst = 0.0
    for m in range(5):
        rep = gr.sandwich_zz2(m, grid, ctx)
        for r, v in zip(grid, rep.ratio):
            worst = max(worst, _rel(v, gr.sandwich_integer(m, r, ctx)))
    return worst <= tol, f"max relative gap {worst:.3g}"


def check_zeng_bounded(ctx, bound=10.0):
    vals = [gr.zeng_ratio(10.0 ** i, ctx) for i in range(3, 13)]
    spread = max(vals) / min(vals)
    return spread <= bound, f"max/min {spread:.4g}"


def check_growth_bounds(ctx, specs=("absshift:0.5", "power:0.5", "exp"), r_max=1e10):
    grid = gr.default_grid(1e1, r_max, 40)
    bad = []
    for spec in specs:
        gf = sample_for_growth(spec, ctx, r_max)
        prof = gr.growth_profile(gf, grid, ctx)
        over = float(prof.y.max() - gr.crude_bound(gf, ctx))
        rep = gr.o_estimate_check(gf, 0.0, ctx=ctx, top_decades=4, profile=prof)
        mono = bool(np.all(np.diff(prof.log_M) >= -1e-9))
        if over > 1e-6 or not rep.decreasing or rep.fall < 2 or not mono:
            bad.append(f"{spec} (excess {over:.3g}, fall {rep.fall:.3g})")
    return not bad, "; ".join(bad)


# --- extremal ----------------------------------------------------------------

def check_s_sequence(ctx, lam=2.0, J=60):
    # increments shrink like alpha^j, so monotonicity is read off the mp node data
    fam = make_extremal(lam, ctx, J)
    s = fam.s
    cap = 1 / ((1 - fam.alpha) * qq_inf(ctx.q))
    ok = all(b > a for a, b in zip(s, s[1:])) and float(s[-1]) <= cap * (1 + 1e-12)
    ok = ok and abs(s_seq(J, lam, ctx) - float(s[-1])) <= 1e-15 * cap
    return ok, f"s_J = {float(s[-1]):.12g}, cap {cap:.12g}"


def check_extremal_g(ctx, lam=2.0):
    fam = make_extremal(lam, ctx, 200)
    gvec = GFunction(fam.gf, ctx)
    beta = ctx.q ** lam
    zs = np.concatenate([ctx.q ** np.arange(21), 0.9 / ctx.q * np.exp(1j * np.linspace(0, 6, 13))])
    worst = float(np.max(np.abs(gvec(zs) - 1 / (1 - beta * zs))))
    return worst <= 1e-10, f"max |g - 1/(1-beta z)| {worst:.3g}"


def check_lower_bound(ctx, lams=(1.5, 2.0, 3.0)):
    bad = []
    for lam in lams:
        rep = lower_bound_check(lam, gr.default_grid(), ctx)
        if not rep.passed or abs(rep.lambda_hat - lam) > 0.25:
            bad.append(f"lambda={lam} (slack {rep.bound_slack.min():.3g}, fit {rep.lambda_hat:.3g})")
    return not bad, "; ".join(bad)


SUITE_CHECKS = {
    "identities": (check_euler_product, check_euler_reciprocal, check_jackson_moments,
                   check_log_envelope),
    "operator": (check_constants_reproduced, check_endpoint, check_coefficient_routes,
                 check_partition_of_unity, check_interval_vs_entire, check_contraction),
    "taylor": (check_divdiff_agreement, check_taylor_vs_entire, check_degree_preservation),
    "growth": (check_sandwich_integer, check_zeng_bounded, check_growth_bounds),
    "extremal": (check_s_sequence, check_extremal_g, check_lower_bound),
}


def run_suite(name: str, ctx: QContext) -> list:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    names = [s for s in SUITES[:-1]] if name == "all" else [name]
    out = []
    for suite in names:
        for check in SUITE_CHECKS[suite]:
            label = f"{suite}.{check.__name__.removeprefix('check_')}"
            with mpmath.workdps(15):
                ok, detail = check(ctx)
            out.append(CheckResult(label, bool(ok), detail))
    return out
