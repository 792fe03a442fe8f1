"""Divided-difference form of the operator's image.

With a_j = f(q^j) q^j/(q;q)_j and rho(z) = sum_j a_j z^j, the function
g(z) = (qz;q)_inf rho(z) takes the value A_k at z = q^k, and the Taylor
coefficients of D f are

    c_k = (-1)^k q^{k(k-1)/2} g[1; q; ...; q^k].

Three routes to the divided differences are provided (Newton table,
explicit node sum, Cauchy integral on a circle) so they can check each
other.  The first two lose roughly k(k-1)/2 log10(1/q) digits to
cancellation and run in mpmath with that many extra digits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np

from .durrmeyer import coeff_A_mp
from .funcspace import SAMPLE_DPS, GridFunction, sup_norm
from .qcore import DomainError, PrecisionError, QContext, log_qfactorials, qq_inf

RHO_WINDOW = 20        # trailing coefficients used for the root test
RHO_TERMS = 400        # default length of the rho series
STANDARD_MAX_ORDER = 15
CONTOUR_NODES = 4096


# --- the series rho and the function g ---------------------------------------

@dataclass(frozen=True)
class RhoSeries:
    q: float
    log_abs: np.ndarray          # ln|a_j|, -inf where a_j = 0
    signs: np.ndarray
    radius_estimate: float
    band: tuple                  # (min, max) of 1/|a_j|^{1/j} over the window

    @property
    def coeffs(self) -> np.ndarray:
        return self.signs * np.exp(self.log_abs)


def rho_coeffs(gf: GridFunction, ctx: QContext, J: int | None = None) -> RhoSeries:
    """a_0..a_J and a root-test estimate of the radius of convergence.

    The root test runs in log form over the last ``RHO_WINDOW`` indices; a
    long series matters because (q;q)_j^{1/j} approaches 1 only like
    exp(ln(q;q)_inf / j).
    """
    if J is None:
        J = RHO_TERMS
    if J < 1:
        raise DomainError("J must be at least 1")
    q = ctx.q
    lqf = log_qfactorials(q, J)
    log_abs = np.empty(J + 1)
    signs = np.empty(J + 1)
    with mpmath.workdps(30):
        for j in range(J + 1):
            v = gf.node(j)
            signs[j] = float(mpmath.sign(v))
            log_abs[j] = float(mpmath.log(abs(v))) if v != 0 else -math.inf
    log_abs += np.arange(J + 1) * math.log(q) - np.array(lqf)
    # a zero tail says nothing about decay; read the root test off the stored nodes
    end = min(J, gf.J) if gf.limit0 == 0 else J
    lo = max(1, end - RHO_WINDOW + 1)
    js = np.arange(lo, end + 1)
    roots = log_abs[lo:end + 1] / js
    if np.all(np.isneginf(roots)):
        return RhoSeries(q, log_abs, signs, math.inf, (math.inf, math.inf))
    finite = roots[np.isfinite(roots)]
    radius = math.exp(-finite.max())
    return RhoSeries(q, log_abs, signs, radius, (radius, math.exp(-finite.min())))


def _tail_poly_coeffs(gf: GridFunction) -> np.ndarray:
    """(f(q^j) - f(0)) q^j / (q;q)_j for j <= J, differences taken in mp."""
    with mpmath.workdps(30):
        d = np.array([float(v - gf.limit0) for v in gf.values])
    lqf = np.array(log_qfactorials(gf.q, gf.J))
    return d * np.exp(np.arange(gf.J + 1) * math.log(gf.q) - lqf)


class GFunction:
    """Vectorized g(z) = f(0) + (qz;q)_inf sum_{j<=J} (f(q^j)-f(0)) (qz)^j/(q;q)_j.

    The f(0) part of rho sums to f(0)/(qz;q)_inf by the Euler identity, which
    leaves a polynomial times a product: exact for the constant-tail data and
    defined on the whole plane.
    """

    def __init__(self, gf: GridFunction, ctx: QContext):
        self.gf = gf
        self.ctx = ctx
        self.q = ctx.q
        self.L = gf.limit0_f
        self.d = _tail_poly_coeffs(gf)[::-1].copy()  # highest degree first
        self.eps = ctx.eps_term
        self._circles = {}

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        poly = np.polyval(self.d, z)  # rho's coefficients already carry q^j
        prod = np.ones_like(z)
        x = self.q * z
        bound = np.abs(x).max(initial=0.0)
        while bound >= self.eps * (1.0 - self.q):
            prod = prod * (1.0 - x)
            x = x * self.q
            bound *= self.q
        return self.L + prod * poly

    @cached_property
    def d_mp(self) -> list:
        """(f(q^j) - f(0)) q^j / (q;q)_j as mpf at the sampling precision."""
        gf = self.gf
        with mpmath.workdps(SAMPLE_DPS):
            q = mpmath.mpf(self.q)
            qf = mpmath.mpf(1)
            qj = mpmath.mpf(1)
            out = []
            for j, v in enumerate(gf.values):
                if j:
                    qj *= q
                    qf *= 1 - qj
                out.append((v - gf.limit0) * qj / qf)
            return out

    def taylor_log_bound(self, R: float, digits: float) -> np.ndarray:
        """ln of B_m = sum_j |d_j| |e_{m-j}| R^m, where e are the coefficients
        of (qz;q)_inf; B_m bounds the m-th Taylor term of g - f(0) on |z| = R."""
        q = self.q
        lq = math.log(q)
        ld = np.array([float(mpmath.log(abs(c))) if c != 0 else -np.inf for c in self.d_mp])
        le = [0.0]
        lqf = 0.0
        i = 0
        cut = -(digits + 20) * math.log(10) + (ld.max(initial=-np.inf) if np.isfinite(ld).any() else 0)
        while True:
            i += 1
            lqf += math.log1p(-q ** i)
            le.append(i * (i + 1) / 2 * lq - lqf)
            if le[-1] + i * math.log(R) < cut and i * lq + math.log(R) < 0:
                break
        le = np.array(le)
        M = len(ld) + len(le) - 1
        out = np.full(M, -np.inf)
        for j in np.flatnonzero(np.isfinite(ld)):
            out[j:j + len(le)] = np.logaddexp(out[j:j + len(le)], ld[j] + le)
        return out + np.arange(M) * math.log(R)

    def on_circle_mp(self, R: float, n: int, dps: int):
        """(z_i, g(z_i)) at z_i = R e^{2 pi i/n}, as mpc at ``dps`` digits."""
        key = (R, n, dps)
        if key not in self._circles:
            with mpmath.workdps(dps):
                q = mpmath.mpf(self.q)
                L = self.gf.limit0
                d = [+c for c in self.d_mp]
                # (qz;q)_inf by its Euler series, whose coefficients
                # (-1)^i q^{i(i+1)/2}/(q;q)_i fall off like q^{i^2/2}
                tiny = mpmath.mpf(10) ** (-dps)
                e = [mpmath.mpf(1)]
                qi = mpmath.mpf(1)
                while True:
                    qi *= q
                    e.append(-e[-1] * qi / (1 - qi))
                    if abs(e[-1]) * mpmath.mpf(R) ** len(e) < tiny and qi * R < 1:
                        break
                pts = []
                for i in range(n):
                    z = mpmath.mpf(R) * mpmath.expjpi(mpmath.mpf(2 * i) / n)
                    poly = mpmath.mpc(0)
                    for c in reversed(d):
                        poly = poly * z + c
                    prod = mpmath.mpc(0)
                    for c in reversed(e):
                        prod = prod * z + c
                    pts.append((z, L + prod * poly))
            self._circles[key] = pts
        return self._circles[key]


def g_eval(gf: GridFunction, z, ctx: QContext) -> complex:
    """g(z) = (qz;q)_inf rho(z) for |z| < 1/q."""
    z = complex(z)
    if abs(z) >= 1.0 / ctx.q:
        raise DomainError("g is evaluated through rho, which needs |z| < 1/q")
    return complex(GFunction(gf, ctx)(np.array([z]))[0])


# --- divided differences ---------------------------------------------------

def _geometric_nodes(k, q):
    return [mpmath.mpf(q) ** j for j in range(k + 1)]


def _cancellation_digits(nodes_f: np.ndarray) -> float:
    """log10 of max_j 1/prod_{i != j} |x_j - x_i|, the weight blow-up."""
    worst = 0.0
    for j in range(len(nodes_f)):
        diffs = np.delete(nodes_f[j] - nodes_f, j)
        worst = max(worst, -np.sum(np.log10(np.abs(diffs))))
    return worst


def _check_order(k, ctx):
    if k > ctx.max_divdiff_order:
        raise PrecisionError(
            f"divided difference of order {k} exceeds the cap {ctx.max_divdiff_order}; "
            f"the node weights reach about 10^{k * (k - 1) / 2 * -math.log10(ctx.q):.0f}")
    if k > STANDARD_MAX_ORDER and not ctx.extended:
        raise PrecisionError(
            f"order {k} > {STANDARD_MAX_ORDER} cancels away all double-precision digits "
            "(weights grow like q^(-k(k-1)/2)); use the extended tier")


def _work_dps(ctx, nodes_f, values):
    scale = max((abs(float(v)) for v in values), default=1.0)
    lift = math.log10(scale) if scale > 0 else 0.0
    return ctx.dps + int(_cancellation_digits(nodes_f) + max(lift, 0.0)) + 10


def newton_table(values, nodes, dps: int):
    """[f[x_0], f[x_0;x_1], ..., f[x_0..x_n]] by the first-order recursion."""
    with mpmath.workdps(dps):
        col = [mpmath.mpmathify(v) for v in values]
        xs = [mpmath.mpmathify(x) for x in nodes]
        out = [col[0]]
        for order in range(1, len(col)):
            col = [(col[i + 1] - col[i]) / (xs[i + order] - xs[i]) for i in range(len(col) - 1)]
            out.append(col[0])
        return out


def divdiff_recursive(values, ctx: QContext, nodes=None):
    """g[x_0; ...; x_k] from the divided-difference table.

    ``nodes`` defaults to 1, q, ..., q^k.  In the standard tier the table is
    run in double precision; the extended tier adds as many digits as the
    node configuration can cancel.
    """
    k = len(values) - 1
    if k < 0:
        raise DomainError("need at least one node value")
    _check_order(k, ctx)
    if nodes is None:
        nodes_f = ctx.q ** np.arange(k + 1, dtype=float)
    else:
        if len(nodes) != k + 1:
            raise DomainError("one node per value is required")
        nodes_f = np.array([float(x) for x in nodes])
        if len(set(nodes_f.tolist())) != k + 1:
            raise DomainError("nodes must be distinct")
    if not ctx.extended:
        col = np.array([float(v) for v in values])
        xs = nodes_f
        for order in range(1, k + 1):
            col = (col[1:] - col[:-1]) / (xs[order:] - xs[:-order])
        return float(col[0])
    dps = _work_dps(ctx, nodes_f, values)
    with mpmath.workdps(dps):
        xs = _geometric_nodes(k, ctx.q) if nodes is None else [mpmath.mpmathify(x) for x in nodes]
        return newton_table(values, xs, dps)[-1]


def explicit_weights(k: int, q, dps: int):
    """w_j with g[1..q^k] = sum_j w_j g(q^j):
    w_j = (-1)^j / (q^{j(j-1)/2} (q;q)_j q^{j(k-j)} (q;q)_{k-j})."""
    with mpmath.workdps(dps):
        q = mpmath.mpf(q)
        qf = [mpmath.mpf(1)]
        for i in range(1, k + 1):
            qf.append(qf[-1] * (1 - q ** i))
        return [(-1) ** j / (q ** (j * (j - 1) // 2 + j * (k - j)) * qf[j] * qf[k - j])
                for j in range(k + 1)]


def divdiff_explicit(k: int, values, ctx: QContext):
    """g[1; q; ...; q^k] as the closed-form weighted node sum (compensated)."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if len(values) < k + 1:
        raise DomainError(f"need {k + 1} node values")
    _check_order(k, ctx)
    vals = values[: k + 1]
    if not ctx.extended:
        lqf = log_qfactorials(ctx.q, k)
        lq = math.log(ctx.q)
        terms = []
        for j in range(k + 1):
            logw = -(j * (j - 1) / 2 + j * (k - j)) * lq - lqf[j] - lqf[k - j]
            terms.append((-1) ** j * math.exp(logw) * float(vals[j]))
        return math.fsum(terms)
    dps = _work_dps(ctx, ctx.q ** np.arange(k + 1, dtype=float), vals)
    w = explicit_weights(k, ctx.q, dps)
    with mpmath.workdps(dps):
        return mpmath.fsum(wj * mpmath.mpmathify(v) for wj, v in zip(w, vals))


def divdiff_contour(g_vec, k: int, R: float, n_quad: int | None = None,
                    ctx: QContext | None = None):
    """(1/2 pi i) contour integral of g(z) dz / prod_{j<=k} (z - q^j) over |z| = R.

    Trapezoidal rule in the angle; spectrally accurate since the integrand
    is smooth and periodic on the circle.  Standard tier: float values of
    ``g_vec`` at 4096 angles, accurate to ~1e-16 of max|g| absolutely.  The
    extended tier needs a :class:`GFunction`; it evaluates g in mpmath with
    enough angles and digits that small high-order differences keep their
    relative accuracy.  Returns complex (standard) or mpc (extended).
    The extended angle count and digits come from :func:`_contour_plan`.
    """
    if ctx is None:
        raise DomainError("a QContext is required")
    if not R > 1.0:
        raise DomainError("contour radius must exceed 1 to enclose the nodes 1, q, ..., q^k")
    if k < 0 or (n_quad is not None and n_quad < 1):
        raise DomainError("k must be nonnegative and n_quad positive")
    if ctx.extended:
        if not isinstance(g_vec, GFunction):
            raise DomainError("the extended contour route needs a GFunction")
        return _divdiff_contour_mp(g_vec, k, R, n_quad)
    n = CONTOUR_NODES if n_quad is None else n_quad
    theta = 2 * np.pi * np.arange(n) / n
    z = R * np.exp(1j * theta)
    den = np.ones_like(z)
    for j in range(k + 1):
        den = den * (z - ctx.q ** j)
    # dz = i z dtheta cancels the 1/(2 pi i)
    return complex(np.mean(np.asarray(g_vec(z)) * z / den))


CONTOUR_DIGITS = 36
EXTENDED_CONTOUR_RADIUS = 2.0


PLAN_MIN_ORDER = 24


def _contour_plan(g: GFunction, R: float, k: int, digits: float = CONTOUR_DIGITS):
    """(angles, working digits) for the multiprecision trapezoidal rule.

    Inside the circle the kernel 1/prod_{j<=k}(z - q^j) has Laurent
    coefficients below C(l+k, k) R^-l, which alias at l = n.  Outside, g is
    entire for constant-tail data and the aliasing at index n is bounded by
    the Taylor terms B_m, m >= n, of g on |z| = R (times at most 2^{k+1}).
    The plan is made for max(k, 24) so one set of circle values serves all
    low orders.
    """
    k = max(k, PLAN_MIN_ORDER)
    goal = -(digits + (k + 1) * math.log10(2)) * math.log(10)
    logB = g.taylor_log_bound(R, digits)
    scale = max(abs(g.L), sup_norm(g.gf), 1e-300)
    over = np.flatnonzero(logB > math.log(scale) + goal)
    n_out = int(over[-1]) + 1 if len(over) else 0
    n_in = 1
    while math.lgamma(n_in + k + 1) - math.lgamma(k + 1) - math.lgamma(n_in + 1) \
            - n_in * math.log(R) > goal:
        n_in += 1
    top = max(float(logB.max(initial=-np.inf)), math.log(scale))
    dps = math.ceil(digits + 10 + max(top, 0.0) / math.log(10))
    return max(n_in, n_out) + 8, dps


def _divdiff_contour_mp(g: GFunction, k: int, R: float, n_quad):
    n_plan, dps = _contour_plan(g, R, k)
    pts = g.on_circle_mp(float(R), n_plan if n_quad is None else n_quad, dps)
    with mpmath.workdps(dps):
        nodes = [mpmath.mpf(g.q) ** j for j in range(k + 1)]
        acc = mpmath.mpc(0)
        for z, gz in pts:
            den = mpmath.mpc(1)
            for x in nodes:
                den *= z - x
            acc += gz * z / den
        return acc / len(pts)


def contour_radius(gf: GridFunction, ctx: QContext) -> float:
    """Circle radius for divdiff_contour.

    Float sums lose digits in proportion to max|g| on the circle, so the
    standard tier hugs the nodes: min(1.3, 0.9 R_hat).  The extended tier
    pays for size with working digits and takes a wider circle, which needs
    far fewer angles.
    """
    if ctx.extended:
        return EXTENDED_CONTOUR_RADIUS
    return min(1.3, 0.9 * rho_coeffs(gf, ctx).radius_estimate)


# --- Taylor coefficients ---------------------------------------------------

def taylor_order(ctx: QContext, r_max: float, digits: float = 60.0) -> int:
    """Truncation order for sum c_k z^k on |z| <= r_max.

    |c_k| r^k peaks near k* = ln r / ln(1/q) and falls like q^{(k-k*)^2/2}
    beyond, so ``digits`` decimal digits of decay need sqrt(2 digits/log10(1/q))
    more terms.
    """
    lq10 = -math.log10(ctx.q)
    k_star = max(math.log(max(r_max, 1.0)) / -math.log(ctx.q), 0.0)
    return max(4, math.ceil(k_star + math.sqrt(2 * digits / lq10)) + 2)


@dataclass(frozen=True)
class PowerSeriesRep:
    q: float
    coeffs: tuple          # c_k as mpf
    errors: tuple          # error estimates for c_k
    divdiffs: tuple        # g[1..q^k]
    divdiff_errors: tuple
    dps: int
    tier: str = "extended"

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    @cached_property
    def coeffs_f(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    @cached_property
    def errors_f(self) -> np.ndarray:
        return np.array([float(e) for e in self.errors])

    @cached_property
    def log_abs(self) -> np.ndarray:
        with mpmath.workdps(30):
            return np.array([float(mpmath.log(abs(c))) if c != 0 else -math.inf
                             for c in self.coeffs])

    @cached_property
    def signs(self) -> np.ndarray:
        return np.array([float(mpmath.sign(c)) for c in self.coeffs])


def _taylor_dps(gf, K, ctx, r_max):
    lq10 = -math.log10(ctx.q)
    need = K * (K - 1) / 2 * lq10
    if r_max is not None and r_max > 1:
        need = max(need, K * math.log10(r_max))
    G = max(sup_norm(gf), 1e-300)
    lift = math.log10(G) - 2 * math.log10(qq_inf(ctx.q))
    return ctx.dps + int(need + max(lift, 0.0)) + 10


def taylor_coeffs(gf: GridFunction, K: int, ctx: QContext, r_max: float | None = None) -> PowerSeriesRep:
    """c_0..c_K with per-coefficient error estimates.

    Both divided-difference routes run in mpmath at a precision that covers
    the cancellation (and, given ``r_max``, the growth of r^K); the error
    estimate is their discrepancy plus a rounding bound for the node sum.
    """
    if K < 1:
        raise DomainError("K must be at least 1")
    _check_order(K, ctx.replace(precision_tier="extended"))
    dps = _taylor_dps(gf, K, ctx, r_max)
    nodes_vals = coeff_A_mp(gf, K, dps)
    with mpmath.workdps(dps):
        q = mpmath.mpf(ctx.q)
        table = newton_table(nodes_vals, _geometric_nodes(K, ctx.q), dps)
        ulp = mpmath.mpf(10) ** (-(dps - 3))
        coeffs, errs, dds, dd_errs = [], [], [], []
        for k in range(K + 1):
            w = explicit_weights(k, ctx.q, dps)
            terms = [wj * v for wj, v in zip(w, nodes_vals)]
            dd = mpmath.fsum(terms)
            dd_err = abs(dd - table[k]) + ulp * mpmath.fsum(abs(t) for t in terms)
            factor = (-1) ** k * q ** (k * (k - 1) // 2)
            dds.append(dd)
            dd_errs.append(dd_err)
            coeffs.append(factor * dd)
            errs.append(abs(factor) * dd_err)
    return PowerSeriesRep(ctx.q, tuple(coeffs), tuple(errs), tuple(dds), tuple(dd_errs), dps)


def taylor_series_for(gf: GridFunction, ctx: QContext, r_max: float) -> PowerSeriesRep:
    """Taylor coefficients sized to evaluate on |z| <= r_max."""
    return taylor_coeffs(gf, taylor_order(ctx, r_max), ctx, r_max=r_max)


def _scaled_terms(series: PowerSeriesRep, r: float):
    """t_k = c_k r^k / exp(m) with m = max_k ln|c_k r^k|; returns (t, m)."""
    logs = series.log_abs + np.arange(series.K + 1) * math.log(r)
    m = float(np.max(logs))
    return series.signs * np.exp(logs - m), m


def eval_taylor_scaled(series: PowerSeriesRep, z):
    """(sum c_k z^k) / exp(s) and s, with s the log of the largest |c_k| |z|^k."""
    z = complex(z)
    r = abs(z)
    if r == 0:
        return complex(series.coeffs_f[0]), 0.0
    t, m = _scaled_terms(series, r)
    phase = np.exp(1j * cmath_phase(z) * np.arange(series.K + 1))
    s = t * phase
    return complex(math.fsum(s.real), math.fsum(s.imag)), m


def cmath_phase(z: complex) -> float:
    return math.atan2(z.imag, z.real)


def eval_taylor(series: PowerSeriesRep, z) -> complex:
    """sum_k c_k z^k; scaled internally, OverflowError if the value itself overflows."""
    z = complex(z)
    if abs(z) <= 1.0:
        acc = 0j
        for c in reversed(series.coeffs_f):
            acc = acc * z + c
        return acc
    S, m = eval_taylor_scaled(series, z)
    if S == 0:
        return 0j
    if math.log(abs(S)) + m > 709.0:
        raise OverflowError("value exceeds double range")
    return S * math.exp(m)


class TaylorEvaluator:
    """``evaluator(r, thetas)`` -> (F(r e^{i theta}) / exp(s), s) from the Taylor series."""

    def __init__(self, series: PowerSeriesRep):
        self.series = series
        self._k = np.arange(series.K + 1)

    def __call__(self, r: float, thetas):
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        t, m = _scaled_terms(self.series, r)
        return np.exp(1j * np.outer(thetas, self._k)) @ t, m


# --- decay of the divided differences --------------------------------------

@dataclass(frozen=True)
class DecayReport:
    lam: float
    window: tuple               # reliable k values used
    scaled: np.ndarray          # |g[1..q^k]| q^{-lam k} on the window
    c_star: float
    slope: float                # d/dk of ln(scaled) over the later half of the window
    bounded: bool


def decay_check(series: PowerSeriesRep, lam: float, ctx: QContext,
                slope_tol: float | None = None) -> DecayReport:
    """Is |g[1..q^k]| q^{-lam k} bounded over the reliable window?

    A coefficient is reliable when its error estimate is below 10% of its
    magnitude.  Boundedness is read off the least-squares slope of the log
    over the later half of the window: growth at any positive exponent
    margin eps shows up as a slope of eps ln(1/q) per step.
    """
    if slope_tol is None:
        slope_tol = 0.05 * -math.log(ctx.q)
    ks, vals = [], []
    with mpmath.workdps(30):
        for k, (dd, err) in enumerate(zip(series.divdiffs, series.divdiff_errors)):
            if dd != 0 and err < abs(dd) / 10:
                ks.append(k)
                vals.append(float(mpmath.log(abs(dd))) - lam * k * math.log(ctx.q))
    vals = np.array(vals)
    if len(ks) == 0:
        return DecayReport(lam, (), vals, 0.0, 0.0, True)
    c_star = float(np.exp(vals.max()))
    half = len(ks) // 2
    tail_k = np.array(ks[half:], dtype=float)
    tail_v = vals[half:]
    slope = float(np.polyfit(tail_k, tail_v, 1)[0]) if len(tail_k) >= 2 else 0.0
    return DecayReport(lam, tuple(ks), np.exp(vals), c_star, slope, slope <= slope_tol)
