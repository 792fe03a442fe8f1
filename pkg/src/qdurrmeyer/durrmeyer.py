"""The limit q-Durrmeyer operator: basis, coefficients, values on [0,1]
and the entire continuation.

Coefficients come in two independent routes: the node-sum form (with the
constant tail of the node data summed in closed form) and the Jackson
q-integral form built from the basis functions.  The entire continuation
is the double series in (z;q)_{n+j}; summing it along anti-diagonals
m = j + n turns it into sum_m e_m (z;q)_m with e = a * b a plain
convolution, which is how it is evaluated here.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .funcspace import GridFunction, sup_norm
from .qcore import (
    ConvergenceError,
    DomainError,
    PrecisionError,
    QContext,
    TruncationReport,
    jackson_qintegral,
    log_qfactorials,
    log_qpoch_neg,
    neg_q_inf,
    qfactorials_mp,
    qpoch_inf,
    qpoch_inf_mp,
    qq_inf,
)

SCALE_THRESHOLD = 1e2


@dataclass(frozen=True)
class CoefficientSequence:
    q: float
    coeffs: np.ndarray
    reports: tuple


def basis_p(k: int, x: float, ctx: QContext) -> float:
    """p_k(x) = (x;q)_inf x^k / (q;q)_k on [0,1]."""
    if not 0.0 <= x <= 1.0:
        raise DomainError("basis functions are defined on [0,1]")
    if k < 0:
        raise DomainError("k must be nonnegative")
    if x == 1.0:
        return 0.0
    head = qpoch_inf(x, ctx)[0]
    lqf = log_qfactorials(ctx.q, k)[k]
    if x == 0.0:
        return head if k == 0 else 0.0
    return head * math.exp(k * math.log(x) - lqf)


def coeff_vector(gf: GridFunction, K: int, ctx: QContext) -> np.ndarray:
    """A_0..A_K in double precision.

    A_k = f(0) + (q^{k+1};q)_inf sum_{j<=J} (f(q^j) - f(0)) q^{(k+1)j} / (q;q)_j;
    the f(0) part is the constant tail of the node sum, added in closed form
    through sum_j q^{(k+1)j}/(q;q)_j = 1/(q^{k+1};q)_inf.
    """
    q = ctx.q
    J = gf.J
    L = gf.limit0_f
    d = gf.values_f - L
    lqf = np.array(log_qfactorials(q, max(J, K)))
    ks = np.arange(K + 1)
    js = np.arange(J + 1)
    logw = np.outer(ks + 1, js) * math.log(q) - lqf[js]
    s = np.exp(logw) @ d
    tail_prod = np.exp(math.log(qq_inf(q)) - lqf[ks])
    return L + tail_prod * s


def coeff_A(k: int, gf: GridFunction, ctx: QContext) -> float:
    """The operator coefficient A_k(f) from the node values."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return float(coeff_vector(gf, k, ctx)[k])


def coefficient_sequence(gf: GridFunction, K: int, ctx: QContext) -> CoefficientSequence:
    A = coeff_vector(gf, K, ctx)
    # the node sum is finite once the tail is in closed form; what remains is
    # the truncation of (q^{k+1};q)_inf, below eps_term relative
    reports = tuple(TruncationReport(gf.J + 1, ctx.eps_term * abs(a), True) for a in A)
    return CoefficientSequence(ctx.q, A, reports)


def coeff_A_mp(gf: GridFunction, K: int, dps: int) -> list:
    """A_0..A_K as mpf at ``dps`` digits (same closed-form tail as coeff_vector)."""
    with mpmath.workdps(dps):
        q = mpmath.mpf(gf.q)
        J = gf.J
        qf = qfactorials_mp(q, max(J, K))
        qinf = qpoch_inf_mp(q, q)
        L = gf.limit0
        c = [(gf.values[j] - L) / qf[j] for j in range(J + 1)]
        out = []
        x = q
        for k in range(K + 1):
            acc = mpmath.mpf(0)
            for cj in reversed(c):
                acc = acc * x + cj
            out.append(L + qinf / qf[k] * acc)
            x *= q
        return out


def coeff_A_qintegral(k: int, gf: GridFunction, ctx: QContext) -> float:
    """A_k(f) = q^{-k}/(1-q) * int_0^1 f(t) p_k(qt) d_q t, summed node by node."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    q = ctx.q
    fe = gf.evaluator()
    # p_k(qt) <= q^k/(q;q)_k on [0,1]
    bound = sup_norm(gf) * math.exp(k * math.log(q) - log_qfactorials(q, k)[k])

    def integrand(t):
        return fe(t) * basis_p(k, q * t, ctx)

    total = jackson_qintegral(integrand, 1.0, ctx, bound=bound)
    return total * q ** (-k) / (1.0 - q)


def eval_interval(gf: GridFunction, x: float, ctx: QContext) -> float:
    """(D f)(x) on [0,1]: sum_k A_k p_k(x) for x < 1 and f(1) at x = 1.

    Summed as f(1) + sum_k (A_k - f(1)) p_k(x), which is the same series by
    the partition of unity but converges geometrically in q uniformly in x,
    so x close to 1 costs nothing extra.
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError("x must lie in [0,1]")
    v0 = float(gf.values[0])
    if x == 1.0:
        return v0
    q = ctx.q
    if x == 0.0:
        return float(coeff_vector(gf, 0, ctx)[0])
    # A_k - f(1) = g(q^k) - g(0), and |rho_j| <= sup q^j/(q;q)_inf gives
    # |A_k - f(1)| <= sup q^{k+1} / ((q;q)_inf (1-q)); the p_k sum to at most 1
    sup = max(sup_norm(gf), 1e-300)
    K = max(1, math.ceil(math.log(ctx.eps_tail * qq_inf(q) * (1 - q) / (q * sup)) / math.log(q)))
    if K > ctx.max_terms:
        raise ConvergenceError(f"basis series at x={x} needs {K} terms")
    A = coeff_vector(gf, K, ctx) - v0
    ks = np.arange(1, K + 1)
    steps = x / (1.0 - q ** ks)
    p = np.empty(K + 1)
    p[0] = qpoch_inf(x, ctx)[0]
    p[1:] = p[0] * np.cumprod(steps)
    return v0 + math.fsum(A * p)


# --- entire continuation ---------------------------------------------------

def _outer_cut(gf: GridFunction, ctx: QContext) -> int:
    # sum_{j>J'} |a_j| * sum_n |b_n| <= sup (-q;q)_inf/(q;q)_inf q^{J'+1}/(1-q)
    q = ctx.q
    c = neg_q_inf(q) / qq_inf(q) / (1.0 - q)
    jcut = math.ceil(math.log(ctx.eps_term / c) / math.log(q))
    return max(gf.J, jcut)


def _inner_cut(ctx: QContext) -> int:
    q = ctx.q
    lq = math.log(q)
    lqf = 0.0
    n = 0
    while True:
        n += 1
        lqf += math.log1p(-q ** n)
        if n * (n + 1) / 2 * lq - lqf < math.log(ctx.eps_term * qq_inf(q)):
            return n


def entire_coeffs(gf: GridFunction, ctx: QContext) -> np.ndarray:
    """e_m = sum_{j+n=m} a_j b_n with a_j = f(q^j) q^j/(q;q)_j and
    b_n = (-1)^n q^{n(n+1)/2}/(q;q)_n, so that D f(z) = sum_m e_m (z;q)_m."""
    return _entire_coeffs_with_mass(gf, ctx)[0]


def _entire_coeffs_with_mass(gf: GridFunction, ctx: QContext):
    """(e, |a| * |b|); the second bounds the rounding error of each e_m."""
    q = ctx.q
    J = _outer_cut(gf, ctx)
    N = _inner_cut(ctx)
    lq = math.log(q)
    lqf = np.array(log_qfactorials(q, max(J, N)))
    js = np.arange(J + 1)
    v = np.full(J + 1, gf.limit0_f)
    v[: gf.J + 1] = gf.values_f
    a = v * np.exp(js * lq - lqf[js])
    ns = np.arange(N + 1)
    b = np.where(ns % 2 == 0, 1.0, -1.0) * np.exp(ns * (ns + 1) / 2 * lq - lqf[ns])
    return np.convolve(a, b), np.convolve(np.abs(a), np.abs(b))


@lru_cache(maxsize=64)
def _entire_coeffs_mp(gf: GridFunction, ctx: QContext, dps: int):
    with mpmath.workdps(dps):
        q = mpmath.mpf(ctx.q)
        lq10 = -math.log10(ctx.q)
        c = neg_q_inf(ctx.q) / qq_inf(ctx.q) / (1.0 - ctx.q)
        J = max(gf.J, math.ceil((dps + math.log10(c)) / lq10))
        N = math.ceil(math.sqrt(2 * (dps + 2) / lq10)) + 2
        qf = qfactorials_mp(q, max(J, N))
        a = [gf.node(j) * q ** j / qf[j] for j in range(J + 1)]
        b = [(-1) ** n * q ** (n * (n + 1) // 2) / qf[n] for n in range(N + 1)]
        e = [mpmath.mpf(0)] * (J + N + 1)
        for j, aj in enumerate(a):
            for n, bn in enumerate(b):
                e[j + n] += aj * bn
        return tuple(e)


def _pochhammer_prefix(z, q: float, M: int) -> np.ndarray:
    """[(z;q)_0, ..., (z;q)_M]."""
    out = np.ones(M + 1, dtype=complex)
    out[1:] = np.cumprod(1.0 - z * q ** np.arange(M))
    return out


def _scaled_prefix(zs: np.ndarray, r: float, q: float, M: int) -> np.ndarray:
    """(z;q)_m / (-r;q)_inf for m = 0..M and every z in ``zs`` (|z| = r).

    Every factor of the ratio has modulus <= 1, so nothing overflows.
    """
    tail_len = M
    while r * q ** tail_len >= 1e-18 * (1.0 - q):
        tail_len += 1
    logs = np.log1p(r * q ** np.arange(tail_len + 1))
    suffix = np.cumsum(logs[::-1])[::-1]  # suffix[m] = ln(-r q^m;q)_inf
    w = np.exp(-suffix[: M + 1])
    qi = q ** np.arange(M)
    ratios = (1.0 - np.outer(zs, qi)) / (1.0 + r * qi)
    u = np.ones((len(zs), M + 1), dtype=complex)
    u[:, 1:] = np.cumprod(ratios, axis=1)
    return u * w


def eval_entire_scaled(gf: GridFunction, z, ctx: QContext):
    """(D f)(z) / (-|z|;q)_inf together with ln (-|z|;q)_inf."""
    z = complex(z)
    r = abs(z)
    log_scale = log_qpoch_neg(r, ctx)
    if ctx.extended:
        val = _eval_entire_mp(gf, z, ctx, log_scale)
        with mpmath.workdps(30):
            return complex(val / mpmath.exp(log_scale)), log_scale
    e, mass = _entire_coeffs_with_mass(gf, ctx)
    pref = _scaled_prefix(np.array([z]), r, ctx.q, len(e) - 1)[0]
    weight = np.abs(pref) @ mass
    if weight == 0.0:
        raise PrecisionError(f"scaled series underflows at |z|={r:.3g}; the value is below "
                             "exp(-745) relative to (-|z|;q)_inf")
    S = _checked_sum(pref * e, weight, _truncation_floor(gf, ctx))
    if S is None:
        with mpmath.workdps(30):
            return complex(_eval_entire_mp(gf, z, ctx, log_scale) / mpmath.exp(log_scale)), log_scale
    return S, log_scale


# digits the float sum may cancel before the mp sum takes over
CANCELLATION_LIMIT = 1e6


def _truncation_floor(gf, ctx):
    # both cuts leave at most ~3 sup eps_term in units of (-|z|;q)_inf; a sum
    # not well clear of that is mostly truncation error
    return CANCELLATION_LIMIT * 3.0 * sup_norm(gf) * ctx.eps_term


def _checked_sum(terms, mass, floor=0.0):
    """Compensated sum of complex terms, or None if it cannot be trusted.

    ``mass`` is the sum of the moduli of all products entering the terms,
    counting the cancellation already inside each coefficient; ``floor`` is
    the smallest modulus the truncated series resolves.
    """
    S = complex(math.fsum(terms.real), math.fsum(terms.imag))
    if mass > CANCELLATION_LIMIT * abs(S) or abs(S) < floor:
        return None
    return S


MAX_MP_DPS = 20000


def _eval_entire_mp(gf, z, ctx, log_scale):
    """Multiprecision sum.  The truncation error is ~10^-dps in units of
    (-|z|;q)_inf, so the working digits follow how far the value sits below
    that envelope; one retry corrects a first guess that assumed |value| >= 1."""
    scale10 = max(log_scale, 0.0) / math.log(10)
    dps = ctx.dps + math.ceil(scale10) + 10
    for _ in range(3):
        val = _entire_sum_mp(gf, z, ctx, dps)
        if val == 0:
            return val
        need = ctx.dps + 10 + math.ceil(scale10 - float(mpmath.log10(abs(val))))
        if dps >= need:
            return val
        if need > MAX_MP_DPS:
            raise PrecisionError(f"value at z={z} lies {need} digits below its envelope")
        dps = need + 10
    return val


def _entire_sum_mp(gf, z, ctx, dps):
    e = _entire_coeffs_mp(gf, ctx, dps)
    with mpmath.workdps(dps):
        q = mpmath.mpf(ctx.q)
        zz = mpmath.mpc(z)
        acc = mpmath.mpc(0)
        poch = mpmath.mpc(1)
        qm = mpmath.mpf(1)
        for em in e:
            acc += em * poch
            poch *= 1 - zz * qm
            qm *= q
        return +acc


def eval_entire(gf: GridFunction, z, ctx: QContext) -> complex:
    """Value of the entire continuation of D f at complex z.

    Uses the unscaled sum for |z| <= 1e2 and the (-|z|;q)_inf-scaled sum
    beyond, switching to mpmath when the float sum cancels more than six
    digits (typical on the negative axis for q near 1).  Raises
    OverflowError if the result itself is not representable (use
    :func:`eval_entire_logpolar` then).
    """
    z = complex(z)
    if ctx.extended:
        S, log_scale = eval_entire_scaled(gf, z, ctx)
        return _unscale(S, log_scale)
    if abs(z) <= SCALE_THRESHOLD:
        e, mass = _entire_coeffs_with_mass(gf, ctx)
        pref = _pochhammer_prefix(z, ctx.q, len(e) - 1)
        floor = _truncation_floor(gf, ctx) * math.exp(log_qpoch_neg(abs(z), ctx))
        S = _checked_sum(pref * e, float(np.abs(pref) @ mass), floor)
        if S is not None:
            return S
    S, log_scale = eval_entire_scaled(gf, z, ctx)
    return _unscale(S, log_scale)


def _unscale(S: complex, log_scale: float) -> complex:
    if S == 0:
        return 0j
    logmag = math.log(abs(S)) + log_scale
    if logmag > 709.0:
        raise OverflowError("value exceeds double range; use eval_entire_logpolar")
    return S * math.exp(log_scale)


def eval_entire_logpolar(gf: GridFunction, z, ctx: QContext):
    """(ln|D f(z)|, arg D f(z)) without forming the unscaled value."""
    S, log_scale = eval_entire_scaled(gf, z, ctx)
    if S == 0:
        return -math.inf, 0.0
    return math.log(abs(S)) + log_scale, cmath.phase(S)


class EntireEvaluator:
    """Scaled evaluator for max-modulus sampling built on the double series.

    ``evaluator(r, thetas)`` returns F(r e^{i theta}) / exp(log_scale) and
    log_scale = ln(-r;q)_inf.  Plain float: the scaled values are accurate
    to ~eps_term absolutely, so radii where the function sits far below its
    envelope need the Taylor evaluator instead.
    """

    def __init__(self, gf: GridFunction, ctx: QContext):
        self.gf = gf
        self.ctx = ctx
        self.e = entire_coeffs(gf, ctx)

    def __call__(self, r: float, thetas):
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        zs = r * np.exp(1j * thetas)
        pref = _scaled_prefix(zs, r, self.ctx.q, len(self.e) - 1)
        return pref @ self.e, log_qpoch_neg(r, self.ctx)


def tau_entire(z, ctx: QContext) -> complex:
    """tau(z) = (1/(q;q)_inf) sum_n (-1)^n q^{n(n+1)/2} (z;q)_n / (q;q)_n."""
    q = ctx.q
    z = complex(z)
    r = abs(z)
    b = 1.0
    poch = 1.0 + 0j
    bound = 1.0  # |b_n| (-r;q)_n
    terms = []
    n = 0
    while True:
        terms.append(b * poch)
        qn = q ** n
        poch *= 1.0 - z * qn
        nxt_b = -b * qn * q / (1.0 - qn * q)
        nxt_bound = bound * abs(nxt_b / b) * (1.0 + r * qn)
        n += 1
        s = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
        if nxt_bound <= ctx.eps_term * abs(s) and nxt_bound < bound:
            return s / qq_inf(q)
        if n >= ctx.max_terms:
            raise ConvergenceError("tau series exceeded max_terms", partial=s, terms_used=n)
        b, bound = nxt_b, nxt_bound
