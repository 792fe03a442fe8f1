"""q-calculus primitives: Pochhammer symbols, the two Euler series, the
Jackson q-integral, and the truncation/precision policy shared by the
rest of the package.

Float routines work in IEEE double ("standard" tier).  The ``*_mp``
helpers evaluate the same objects with mpmath at the caller's working
precision and are what the extended tier is built on.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import mpmath

PRECISION_TIERS = ("standard", "extended")


class QError(Exception):
    """Base class for errors raised by this package."""


class DomainError(QError, ValueError):
    pass


class ConvergenceError(QError, ArithmeticError):
    """A series or product did not converge within ``max_terms``.

    The partial value reached so far is kept on the exception.
    """

    def __init__(self, message, partial=None, terms_used=0):
        super().__init__(message)
        self.partial = partial
        self.terms_used = terms_used


class PrecisionError(QError):
    """The requested computation is ill-conditioned for the precision tier."""


@dataclass(frozen=True)
class QContext:
    """Parameter ``q`` plus the numerical policy for every series and product.

    ``dps`` is the floor on decimal digits used by the extended tier; the
    routines add whatever extra digits the cancellation in a given
    computation requires.
    """

    q: float
    eps_term: float = 1e-17
    eps_tail: float = 1e-16
    max_terms: int = 200_000
    precision_tier: str = "standard"
    dps: int = 40
    max_divdiff_order: int = 400

    def __post_init__(self):
        q = self.q
        if not isinstance(q, (int, float)) or not math.isfinite(q) or not 0.0 < q < 1.0:
            raise DomainError("q must lie in (0,1)")
        if q > 0.99:
            raise DomainError("q must not exceed 0.99 (series lengths grow like 1/(1-q))")
        object.__setattr__(self, "q", float(q))
        if not self.eps_term > 0 or not self.eps_tail > 0:
            raise DomainError("eps_term and eps_tail must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if self.precision_tier not in PRECISION_TIERS:
            raise DomainError(f"precision_tier must be one of {PRECISION_TIERS}")
        if self.dps < 32:
            raise DomainError("extended tier needs at least 32 significant digits")

    def replace(self, **changes) -> "QContext":
        return dataclasses.replace(self, **changes)

    @property
    def extended(self) -> bool:
        return self.precision_tier == "extended"

    @property
    def log_q(self) -> float:
        return math.log(self.q)


@dataclass(frozen=True)
class TruncationReport:
    terms_used: int
    tail_bound: float
    converged: bool


def _report(terms, tail, value, ctx):
    mag = abs(value)
    ok = tail <= ctx.eps_tail * mag if mag > 0 else tail <= ctx.eps_tail
    return TruncationReport(terms, float(tail), bool(ok))


def qpoch_finite(a, n: int, ctx: QContext):
    """(a;q)_n = prod_{j<n} (1 - a q^j); the empty product is 1."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    val = 1.0
    qj = 1.0
    for _ in range(n):
        val *= 1.0 - a * qj
        qj *= ctx.q
    return val


def qpoch_inf(a, ctx: QContext):
    """(a;q)_inf with a TruncationReport.

    Stops at the first j with |a| q^j < eps_term (1-q); what is left of the
    log-product is bounded by |a| q^J / (1-q) with J the first omitted index.
    """
    q = ctx.q
    aa = abs(a)
    if not math.isfinite(aa):
        raise DomainError("a must be finite")
    thresh = ctx.eps_term * (1.0 - q)
    val = 1.0
    qj = 1.0
    j = 0
    while aa * qj >= thresh:
        if j >= ctx.max_terms:
            raise ConvergenceError("(a;q)_inf did not converge", partial=val, terms_used=j)
        val *= 1.0 - a * qj
        qj *= q
        j += 1
    log_tail = aa * qj / (1.0 - q)
    log_tail /= max(1.0 - aa * qj, 0.5)
    return val, _report(j, abs(val) * math.expm1(log_tail), val, ctx)


# the float Euler sums are redone in mpmath past this much cancellation
CANCELLATION_LIMIT = 1e3


def _euler_sum(z, q, alternating, one, eps, max_terms):
    """Terms t_0 = 1, t_{k+1} = t_k * (-q^k z or z) / (1 - q^{k+1}), summed
    until a term is below eps relative and shrinking; returns (sum, mass)."""
    term = one
    terms = [term]
    running = term
    mass = abs(term)
    qk = one  # q^k
    k = 0
    while True:
        nxt = term * ((-qk * z) if alternating else z) / (1 - qk * q)
        k += 1
        qk *= q
        terms.append(nxt)
        running += nxt
        mass += abs(nxt)
        if abs(nxt) <= eps * abs(running) and abs(nxt) < abs(term):
            break
        if k >= max_terms:
            raise ConvergenceError("Euler-type series exceeded max_terms", partial=running, terms_used=k)
        term = nxt
    if isinstance(one, float):
        if isinstance(running, complex):
            return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms)), mass
        return math.fsum(terms), mass
    return mpmath.fsum(terms), mass


def _euler_series_checked(z, ctx, alternating):
    s, mass = _euler_sum(z, ctx.q, alternating, 1.0, ctx.eps_term, ctx.max_terms)
    if mass <= CANCELLATION_LIMIT * abs(s):
        return s
    # the float terms carry ~1e-16 relative error each; cancellation would amplify it
    lost = math.log10(mass / abs(s)) if s != 0 else 300.0
    with mpmath.workdps(25 + math.ceil(lost)):
        zz = mpmath.mpmathify(z)
        val, _ = _euler_sum(zz, mpmath.mpf(ctx.q), alternating, mpmath.mpf(1),
                               mpmath.mpf(ctx.eps_term) / 10, ctx.max_terms)
        return complex(val) if isinstance(z, complex) else float(val)


def euler_series(z, ctx: QContext):
    """sum_k (-1)^k q^{k(k-1)/2} z^k / (q;q)_k, which equals (z;q)_inf."""
    return _euler_series_checked(z, ctx, alternating=True)


def euler_recip_series(z, ctx: QContext):
    """sum_k z^k / (q;q)_k, which equals 1/(z;q)_inf for |z| < 1."""
    if abs(z) >= 1.0:
        raise DomainError("reciprocal Euler series needs |z| < 1")
    return _euler_series_checked(z, ctx, alternating=False)


def log_qpoch_neg(r: float, ctx: QContext) -> float:
    """ln (-r;q)_inf = sum_j ln(1 + r q^j), safe far beyond the overflow of the product."""
    if r < 0:
        raise DomainError("r must be nonnegative")
    if r == 0:
        return 0.0
    q = ctx.q
    thresh = ctx.eps_term * (1.0 - q)
    terms = []
    x = float(r)
    while x >= thresh:
        terms.append(math.log1p(x))
        x *= q
        if len(terms) > ctx.max_terms:
            raise ConvergenceError("log (-r;q)_inf exceeded max_terms", partial=math.fsum(terms))
    # remaining tail is below x/(1-q) < eps_term
    return math.fsum(terms)


def jackson_qintegral(f: Callable[[float], float], a: float, ctx: QContext,
                      bound: Optional[float] = None) -> float:
    """Jackson integral of ``f`` over [0, a]: (1-q) a sum_j q^j f(a q^j).

    The tail after node J is at most a q^{J+1} sup|f|.  ``bound`` supplies
    sup|f|; without it the running maximum of the sampled values is used
    and at least ceil(ln eps_tail / ln q) nodes are visited.
    """
    if not 0.0 < a <= 1.0:
        raise DomainError("integration endpoint must lie in (0,1]")
    q = ctx.q
    min_nodes = math.ceil(math.log(ctx.eps_tail) / math.log(q))
    sup = 0.0 if bound is None else float(bound)
    terms = []
    running = 0.0
    qj = 1.0
    j = 0
    while True:
        fv = f(a * qj)
        if not math.isfinite(fv):
            raise DomainError(f"integrand is not finite at t={a * qj!r}")
        terms.append(qj * fv)
        running += qj * fv
        if bound is None:
            sup = max(sup, abs(fv))
        j += 1
        qj *= q
        if j >= min_nodes or bound is not None:
            tail = a * qj * sup
            if tail <= ctx.eps_tail * max((1.0 - q) * a * abs(running), a * sup):
                return (1.0 - q) * a * math.fsum(terms)
        if j >= ctx.max_terms:
            raise ConvergenceError("q-integral exceeded max_terms",
                                   partial=(1.0 - q) * a * math.fsum(terms), terms_used=j)


@lru_cache(maxsize=256)
def qq_inf(q: float) -> float:
    """(q;q)_inf in double precision (cached)."""
    return qpoch_inf(q, QContext(q))[0]


@lru_cache(maxsize=256)
def neg_q_inf(q: float) -> float:
    """(-q;q)_inf in double precision (cached)."""
    return qpoch_inf(-q, QContext(q))[0]


def log_qfactorials(q: float, n: int):
    """ln (q;q)_j for j = 0..n as a list of floats."""
    out = [0.0] * (n + 1)
    acc = 0.0
    qj = q
    for j in range(1, n + 1):
        acc += math.log1p(-qj)
        out[j] = acc
        qj *= q
    return out


# --- extended precision helpers (caller sets mpmath working precision) ---

def qfactorials_mp(q, n: int):
    """[(q;q)_0, ..., (q;q)_n] as mpf at the current working precision."""
    q = mpmath.mpf(q)
    out = [mpmath.mpf(1)]
    qj = q
    for _ in range(n):
        out.append(out[-1] * (1 - qj))
        qj *= q
    return out


def qpoch_inf_mp(a, q):
    """(a;q)_inf at the current mpmath precision."""
    a = mpmath.mpmathify(a)
    q = mpmath.mpf(q)
    eps = mpmath.eps * (1 - q)
    val = mpmath.mpf(1) if not isinstance(a, mpmath.mpc) else mpmath.mpc(1)
    x = a
    while abs(x) >= eps:
        val *= 1 - x
        x *= q
    return val


def log_qpoch_neg_mp(r, q):
    """ln (-r;q)_inf at the current mpmath precision (r >= 0)."""
    r = mpmath.mpf(r)
    q = mpmath.mpf(q)
    if r == 0:
        return mpmath.mpf(0)
    eps = mpmath.eps * (1 - q)
    s = mpmath.mpf(0)
    x = r
    while x >= eps:
        s += mpmath.log1p(x)
        x *= q
    return s
