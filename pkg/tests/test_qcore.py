import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdurrmeyer.qcore import (ConvergenceError, DomainError, QContext, euler_recip_series,
                              euler_series, jackson_qintegral, log_qpoch_neg, qpoch_finite,
                              qpoch_inf)

qs = st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9, 0.95])


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


# frozen from mpmath.qp at 50 digits
QQ_INF = {0.3: 0.61264815421325654, 0.5: 0.28878809508660242, 0.8: 0.0033680058524231155}


@pytest.mark.parametrize("q", sorted(QQ_INF))
def test_qq_inf_reference(q):
    val, rep = qpoch_inf(q, QContext(q))
    assert val == pytest.approx(QQ_INF[q], rel=1e-14)
    assert rep.converged


def test_minus_one_product():
    assert qpoch_inf(-1.0, QContext(0.5))[0] == pytest.approx(4.7684620580627434, rel=1e-14)


def test_finite_products():
    ctx = QContext(0.5)
    assert qpoch_finite(0.3, 0, ctx) == 1.0
    assert qpoch_finite(0.5, 1, ctx) == 0.5
    assert qpoch_finite(0.5, 3, ctx) == pytest.approx(0.5 * 0.75 * 0.875)
    with pytest.raises(DomainError):
        qpoch_finite(0.5, -1, ctx)


@settings(max_examples=60, deadline=None)
@given(q=qs, re=st.floats(-0.95, 0.95), im=st.floats(-0.95, 0.95))
def test_product_matches_mpmath(q, re, im):
    a = complex(re, im)
    with mpmath.workdps(30):
        ref = complex(mpmath.qp(mpmath.mpc(a), q))
    assert rel(qpoch_inf(a, QContext(q))[0], ref) < 1e-13


@settings(max_examples=80, deadline=None)
@given(q=qs, r=st.floats(0, 0.9), t=st.floats(0, 2 * math.pi))
def test_euler_identities(q, r, t):
    z = r * complex(math.cos(t), math.sin(t))
    ctx = QContext(q)
    prod = qpoch_inf(z, ctx)[0]
    assert rel(euler_series(z, ctx), prod) < 1e-12
    assert rel(euler_recip_series(z, ctx), 1 / prod) < 1e-12


def test_euler_series_far_negative():
    ctx = QContext(0.5)
    assert rel(euler_series(-100.0, ctx), qpoch_inf(-100.0, ctx)[0]) < 1e-13


def test_reciprocal_series_domain():
    with pytest.raises(DomainError):
        euler_recip_series(1.0, QContext(0.5))


def test_series_budget_exhausted_keeps_partial():
    ctx = QContext(0.5, max_terms=3)
    with pytest.raises(ConvergenceError) as info:
        euler_series(0.5, ctx)
    assert info.value.partial is not None and info.value.terms_used == 3


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_log_envelope_matches_product(q):
    ctx = QContext(q)
    for r in (0.0, 0.25, 3.0, 500.0):
        assert log_qpoch_neg(r, ctx) == pytest.approx(math.log(qpoch_inf(-r, ctx)[0]), rel=1e-13, abs=1e-15)


def test_log_envelope_beyond_overflow():
    ctx = QContext(0.5)
    with mpmath.workdps(30):
        ref = float(mpmath.log(mpmath.qp(-mpmath.mpf(10) ** 12, 0.5)))
    assert log_qpoch_neg(1e12, ctx) == pytest.approx(ref, rel=1e-13)
    with pytest.raises(DomainError):
        log_qpoch_neg(-1.0, ctx)


def test_jackson_examples():
    ctx = QContext(0.5)
    assert jackson_qintegral(lambda t: 1.0, 1.0, ctx) == pytest.approx(1.0, rel=1e-15)
    # int_0^1 t d_q t = (1-q)/(1-q^2) = 2/3 at q = 1/2
    assert jackson_qintegral(lambda t: t, 1.0, ctx) == pytest.approx(2 / 3, rel=1e-15)
    # endpoint scaling: int_0^a 1 d_q t = a
    assert jackson_qintegral(lambda t: 1.0, 0.25, ctx) == pytest.approx(0.25, rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(q=qs, n=st.integers(0, 8), a=st.floats(0.05, 1.0))
def test_jackson_moments(q, n, a):
    ctx = QContext(q)
    exact = (1 - q) * a ** (n + 1) / (1 - q ** (n + 1))
    assert rel(jackson_qintegral(lambda t: t ** n, a, ctx), exact) < 1e-13


def test_jackson_with_bound_and_domain():
    ctx = QContext(0.3)
    assert jackson_qintegral(lambda t: t * t, 1.0, ctx, bound=1.0) == pytest.approx(0.7 / (1 - 0.027), rel=1e-14)
    with pytest.raises(DomainError):
        jackson_qintegral(lambda t: 1.0, 1.5, ctx)
    with pytest.raises(DomainError):
        jackson_qintegral(lambda t: math.inf, 1.0, ctx)


@pytest.mark.parametrize("bad", [0.0, 1.0, 1.5, -0.2, math.nan, 0.995])
def test_context_rejects_q(bad):
    with pytest.raises(DomainError):
        QContext(bad)


def test_context_message_and_tiers():
    with pytest.raises(DomainError, match=r"q must lie in \(0,1\)"):
        QContext(1.5)
    with pytest.raises(DomainError):
        QContext(0.5, precision_tier="quad")
    with pytest.raises(DomainError):
        QContext(0.5, dps=20)
    ctx = QContext(0.5).replace(precision_tier="extended")
    assert ctx.extended and ctx.q == 0.5
