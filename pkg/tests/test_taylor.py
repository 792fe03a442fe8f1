import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdurrmeyer.durrmeyer import coeff_A, coeff_A_mp, eval_entire
from qdurrmeyer.extremal import divdiff_closed_form, g_closed_form, make_extremal
from qdurrmeyer.funcspace import sample, sup_norm
from qdurrmeyer.qcore import DomainError, PrecisionError, QContext, qq_inf
from qdurrmeyer.taylor import (GFunction, contour_radius, decay_check, divdiff_contour,
                               divdiff_explicit, divdiff_recursive, eval_taylor, explicit_weights,
                               eval_taylor_scaled, g_eval, rho_coeffs, taylor_coeffs,
                               taylor_order, taylor_series_for)

CTX = QContext(0.5)
EXT = CTX.replace(precision_tier="extended")
CATALOG = ("monomial:0", "monomial:1", "monomial:3", "poly:1,-2,3", "power:0.5",
           "absshift:0.5", "exp", "sharp:2.0")


# --- rho and g ---------------------------------------------------------------

def test_rho_of_constant():
    rho = rho_coeffs(sample("monomial:0", CTX), CTX)
    lqf = np.cumsum(np.log1p(-0.5 ** np.arange(1, 11)))
    assert rho.coeffs[10] == pytest.approx(0.5 ** 10 / math.exp(lqf[-1]), rel=1e-13)
    assert rho.radius_estimate == pytest.approx(2.0, abs=0.01)
    lo, hi = rho.band
    assert lo <= rho.radius_estimate <= hi


def test_rho_radius_examples():
    assert rho_coeffs(sample("power:1.0", CTX), CTX).radius_estimate == pytest.approx(4.0, rel=0.05)
    assert rho_coeffs(sample("sharp:2.0", CTX), CTX).radius_estimate == pytest.approx(2.0, rel=0.01)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("spec", CATALOG)
def test_radius_lower_bound(q, spec):
    ctx = QContext(q)
    assert rho_coeffs(sample(spec, ctx), ctx).radius_estimate >= 1 / q - 0.05


@pytest.mark.parametrize("spec", CATALOG)
def test_rho_coefficient_bound(spec):
    gf = sample(spec, CTX)
    rho = rho_coeffs(gf, CTX, 100)
    j = np.arange(101)
    assert np.all(np.abs(rho.coeffs) <= sup_norm(gf) * 0.5 ** j / qq_inf(0.5) * (1 + 1e-12))


def test_g_examples():
    for spec in CATALOG:
        gf = sample(spec, CTX)
        assert g_eval(gf, 0, CTX) == pytest.approx(float(gf.values[0]), rel=1e-15)
        for k in (0, 1, 4, 9):
            assert g_eval(gf, 0.5 ** k, CTX).real == pytest.approx(coeff_A(k, gf, CTX), rel=1e-13)
    one = sample("monomial:0", CTX)
    for z in (0.3, -1.7, 1.2 + 0.9j):
        assert g_eval(one, z, CTX) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(DomainError):
        g_eval(one, 2.0, CTX)


def test_g_matches_closed_form_for_extremal():
    fam = make_extremal(2.0, CTX, 200)
    for z in (0.0, 1.0, 1.9, -1.9, 1.3j, 1.2 - 1.2j):
        assert abs(g_eval(fam.gf, z, CTX) - g_closed_form(2.0, z, CTX)) <= 1e-10


# --- divided differences ---------------------------------------------------

def test_divdiff_trivial_cases():
    assert divdiff_recursive([3.5], CTX) == 3.5
    assert divdiff_explicit(0, [3.5], CTX) == 3.5
    nodes = 0.5 ** np.arange(3)
    assert divdiff_recursive(list(2 * nodes + 1), CTX) == pytest.approx(0.0, abs=1e-15)


def test_divdiff_first_order_extremal():
    g = [g_closed_form(2.0, 1.0, CTX).real, g_closed_form(2.0, 0.5, CTX).real]
    expect = (g[0] - g[1]) / 0.5
    assert divdiff_recursive(g, CTX) == pytest.approx(expect, rel=1e-15)
    assert divdiff_explicit(1, g, CTX) == pytest.approx(expect, rel=1e-15)


def test_divdiff_of_constant_vanishes():
    for k in (1, 5, 12):
        mass = float(sum(abs(w) for w in explicit_weights(k, 0.5, 40)))
        assert abs(divdiff_explicit(k, [1.0] * (k + 1), CTX)) <= 1e-14 * mass
        assert abs(divdiff_explicit(k, [1.0] * (k + 1), EXT)) <= 1e-20


def test_explicit_matches_recursive_extremal_k10():
    vals = coeff_A_mp(make_extremal(2.0, CTX, 200).gf, 10, 80)
    a = divdiff_explicit(10, vals, EXT)
    b = divdiff_recursive(vals, EXT)
    assert abs(a - b) <= 1e-6 * abs(a)
    assert float(a) == pytest.approx(float(divdiff_closed_form(2.0, 10, CTX)), rel=1e-10)


def test_standard_tier_refuses_high_order():
    with pytest.raises(PrecisionError):
        divdiff_recursive([1.0] * 17, CTX)
    with pytest.raises(PrecisionError):
        divdiff_explicit(16, [1.0] * 17, CTX)
    with pytest.raises(PrecisionError):
        divdiff_recursive([1.0] * 12, EXT.replace(max_divdiff_order=10))


def test_divdiff_symmetric_in_node_order():
    fam = make_extremal(2.0, CTX, 200)
    vals = coeff_A_mp(fam.gf, 12, 80)
    nodes = [mpmath.mpf(0.5) ** j for j in range(13)]
    fwd = divdiff_recursive(vals, EXT, nodes=nodes)
    rev = divdiff_recursive(vals[::-1], EXT, nodes=nodes[::-1])
    assert abs(fwd - rev) <= 1e-10 * abs(fwd)


@settings(max_examples=25, deadline=None)
@given(perm=st.permutations(list(range(8))))
def test_divdiff_symmetry_property(perm):
    nodes = [0.5 ** j for j in range(8)]
    vals = [math.exp(x) for x in nodes]
    base = divdiff_recursive(vals, EXT, nodes=nodes)
    shuffled = divdiff_recursive([vals[i] for i in perm], EXT, nodes=[nodes[i] for i in perm])
    assert abs(base - shuffled) <= 1e-10 * abs(base)


def test_contour_examples():
    fam = make_extremal(2.0, CTX, 200)
    gvec = GFunction(fam.gf, CTX)
    assert divdiff_contour(gvec, 0, 1.3, ctx=CTX) == pytest.approx(g_eval(fam.gf, 1.0, CTX), rel=1e-13)
    rec = divdiff_recursive(coeff_A_mp(fam.gf, 8, 80), EXT)
    assert abs(divdiff_contour(gvec, 8, 1.5, ctx=CTX).real - float(rec)) <= 1e-8 * abs(float(rec))
    # degree k-1 polynomial has vanishing k-th divided difference
    poly = lambda z: 1 + 2 * z - z ** 2 + 0.5 * z ** 3  # noqa: E731
    assert abs(divdiff_contour(poly, 4, 1.3, ctx=CTX)) < 1e-12
    with pytest.raises(DomainError):
        divdiff_contour(gvec, 3, 1.0, ctx=CTX)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("spec", CATALOG)
def test_three_way_agreement(q, spec):
    ctx = QContext(q)
    ext = ctx.replace(precision_tier="extended")
    gf = sample(spec, ctx)
    series = taylor_coeffs(gf, 20, ext)
    gvec = GFunction(gf, ctx)
    R = contour_radius(gf, ext)
    for k in range(21):
        a = float(series.divdiffs[k])
        b = float(divdiff_recursive(coeff_A_mp(gf, k, series.dps), ext))
        c = float(divdiff_contour(gvec, k, R, ctx=ext).real)
        for x, y in ((a, b), (a, c), (b, c)):
            near_zero = max(abs(x), abs(y)) <= 1e-10
            assert abs(x - y) <= (1e-10 if near_zero else 1e-6 * max(abs(x), abs(y))), (k, x, y)


def test_float_contour_is_absolute():
    # float quadrature resolves differences down to ~1e-10 absolutely
    ctx = QContext(0.8)
    gf = sample("exp", ctx)
    gvec = GFunction(gf, ctx)
    R = contour_radius(gf, ctx)
    ref = float(taylor_coeffs(gf, 10, ctx).divdiffs[10])
    assert abs(divdiff_contour(gvec, 10, R, ctx=ctx).real - ref) <= 1e-10
    with pytest.raises(DomainError):
        divdiff_contour(lambda z: z, 3, 2.0, ctx=ctx.replace(precision_tier="extended"))


# --- Taylor coefficients ---------------------------------------------------

def test_taylor_of_constant():
    s = taylor_coeffs(sample("monomial:0", CTX), 20, CTX)
    assert float(s.coeffs[0]) == pytest.approx(1.0, rel=1e-15)
    assert max(abs(float(c)) for c in s.coeffs[1:]) <= 1e-10


def test_taylor_of_identity():
    s = taylor_coeffs(sample("monomial:1", CTX), 20, CTX)
    assert float(s.coeffs[0]) == pytest.approx(0.5, rel=1e-14)
    assert float(s.coeffs[1]) == pytest.approx(0.5, rel=1e-14)
    assert max(abs(float(c)) for c in s.coeffs[2:]) <= 1e-10


@pytest.mark.parametrize("m", range(6))
def test_degree_preserved(m):
    s = taylor_coeffs(sample(f"monomial:{m}", CTX), 20, CTX)
    # what survives above degree m is the truncation of the data at node J, ~q^J
    assert max(abs(float(c)) for c in s.coeffs[m + 1:]) <= 1e-30
    assert max(float(e) for e in s.errors) <= 1e-40
    assert sum(float(c) for c in s.coeffs) == pytest.approx(1.0, rel=1e-12)  # D f(1) = f(1)


def test_taylor_matches_quadrature_oracle():
    # frozen from tests/oracle.py: Cauchy quadrature of the brute-force double series
    ref = [0.288788095086602, 0.0775761901732048, 0.128350264482934, 0.00523878630542589,
           4.65669893815635e-5, 9.69136095349917e-8, 4.88352781733392e-11]
    s = taylor_coeffs(sample("absshift:0.5", CTX), 10, CTX)
    for k, r in enumerate(ref):
        assert float(s.coeffs[k]) == pytest.approx(r, rel=1e-9, abs=1e-14)


def test_eval_taylor_examples():
    one = taylor_series_for(sample("monomial:0", CTX), CTX, 5.0)
    assert eval_taylor(one, 0) == pytest.approx(1.0)
    for z in (3.0, -4 + 2j, 4.9j):
        assert eval_taylor(one, z) == pytest.approx(1.0, abs=1e-9)
    gf = sample("absshift:0.5", CTX)
    s = taylor_series_for(gf, CTX, 5.0)
    z = -2 + 1j
    assert abs(eval_taylor(s, z) - eval_entire(gf, z, CTX)) <= 1e-8 * abs(eval_entire(gf, z, CTX))
    S, m = eval_taylor_scaled(s, z)
    assert S * math.exp(m) == pytest.approx(eval_taylor(s, z), rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0, 5), t=st.floats(0, 2 * math.pi), spec=st.sampled_from(CATALOG))
def test_taylor_matches_entire(r, t, spec):
    gf = sample(spec, CTX)
    z = r * complex(math.cos(t), math.sin(t))
    a = eval_taylor(_series(spec), z)
    b = eval_entire(gf, z, CTX)
    assert abs(a - b) <= 1e-8 * max(abs(b), 1e-300)


_CACHE = {}


def _series(spec):
    if spec not in _CACHE:
        _CACHE[spec] = taylor_series_for(sample(spec, CTX), CTX, 5.0)
    return _CACHE[spec]


def test_taylor_order_grows_with_radius():
    assert taylor_order(CTX, 1e10) > taylor_order(CTX, 10) > 4


# --- decay -------------------------------------------------------------------

def test_decay_of_constant():
    rep = decay_check(taylor_coeffs(sample("monomial:0", CTX), 20, CTX), 5.0, CTX)
    assert rep.bounded and rep.window == (0,)


def test_decay_extremal():
    s = taylor_coeffs(make_extremal(2.0, CTX, 200).gf, 25, CTX)
    assert decay_check(s, 2.0 - 1 - 0.1, CTX).bounded
    assert decay_check(s, 2.0, CTX).bounded
    rep = decay_check(s, 2.5, CTX)
    assert not rep.bounded and rep.slope > 0.3


def test_extremal_coefficients_alternate():
    s = taylor_coeffs(make_extremal(2.0, CTX, 200).gf, 25, CTX)
    for k, c in enumerate(s.coeffs):
        assert (-1) ** k * c >= -1e-12
        assert s.divdiffs[k] >= 0
