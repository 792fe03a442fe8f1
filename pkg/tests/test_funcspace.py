import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdurrmeyer.funcspace import (SpecParseError, default_nodes, growth_dps, growth_nodes,
                                  parse_spec, read_grid_csv, sample, sup_norm, value_at_node,
                                  write_grid_csv)
from qdurrmeyer.qcore import DomainError, QContext

CTX = QContext(0.5)


@pytest.mark.parametrize("text,kind,params", [
    ("monomial:2", "monomial", ("2",)),
    ("sharp:2.0", "sharp", ("2.0",)),
    ("poly:1, -2,3", "poly", ("1", "-2", "3")),
    ("exp", "exp", ()),
    ("absshift:0.5", "absshift", ("0.5",)),
])
def test_parse_catalog(text, kind, params):
    spec = parse_spec(text)
    assert (spec.kind, spec.params) == (kind, params)


@pytest.mark.parametrize("text,pos", [
    ("frobnicate:1", 0),
    ("monomial:x", 9),
    ("monomial:-1", 9),
    ("power:0", 6),
    ("sharp:1.0", 6),
    ("poly:1,z", 7),
    ("exp:2", 3),
    ("monomial", 8),
    ("absshift:1,2", 10),
])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(SpecParseError) as info:
        parse_spec(text)
    assert info.value.position == pos


def test_parse_missing_file(tmp_path):
    with pytest.raises(SpecParseError):
        parse_spec(f"file:{tmp_path / 'none.csv'}")


def test_sample_nodes_and_limit():
    gf = sample("monomial:2", CTX, J=10)
    assert gf.J == 10
    assert value_at_node(gf, 3) == pytest.approx(0.25 ** 3)
    assert value_at_node(gf, 50) == 0.0  # constant tail
    assert float(gf.limit0) == 0.0
    e = sample("exp", CTX)
    assert float(e.limit0) == 1.0 and value_at_node(e, 0) == pytest.approx(math.e)
    assert sup_norm(e) == pytest.approx(math.e)


def test_sample_power_and_shift():
    p = sample("power:0.5", CTX, J=4)
    assert value_at_node(p, 2) == pytest.approx(0.5)
    a = sample("absshift:0.5", CTX, J=4)
    assert [value_at_node(a, j) for j in range(4)] == pytest.approx([0.5, 0.0, 0.25, 0.375])
    s = sample("sharp:2.0", CTX, J=5)
    assert value_at_node(s, 0) == 1.0 and float(s.limit0) == pytest.approx(2.0)


def test_default_node_count():
    assert default_nodes(QContext(0.5)) == 54
    assert default_nodes(QContext(0.1)) == 40
    assert growth_nodes(QContext(0.5), 1e10) >= 4 * 33
    assert growth_dps(QContext(0.5), 1e10) > 120


def test_evaluator_only_on_nodes():
    ev = sample("monomial:1", CTX, J=10).evaluator()
    assert ev(0.125) == 0.125 and ev(0.0) == 0.0
    with pytest.raises(DomainError):
        ev(0.3)


def test_linear_combinations():
    a = sample("monomial:1", CTX, J=8)
    b = sample("exp", CTX, J=12)
    c = a.scaled(2) + b
    assert c.J == 12
    assert value_at_node(c, 10) == pytest.approx(math.exp(0.5 ** 10))  # a's tail is 0
    assert value_at_node(c, 1) == pytest.approx(1.0 + math.exp(0.5))
    with pytest.raises(DomainError):
        a + sample("exp", QContext(0.3))


def test_csv_round_trip(tmp_path):
    gf = sample("absshift:0.3", CTX, J=20)
    path = tmp_path / "g.csv"
    write_grid_csv(gf, path)
    back = read_grid_csv(path, 0.5)
    assert back.J == 20
    for j in range(21):
        assert value_at_node(back, j) == value_at_node(gf, j)
    assert float(back.limit0) == pytest.approx(0.3)
    again = sample(f"file:{path}", CTX)
    assert again.J == 20


@pytest.mark.parametrize("body", [
    "x,value\n0,1\nlimit,1\n",          # bad header
    "j,value\n1,1\nlimit,1\n",          # does not start at 0
    "j,value\n0,1\n",                   # no limit row
    "j,value\n0,abc\nlimit,1\n",        # bad number
    "j,value\n0,1\nlimit,1\n1,2\n",     # rows after limit
    "j,value\n0,nan\nlimit,1\n",        # not finite
])
def test_csv_rejects_malformed(tmp_path, body):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(DomainError):
        read_grid_csv(path, 0.5)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-2, 2), J=st.integers(1, 60))
def test_sampled_nodes_are_exact_to_many_digits(c, J):
    gf = sample(f"absshift:{c!r}", CTX, J=J)
    with mpmath.workdps(100):
        ref = abs(mpmath.mpf(0.5) ** J - mpmath.mpf(repr(c)))
        assert abs(gf.values[J] - ref) <= mpmath.mpf(10) ** -95 * max(ref, 1)
