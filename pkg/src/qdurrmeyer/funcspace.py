"""Input functions on [0,1] as the operator sees them.

The operator only ever touches f at the geometric nodes q^j and at 0, so
a :class:`GridFunction` stores exactly that: v_j = f(q^j) for j = 0..J and
the limit f(0), which also serves as the value at every node beyond J.

Catalog functions are sampled with mpmath (``SAMPLE_DPS`` digits) so that
float rounding of the node data does not show up as spurious roughness at
0 in the growth analyses.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np

from .qcore import DomainError, QContext, log_qpoch_neg

SAMPLE_DPS = 120
CATALOG = ("monomial", "poly", "power", "absshift", "exp", "sharp", "file")


class SpecParseError(DomainError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} (at position {position} in {text!r})")
        self.text = text
        self.position = position


@dataclass(frozen=True)
class FunctionSpec:
    kind: str
    params: tuple = ()
    text: str = ""


def _number(text, token, pos, kind="real"):
    try:
        val = int(token) if kind == "int" else float(token)
    except ValueError:
        raise SpecParseError(f"malformed {kind} parameter {token!r}", text, pos) from None
    if not math.isfinite(val):
        raise SpecParseError(f"parameter {token!r} is not finite", text, pos)
    return val


def parse_spec(text: str) -> FunctionSpec:
    """Parse a one-line function descriptor such as ``monomial:2`` or ``sharp:2.0``."""
    raw = text
    text = text.strip()
    name, sep, arg = text.partition(":")
    arg_pos = len(name) + 1
    if name not in CATALOG:
        raise SpecParseError(f"unknown function name {name!r}", raw, 0)
    if name == "exp":
        if sep:
            raise SpecParseError("'exp' takes no parameter", raw, len(name))
        return FunctionSpec("exp", (), text)
    if not sep or not arg.strip():
        raise SpecParseError(f"{name!r} needs a parameter after ':'", raw, len(text))
    if name == "file":
        if not os.path.isfile(arg):
            raise SpecParseError(f"file not found: {arg}", raw, arg_pos)
        return FunctionSpec("file", (arg,), text)
    if name == "poly":
        tokens = arg.split(",")
        pos = arg_pos
        for tok in tokens:
            _number(raw, tok.strip(), pos)
            pos += len(tok) + 1
        return FunctionSpec("poly", tuple(t.strip() for t in tokens), text)
    if "," in arg:
        raise SpecParseError(f"{name!r} takes a single parameter", raw, arg_pos + arg.index(","))
    if name == "monomial":
        m = _number(raw, arg, arg_pos, "int")
        if m < 0:
            raise SpecParseError("monomial degree must be nonnegative", raw, arg_pos)
    elif name == "power":
        if not _number(raw, arg, arg_pos) > 0:
            raise SpecParseError("power exponent must be positive", raw, arg_pos)
    elif name == "sharp":
        if not _number(raw, arg, arg_pos) > 1:
            raise SpecParseError("sharp family needs lambda > 1", raw, arg_pos)
    else:  # absshift
        _number(raw, arg, arg_pos)
    return FunctionSpec(name, (arg.strip(),), text)


@dataclass(frozen=True)
class GridFunction:
    """Node data f(q^j), j=0..J, plus f(0); immutable."""

    q: float
    values: tuple
    limit0: object
    label: str = ""

    def __post_init__(self):
        vals = tuple(mpmath.mpmathify(v) for v in self.values)
        lim = mpmath.mpmathify(self.limit0)
        if not vals:
            raise DomainError("a GridFunction needs at least the node j=0")
        if not all(mpmath.isfinite(v) and not isinstance(v, mpmath.mpc) for v in vals + (lim,)):
            raise DomainError("node values and the limit must be finite reals")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "limit0", lim)
        object.__setattr__(self, "q", float(self.q))

    @property
    def J(self) -> int:
        return len(self.values) - 1

    @cached_property
    def values_f(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    @cached_property
    def limit0_f(self) -> float:
        return float(self.limit0)

    def node(self, j: int):
        """Node value as mpf, with the constant tail beyond J."""
        if j < 0:
            raise DomainError("node index must be nonnegative")
        return self.values[j] if j <= self.J else self.limit0

    def evaluator(self) -> "GridEvaluator":
        return GridEvaluator(self)

    def scaled(self, a) -> "GridFunction":
        return GridFunction(self.q, tuple(a * v for v in self.values), a * self.limit0,
                            f"{a}*({self.label})")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if other.q != self.q:
            raise DomainError("cannot add grid functions built for different q")
        J = max(self.J, other.J)
        vals = tuple(self.node(j) + other.node(j) for j in range(J + 1))
        return GridFunction(self.q, vals, self.limit0 + other.limit0,
                            f"({self.label})+({other.label})")


class GridEvaluator:
    """Callable t -> f(t) defined on {q^j} and 0 only (for Jackson sums)."""

    def __init__(self, gf: GridFunction):
        self.gf = gf
        self._log_q = math.log(gf.q)

    def __call__(self, t: float) -> float:
        if t == 0:
            return self.gf.limit0_f
        j = round(math.log(t) / self._log_q)
        if j < 0 or abs(self.gf.q ** j - t) > 1e-9 * t:
            raise DomainError(f"t={t!r} is not a node q^j of the grid")
        return value_at_node(self.gf, j)


def default_nodes(ctx: QContext) -> int:
    """max(40, ceil(ln eps_tail / ln q)), so that q^{J+1}/(1-q) < eps_tail."""
    return max(40, math.ceil(math.log(ctx.eps_tail) / math.log(ctx.q)))


def _log_envelope(ctx: QContext, r_max: float) -> float:
    return log_qpoch_neg(max(r_max, 1.0), ctx)


def growth_nodes(ctx: QContext, r_max: float) -> int:
    """Node count for growth studies up to radius ``r_max``.

    Replacing f(q^j) by f(0) beyond J shifts A_0 by about
    |f(q^J) - f(0)| q^J, and that error reaches ln M(r) - ln(-r;q)_inf at
    the level ln|f(q^J) - f(0)| + J ln q.  For smooth f both factors are
    O(q^J) while y(r) itself can sink to about -ln(-r;q)_inf, hence
    2 J ln(1/q) must clear the envelope; 4 times the crossover index
    ln r / ln(1/q) is kept as a floor for the rough cases.
    """
    lq = -math.log(ctx.q)
    cross = math.log(max(r_max, 1.0)) / lq
    smooth = (_log_envelope(ctx, r_max) / 2 + 40) / lq
    return max(default_nodes(ctx), math.ceil(4 * cross) + 40, math.ceil(smooth))


def growth_dps(ctx: QContext, r_max: float) -> int:
    """Sampling digits for growth studies: rounding noise in the node data
    enters y(r) at the level ln(noise), so it must stay below the envelope."""
    return max(SAMPLE_DPS, math.ceil((_log_envelope(ctx, r_max) + 40) / math.log(10)))


def sample_for_growth(spec, ctx: QContext, r_max: float) -> "GridFunction":
    """Node data sized for max-modulus studies on |z| <= r_max."""
    return sample(spec, ctx, J=growth_nodes(ctx, r_max), dps=growth_dps(ctx, r_max))


def _catalog_callable(spec: FunctionSpec):
    p = spec.params
    if spec.kind == "monomial":
        m = int(p[0])
        return lambda x: x ** m
    if spec.kind == "poly":
        coeffs = [mpmath.mpf(c) for c in p]

        def poly(x):
            acc = mpmath.mpf(0)
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc
        return poly
    if spec.kind == "power":
        alpha = mpmath.mpf(p[0])
        return lambda x: x ** alpha if x > 0 else mpmath.mpf(0)
    if spec.kind == "absshift":
        c = mpmath.mpf(p[0])
        return lambda x: abs(x - c)
    if spec.kind == "exp":
        return mpmath.exp
    raise DomainError(f"no pointwise evaluator for {spec.kind!r}")


def sample(spec, ctx: QContext, J: int | None = None, dps: int = SAMPLE_DPS) -> GridFunction:
    """Node data of a catalog function (or a file source) for the given q."""
    if isinstance(spec, str):
        spec = parse_spec(spec)
    if J is None:
        J = default_nodes(ctx)
    if J < 1:
        raise DomainError("J must be at least 1")
    if spec.kind == "file":
        return read_grid_csv(spec.params[0], ctx.q, dps=dps)
    if spec.kind == "sharp":
        from .extremal import make_extremal
        return make_extremal(float(spec.params[0]), ctx, J, dps=dps).gf
    with mpmath.workdps(dps):
        fn = _catalog_callable(spec)  # parameters parsed at the sampling precision
        q = mpmath.mpf(ctx.q)
        vals = []
        x = mpmath.mpf(1)
        for _ in range(J + 1):
            vals.append(fn(x))
            x *= q
        lim = fn(mpmath.mpf(0))
        if not all(mpmath.isfinite(v) for v in vals + [lim]):
            raise DomainError(f"{spec.text} is not finite on the grid")
        return GridFunction(ctx.q, tuple(vals), lim, spec.text)


def value_at_node(gf: GridFunction, j: int) -> float:
    """f(q^j) for j <= J, f(0) beyond (constant-tail policy)."""
    return float(gf.node(j))


def sup_norm(gf: GridFunction) -> float:
    """Max of |f(0)| and |f(q^j)|, the sup of all data the operator sees."""
    return float(max([abs(gf.limit0)] + [abs(v) for v in gf.values]))


def read_grid_csv(path, q: float, dps: int = SAMPLE_DPS) -> GridFunction:
    """Read ``j,value`` rows (j = 0, 1, ...) closed by a ``limit,<value>`` row."""
    vals = []
    limit = None
    with open(path, newline="") as fh, mpmath.workdps(dps):
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        if not rows or [c.strip() for c in rows[0]] != ["j", "value"]:
            raise DomainError(f"{path}: header must be 'j,value'")
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise DomainError(f"{path}:{lineno}: expected two columns")
            key, val = row[0].strip(), row[1].strip()
            if limit is not None:
                raise DomainError(f"{path}:{lineno}: rows after the limit row")
            try:
                num = mpmath.mpf(val)
            except (ValueError, TypeError):
                raise DomainError(f"{path}:{lineno}: bad value {val!r}") from None
            if not mpmath.isfinite(num):
                raise DomainError(f"{path}:{lineno}: value is not finite")
            if key == "limit":
                limit = num
                continue
            if key != str(len(vals)):
                raise DomainError(f"{path}:{lineno}: expected node j={len(vals)}, got {key!r}")
            vals.append(num)
    if limit is None:
        raise DomainError(f"{path}: missing 'limit,<value>' row")
    if not vals:
        raise DomainError(f"{path}: no node rows")
    return GridFunction(q, tuple(vals), limit, f"file:{path}")


def write_grid_csv(gf: GridFunction, path, digits: int = 17) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("j,value\n")
        for j, v in enumerate(gf.values):
            fh.write(f"{j},{mpmath.nstr(v, digits, strip_zeros=False)}\n")
        fh.write(f"limit,{mpmath.nstr(gf.limit0, digits, strip_zeros=False)}\n")
