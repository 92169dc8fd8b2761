"""Exact symbolic expressions over a chart (t, x, y) and the jet of a scalar field.

Every expression is kept in a canonical form at all times: a rational-weighted
sum of power products of atoms, with each product sorted by a fixed total
order on atoms.  Coefficients are exact ``Fraction`` values; floats never
enter a tree.  The only trigonometric functions that survive construction are
sin and cos (cot, tan, sec, csc are rewritten away by the parser), and the
Pythagorean relation is applied as a confluent rewrite so that the identities
this toolkit verifies reduce to the literal zero expression.

Atoms:

* coordinates ``t, x, y``
* field-derivative symbols ``u, u_t, u_tx, ...`` (multi-index kept sorted,
  since mixed partials commute); secondary field names ``v, w`` are allowed
* opaque parameter fields such as ``b(t,x,y)`` with formal partials ``b_t``
* opaque functions of u such as ``F`` and ``f`` with formal derivatives
  ``F'``, ``f'``
* named scalar parameters such as ``c``, ``k``, ``a``
* ``sin(E)``, ``cos(E)``, ``ln(E)`` of a canonical expression
* a multi-term sum raised to a negative integer power (kept opaque)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

COORDS = ("t", "x", "y")
FIELD_NAMES = ("u", "v", "w")
POINT_VARS = ("t", "x", "y", "u")

DEFAULT_PROBE_SEED = 1729
PROBE_TOLERANCE = 1e-9


class ExprError(Exception):
    """Base error for expression construction and evaluation."""


class EvaluationError(ExprError):
    """Raised when numeric evaluation hits an unbound atom or a singularity."""


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------

_COORD_RANK = {name: i for i, name in enumerate(COORDS)}
_POINT_RANK = {name: i for i, name in enumerate(POINT_VARS)}
_TRIG_RANK = {"sin": 0, "cos": 1, "ln": 2}


def _sorted_index(index: Iterable[str], allowed: Sequence[str]) -> tuple[str, ...]:
    idx = tuple(index)
    for c in idx:
        if c not in allowed:
            raise ExprError(f"bad derivative index {c!r}")
    return tuple(sorted(idx, key=allowed.index))


@dataclass(frozen=True)
class Coord:
    name: str

    def key(self):
        return (0, _COORD_RANK[self.name])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Jet:
    """A field-derivative symbol: field name plus a sorted multi-index."""

    field: str
    index: tuple[str, ...] = ()

    def key(self):
        return (1, FIELD_NAMES.index(self.field), len(self.index),
                tuple(_COORD_RANK[c] for c in self.index))

    def __str__(self):
        return self.field + ("_" + "".join(self.index) if self.index else "")


@dataclass(frozen=True)
class ParamField:
    """An opaque function of some point variables, with formal partials.

    ``deps`` lists which of (t, x, y, u) the function depends on; derivatives
    with respect to anything else vanish.  The multi-index is sorted.
    """

    name: str
    index: tuple[str, ...] = ()
    deps: tuple[str, ...] = ("t", "x", "y")

    def key(self):
        return (2, self.name, len(self.index),
                tuple(_POINT_RANK[c] for c in self.index))

    def __str__(self):
        return self.name + ("_" + "".join(self.index) if self.index else "")


@dataclass(frozen=True)
class ParamFunc:
    """An opaque function of u alone; ``order`` counts formal u-derivatives."""

    name: str
    order: int = 0

    def key(self):
        return (3, self.name, self.order)

    def __str__(self):
        return self.name + "'" * self.order


@dataclass(frozen=True)
class ParamConst:
    name: str

    def key(self):
        return (4, self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Func:
    """sin, cos or ln of a canonical expression."""

    fn: str
    arg: "Expr"

    def key(self):
        return (5, _TRIG_RANK[self.fn], self.arg.key())

    def __str__(self):
        return f"{self.fn}({self.arg})"


@dataclass(frozen=True)
class SumPow:
    """A primitive multi-term sum, used as a base for negative powers."""

    base: "Expr"

    def key(self):
        return (6, self.base.key())

    def __str__(self):
        return f"({self.base})"


Atom = Union[Coord, Jet, ParamField, ParamFunc, ParamConst, Func, SumPow]

# A monomial maps atoms to nonzero integer exponents; stored sorted by key.
Mono = tuple[tuple[Atom, int], ...]


# ---------------------------------------------------------------------------
# Canonical expression
# ---------------------------------------------------------------------------


class Expr:
    """Immutable canonical expression: sum of rational-weighted monomials."""

    __slots__ = ("terms", "_key")

    def __init__(self, terms: tuple[tuple[Mono, Fraction], ...]):
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_key", None)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("Expr is immutable")

    # -- identity ----------------------------------------------------------

    def key(self):
        k = self._key
        if k is None:
            k = tuple((tuple((a.key(), n) for a, n in mono),
                       (c.numerator, c.denominator)) for mono, c in self.terms)
            object.__setattr__(self, "_key", k)
        return k

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    # -- predicates ---------------------------------------------------------

    @property
    def is_zero_expr(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(not mono for mono, _ in self.terms)

    def as_fraction(self) -> Fraction:
        if self.is_zero_expr:
            return Fraction(0)
        if len(self.terms) == 1 and not self.terms[0][0]:
            return self.terms[0][1]
        raise ExprError("expression is not a rational constant")

    def atoms(self) -> set:
        """All leaf atoms, recursing into function arguments and sum bases."""
        out: set = set()
        for mono, _ in self.terms:
            for a, _n in mono:
                if isinstance(a, (Func, SumPow)):
                    inner = a.arg if isinstance(a, Func) else a.base
                    out |= inner.atoms()
                else:
                    out.add(a)
        return out

    def factor_atoms(self) -> set:
        """Atoms appearing directly as factors (no recursion)."""
        return {a for mono, _ in self.terms for a, _n in mono}

    # -- arithmetic operators ------------------------------------------------
    # unknown operand types yield NotImplemented so their reflected
    # operators (e.g. VectorField.__rmul__) get a chance

    def __add__(self, other):
        if not isinstance(other, (Expr, int, Fraction)):
            return NotImplemented
        return add(self, _coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return Expr(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other):
        if not isinstance(other, (Expr, int, Fraction)):
            return NotImplemented
        return add(self, -_coerce(other))

    def __rsub__(self, other):
        if not isinstance(other, (Expr, int, Fraction)):
            return NotImplemented
        return add(_coerce(other), -self)

    def __mul__(self, other):
        if not isinstance(other, (Expr, int, Fraction)):
            return NotImplemented
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (Expr, int, Fraction)):
            return NotImplemented
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        if not isinstance(other, (Expr, int, Fraction)):
            return NotImplemented
        return div(_coerce(other), self)

    def __pow__(self, n):
        return pow_int(self, n)

    def __str__(self):
        return to_infix(self)

    def __repr__(self):
        return f"Expr({to_infix(self)})"


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return rational(v)
    raise TypeError(f"cannot use {type(v).__name__} in expression arithmetic")


# ---------------------------------------------------------------------------
# Normalisation: Pythagorean reduction and term collection
# ---------------------------------------------------------------------------


def _trig_groups(mono: Mono):
    """Map each sin/cos argument to its (sin exponent, cos exponent)."""
    groups: dict = {}
    for a, n in mono:
        if isinstance(a, Func) and a.fn in ("sin", "cos"):
            s, c = groups.get(a.arg, (0, 0))
            if a.fn == "sin":
                groups[a.arg] = (n, c)
            else:
                groups[a.arg] = (s, n)
    return groups


def _mono_replace(mono_map: dict, arg: Expr, ds: int, dc: int) -> tuple:
    out = dict(mono_map)
    for fn, d in (("sin", ds), ("cos", dc)):
        a = Func(fn, arg)
        n = out.get(a, 0) + d
        if n:
            out[a] = n
        else:
            out.pop(a, None)
    return tuple(sorted(out.items(), key=lambda kv: kv[0].key()))


def _reduce_term(mono: Mono, coeff: Fraction):
    """Apply cos^2 -> 1 - sin^2 to one term until no cos exponent exceeds 1.

    Reducing cos rather than sin keeps powers of sin as plain monomial
    factors, so the ubiquitous 1/sin and 1/sin^2 coefficients of this chart
    invert without leaving the monomial ring.  Terminates because each step
    lowers a cos exponent by 2; the reduced monomials are linearly
    independent as functions, so equal expressions share one normal form.
    """
    work = [(mono, coeff)]
    done = []
    while work:
        m, c = work.pop()
        redex = None
        for arg, (_j, i) in _trig_groups(m).items():
            if i >= 2:
                redex = arg
                break
        if redex is None:
            done.append((m, c))
            continue
        md = dict(m)
        work.append((_mono_replace(md, redex, 0, -2), c))
        work.append((_mono_replace(md, redex, 2, -2), -c))
    return done


def _normalize(term_map: dict) -> Expr:
    collected: dict = {}
    pending = []  # terms holding a SumPow factor with positive exponent
    for mono, coeff in term_map.items():
        if not coeff:
            continue
        for m, c in _reduce_term(mono, coeff):
            expand = [(a, n) for a, n in m if isinstance(a, SumPow) and n > 0]
            if expand:
                pending.append((m, c, expand))
            else:
                collected[m] = collected.get(m, Fraction(0)) + c
    terms = tuple(sorted(((m, c) for m, c in collected.items() if c),
                         key=lambda mc: tuple((a.key(), n) for a, n in mc[0])))
    out = Expr(terms)
    for m, c, expand in pending:
        rest = tuple(an for an in m if not (isinstance(an[0], SumPow) and an[1] > 0))
        piece = Expr(((rest, c),))
        for a, n in expand:
            piece = mul(piece, pow_int(a.base, n))
        out = add(out, piece)
    return out


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

ZERO = Expr(())
ONE = Expr((((), Fraction(1)),))


def rational(p, q=1) -> Expr:
    c = Fraction(p, q) if q != 1 else Fraction(p)
    if not c:
        return ZERO
    return Expr((((), c),))


def atom_expr(a: Atom) -> Expr:
    return Expr(((((a, 1),), Fraction(1)),))


def coord(name: str) -> Expr:
    if name not in COORDS:
        raise ExprError(f"unknown coordinate {name!r}")
    return atom_expr(Coord(name))


def jet(field: str, index: str | Iterable[str] = ()) -> Expr:
    if field not in FIELD_NAMES:
        raise ExprError(f"unknown field symbol {field!r}")
    return atom_expr(Jet(field, _sorted_index(tuple(index), COORDS)))


def param_field(name: str, index: str | Iterable[str] = (),
                deps: Sequence[str] = ("t", "x", "y")) -> Expr:
    return atom_expr(ParamField(name, _sorted_index(tuple(index), POINT_VARS),
                                tuple(deps)))


def param_func(name: str, order: int = 0) -> Expr:
    return atom_expr(ParamFunc(name, order))


def param_const(name: str) -> Expr:
    return atom_expr(ParamConst(name))


T, X, Y = (coord(c) for c in COORDS)
U = jet("u")


def add(*es: Expr) -> Expr:
    out: dict = {}
    for e in es:
        for mono, coeff in e.terms:
            out[mono] = out.get(mono, Fraction(0)) + coeff
    # terms of canonical inputs are already reduced; only collection is needed
    terms = tuple(sorted(((m, c) for m, c in out.items() if c),
                         key=lambda mc: tuple((a.key(), n) for a, n in mc[0])))
    return Expr(terms)


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    out = dict(m1)
    for a, n in m2:
        k = out.get(a, 0) + n
        if k:
            out[a] = k
        else:
            out.pop(a, None)
    return tuple(sorted(out.items(), key=lambda kv: kv[0].key()))


def mul(a: Expr, b: Expr) -> Expr:
    out: dict = {}
    for m1, c1 in a.terms:
        for m2, c2 in b.terms:
            m = _mono_mul(m1, m2)
            out[m] = out.get(m, Fraction(0)) + c1 * c2
    return _normalize(out)


def _content(e: Expr) -> Fraction:
    """Signed content: gcd of |coefficients| carrying the leading term's sign."""
    num = 0
    den = 1
    for _, c in e.terms:
        num = math.gcd(num, abs(c.numerator))
        den = den * c.denominator // math.gcd(den, c.denominator)
    content = Fraction(num, den)
    return -content if e.terms[0][1] < 0 else content


def pow_int(e: Expr, n: int) -> Expr:
    if not isinstance(n, int):
        raise TypeError("exponents must be integers")
    if n == 0:
        return ONE
    if n > 0:
        result = ONE
        base = e
        k = n
        while k:
            if k & 1:
                result = mul(result, base)
            base_sq = mul(base, base) if k > 1 else base
            base = base_sq
            k >>= 1
        return result
    # negative power
    if e.is_zero_expr:
        raise ExprError("division by zero expression")
    if len(e.terms) == 1:
        mono, coeff = e.terms[0]
        inv_mono = tuple((a, -k) for a, k in mono)
        out = {tuple(sorted(inv_mono, key=lambda kv: kv[0].key())): Fraction(1) / coeff}
        return pow_int(_normalize(out), -n) if n != -1 else _normalize(out)
    cont = _content(e)
    base = mul(e, rational(Fraction(1) / cont))
    a = SumPow(base)
    out = {((a, n),): cont ** n}
    return _normalize(out)


def div(a: Expr, b: Expr) -> Expr:
    if len(b.terms) > 1 and a.terms:
        # exact-quotient shortcut: catches a == q*b for a single-term q,
        # e.g. (2 + 2x)/(1 + x) -> 2, without general polynomial division
        m1, c1 = a.terms[0]
        m2, c2 = b.terms[0]
        inv_m2 = tuple((at, -n) for at, n in m2)
        q = _normalize({_mono_mul(m1, inv_m2): c1 / c2})
        if mul(q, b) == a:
            return q
    return mul(a, pow_int(b, -1))


def _leading_sign(e: Expr) -> int:
    return -1 if e.terms and e.terms[0][1] < 0 else 1


def _integer_multiple(e: Expr) -> tuple[int, Expr]:
    """Write e = n * e1 with n a positive integer and e1 of integer content 1."""
    cont = _content(e)
    if cont.denominator == 1 and cont.numerator > 1:
        return cont.numerator, mul(e, rational(Fraction(1, cont.numerator)))
    return 1, e


EXPAND_MULTIPLE_ANGLE_MAX = 32


def _multi_angle(n: int, e1: Expr) -> tuple[Expr, Expr]:
    """(sin(n e1), cos(n e1)) by the linear angle-addition recurrence."""
    s1, c1 = atom_expr(Func("sin", e1)), atom_expr(Func("cos", e1))
    s, c = s1, c1
    for _ in range(n - 1):
        s, c = add(mul(s, c1), mul(c, s1)), add(mul(c, c1), -mul(s, s1))
    return s, c


def sin_of(e: Expr) -> Expr:
    if e.is_zero_expr:
        return ZERO
    if _leading_sign(e) < 0:
        return -sin_of(-e)
    n, e1 = _integer_multiple(e)
    if 1 < n <= EXPAND_MULTIPLE_ANGLE_MAX:
        return _multi_angle(n, e1)[0]
    return atom_expr(Func("sin", e))


def cos_of(e: Expr) -> Expr:
    if e.is_zero_expr:
        return ONE
    if _leading_sign(e) < 0:
        return cos_of(-e)
    n, e1 = _integer_multiple(e)
    if 1 < n <= EXPAND_MULTIPLE_ANGLE_MAX:
        return _multi_angle(n, e1)[1]
    return atom_expr(Func("cos", e))


def ln_of(e: Expr) -> Expr:
    if e == ONE:
        return ZERO
    if e.is_zero_expr:
        raise ExprError("ln of zero")
    return atom_expr(Func("ln", e))


def simplify(e: Expr) -> Expr:
    """Re-normalise an expression.  Idempotent: inputs are already canonical."""
    return _normalize({m: c for m, c in e.terms})


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def _derive(e: Expr, datom: Callable[[Atom], Expr]) -> Expr:
    out = ZERO
    for mono, coeff in e.terms:
        for i, (a, n) in enumerate(mono):
            da = datom(a)
            if da.is_zero_expr:
                continue
            rest = mono[:i] + mono[i + 1:]
            piece = Expr(((rest, coeff * n),))
            piece = mul(piece, pow_int(atom_expr(a), n - 1)) if n != 1 else piece
            out = add(out, mul(piece, da))
    return out


def diff(e: Expr, v: str) -> Expr:
    """Total derivative D_v, v in (t, x, y): jet atoms chain (D_x u_t = u_tx)."""
    if v not in COORDS:
        raise ExprError(f"total derivative only along coordinates, got {v!r}")

    def datom(a: Atom) -> Expr:
        if isinstance(a, Coord):
            return ONE if a.name == v else ZERO
        if isinstance(a, Jet):
            return atom_expr(Jet(a.field, _sorted_index(a.index + (v,), COORDS)))
        if isinstance(a, ParamField):
            parts = []
            if v in a.deps:
                parts.append(atom_expr(
                    ParamField(a.name, _sorted_index(a.index + (v,), POINT_VARS), a.deps)))
            if "u" in a.deps:
                chain = atom_expr(
                    ParamField(a.name, _sorted_index(a.index + ("u",), POINT_VARS), a.deps))
                parts.append(mul(chain, jet("u", v)))
            return add(*parts) if parts else ZERO
        if isinstance(a, ParamFunc):
            return mul(atom_expr(ParamFunc(a.name, a.order + 1)), jet("u", v))
        if isinstance(a, ParamConst):
            return ZERO
        if isinstance(a, Func):
            inner = diff(a.arg, v)
            if inner.is_zero_expr:
                return ZERO
            if a.fn == "sin":
                return mul(cos_of(a.arg), inner)
            if a.fn == "cos":
                return -mul(sin_of(a.arg), inner)
            return mul(pow_int(a.arg, -1), inner)  # ln
        if isinstance(a, SumPow):
            return diff(a.base, v)
        raise ExprError(f"cannot differentiate atom {a!r}")

    return _derive(e, datom)


def partial_diff(e: Expr, wrt: Atom | str) -> Expr:
    """Partial derivative treating every other atom as independent.

    ``wrt`` may be a coordinate, the field u (or any jet atom), or a string
    naming one of those.  Explicit dependence of parameter fields on the
    variable is tracked through their formal multi-index; sin/cos/ln chain
    through their arguments.
    """
    if isinstance(wrt, str):
        wrt = resolve_symbol(wrt)

    def datom(a: Atom) -> Expr:
        if a == wrt:
            return ONE
        if isinstance(a, ParamField):
            if isinstance(wrt, Coord) and wrt.name in a.deps:
                return atom_expr(ParamField(
                    a.name, _sorted_index(a.index + (wrt.name,), POINT_VARS), a.deps))
            if isinstance(wrt, Jet) and wrt == Jet("u") and "u" in a.deps:
                return atom_expr(ParamField(
                    a.name, _sorted_index(a.index + ("u",), POINT_VARS), a.deps))
            return ZERO
        if isinstance(a, ParamFunc):
            if isinstance(wrt, Jet) and wrt == Jet("u"):
                return atom_expr(ParamFunc(a.name, a.order + 1))
            return ZERO
        if isinstance(a, Func):
            inner = partial_diff(a.arg, wrt)
            if inner.is_zero_expr:
                return ZERO
            if a.fn == "sin":
                return mul(cos_of(a.arg), inner)
            if a.fn == "cos":
                return -mul(sin_of(a.arg), inner)
            return mul(pow_int(a.arg, -1), inner)
        if isinstance(a, SumPow):
            return partial_diff(a.base, wrt)
        return ZERO

    return _derive(e, datom)


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

Bindings = Mapping[Union[Atom, str], Union[Expr, int, Fraction]]


def _resolve_key(k, known: Mapping[str, Atom]) -> Atom:
    if not isinstance(k, str):
        return k
    if k in known:
        return known[k]
    return resolve_symbol(k)


def _resolve_bindings(b: Bindings, target: "Expr") -> dict[Atom, Expr]:
    known = {str(a): a for a in target.atoms()}
    out = {}
    for k, v in b.items():
        out[_resolve_key(k, known)] = _coerce(v)
    return out


def substitute(e: Expr, bindings: Bindings) -> Expr:
    """Simultaneous substitution of atoms, then renormalisation."""
    bmap = _resolve_bindings(bindings, e)
    if not bmap:
        return e
    out = ZERO
    for mono, coeff in e.terms:
        term = rational(coeff)
        for a, n in mono:
            if a in bmap:
                rep = bmap[a]
            elif isinstance(a, Func):
                arg = substitute(a.arg, bmap)
                rep = {"sin": sin_of, "cos": cos_of, "ln": ln_of}[a.fn](arg)
            elif isinstance(a, SumPow):
                rep = substitute(a.base, bmap)
            else:
                rep = atom_expr(a)
            term = mul(term, pow_int(rep, n))
        out = add(out, term)
    return out


# ---------------------------------------------------------------------------
# Numeric evaluation and probabilistic zero testing
# ---------------------------------------------------------------------------


def eval_numeric(e: Expr, point: Mapping[Union[Atom, str], float]) -> float:
    """IEEE-double evaluation; every leaf atom must be bound."""
    known = {str(a): a for a in e.atoms()}
    values: dict[Atom, float] = {}
    for k, v in point.items():
        try:
            values[_resolve_key(k, known)] = float(v)
        except UnknownSymbolError:
            continue  # binding for a symbol the expression does not contain

    def atom_value(a: Atom) -> float:
        if a in values:
            return values[a]
        if isinstance(a, Func):
            x = ev(a.arg)
            if a.fn == "sin":
                return math.sin(x)
            if a.fn == "cos":
                return math.cos(x)
            if x <= 0.0:
                raise EvaluationError("ln of non-positive value")
            return math.log(x)
        if isinstance(a, SumPow):
            return ev(a.base)
        raise EvaluationError(f"unbound atom {a}")

    def ev(expr: Expr) -> float:
        total = 0.0
        for mono, coeff in expr.terms:
            val = float(coeff)
            for a, n in mono:
                base = atom_value(a)
                if n < 0 and base == 0.0:
                    raise EvaluationError(f"division by zero at atom {a}")
                val *= base ** n
            total += val
        if math.isnan(total) or math.isinf(total):
            raise EvaluationError("evaluation overflowed")
        return total

    return ev(e)


class ZeroStatus(enum.Enum):
    PROVEN_ZERO = "PROVEN_ZERO"
    LIKELY_NONZERO = "LIKELY_NONZERO"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class ZeroResult:
    status: ZeroStatus
    witness: Optional[dict] = None
    value: Optional[float] = None

    def __bool__(self):
        return self.status is ZeroStatus.PROVEN_ZERO


def _sample_value(a: Atom, rng) -> float:
    if isinstance(a, Coord):
        if a.name == "x":
            return rng.uniform(0.2, math.pi - 0.2)
        if a.name == "y":
            return rng.uniform(0.0, 2.0 * math.pi)
        return rng.uniform(-2.0, 2.0)
    return rng.uniform(-2.0, 2.0)


def is_zero(e: Expr, rng=None, samples: int = 32, tol: float = PROBE_TOLERANCE) -> ZeroResult:
    """Three-valued zero test.

    PROVEN_ZERO only when the canonical form is the literal 0; otherwise the
    expression is probed at random points (x in (0.2, pi-0.2), y in (0, 2pi),
    jet atoms and parameters in (-2, 2); default seed 1729).  A sample above
    ``tol`` yields LIKELY_NONZERO with a witness; a singular sample point is
    redrawn a bounded number of times.  Never returns a false PROVEN_ZERO.
    """
    if e.is_zero_expr:
        return ZeroResult(ZeroStatus.PROVEN_ZERO)
    if rng is None:
        import random
        rng = random.Random(DEFAULT_PROBE_SEED)
    atoms = sorted(e.atoms(), key=lambda a: a.key())
    for _ in range(samples):
        for _retry in range(8):
            point = {a: _sample_value(a, rng) for a in atoms}
            try:
                val = eval_numeric(e, point)
            except EvaluationError:
                continue
            if abs(val) > tol:
                witness = {str(a): v for a, v in point.items()}
                return ZeroResult(ZeroStatus.LIKELY_NONZERO, witness, val)
            break
    return ZeroResult(ZeroStatus.UNDECIDED)


# ---------------------------------------------------------------------------
# Symbol resolution (shared with the parser)
# ---------------------------------------------------------------------------

DEFAULT_PARAM_CONSTS = frozenset({"a", "c", "k"})
PARAM_FUNC_NAMES = frozenset({"F", "f"})
PARAM_FIELD_NAMES = frozenset({"b"})


class UnknownSymbolError(ExprError):
    def __init__(self, name: str, offset: int = -1):
        super().__init__(f"unknown identifier {name!r}")
        self.name = name
        self.offset = offset


def resolve_symbol(name: str, extra_params: frozenset[str] = frozenset()) -> Atom:
    """Classify an identifier like ``u_tx``, ``b_t``, ``F'`` or ``c``."""
    primes = len(name) - len(name.rstrip("'"))
    stem = name[:len(name) - primes] if primes else name
    if primes and stem not in PARAM_FUNC_NAMES:
        raise UnknownSymbolError(name)
    base, _, suffix = stem.partition("_")
    if base in COORDS and not suffix and not primes:
        return Coord(base)
    if base in FIELD_NAMES and not primes:
        return Jet(base, _sorted_index(tuple(suffix), COORDS))
    if base in PARAM_FIELD_NAMES and not primes:
        return ParamField(base, _sorted_index(tuple(suffix), COORDS),
                          deps=("t", "x", "y"))
    if base in PARAM_FUNC_NAMES and not suffix:
        return ParamFunc(base, primes)
    if (base in DEFAULT_PARAM_CONSTS or base in extra_params) and not suffix and not primes:
        return ParamConst(base)
    raise UnknownSymbolError(name)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _factor_infix(a: Atom, n: int) -> str:
    s = str(a)
    if n == 1:
        return s
    return f"{s}^{n}" if n > 1 else f"{s}^({n})"


def to_infix(e: Expr) -> str:
    if e.is_zero_expr:
        return "0"
    parts = []
    for i, (mono, coeff) in enumerate(e.terms):
        sign = "-" if coeff < 0 else "+"
        c = abs(coeff)
        factors = [_factor_infix(a, n) for a, n in mono]
        if not factors:
            body = str(c)
        elif c == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(c)] + factors)
        if i == 0:
            parts.append(body if sign == "+" else "-" + body)
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


_LATEX_NAMES = {"sin": r"\sin", "cos": r"\cos", "ln": r"\ln"}


def _atom_latex(a: Atom) -> str:
    if isinstance(a, Coord):
        return a.name
    if isinstance(a, (Jet, ParamField)):
        base = a.field if isinstance(a, Jet) else a.name
        return f"{base}_{{{''.join(a.index)}}}" if a.index else base
    if isinstance(a, ParamFunc):
        return a.name + "'" * a.order + "(u)"
    if isinstance(a, ParamConst):
        return a.name
    if isinstance(a, Func):
        arg = to_latex(a.arg)
        single = len(a.arg.terms) == 1 and len(a.arg.terms[0][0]) == 1 \
            and a.arg.terms[0][1] == 1
        return f"{_LATEX_NAMES[a.fn]}{{{arg}}}" if single \
            else f"{_LATEX_NAMES[a.fn]}\\left({arg}\\right)"
    if isinstance(a, SumPow):
        return f"\\left({to_latex(a.base)}\\right)"
    raise ExprError(f"cannot render atom {a!r}")


def to_latex(e: Expr) -> str:
    if e.is_zero_expr:
        return "0"
    parts = []
    for i, (mono, coeff) in enumerate(e.terms):
        sign = "-" if coeff < 0 else "+"
        c = abs(coeff)
        factors = []
        for a, n in mono:
            s = _atom_latex(a)
            if n != 1:
                if isinstance(a, Func):
                    # exponent goes on the function name: \sin^{2}{x}
                    name, _, rest = s.partition("{")
                    s = f"{name}^{{{n}}}{{{rest}"
                else:
                    s = f"{s}^{{{n}}}"
            factors.append(s)
        if not factors:
            body = _frac_latex(c)
        elif c == 1:
            body = "\\,".join(factors)
        else:
            body = "\\,".join([_frac_latex(c)] + factors)
        if i == 0:
            parts.append(body if sign == "+" else "-" + body)
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


def _frac_latex(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"\\frac{{{c.numerator}}}{{{c.denominator}}}"
