"""Multilinear terms and rational linear forms.

A :class:`Term` is a conjunction of literals kept as a sorted tuple of literal
codes, so structural equality is semantic equality.  A conjunction holding a
variable in both polarities collapses to the singleton :data:`ZERO`.
Coefficients are ``int`` or :class:`fractions.Fraction`; no floats.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from numbers import Rational
from typing import Callable, Iterable, Iterator, Mapping

from .principles import Literal, VariableId, decode_literal

__all__ = [
    "Term", "ZERO", "UNIT", "LinearForm", "canonical_term", "term_of",
    "multiply", "linearize_square", "positive_expansion", "to_rational",
    "rational_str", "parse_rational",
]


class Term(tuple):
    """Sorted, duplicate-free tuple of literal codes."""

    __slots__ = ()

    @property
    def is_zero(self) -> bool:
        return self is ZERO

    @property
    def degree(self) -> int:
        return 0 if self is ZERO else len(self)

    @property
    def literals(self) -> tuple[Literal, ...]:
        if self is ZERO:
            return ()
        return tuple(decode_literal(c) for c in self)

    @property
    def variables(self) -> tuple[VariableId, ...]:
        return tuple(l.var for l in self.literals)

    @property
    def negatives(self) -> int:
        return sum(1 for c in self if not c & 1) if self is not ZERO else 0

    def __and__(self, other: "Term") -> "Term":
        if self is ZERO or other is ZERO:
            return ZERO
        return _canon(self + other)

    def __repr__(self):
        return f"Term({self})"

    def __str__(self):
        if self is ZERO:
            return "0"
        if not self:
            return "1"
        return "*".join(str(decode_literal(c)) for c in self)

    def to_json(self):
        return [str(l) for l in self.literals] if self is not ZERO else None

    @classmethod
    def from_json(cls, data) -> "Term":
        if data is None:
            return ZERO
        return canonical_term(Literal.parse(s) for s in data)

    @classmethod
    def parse(cls, text: str) -> "Term":
        text = text.strip()
        if text == "0":
            return ZERO
        if text in ("1", ""):
            return UNIT
        return canonical_term(Literal.parse(s) for s in text.split("*"))


ZERO = Term((-1,))
UNIT = Term(())


def _canon(codes) -> Term:
    s = set(codes)
    for c in s:
        if c ^ 1 in s:
            return ZERO
    return Term(sorted(s))


def canonical_term(lits: Iterable[Literal | int]) -> Term:
    """Sort and deduplicate; complementary literals give :data:`ZERO`."""
    codes = []
    for l in lits:
        codes.append(l if isinstance(l, int) else l.code)
    return _canon(codes)


def term_of(*lits) -> Term:
    return canonical_term(lits)


def to_rational(x) -> int | Fraction:
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, Rational):
        return to_rational(Fraction(x.numerator, x.denominator))
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"not an exact rational: {x!r}")


def rational_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> int | Fraction:
    return to_rational(Fraction(s))


class LinearForm:
    """Rational combination of terms; the unit term carries the constant."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[Term, object] | Iterable[tuple[Term, object]] = ()):
        self._c: dict[Term, int | Fraction] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for t, v in items:
            self._add(t, to_rational(v))

    @classmethod
    def _raw(cls, d: dict) -> "LinearForm":
        f = cls.__new__(cls)
        f._c = d
        return f

    def _add(self, t: Term, v):
        if t is ZERO or not v:
            return
        nv = self._c.get(t, 0) + v
        if nv:
            self._c[t] = nv.numerator if isinstance(nv, Fraction) and nv.denominator == 1 else nv
        else:
            self._c.pop(t, None)

    @classmethod
    def constant(cls, v) -> "LinearForm":
        return cls({UNIT: v})

    @classmethod
    def of_term(cls, t: Term, v=1) -> "LinearForm":
        return cls({t: v})

    def __getitem__(self, t: Term):
        return self._c.get(t, 0)

    def __contains__(self, t):
        return t in self._c

    def __iter__(self) -> Iterator[Term]:
        return iter(self._c)

    def __len__(self):
        return len(self._c)

    def __bool__(self):
        return bool(self._c)

    def items(self):
        return self._c.items()

    def terms(self):
        return self._c.keys()

    @property
    def const(self):
        return self._c.get(UNIT, 0)

    @property
    def degree(self) -> int:
        return max((len(t) for t in self._c), default=0)

    def is_constant(self) -> bool:
        return all(not t for t in self._c)

    def copy(self) -> "LinearForm":
        return LinearForm._raw(dict(self._c))

    def __eq__(self, other):
        if isinstance(other, LinearForm):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == ({UNIT: other} if other else {})
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __neg__(self):
        return LinearForm._raw({t: -v for t, v in self._c.items()})

    def __add__(self, other):
        out = self.copy()
        out.iadd(other)
        return out

    __radd__ = __add__

    def __sub__(self, other):
        out = self.copy()
        out.iadd(other, -1)
        return out

    def __rsub__(self, other):
        return (-self) + other

    def iadd(self, other, scale=1) -> "LinearForm":
        """In-place ``self += scale * other``."""
        if isinstance(other, LinearForm):
            if scale == 1:
                for t, v in other._c.items():
                    self._add(t, v)
            else:
                for t, v in other._c.items():
                    self._add(t, v * scale)
        elif isinstance(other, Term):
            self._add(other, to_rational(scale))
        else:
            self._add(UNIT, to_rational(other) * scale)
        return self

    def __mul__(self, other):
        if isinstance(other, LinearForm):
            return multiply(self, other)
        if isinstance(other, Term):
            return multiply(self, LinearForm.of_term(other))
        k = to_rational(other)
        if not k:
            return LinearForm()
        return LinearForm._raw({t: to_rational(v * k) for t, v in self._c.items()})

    __rmul__ = __mul__

    def map_terms(self, fn: Callable[[Term], Term]) -> "LinearForm":
        out = LinearForm()
        for t, v in self._c.items():
            out._add(fn(t), v)
        return out

    def substitute(self, fn: Callable[[Term], "LinearForm"]) -> "LinearForm":
        out = LinearForm()
        for t, v in self._c.items():
            out.iadd(fn(t), v)
        return out

    def evaluate(self, value: Callable[[Term], object] | Mapping[Term, object]):
        get = value.__getitem__ if isinstance(value, Mapping) else value
        total = 0
        for t, v in self._c.items():
            total += v * (1 if not t else get(t))
        return to_rational(total) if isinstance(total, (int, Fraction)) else total

    def evaluate_assignment(self, assignment: Mapping[VariableId, bool]):
        """Value at a 0/1 point: a term is 1 iff all its literals hold."""
        def tv(t: Term):
            return int(all(assignment[l.var] == l.positive for l in t.literals))
        return self.evaluate(tv)

    def sorted_items(self):
        return sorted(self._c.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def __repr__(self):
        return f"LinearForm({self})"

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for t, v in self.sorted_items():
            sv = rational_str(v)
            if not t:
                parts.append(sv)
            elif v == 1:
                parts.append(str(t))
            elif v == -1:
                parts.append(f"-{t}")
            else:
                parts.append(f"{sv}*{t}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> list:
        return [[t.to_json(), rational_str(v)] for t, v in self.sorted_items()]

    @classmethod
    def from_json(cls, data) -> "LinearForm":
        return cls((Term.from_json(t), parse_rational(v)) for t, v in data)


def multiply(a: LinearForm, b: LinearForm) -> LinearForm:
    """Multilinear product: idempotent literals, contradictions vanish."""
    out: dict = {}
    for ta, va in a.items():
        for tb, vb in b.items():
            t = ta & tb if ta and tb else (ta or tb)
            if t is ZERO:
                continue
            nv = out.get(t, 0) + va * vb
            if nv:
                out[t] = to_rational(nv)
            else:
                out.pop(t, None)
    return LinearForm._raw(out)


def linearize_square(p: LinearForm) -> LinearForm:
    """The linearised square ``p * p``; non-negative at every 0/1 point."""
    return multiply(p, p)


_EXPANSIONS: dict[Term, LinearForm] = {}


def positive_expansion(t: Term) -> LinearForm:
    """Rewrite ``t`` over terms without negated literals.

    ``D & ~x1 & ... & ~xk = sum_{A <= {x1..xk}} (-1)^|A| (D & A)``.
    """
    hit = _EXPANSIONS.get(t)
    if hit is not None:
        return hit
    if t is ZERO:
        return LinearForm()
    posc = [c for c in t if c & 1]
    negc = [c | 1 for c in t if not c & 1]
    d: dict = {}
    for k in range(len(negc) + 1):
        sign = -1 if k % 2 else 1
        for sub in combinations(negc, k):
            d[Term(sorted(posc + list(sub)))] = sign
    f = LinearForm._raw(d)
    _EXPANSIONS[t] = f
    return f
