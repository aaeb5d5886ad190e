"""CNF encodings of the Pigeonhole and Least Number principles.

Every generator returns an immutable :class:`Cnf`.  Exactly-one constraints of
the "with equality" variants are carried as ``equality_groups`` (indices into
``Cnf.clauses``) so the lifting code has a single input format.

Binary encodings use ``r = ceil(log2 n)`` bits.  Holes / witnesses ``a`` in
``[n]`` are written as ``bin(a) = a - 1`` on ``r`` bits with bit 1 the most
significant one.
"""
from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "Kind", "VariableId", "Literal", "Clause", "Cnf", "CnfError",
    "TemplateLiteral", "Pi2Signature", "LNP_SIGNATURE",
    "bits_needed", "bin_bits",
    "unary_lnp", "unary_lnp_eq", "unary_php", "unary_php_eq",
    "binary_php", "binary_lnp", "binarize",
    "to_dimacs", "from_dimacs", "encode",
]


class CnfError(ValueError):
    """Raised for malformed encodings or out-of-range instance parameters."""


class Kind(enum.IntEnum):
    P = 0
    S = 1
    PBit = 2
    SBit = 3
    Nu = 4
    OmegaBit = 5


BIT_KINDS = frozenset({Kind.PBit, Kind.SBit, Kind.OmegaBit})

_IDX_SLOTS = 4
_IDX_WIDTH = 16
_BIT_WIDTH = 8


@dataclass(frozen=True, order=True)
class VariableId:
    kind: Kind
    indices: tuple[int, ...]
    bit: int | None = None

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if (self.bit is not None) != (self.kind in BIT_KINDS):
            raise CnfError(f"bit must be given exactly for bit kinds: {self.kind.name}")
        if len(self.indices) > _IDX_SLOTS:
            raise CnfError("at most four indices per variable")
        if any(not 1 <= i < (1 << _IDX_WIDTH) for i in self.indices):
            raise CnfError(f"index out of range in {self.indices}")
        if self.bit is not None and not 1 <= self.bit < (1 << _BIT_WIDTH):
            raise CnfError(f"bit out of range: {self.bit}")

    @property
    def code(self) -> int:
        return _var_code(self)

    def __str__(self):
        idx = ",".join(map(str, self.indices))
        if self.bit is not None:
            return f"{self.kind.name}[{idx};{self.bit}]"
        return f"{self.kind.name}[{idx}]"

    @classmethod
    def parse(cls, text: str) -> "VariableId":
        m = _VAR_RE.fullmatch(text.strip())
        if m is None:
            raise CnfError(f"cannot parse variable name {text!r}")
        kind = Kind[m.group(1)]
        indices = tuple(int(t) for t in m.group(2).split(",") if t)
        bit = int(m.group(3)) if m.group(3) else None
        return cls(kind, indices, bit)


_VAR_RE = re.compile(r"(\w+)\[([\d,]*)(?:;(\d+))?\]")


@lru_cache(maxsize=None)
def _var_code(v: VariableId) -> int:
    c = int(v.kind)
    idx = v.indices + (0,) * (_IDX_SLOTS - len(v.indices))
    for i in idx:
        c = (c << _IDX_WIDTH) | i
    return (c << _BIT_WIDTH) | (v.bit or 0)


@lru_cache(maxsize=None)
def decode_var(code: int) -> VariableId:
    bit = code & ((1 << _BIT_WIDTH) - 1)
    code >>= _BIT_WIDTH
    idx = []
    for _ in range(_IDX_SLOTS):
        idx.append(code & ((1 << _IDX_WIDTH) - 1))
        code >>= _IDX_WIDTH
    indices = tuple(i for i in reversed(idx) if i)
    kind = Kind(code)
    return VariableId(kind, indices, bit if kind in BIT_KINDS else None)


@dataclass(frozen=True, order=True)
class Literal:
    """A variable with a sign.  Integer code: ``2 * var.code + positive``."""

    var: VariableId
    positive: bool = True

    @property
    def code(self) -> int:
        return (_var_code(self.var) << 1) | int(self.positive)

    def __invert__(self) -> "Literal":
        return Literal(self.var, not self.positive)

    def __str__(self):
        return str(self.var) if self.positive else f"~{self.var}"

    @classmethod
    def parse(cls, text: str) -> "Literal":
        text = text.strip()
        if text.startswith("~"):
            return cls(VariableId.parse(text[1:]), False)
        return cls(VariableId.parse(text), True)


@lru_cache(maxsize=None)
def decode_literal(code: int) -> Literal:
    return Literal(decode_var(code >> 1), bool(code & 1))


def P(i, j) -> VariableId:
    return VariableId(Kind.P, (i, j))


def S(i, j) -> VariableId:
    return VariableId(Kind.S, (i, j))


def pos(v: VariableId) -> Literal:
    return Literal(v, True)


def neg(v: VariableId) -> Literal:
    return Literal(v, False)


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals, stored sorted by literal code.

    Clauses containing a complementary pair are rejected unless
    ``allow_tautology`` is set; the transitivity template instantiated with
    repeated indices is the only generator that needs it.
    """

    literals: tuple[Literal, ...]

    def __init__(self, literals: Iterable[Literal], allow_tautology: bool = False):
        lits = tuple(sorted(set(literals), key=lambda l: l.code))
        if not lits:
            raise CnfError("empty clause")
        if not allow_tautology:
            seen = {l.code for l in lits}
            for l in lits:
                if l.code ^ 1 in seen:
                    raise CnfError(f"clause contains {l.var} in both polarities")
        object.__setattr__(self, "literals", lits)

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(l.code for l in self.literals)

    @property
    def is_tautology(self) -> bool:
        codes = set(self.codes)
        return any(c ^ 1 in codes for c in codes)

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def __str__(self):
        return " | ".join(map(str, self.literals))


@dataclass(frozen=True)
class Cnf:
    variables: tuple[VariableId, ...]
    clauses: tuple[Clause, ...]
    equality_groups: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict, compare=False, hash=False)
    labels: tuple[tuple, ...] = field(default=(), compare=False)

    def __post_init__(self):
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise CnfError("duplicate variable declaration")
        for c in self.clauses:
            for l in c:
                if l.var not in declared:
                    raise CnfError(f"undeclared variable {l.var}")
        for g in self.equality_groups:
            if not 0 <= g < len(self.clauses):
                raise CnfError(f"equality group {g} does not name a clause")
        if self.labels and len(self.labels) != len(self.clauses):
            raise CnfError("labels must match clauses one-to-one")

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def label(self, index: int) -> tuple:
        return self.labels[index] if self.labels else ("clause", (index,))

    def with_equalities(self, groups: Sequence[int], **meta) -> "Cnf":
        return Cnf(self.variables, self.clauses, tuple(groups),
                   {**self.meta, **meta}, self.labels)


class _Builder:
    def __init__(self):
        self.variables: dict[VariableId, None] = {}
        self.clauses: list[Clause] = []
        self.labels: list[tuple] = []
        self._seen: dict[tuple[int, ...], int] = {}

    def declare(self, v: VariableId) -> VariableId:
        self.variables.setdefault(v, None)
        return v

    def add(self, lits, label, allow_tautology=False, dedupe=False) -> int:
        c = Clause(lits, allow_tautology=allow_tautology)
        if dedupe:
            key = c.codes
            if key in self._seen:
                return self._seen[key]
            self._seen[key] = len(self.clauses)
        for l in c:
            self.declare(l.var)
        self.clauses.append(c)
        self.labels.append(label)
        return len(self.clauses) - 1

    def build(self, groups=(), **meta) -> Cnf:
        return Cnf(tuple(self.variables), tuple(self.clauses), tuple(groups),
                   meta, tuple(self.labels))


def bits_needed(n: int) -> int:
    """``ceil(log2 n)``, at least one bit."""
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def bin_bits(a: int, r: int) -> tuple[int, ...]:
    """Bits of ``bin(a) = a - 1`` on ``r`` bits, most significant first."""
    x = a - 1
    if not 0 <= x < (1 << r):
        raise CnfError(f"{a} does not fit in {r} bits")
    return tuple((x >> (r - 1 - k)) & 1 for k in range(r))


def _bit_literals(kind: Kind, owner: tuple[int, ...], a: int, r: int, exponent_flip: bool):
    # exponent 1 - a_k when exponent_flip, else a_k
    out = []
    for k, ak in enumerate(bin_bits(a, r), start=1):
        e = 1 - ak if exponent_flip else ak
        out.append(Literal(VariableId(kind, owner, k), bool(e)))
    return out


# -- Least Number Principle ------------------------------------------------

def _check_n(n: int, low: int = 2):
    if not isinstance(n, int) or n < low:
        raise CnfError(f"n must be an integer >= {low}, got {n!r}")


def _lnp_order_clauses(b: _Builder, n: int):
    for i in range(1, n + 1):
        b.add([neg(P(i, i))], ("self", (i,)))
    for i, j, k in itertools.product(range(1, n + 1), repeat=3):
        b.add([neg(P(i, j)), neg(P(j, k)), pos(P(i, k))], ("trans", (i, j, k)),
              allow_tautology=True)


def unary_lnp(n: int) -> Cnf:
    _check_n(n)
    b = _Builder()
    for i, j in itertools.product(range(1, n + 1), repeat=2):
        b.declare(P(i, j))
    for i, j in itertools.product(range(1, n + 1), repeat=2):
        b.declare(S(i, j))
    _lnp_order_clauses(b, n)
    for i, j in itertools.product(range(1, n + 1), repeat=2):
        b.add([neg(S(i, j)), pos(P(i, j))], ("impl", (i, j)))
    for j in range(1, n + 1):
        b.add([pos(S(i, j)) for i in range(1, n + 1)], ("lower", (j,)))
    return b.build(principle="lnp", encoding="unary", n=n)


def unary_lnp_eq(n: int) -> Cnf:
    base = unary_lnp(n)
    groups = [i for i, lab in enumerate(base.labels) if lab[0] == "lower"]
    return base.with_equalities(groups, encoding="unary-eq")


def binary_lnp(n: int) -> Cnf:
    """Binary LNP: ``OR_k SBit[j;k]^(1-a_k) | P[j,a]`` for every ``j, a``."""
    _check_n(n)
    r = bits_needed(n)
    b = _Builder()
    for i, j in itertools.product(range(1, n + 1), repeat=2):
        b.declare(P(i, j))
    for j in range(1, n + 1):
        for k in range(1, r + 1):
            b.declare(VariableId(Kind.SBit, (j,), k))
    _lnp_order_clauses(b, n)
    for j, a in itertools.product(range(1, n + 1), repeat=2):
        lits = _bit_literals(Kind.SBit, (j,), a, r, exponent_flip=True) + [pos(P(j, a))]
        b.add(lits, ("skolem", (j, a)))
    for j in range(1, n + 1):
        for a in range(n + 1, (1 << r) + 1):
            b.add(_bit_literals(Kind.SBit, (j,), a, r, exponent_flip=True), ("forbid", (j, a)))
    return b.build(principle="lnp", encoding="binary", n=n, bits=r)


# -- Pigeonhole Principle --------------------------------------------------

def _check_php(m: int, n: int, low: int):
    _check_n(n, low)
    if not isinstance(m, int) or m <= n:
        raise CnfError(f"need m > n, got m={m}, n={n}")


def unary_php(m: int, n: int) -> Cnf:
    _check_php(m, n, 1)
    b = _Builder()
    for i, j in itertools.product(range(1, m + 1), range(1, n + 1)):
        b.declare(P(i, j))
    for i in range(1, m + 1):
        b.add([pos(P(i, j)) for j in range(1, n + 1)], ("pigeon", (i,)))
    for i, i2 in itertools.combinations(range(1, m + 1), 2):
        for j in range(1, n + 1):
            b.add([neg(P(i, j)), neg(P(i2, j))], ("hole", (i, i2, j)))
    return b.build(principle="php", encoding="unary", m=m, n=n)


def unary_php_eq(m: int, n: int) -> Cnf:
    base = unary_php(m, n)
    groups = [i for i, lab in enumerate(base.labels) if lab[0] == "pigeon"]
    return base.with_equalities(groups, encoding="unary-eq")


def binary_php(m: int, n: int, holes: Iterable[int] | None = None) -> Cnf:
    """Binary PHP with ``ceil(log2 n)`` bits per pigeon and no Skolem variables.

    ``holes`` restricts pigeons to a subset ``H`` of ``[n]``: the bit patterns
    of the remaining holes are forbidden per pigeon, the same way patterns
    beyond ``n`` are forbidden when ``n`` is not a power of two.
    """
    _check_n(n, 2)
    if not isinstance(m, int) or m < 2:
        raise CnfError(f"need at least two pigeons, got m={m}")
    H = sorted(set(holes)) if holes is not None else list(range(1, n + 1))
    if not H or any(not 1 <= h <= n for h in H):
        raise CnfError(f"hole subset {H} not inside [1, {n}]")
    if m <= len(H):
        raise CnfError(f"need m > |H|, got m={m}, |H|={len(H)}")
    r = bits_needed(n)
    b = _Builder()
    for i in range(1, m + 1):
        for k in range(1, r + 1):
            b.declare(VariableId(Kind.PBit, (i,), k))
    for i, i2 in itertools.combinations(range(1, m + 1), 2):
        for a in H:
            lits = (_bit_literals(Kind.PBit, (i,), a, r, True)
                    + _bit_literals(Kind.PBit, (i2,), a, r, True))
            b.add(lits, ("bhole", (i, i2, a)))
    banned = [a for a in range(1, (1 << r) + 1) if a not in H]
    for i in range(1, m + 1):
        for a in banned:
            b.add(_bit_literals(Kind.PBit, (i,), a, r, True), ("forbid", (i, a)))
    meta = dict(principle="php", encoding="binary", m=m, n=n, bits=r)
    if holes is not None:
        meta["holes"] = tuple(H)
    return b.build(**meta)


# -- generic binarization of Pi_2 principles -------------------------------

@dataclass(frozen=True)
class TemplateLiteral:
    """A literal of a clause template.

    ``relation is None`` denotes the witness atom ``v_w``; otherwise ``args``
    names universal variables or the witness variable.
    """

    relation: str | None
    args: tuple[str, ...] = ()
    positive: bool = True


@dataclass(frozen=True)
class Pi2Signature:
    relations: tuple[tuple[str, int], ...]
    universals: tuple[str, ...]
    clauses: tuple[tuple[TemplateLiteral, ...], ...]
    witness: str = "w"
    witness_depends_on: tuple[str, ...] | None = None

    def validate(self):
        arity = dict(self.relations)
        names = set(self.universals) | {self.witness}
        deps = self.witness_depends_on
        if deps is not None and not set(deps) <= set(self.universals):
            raise CnfError("witness may only depend on universal variables")
        for tmpl in self.clauses:
            if sum(1 for t in tmpl if t.relation is None) > 1:
                raise CnfError("one witness literal per clause template; split multi-witness signatures")
            for t in tmpl:
                if t.relation is None:
                    continue
                if t.relation not in arity:
                    raise CnfError(f"undeclared relation {t.relation!r}")
                if len(t.args) != arity[t.relation]:
                    raise CnfError(f"arity mismatch for {t.relation!r}")
                if not set(t.args) <= names:
                    raise CnfError(f"unknown variable in {t.relation}{t.args}")


def _rel(name, *args, positive=True):
    return TemplateLiteral(name, tuple(args), positive)


LNP_SIGNATURE = Pi2Signature(
    relations=(("R", 2),),
    universals=("x", "y", "z"),
    clauses=(
        (_rel("R", "x", "x", positive=False),),
        (_rel("R", "x", "y", positive=False), _rel("R", "y", "z", positive=False), _rel("R", "x", "z")),
        (TemplateLiteral(None), _rel("R", "x", "w")),
    ),
    witness_depends_on=("x",),
)


def binarize(sig: Pi2Signature, n: int) -> Cnf:
    """Binary encoding of a single-witness Pi_2 principle over domain ``[n]``.

    Relation atoms become ``Nu[rel, args]`` unchanged in polarity; a witness
    literal ``v_w`` becomes ``OR_i Omega_i^(1-z_i)`` and ``~v_w`` becomes
    ``OR_i Omega_i^(z_i)`` with ``z = bin(w)``; patterns above ``n`` are
    forbidden.  Templates made only of the witness literal are implied by the
    bit representation and produce no clause.
    """
    _check_n(n)
    sig.validate()
    r = bits_needed(n)
    rel_id = {name: k for k, (name, _) in enumerate(sig.relations, start=1)}
    deps = sig.witness_depends_on if sig.witness_depends_on is not None else sig.universals
    b = _Builder()
    dep_tuples = list(itertools.product(range(1, n + 1), repeat=len(deps)))
    for dt in dep_tuples:
        for k in range(1, r + 1):
            b.declare(VariableId(Kind.OmegaBit, dt, k))
    for t_idx, tmpl in enumerate(sig.clauses):
        if all(t.relation is None for t in tmpl):
            continue
        used = [u for u in sig.universals if any(u in t.args for t in tmpl)]
        has_witness = any(t.relation is None for t in tmpl)
        if has_witness:
            used = sorted(set(used) | set(deps), key=sig.universals.index)
        ranged = used + ([sig.witness] if has_witness or any(sig.witness in t.args for t in tmpl) else [])
        for values in itertools.product(range(1, n + 1), repeat=len(ranged)):
            env = dict(zip(ranged, values))
            lits = []
            for t in tmpl:
                if t.relation is None:
                    owner = tuple(env[d] for d in deps)
                    lits += _bit_literals(Kind.OmegaBit, owner, env[sig.witness], r,
                                          exponent_flip=t.positive)
                else:
                    v = VariableId(Kind.Nu, (rel_id[t.relation],) + tuple(env[a] for a in t.args))
                    lits.append(Literal(v, t.positive))
            b.add(lits, ("template", (t_idx,) + values), allow_tautology=True, dedupe=True)
    for dt in dep_tuples:
        for a in range(n + 1, (1 << r) + 1):
            b.add(_bit_literals(Kind.OmegaBit, dt, a, r, True), ("forbid", dt + (a,)), dedupe=True)
    return b.build(principle="pi2", encoding="binary", n=n, bits=r)


# -- DIMACS ----------------------------------------------------------------

def to_dimacs(cnf: Cnf) -> str:
    index = {v: k for k, v in enumerate(cnf.variables, start=1)}
    out = []
    meta = " ".join(f"{k}={_meta_str(v)}" for k, v in sorted(cnf.meta.items()))
    if meta:
        out.append(f"c meta {meta}")
    for v, k in index.items():
        out.append(f"c var {k} = {v}")
    for g in cnf.equality_groups:
        out.append(f"c eqgroup {g}")
    out.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    for c in cnf.clauses:
        out.append(" ".join(str(index[l.var] if l.positive else -index[l.var]) for l in c) + " 0")
    return "\n".join(out) + "\n"


def _meta_str(v) -> str:
    if isinstance(v, tuple):
        return ",".join(map(str, v))
    return str(v)


def from_dimacs(text: str) -> Cnf:
    """Parse DIMACS produced by :func:`to_dimacs`.

    Variables without a ``c var`` line are named ``Nu[k]``.
    """
    names: dict[int, VariableId] = {}
    groups: list[int] = []
    meta: dict = {}
    nvars = None
    raw: list[list[int]] = []
    pending: list[int] = []
    for line in text.splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("c"):
            parts = s.split()
            if len(parts) >= 5 and parts[1] == "var" and parts[3] == "=":
                names[int(parts[2])] = VariableId.parse(parts[4])
            elif len(parts) == 3 and parts[1] == "eqgroup":
                groups.append(int(parts[2]))
            elif len(parts) >= 2 and parts[1] == "meta":
                for kv in parts[2:]:
                    k, _, v = kv.partition("=")
                    meta[k] = _parse_meta(v)
            continue
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise CnfError(f"bad problem line {s!r}")
            nvars = int(parts[2])
            continue
        for tok in s.split():
            x = int(tok)
            if x == 0:
                raw.append(pending)
                pending = []
            else:
                pending.append(x)
    if pending:
        raw.append(pending)
    if nvars is None:
        raise CnfError("missing problem line")
    variables = tuple(names.get(k, VariableId(Kind.Nu, (k,))) for k in range(1, nvars + 1))
    clauses = []
    for lits in raw:
        clauses.append(Clause([Literal(variables[abs(x) - 1], x > 0) for x in lits],
                              allow_tautology=True))
    return Cnf(variables, tuple(clauses), tuple(groups), meta)


def _parse_meta(v: str):
    if "," in v:
        return tuple(int(t) for t in v.split(","))
    try:
        return int(v)
    except ValueError:
        return v


def encode(principle: str, encoding: str, n: int, m: int | None = None) -> Cnf:
    """Dispatch used by the command line."""
    principle, encoding = principle.lower(), encoding.lower()
    if principle == "lnp":
        table = {"unary": unary_lnp, "unary-eq": unary_lnp_eq, "binary": binary_lnp}
        if encoding not in table:
            raise CnfError(f"unknown LNP encoding {encoding!r}")
        return table[encoding](n)
    if principle == "php":
        m = n + 1 if m is None else m
        table = {"unary": unary_php, "unary-eq": unary_php_eq, "binary": binary_php}
        if encoding not in table:
            raise CnfError(f"unknown PHP encoding {encoding!r}")
        return table[encoding](m, n)
    raise CnfError(f"unknown principle {principle!r}")
