"""Sherali-Adams lifts of a CNF and their symmetry quotients.

``lift_system(cnf, r)`` describes the polytope ``P_r``: every clause, negation
equality and bounding inequality multiplied by every non-zero conjunction
``D`` of at most ``r`` literals.  Constraints carry their provenance so a
certificate can name the exact axiom instances it uses.  Systems are lazy:
constraints are regenerated from a provenance on demand, and only streamed or
materialised when a solver asks for all of them.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Union

from .principles import Clause, Cnf, Kind, Literal, VariableId, decode_literal
from .terms import UNIT, ZERO, LinearForm, Term, positive_expansion

__all__ = [
    "Relation", "ClauseLift", "EqualityGroupLift", "NegationLift", "BoundLift",
    "Derived", "Provenance", "Constraint", "LiftedSystem", "QuotientSystem",
    "IndexSymmetry", "BitAffineSymmetry", "SymmetryError", "ResourceLimitExceeded", "SystemError_",
    "lift_clause", "lift_negation", "lift_bound", "lift_system", "symmetrize",
    "term_universe_size", "DEFAULT_TERM_CAP",
]

DEFAULT_TERM_CAP = 2_000_000


class Relation(str, enum.Enum):
    GEQ = "geq0"
    EQ = "eq0"


class ResourceLimitExceeded(RuntimeError):
    def __init__(self, what: str, count: int, cap: int):
        super().__init__(f"{what}: projected {count} exceeds cap {cap}")
        self.count = count
        self.cap = cap


class SystemError_(ValueError):
    """A provenance that does not name a constraint of the system."""


class SymmetryError(ValueError):
    def __init__(self, msg: str, witness=None):
        super().__init__(msg)
        self.witness = witness


# -- provenance -------------------------------------------------------------

@dataclass(frozen=True)
class ClauseLift:
    clause: int
    lift: Term

    def describe(self, cnf: Cnf | None = None) -> str:
        lab = _label(cnf, self.clause)
        return f"{lab} * {self.lift}"


@dataclass(frozen=True)
class EqualityGroupLift:
    group: int
    lift: Term

    def describe(self, cnf: Cnf | None = None) -> str:
        clause = cnf.equality_groups[self.group] if cnf is not None else self.group
        return f"{_label(cnf, clause)}= * {self.lift}"


@dataclass(frozen=True)
class NegationLift:
    var: VariableId
    lift: Term

    def describe(self, cnf=None) -> str:
        return f"neg[{self.var}] * {self.lift}"


@dataclass(frozen=True)
class BoundLift:
    literal: Literal
    lift: Term
    upper: bool

    def describe(self, cnf=None) -> str:
        side = "upper" if self.upper else "lower"
        return f"bound-{side}[{self.literal}] * {self.lift}"


@dataclass(frozen=True)
class Derived:
    label: str

    def describe(self, cnf=None) -> str:
        return f"derived[{self.label}]"


Provenance = Union[ClauseLift, EqualityGroupLift, NegationLift, BoundLift, Derived]


def _label(cnf, idx):
    if cnf is None or not cnf.labels:
        return f"clause#{idx}"
    name, params = cnf.labels[idx]
    return f"{name}{tuple(params)}" if len(params) != 1 else f"{name}({params[0]})"


def provenance_to_json(p: Provenance) -> dict:
    if isinstance(p, ClauseLift):
        return {"type": "clause", "clause": p.clause, "lift": p.lift.to_json()}
    if isinstance(p, EqualityGroupLift):
        return {"type": "eqgroup", "group": p.group, "lift": p.lift.to_json()}
    if isinstance(p, NegationLift):
        return {"type": "negation", "var": str(p.var), "lift": p.lift.to_json()}
    if isinstance(p, BoundLift):
        return {"type": "bound", "literal": str(p.literal), "upper": p.upper,
                "lift": p.lift.to_json()}
    return {"type": "derived", "label": p.label}


def provenance_from_json(d: dict) -> Provenance:
    t = d["type"]
    if t == "clause":
        return ClauseLift(d["clause"], Term.from_json(d["lift"]))
    if t == "eqgroup":
        return EqualityGroupLift(d["group"], Term.from_json(d["lift"]))
    if t == "negation":
        return NegationLift(VariableId.parse(d["var"]), Term.from_json(d["lift"]))
    if t == "bound":
        return BoundLift(Literal.parse(d["literal"]), Term.from_json(d["lift"]), d["upper"])
    if t == "derived":
        return Derived(d["label"])
    raise SystemError_(f"unknown provenance type {t!r}")


@dataclass(frozen=True)
class Constraint:
    form: LinearForm
    relation: Relation
    provenance: Provenance

    def holds_at(self, value) -> bool:
        v = self.form.evaluate(value)
        return v >= 0 if self.relation is Relation.GEQ else v == 0

    def to_json(self) -> dict:
        return {"relation": self.relation.value,
                "provenance": provenance_to_json(self.provenance),
                "form": self.form.to_json()}


# -- single lifts -----------------------------------------------------------

def _check_lift(d: Term):
    if d is ZERO:
        raise SystemError_("lift term must be non-zero")


def lift_clause(c: Clause, d: Term, *, equality: bool = False,
                provenance: Provenance | None = None) -> Constraint:
    """``sum_i Z(l_i & D) - Z(D) >= 0`` (``= 0`` for equality groups)."""
    _check_lift(d)
    form = LinearForm()
    for code in c.codes:
        form.iadd(d & Term((code,)))
    form.iadd(d, -1)
    rel = Relation.EQ if equality else Relation.GEQ
    return Constraint(form, rel, provenance or Derived(f"lift of ({c}) by {d}"))


def lift_negation(v: VariableId, d: Term, provenance: Provenance | None = None) -> Constraint:
    """``Z(v & D) + Z(~v & D) - Z(D) = 0``."""
    _check_lift(d)
    code = Literal(v, True).code
    form = LinearForm()
    form.iadd(d & Term((code,)))
    form.iadd(d & Term((code ^ 1,)))
    form.iadd(d, -1)
    return Constraint(form, Relation.EQ, provenance or NegationLift(v, d))


def lift_bound(l: Literal, d: Term) -> tuple[Constraint, Constraint]:
    """``Z(l & D) >= 0`` and ``Z(D) - Z(l & D) >= 0``."""
    _check_lift(d)
    ld = d & Term((l.code,))
    lower = LinearForm()
    lower.iadd(ld)
    upper = LinearForm()
    upper.iadd(d)
    upper.iadd(ld, -1)
    return (Constraint(lower, Relation.GEQ, BoundLift(l, d, False)),
            Constraint(upper, Relation.GEQ, BoundLift(l, d, True)))


# -- full system ------------------------------------------------------------

def term_universe_size(num_vars: int, r: int) -> int:
    """Non-zero terms of degree at most ``r + 1`` over ``num_vars`` variables."""
    return sum(math.comb(num_vars, k) * 2 ** k for k in range(0, min(r + 1, num_vars) + 1))


class LiftedSystem:
    """The rank-``r`` Sherali-Adams system of a CNF."""

    def __init__(self, cnf: Cnf, rank: int, term_cap: int | None = DEFAULT_TERM_CAP):
        if rank < 0:
            raise ValueError("rank must be >= 0")
        self.cnf = cnf
        self.rank = rank
        self.term_cap = term_cap
        self._clause_codes = [c.codes for c in cnf.clauses]
        self._eq_of_clause = {c: g for g, c in enumerate(cnf.equality_groups)}
        self._var_codes = sorted(v.code for v in cnf.variables)
        self._declared = set(self._var_codes)
        if term_cap is not None:
            size = self.term_universe_size
            if size > term_cap:
                raise ResourceLimitExceeded("term universe", size, term_cap)

    @property
    def term_universe_size(self) -> int:
        return term_universe_size(self.cnf.num_vars, self.rank)

    @property
    def num_lift_terms(self) -> int:
        return term_universe_size(self.cnf.num_vars, self.rank - 1) if self.rank else 1

    @property
    def projected_constraints(self) -> int:
        per = len(self.cnf.clauses) + self.cnf.num_vars + 4 * self.cnf.num_vars
        return per * self.num_lift_terms

    def lift_terms(self) -> Iterator[Term]:
        """Non-zero conjunctions of at most ``rank`` literals, canonical order."""
        yield UNIT
        for k in range(1, self.rank + 1):
            for vs in itertools.combinations(self._var_codes, k):
                for signs in itertools.product((0, 1), repeat=k):
                    yield Term(sorted((v << 1) | s for v, s in zip(vs, signs)))

    def _check_term(self, d: Term):
        if d is ZERO:
            raise SystemError_("zero lift term")
        if len(d) > self.rank:
            raise SystemError_(f"lift term {d} exceeds rank {self.rank}")
        for c in d:
            if c >> 1 not in self._declared:
                raise SystemError_(f"lift term {d} uses an undeclared variable")

    def constraint(self, p: Provenance) -> Constraint:
        """Regenerate and validate the constraint named by ``p``."""
        if isinstance(p, ClauseLift):
            self._check_term(p.lift)
            if not 0 <= p.clause < len(self.cnf.clauses) or p.clause in self._eq_of_clause:
                raise SystemError_(f"no plain clause #{p.clause}")
            return self._lift_codes(self._clause_codes[p.clause], p.lift, Relation.GEQ, p)
        if isinstance(p, EqualityGroupLift):
            self._check_term(p.lift)
            if not 0 <= p.group < len(self.cnf.equality_groups):
                raise SystemError_(f"no equality group #{p.group}")
            codes = self._clause_codes[self.cnf.equality_groups[p.group]]
            return self._lift_codes(codes, p.lift, Relation.EQ, p)
        if isinstance(p, NegationLift):
            self._check_term(p.lift)
            if p.var.code not in self._declared:
                raise SystemError_(f"undeclared variable {p.var}")
            return lift_negation(p.var, p.lift, p)
        if isinstance(p, BoundLift):
            self._check_term(p.lift)
            if p.literal.var.code not in self._declared:
                raise SystemError_(f"undeclared variable {p.literal.var}")
            lo, up = lift_bound(p.literal, p.lift)
            return up if p.upper else lo
        raise SystemError_(f"{p!r} is not an axiom instance of this system")

    @staticmethod
    def _lift_codes(codes, d: Term, rel: Relation, prov) -> Constraint:
        form = LinearForm()
        for code in codes:
            form.iadd(d & Term((code,)))
        form.iadd(d, -1)
        return Constraint(form, rel, prov)

    def iter_constraints(self, skip_trivial: bool = True,
                         lifts: Iterable[Term] | None = None) -> Iterator[Constraint]:
        """Stream every constraint in canonical order.

        Order: for each lift term, clause lifts, negation lifts, bound lifts.
        Identically-zero forms (``0 >= 0``) are skipped unless asked for.
        ``lifts`` restricts the lift terms used.
        """
        ncl = len(self.cnf.clauses)
        lits = [(vc << 1) | s for vc in self._var_codes for s in (1, 0)]
        for d in (self.lift_terms() if lifts is None else lifts):
            for ci in range(ncl):
                g = self._eq_of_clause.get(ci)
                if g is None:
                    c = self._lift_codes(self._clause_codes[ci], d, Relation.GEQ, ClauseLift(ci, d))
                else:
                    c = self._lift_codes(self._clause_codes[ci], d, Relation.EQ, EqualityGroupLift(g, d))
                if c.form or not skip_trivial:
                    yield c
            for vc in self._var_codes:
                c = lift_negation(_var(vc), d)
                if c.form or not skip_trivial:
                    yield c
            for lc in lits:
                lo, up = lift_bound(decode_literal(lc), d)
                if lo.form or not skip_trivial:
                    yield lo
                if up.form or not skip_trivial:
                    yield up

    @cached_property
    def constraints(self) -> list[Constraint]:
        return list(self.iter_constraints())

    # hooks used by the LP layer
    def image(self, form: LinearForm) -> LinearForm:
        return form

    def expansion(self, t: Term) -> LinearForm:
        return positive_expansion(t)

    def negation_provenance(self, t: Term) -> Provenance:
        """Negation lift removing the first negated literal of ``t``."""
        for c in t:
            if not c & 1:
                return NegationLift(decode_literal(c).var, Term(x for x in t if x != c))
        raise SystemError_(f"{t} has no negated literal")

    def describe(self, p: Provenance) -> str:
        return p.describe(self.cnf)

    def to_jsonl(self, stream) -> int:
        n = 0
        for c in self.iter_constraints():
            stream.write(json.dumps(c.to_json(), separators=(",", ":")) + "\n")
            n += 1
        return n


def _var(vcode: int) -> VariableId:
    return decode_literal(vcode << 1).var


def lift_system(cnf: Cnf, r: int, term_cap: int | None = DEFAULT_TERM_CAP) -> LiftedSystem:
    return LiftedSystem(cnf, r, term_cap)


# -- symmetry ---------------------------------------------------------------

@dataclass(frozen=True)
class IndexSymmetry:
    """Independent relabelling of index sorts.

    ``sorts`` maps a variable kind to the sort of each index position
    (``None`` for positions the group fixes); ``sizes`` gives each sort's
    range ``1..size``.
    """

    sorts: tuple[tuple[Kind, tuple[str | None, ...]], ...]
    sizes: tuple[tuple[str, int], ...]

    @cached_property
    def _sorts(self) -> dict:
        return dict(self.sorts)

    @cached_property
    def _sizes(self) -> dict:
        return dict(self.sizes)

    @classmethod
    def for_cnf(cls, cnf: Cnf) -> "IndexSymmetry":
        meta = cnf.meta
        principle, enc = meta.get("principle"), meta.get("encoding")
        if principle == "lnp" and enc in ("unary", "unary-eq"):
            return cls(((Kind.P, ("e", "e")), (Kind.S, ("e", "e"))), (("e", meta["n"]),))
        if principle == "php" and enc in ("unary", "unary-eq"):
            return cls(((Kind.P, ("pigeon", "hole")),),
                       (("pigeon", meta["m"]), ("hole", meta["n"])))
        if principle == "php" and enc == "binary":
            return cls(((Kind.PBit, ("pigeon",)),), (("pigeon", meta["m"]),))
        raise SymmetryError(f"no known index symmetry for {principle}/{enc}")

    @cached_property
    def _shifts(self) -> dict:
        # literal code layout: kind | 4 x 16-bit index slots | 8-bit bit | sign
        out = {}
        for kind, sorts in self.sorts:
            out[int(kind)] = tuple((1 + 8 + 16 * (3 - p), s) for p, s in enumerate(sorts)
                                   if s is not None)
        return out

    def relabel_literal(self, code: int, maps: dict[str, dict[int, int]]) -> int:
        shifts = self._shifts.get(code >> 73)
        if not shifts:
            return code
        for sh, s in shifts:
            i = (code >> sh) & 0xFFFF
            j = maps[s].get(i, i)
            if j != i:
                code += (j - i) << sh
        return code

    def mentioned(self, codes: Iterable[int]) -> dict[str, list[int]]:
        out: dict[str, set] = {s: set() for s in self._sizes}
        for c in codes:
            for sh, s in self._shifts.get(c >> 73, ()):
                out[s].add((c >> sh) & 0xFFFF)
        return {s: sorted(v) for s, v in out.items()}

    def relabelings(self, mentioned: dict[str, list[int]]) -> Iterator[dict[str, dict[int, int]]]:
        """All maps sending each sort's mentioned indices onto ``1..k``."""
        names = list(mentioned)
        perms = [itertools.permutations(range(1, len(mentioned[s]) + 1)) for s in names]
        for combo in itertools.product(*[list(p) for p in perms]):
            yield {s: dict(zip(mentioned[s], img)) for s, img in zip(names, combo)}

    def canonical(self, t: Term) -> Term:
        if t is ZERO or not t:
            return t
        best = None
        for maps in self.relabelings(self.mentioned(t)):
            cand = tuple(sorted(self.relabel_literal(c, maps) for c in t))
            if best is None or cand < best:
                best = cand
        return Term(best)

    def generators(self) -> Iterator[dict[str, dict[int, int]]]:
        for s, size in self._sizes.items():
            if size < 2:
                continue
            swap = {1: 2, 2: 1}
            cycle = {i: i % size + 1 for i in range(1, size + 1)}
            for g in (swap, cycle):
                yield {**{o: {} for o in self._sizes}, s: g}

    def orbit_size(self, codes: Iterable[int]) -> int:
        """Size of the orbit of a literal set under the full group."""
        return _pair_orbit(self, "t", (), tuple(sorted(set(codes))))[1]

    def pair_orbit(self, tag, codes, lift) -> tuple[tuple, int]:
        return _pair_orbit(self, tag, codes, lift)

    def check_automorphism(self, cnf: Cnf):
        """Spot-check that each generator maps the clause set onto itself."""
        clauses = {c.codes for c in cnf.clauses}
        groups = {cnf.clauses[g].codes for g in cnf.equality_groups}
        for g in self.generators():
            for c in cnf.clauses:
                img = tuple(sorted(self.relabel_literal(x, g) for x in c.codes))
                if img not in clauses:
                    raise SymmetryError("generator does not preserve the clause set", witness=str(c))
                if (c.codes in groups) != (img in groups):
                    raise SymmetryError("generator does not preserve equality groups", witness=str(c))


class BitAffineSymmetry:
    """Literal-level automorphisms of the binary LNP encoding.

    An element is a permutation ``pi`` of the ``r`` bit positions together
    with a mask ``c``; it sends the element ``a`` to ``pi(bin(a)) xor c``.
    Bits are renamed by ``pi`` and flipped where ``c`` is set, so bit
    patterns follow the elements they name and every clause maps to a
    clause.  Canonical forms use a precomputed image table per literal.
    """

    def __init__(self, n: int, r: int, var_codes: Iterable[int]):
        import numpy as np
        self.n, self.r = n, r
        self.elements = [(pi, c) for pi in itertools.permutations(range(r)) for c in range(n)]
        self._lits = sorted((v << 1) | s for v in var_codes for s in (0, 1))
        self._idx = {c: i for i, c in enumerate(self._lits)}
        table = np.empty((len(self._lits), len(self.elements)), dtype=np.int64)
        for g, el in enumerate(self.elements):
            for i, code in enumerate(self._lits):
                table[i, g] = self._idx[self.apply(code, el)]
        self._table = table
        self._np = np

    @classmethod
    def for_cnf(cls, cnf: Cnf) -> "BitAffineSymmetry":
        meta = cnf.meta
        if meta.get("principle") != "lnp" or meta.get("encoding") != "binary":
            raise SymmetryError("bit-affine symmetry is defined for binary LNP only")
        n, r = meta["n"], meta["bits"]
        if n != 1 << r:
            raise SymmetryError(f"n={n} is not a power of two")
        return cls(n, r, (v.code for v in cnf.variables))

    def element(self, a: int, el) -> int:
        pi, c = el
        r, x, y = self.r, a - 1, 0
        for k in range(r):
            y |= ((x >> (r - 1 - k)) & 1) << (r - 1 - pi[k])
        return (y ^ c) + 1

    def apply(self, code: int, el) -> int:
        lit = decode_literal(code)
        v = lit.var
        if v.kind is Kind.P:
            w = VariableId(Kind.P, tuple(self.element(i, el) for i in v.indices))
            return Literal(w, lit.positive).code
        if v.kind is Kind.SBit:
            pi, c = el
            pos = pi[v.bit - 1]
            flip = (c >> (self.r - 1 - pos)) & 1
            w = VariableId(Kind.SBit, (self.element(v.indices[0], el),), pos + 1)
            return Literal(w, lit.positive ^ bool(flip)).code
        raise SymmetryError(f"no action on {v}")

    def canonical(self, t: Term) -> Term:
        if t is ZERO or not t:
            return t
        np = self._np
        m = self._table[[self._idx[c] for c in t]]
        m.sort(axis=0)
        best = np.lexsort(m[::-1])[0]
        return Term(tuple(self._lits[i] for i in m[:, best]))

    def generators(self):
        r = self.r
        for k in range(r):
            yield (tuple(range(r)), 1 << k)
        for k in range(r - 1):
            pi = list(range(r))
            pi[k], pi[k + 1] = pi[k + 1], pi[k]
            yield (tuple(pi), 0)

    def check_automorphism(self, cnf: Cnf):
        clauses = {c.codes for c in cnf.clauses}
        for g in self.generators():
            for c in cnf.clauses:
                img = tuple(sorted({self.apply(x, g) for x in c.codes}))
                if img not in clauses:
                    raise SymmetryError("generator does not preserve the clause set", witness=str(c))

    def pair_orbit(self, tag, codes, lift) -> tuple[tuple, int]:
        images = set()
        for el in self.elements:
            images.add((tuple(sorted(self.apply(c, el) for c in codes)),
                        tuple(sorted(self.apply(c, el) for c in lift))))
        return (tag,) + min(images), len(images)

    def orbit_size(self, codes: Iterable[int]) -> int:
        return self.pair_orbit("t", (), tuple(sorted(set(codes))))[1]


@dataclass
class QuotientConstraint:
    form: LinearForm
    relation: Relation
    provenance: Provenance
    sources: list = field(default_factory=list)


class QuotientSystem:
    """Orbit-collapsed view of a :class:`LiftedSystem`.

    Variables are canonical orbit representatives.  The quotient of a
    constraint is its image under the orbit map, which is the orbit sum of
    the constraint divided by the (positive) orbit size; certificates on the
    quotient name source constraints by provenance.  Only lift terms that
    are their own orbit representative are enumerated: every orbit of
    (axiom, lift) pairs contains such a pair.
    """

    def __init__(self, source: LiftedSystem, group: IndexSymmetry, check: bool = True):
        if check:
            group.check_automorphism(source.cnf)
        self.source = source
        self.group = group
        self.cnf = source.cnf
        self.rank = source.rank
        self._orbit: dict[Term, Term] = {}
        self._expansion: dict[Term, LinearForm] = {}

    def orbit(self, t: Term) -> Term:
        hit = self._orbit.get(t)
        if hit is None:
            hit = self.group.canonical(t)
            self._orbit[t] = hit
        return hit

    def image(self, form: LinearForm) -> LinearForm:
        return form.map_terms(self.orbit)

    def constraint(self, p: Provenance) -> Constraint:
        c = self.source.constraint(p)
        return Constraint(self.image(c.form), c.relation, p)

    def iter_constraints(self) -> Iterator[Constraint]:
        for q in self.constraints:
            yield Constraint(q.form, q.relation, q.provenance)

    def canonical_lifts(self) -> list[Term]:
        return [d for d in self.source.lift_terms() if self.orbit(d) == d]

    @cached_property
    def constraints(self) -> list[QuotientConstraint]:
        seen: dict = {}
        out: list[QuotientConstraint] = []
        for c in self.source.iter_constraints(lifts=self.canonical_lifts()):
            f = self.image(c.form)
            if not f:
                continue
            key = (c.relation, f)
            k = seen.get(key)
            if k is None:
                seen[key] = len(out)
                out.append(QuotientConstraint(f, c.relation, c.provenance, [c.provenance]))
            else:
                out[k].sources.append(c.provenance)
        return out

    def multiplicity(self, q: QuotientConstraint) -> int:
        """Number of source constraints whose image is ``q`` (orbit enumeration)."""
        orbits = {}
        for p in q.sources:
            key, size = self.provenance_orbit(p)
            orbits[key] = size
        return sum(orbits.values())

    def expansion(self, t: Term) -> LinearForm:
        hit = self._expansion.get(t)
        if hit is None:
            hit = positive_expansion(t).map_terms(self.orbit)
            self._expansion[t] = hit
        return hit

    def negation_provenance(self, t: Term) -> Provenance:
        return self.source.negation_provenance(t)

    def describe(self, p: Provenance) -> str:
        return p.describe(self.cnf)

    def provenance_orbit(self, p: Provenance) -> tuple[tuple, int]:
        """Canonical key and size of the orbit of an axiom instance."""
        if isinstance(p, ClauseLift):
            head = ("c",) + self.cnf.clauses[p.clause].codes
        elif isinstance(p, EqualityGroupLift):
            head = ("c",) + self.cnf.clauses[self.cnf.equality_groups[p.group]].codes
        elif isinstance(p, NegationLift):
            head = ("n", Literal(p.var).code)
        elif isinstance(p, BoundLift):
            head = ("u" if p.upper else "l", p.literal.code)
        else:
            return (("d", p.label), 1), 1
        tag, codes = head[0], head[1:]
        return self.group.pair_orbit(tag, codes, tuple(p.lift))

    def provenance_orbit_size(self, p: Provenance) -> int:
        return self.provenance_orbit(p)[1]

    def to_jsonl(self, stream) -> int:
        n = 0
        for q in self.constraints:
            d = {"relation": q.relation.value, "provenance": provenance_to_json(q.provenance),
                 "multiplicity": self.multiplicity(q), "form": q.form.to_json()}
            stream.write(json.dumps(d, separators=(",", ":")) + "\n")
            n += 1
        return n


def _pair_orbit(g: IndexSymmetry, tag, codes, lift) -> tuple[tuple, int]:
    ment = g.mentioned(codes + lift)
    total = 1
    for s, idx in ment.items():
        total *= math.perm(g._sizes[s], len(idx))
    images = []
    for maps in g.relabelings(ment):
        images.append((tuple(sorted(g.relabel_literal(c, maps) for c in codes)),
                       tuple(sorted(g.relabel_literal(c, maps) for c in lift))))
    key = min(images)
    stab = images.count(key)
    return (tag,) + key, total // stab


def symmetrize(sys: LiftedSystem, group: IndexSymmetry | None = None,
               check: bool = True) -> QuotientSystem:
    if group is None:
        meta = sys.cnf.meta
        if meta.get("principle") == "lnp" and meta.get("encoding") == "binary":
            group = BitAffineSymmetry.for_cnf(sys.cnf)
        else:
            group = IndexSymmetry.for_cnf(sys.cnf)
    return QuotientSystem(sys, group, check)
