"""Model-counting valuations of terms.

Each valuation assigns a term the fraction of a finite model class that is
consistent with it: perfect matchings of pigeons onto a hole set, linear
orders, or maximal partial injections.  Values are exact fractions, memoised
per term.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .lift import Constraint, Relation
from .principles import Kind, bin_bits, bits_needed, decode_literal
from .terms import ZERO, Term, rational_str

__all__ = [
    "OutOfDomain", "Valuation", "MatchingValuation", "PermutationValuation",
    "PartialInjectionValuation", "ValuationReport", "matching_valuation",
    "permutation_valuation", "partial_injection_valuation", "evaluate",
    "check_valuation",
]


class OutOfDomain(ValueError):
    pass


class Valuation:
    """Base class: memoised exact values, unit maps to 1 and zero to 0."""

    backend = "abstract"

    def __init__(self):
        self._memo: dict[Term, Fraction] = {}

    def evaluate(self, t: Term) -> Fraction:
        if t is ZERO:
            return Fraction(0)
        hit = self._memo.get(t)
        if hit is None:
            hit = Fraction(1) if not t else self._value(t)
            self._memo[t] = hit
        return hit

    __call__ = evaluate

    def evaluate_checked(self, t: Term) -> Fraction:
        """Like :meth:`evaluate` but raises :class:`OutOfDomain` first."""
        if t is not ZERO and t not in self._memo:
            self._check(t)
        return self.evaluate(t)

    def in_domain(self, t: Term) -> bool:
        try:
            self._check(t)
        except OutOfDomain:
            return False
        return True

    def _check(self, t: Term):
        pass

    def check_form(self, form) -> None:
        """Raise :class:`OutOfDomain` when a whole constraint cannot be valued."""
        for t in form:
            self._check(t)

    def _value(self, t: Term) -> Fraction:
        raise NotImplementedError

    def dump_csv(self, stream):
        stream.write("term,value\n")
        for t, v in sorted(self._memo.items(), key=lambda kv: (len(kv[0]), kv[0])):
            stream.write(f"{t},{rational_str(v)}\n")


def evaluate(v: Valuation, t: Term) -> Fraction:
    return v.evaluate(t)


# -- matchings -------------------------------------------------------------

class MatchingValuation(Valuation):
    """Uniform perfect matching from ``|H|`` pigeons onto the holes ``H``.

    Terms are over ``PBit`` variables; a term mentioning more than ``|H|``
    pigeons is out of domain.  The mentioned pigeons are extended to a set of
    exactly ``|H|`` pigeons by the smallest unused indices; the value does not
    depend on that choice.
    """

    backend = "matching"

    def __init__(self, m: int, holes: Iterable[int], n: int | None = None):
        super().__init__()
        self.m = m
        self.holes = tuple(sorted(set(holes)))
        self.n = n if n is not None else max(self.holes)
        if len(self.holes) > m:
            raise ValueError("need |H| <= m")
        self.bits = bits_needed(self.n)
        self._patterns = [bin_bits(h, self.bits) for h in self.holes]

    def mentioned(self, t: Term) -> list[int]:
        out = set()
        for c in t:
            v = decode_literal(c).var
            if v.kind is not Kind.PBit:
                raise OutOfDomain(f"{v} is not a pigeon bit")
            out.add(v.indices[0])
        return sorted(out)

    def extension(self, t: Term) -> list[int]:
        """The pigeon set ``M'`` used to evaluate ``t``."""
        ment = self.mentioned(t)
        extra = [i for i in range(1, self.m + 1) if i not in ment]
        return sorted(ment + extra[:len(self.holes) - len(ment)])

    def _check(self, t: Term):
        if t is ZERO:
            return
        if len(self.mentioned(t)) > len(self.holes):
            raise OutOfDomain(f"{t} mentions more than {len(self.holes)} pigeons")

    def check_form(self, form) -> None:
        # one extension M' serves every term of a constraint
        ment = set()
        for t in form:
            ment.update(self.mentioned(t))
        if len(ment) > len(self.holes):
            raise OutOfDomain(f"constraint mentions {len(ment)} > {len(self.holes)} pigeons")

    def _value(self, t: Term) -> Fraction:
        self._check(t)
        req: dict[int, list[tuple[int, int]]] = {}
        for c in t:
            l = decode_literal(c)
            req.setdefault(l.var.indices[0], []).append((l.var.bit, int(l.positive)))
        allowed = []
        for i, conds in sorted(req.items()):
            mask = 0
            for h, pat in enumerate(self._patterns):
                if all(pat[b - 1] == val for b, val in conds):
                    mask |= 1 << h
            allowed.append(mask)
        # injections of the mentioned pigeons into H, by used-hole mask
        ways = {0: 1}
        for mask in allowed:
            nxt: dict[int, int] = {}
            for used, w in ways.items():
                free = mask & ~used
                while free:
                    b = free & -free
                    nxt[used | b] = nxt.get(used | b, 0) + w
                    free ^= b
            ways = nxt
        count = sum(ways.values())
        k, h = len(allowed), len(self.holes)
        # rest of M' matched freely: (h-k)!; divide by h!
        return Fraction(count * math.factorial(h - k), math.factorial(h))

    def matchings(self, pigeons: Iterable[int]):
        """All perfect matchings ``pigeons -> H`` as dicts (for oracles)."""
        pigeons = list(pigeons)
        for perm in itertools.permutations(self.holes, len(pigeons)):
            yield dict(zip(pigeons, perm))


def matching_valuation(m: int, holes: Iterable[int], n: int | None = None) -> MatchingValuation:
    return MatchingValuation(m, holes, n)


# -- linear orders ---------------------------------------------------------

def _count_linear_extensions(k: int, below: list[int]) -> int:
    """Orders of ``k`` elements where ``below[j]`` (bitmask) must precede ``j``."""
    dp = [0] * (1 << k)
    dp[0] = 1
    for s in range(1 << k):
        if not dp[s]:
            continue
        for j in range(k):
            if not s >> j & 1 and below[j] & ~s == 0:
                dp[s | 1 << j] += dp[s]
    return dp[-1]


class PermutationValuation(Valuation):
    """Uniform random linear order on ``[n]``; ``P[i,j]`` and ``S[i,j]`` both
    read as "i below j"."""

    backend = "permutation"

    def __init__(self, n: int):
        super().__init__()
        if n < 2:
            raise ValueError("n must be >= 2")
        self.n = n

    def _check(self, t: Term):
        for c in t if t is not ZERO else ():
            v = decode_literal(c).var
            if v.kind not in (Kind.P, Kind.S) or max(v.indices) > self.n:
                raise OutOfDomain(f"{v} is not an order atom on [{self.n}]")

    def _value(self, t: Term) -> Fraction:
        self._check(t)
        rel = set()
        elems = set()
        for c in t:
            l = decode_literal(c)
            i, j = l.var.indices
            if l.positive:
                if i == j:
                    return Fraction(0)
                rel.add((i, j))
            elif i != j:
                rel.add((j, i))
            elems.update((i, j))
        idx = {e: k for k, e in enumerate(sorted(elems))}
        below = [0] * len(idx)
        for i, j in rel:
            below[idx[j]] |= 1 << idx[i]
        k = len(idx)
        return Fraction(_count_linear_extensions(k, below), math.factorial(k))


def permutation_valuation(n: int) -> PermutationValuation:
    return PermutationValuation(n)


# -- maximal partial injections ---------------------------------------------

class PartialInjectionValuation(Valuation):
    """Uniform maximal partial injection of ``n`` pigeons into ``n-1`` holes.

    Exactly one pigeon is unmapped.  Atoms ``P[i,n]`` name a virtual hole: a
    term using it is evaluated after renaming hole ``n`` to the smallest real
    hole the term does not mention (out of domain when there is none).
    """

    backend = "partial-injection"

    def __init__(self, n: int):
        super().__init__()
        if n < 3:
            raise ValueError("n must be >= 3")
        self.n = n

    def _atoms(self, t: Term):
        out = []
        for c in t:
            l = decode_literal(c)
            if l.var.kind is not Kind.P:
                raise OutOfDomain(f"{l.var} is not a pigeon-hole atom")
            i, j = l.var.indices
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise OutOfDomain(f"{l.var} outside [{self.n}]x[{self.n}]")
            out.append((i, j, l.positive))
        return out

    def resolve(self, t: Term) -> list[tuple[int, int, bool]]:
        """Atoms of ``t`` with the virtual hole renamed to a real one."""
        atoms = self._atoms(t)
        if not any(j == self.n for _, j, _ in atoms):
            return atoms
        used = {j for _, j, _ in atoms}
        free = [h for h in range(1, self.n) if h not in used]
        if not free:
            raise OutOfDomain(f"{t} mentions every real hole and the virtual one")
        h = free[0]
        return [(i, h if j == self.n else j, s) for i, j, s in atoms]

    def _check(self, t: Term):
        if t is not ZERO:
            self.resolve(t)

    def _value(self, t: Term) -> Fraction:
        atoms = self.resolve(t)
        n = self.n
        pigeons = sorted({i for i, _, _ in atoms})
        holes = sorted({j for _, j, _ in atoms})
        hidx = {h: k for k, h in enumerate(holes)}
        # targets: mentioned real holes, "other real hole", or unmapped
        allowed = []
        for p in pigeons:
            forced = None
            banned = set()
            for i, j, s in atoms:
                if i != p:
                    continue
                if s:
                    if forced is not None and forced != j:
                        return Fraction(0)
                    forced = j
                else:
                    banned.add(j)
            if forced is not None:
                allowed.append((1 << hidx[forced], False, False) if forced not in banned
                               else (0, False, False))
            else:
                mask = sum(1 << hidx[h] for h in holes if h not in banned)
                allowed.append((mask, True, True))
        other = n - 1 - len(holes)
        # state: (used mentioned-hole mask, used other holes, unmapped used)
        ways = {(0, 0, 0): 1}
        for mask, may_other, may_unmap in allowed:
            nxt: dict = {}
            for (used, o, u), w in ways.items():
                free = mask & ~used
                while free:
                    b = free & -free
                    key = (used | b, o, u)
                    nxt[key] = nxt.get(key, 0) + w
                    free ^= b
                if may_other and o < other:
                    key = (used, o + 1, u)
                    nxt[key] = nxt.get(key, 0) + w * (other - o)
                if may_unmap and not u:
                    key = (used, o, 1)
                    nxt[key] = nxt.get(key, 0) + w
            ways = nxt
        k = len(pigeons)
        count = sum(ways.values()) * math.factorial(n - k)
        return Fraction(count, math.factorial(n))

    def models(self):
        """All maximal partial injections as dicts pigeon -> hole or None."""
        n = self.n
        for perm in itertools.permutations(range(1, n + 1)):
            yield {i + 1: (h if h < n else None) for i, h in enumerate(perm)}


def partial_injection_valuation(n: int) -> PartialInjectionValuation:
    return PartialInjectionValuation(n)


# -- checking against lifted systems ---------------------------------------

@dataclass
class ValuationReport:
    backend: str
    checked: int = 0
    out_of_domain: int = 0
    skipped_degree: int = 0
    degree_cap: int | None = None
    violations: list[tuple[Constraint, Fraction]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self, describe=None) -> dict:
        return {
            "backend": self.backend, "checked": self.checked,
            "out_of_domain": self.out_of_domain, "skipped_degree": self.skipped_degree,
            "degree_cap": self.degree_cap,
            "violations": [{"constraint": describe(c.provenance) if describe else str(c.provenance),
                            "slack": rational_str(s)} for c, s in self.violations],
        }


def check_valuation(v: Valuation, sys, degree_cap: int | None = None,
                    limit: int | None = None) -> ValuationReport:
    """Evaluate every constraint of ``sys`` whose terms ``v`` can value.

    Constraints outside the valuation's domain (for matchings: mentioning
    more than ``|H|`` pigeons in total), or of degree above ``degree_cap``,
    are counted and skipped.  A violation records the
    exact slack (negative for inequalities, non-zero for equalities).
    """
    rep = ValuationReport(v.backend, degree_cap=degree_cap)
    for c in sys.iter_constraints():
        if degree_cap is not None and c.form.degree > degree_cap:
            rep.skipped_degree += 1
            continue
        try:
            v.check_form(c.form)
            val = c.form.evaluate(v.evaluate_checked)
        except OutOfDomain:
            rep.out_of_domain += 1
            continue
        rep.checked += 1
        bad = val < 0 if c.relation is Relation.GEQ else val != 0
        if bad:
            rep.violations.append((c, Fraction(val)))
            if limit is not None and len(rep.violations) >= limit:
                break
    return rep
