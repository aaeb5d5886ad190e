"""Explicit refutations as checkable certificate objects.

* :func:`lnp_eq_rank2` refutes the rank-2 lift of LNP with equality on the
  symmetry quotient.  The combination is found by an exact LP restricted to a
  fixed catalogue of axiom instances (shipped in ``data/``), falling back to
  the whole quotient.  Only n = 4..7 are refutable at rank 2; from n = 8 on
  the lift has exact feasible points and :class:`Rank2Feasible` is raised.
* :func:`binary_from_unary` substitutes bit patterns for the witness atoms of
  a unary certificate and re-derives every step from binary axioms.
* :func:`php_sos_degree2` is the degree-2 squares refutation of PHP.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from fractions import Fraction
from importlib import resources
from typing import Iterable

import numpy as np

from .lift import (
    BitAffineSymmetry, BoundLift, ClauseLift, Constraint, EqualityGroupLift, IndexSymmetry,
    LiftedSystem, NegationLift, QuotientSystem, lift_system, symmetrize,
)
from .lp import FarkasCertificate, feasible, verify_farkas
from .principles import (
    Cnf, Kind, Literal, VariableId, binary_lnp, bits_needed, decode_literal, unary_lnp_eq,
    unary_php,
)
from .sos import SosCertificate, clause_axiom
from .terms import UNIT, ZERO, LinearForm, Term, multiply, to_rational

__all__ = [
    "CertificateError", "Rank2Feasible", "lnp_eq_rank2", "binary_from_unary", "php_sos_degree2",
    "witness_family", "derive_catalogue", "load_catalogue", "explain", "expanded_support",
    "max_lift_degree",
]

CATALOGUE = "lnp_eq_rank2.json"


class CertificateError(ValueError):
    """Raised when a generator is asked for an instance outside its range."""


# -- size-independent names for axiom instances -------------------------------

def portable(cnf: Cnf, p) -> tuple:
    """``(kind, head, lift)`` with clause labels instead of clause indices."""
    lift = tuple(p.lift)
    if isinstance(p, ClauseLift):
        return ("clause", cnf.labels[p.clause], lift)
    if isinstance(p, EqualityGroupLift):
        return ("group", cnf.labels[cnf.equality_groups[p.group]], lift)
    if isinstance(p, NegationLift):
        return ("negation", Literal(p.var).code, lift)
    if isinstance(p, BoundLift):
        return ("upper" if p.upper else "lower", p.literal.code, lift)
    raise CertificateError(f"{p!r} is not an axiom instance")


def resolve(cnf: Cnf, d: tuple, _cache={}):
    key = id(cnf)
    if key not in _cache or _cache[key][0] is not cnf:
        labels = {lab: i for i, lab in enumerate(cnf.labels)}
        groups = {c: g for g, c in enumerate(cnf.equality_groups)}
        _cache.clear()
        _cache[key] = (cnf, labels, groups)
    _, labels, groups = _cache[key]
    kind, head, lift = d
    lift = Term(lift)
    try:
        if kind == "clause":
            return ClauseLift(labels[head], lift)
        if kind == "group":
            return EqualityGroupLift(groups[labels[head]], lift)
    except KeyError:
        raise CertificateError(f"no clause labelled {head} in this instance") from None
    if kind == "negation":
        return NegationLift(decode_literal(head).var, lift)
    return BoundLift(decode_literal(head), lift, kind == "upper")


def _to_json(d: tuple) -> list:
    kind, head, lift = d
    if kind in ("clause", "group"):
        head = [head[0], list(head[1])]
    else:
        head = str(decode_literal(head))
    return [kind, head, Term(lift).to_json()]


def _from_json(x) -> tuple:
    kind, head, lift = x
    if kind in ("clause", "group"):
        head = (head[0], tuple(head[1]))
    else:
        head = Literal.parse(head).code
    return (kind, head, tuple(Term.from_json(lift)))


def load_catalogue() -> list[tuple]:
    text = resources.files("salift").joinpath("data", CATALOGUE).read_text()
    return [_from_json(x) for x in json.loads(text)["instances"]]


# -- the single-witness family --------------------------------------------------

def _witnesses(codes) -> set:
    # owner of S[i,j] is j, stored in the second index slot
    return {(c >> 41) & 0xFFFF for c in codes if c >> 73 == Kind.S}


def _head_codes(cnf: Cnf, p) -> tuple:
    if isinstance(p, ClauseLift):
        return cnf.clauses[p.clause].codes
    if isinstance(p, EqualityGroupLift):
        return cnf.clauses[cnf.equality_groups[p.group]].codes
    if isinstance(p, NegationLift):
        return (Literal(p.var).code,)
    return (p.literal.code,)


def witness_family(qs: QuotientSystem, k: int = 4) -> list[Constraint]:
    """Quotient constraints whose axiom and lift use indices ``1..k`` only and
    whose witness atoms all belong to a single element.

    Canonical lifts use the smallest labels and the stabiliser of a lift can
    move any further index onto the next free label, so for ``n >= k`` the
    family has the same shape at every size.  The single-witness condition
    keeps the binary translation within lift degree ``2 log n``.
    """
    src, g, cnf = qs.source, qs.group, qs.cnf

    def small(codes):
        return all(i <= k for idx in g.mentioned(codes).values() for i in idx)

    vcodes = [v for v in src._var_codes if small([v << 1])]
    lifts = [UNIT]
    for d in range(1, qs.rank + 1):
        for vs in itertools.combinations(vcodes, d):
            for signs in itertools.product((0, 1), repeat=d):
                t = Term(sorted((v << 1) | s for v, s in zip(vs, signs)))
                if qs.orbit(t) == t:
                    lifts.append(t)
    eq = {c: gi for gi, c in enumerate(cnf.equality_groups)}
    axioms = []
    for ci, lab in enumerate(cnf.labels):
        if ci in eq:
            if all(i <= k for i in lab[1]):
                axioms.append((EqualityGroupLift, eq[ci]))
        elif small(cnf.clauses[ci].codes):
            axioms.append((ClauseLift, ci))
    seen = set()
    out = []
    for d in lifts:
        provs = [cls(x, d) for cls, x in axioms]
        for vc in vcodes:
            provs.append(NegationLift(decode_literal(vc << 1).var, d))
            for s in (1, 0):
                for up in (False, True):
                    provs.append(BoundLift(decode_literal((vc << 1) | s), d, up))
        for p in provs:
            if len(_witnesses(_head_codes(cnf, p) + tuple(d))) > 1:
                continue
            c = qs.constraint(p)
            if not c.form:
                continue
            key = (c.relation, c.form)
            if key not in seen:
                seen.add(key)
                out.append(c)
    return out


class _Subsystem:
    """A subset of a system's constraints, seen through the system's hooks."""

    def __init__(self, system, constraints):
        self.system = system
        self.cons = list(constraints)
        self.rank = system.rank
        self.cnf = system.cnf

    def iter_constraints(self):
        return iter(self.cons)

    def constraint(self, p):
        return self.system.constraint(p)

    def expansion(self, t):
        return self.system.expansion(t)

    def negation_provenance(self, t):
        return self.system.negation_provenance(t)

    def describe(self, p):
        return self.system.describe(p)


def _quotient(n: int) -> QuotientSystem:
    return symmetrize(lift_system(unary_lnp_eq(n), 2, term_cap=None))


def _single_witness(cnf: Cnf, c: Constraint) -> bool:
    p = c.provenance
    return len(_witnesses(_head_codes(cnf, p) + tuple(p.lift))) <= 1


def derive_catalogue(sizes: Iterable[int] = (4, 5, 6, 7), k: int = 4, log=None) -> list[tuple]:
    """Union of certificate supports, single-witness family first.

    Where the single-witness family is feasible the whole quotient is used.
    Runs the float-guided solver; the result ships as package data.
    """
    out: list[tuple] = []
    for n in sizes:
        qs = _quotient(n)
        res = feasible(_Subsystem(qs, witness_family(qs, k)), guided=True)
        source = "single-witness"
        if res.feasible:
            res = feasible(qs, guided=True)
            source = "quotient"
        if res.feasible:
            raise CertificateError(f"the rank-2 quotient is feasible at n={n}")
        for p, _ in res.certificate.entries:
            d = portable(qs.cnf, p)
            if d not in out:
                out.append(d)
        if log:
            log(f"n={n}: {source}, support {res.certificate.support_size}, catalogue {len(out)}")
    return out


def write_catalogue(instances: list[tuple], path) -> None:
    with open(path, "w") as fh:
        json.dump({"k": 4, "instances": [_to_json(d) for d in instances]}, fh, indent=0)


# -- rank-2 refutation of LNP with equality -----------------------------------

class Rank2Feasible(CertificateError):
    """The rank-2 lift is non-empty, so no refutation exists; ``point`` is an
    exact feasible point of the quotient (verified before raising)."""

    def __init__(self, n: int, point: dict):
        super().__init__(f"n={n}: the rank-2 lift of LNP with equality is feasible, "
                         "so no rank-2 refutation exists")
        self.n, self.point = n, point


def lnp_eq_rank2(n: int, catalogue: list[tuple] | None = None,
                 fallback: bool = True) -> FarkasCertificate:
    """Farkas certificate for the rank-2 quotient of LNP with equality.

    The LP runs on the catalogue instances, single-witness ones first.  If
    they do not suffice the whole quotient is solved (float-guided, exactly
    certified); when that is feasible :class:`Rank2Feasible` is raised with
    the point.  The certificate is checked against the full quotient before
    it is returned.
    """
    if not isinstance(n, int) or n < 4:
        raise CertificateError(
            f"n={n!r}: the rank-2 refutation is only claimed for n large enough; "
            "this generator requires n >= 4")
    qs = _quotient(n)
    cat = load_catalogue() if catalogue is None else catalogue
    cons = [qs.constraint(resolve(qs.cnf, d)) for d in cat]
    res = None
    for family, sub in (("single-witness", [c for c in cons if _single_witness(qs.cnf, c)]),
                        ("catalogue", cons)):
        res = feasible(_Subsystem(qs, sub), check=False)
        if not res.feasible:
            break
    if res.feasible:
        if not fallback:
            raise CertificateError(f"catalogue does not refute n={n}")
        family = "quotient"
        res = feasible(qs, guided=True)
        if res.feasible:
            raise Rank2Feasible(n, res.point)
    cert = FarkasCertificate(res.certificate.entries,
                             {"n": n, "rank": 2, "quotient": True, "family": family,
                              "pivots": res.stats.get("pivots")})
    vr = verify_farkas(cert, qs)
    if not vr:
        raise AssertionError(f"generated certificate failed verification: {vr.reason}")
    cert.meta["expanded_support"] = expanded_support(cert, qs)
    return cert


def expanded_support(cert: FarkasCertificate, qs: QuotientSystem) -> int:
    """Number of explicit axiom instances behind a quotient certificate."""
    return sum(qs.provenance_orbit_size(p) for p, _ in cert.entries)


def max_lift_degree(cert: FarkasCertificate) -> int:
    return max((len(p.lift) for p, _ in cert.entries), default=0)


# -- unary to binary ----------------------------------------------------------

class _Binary:
    """Substitution ``S[i,j] -> bits(j) = bin(i)``, ``P[i,j] -> P[j,i]`` and the
    binary derivation of each substituted unary axiom instance."""

    def __init__(self, n: int):
        self.n = n
        self.r = bits_needed(n)
        self.cnf = binary_lnp(n)
        self.system = lift_system(self.cnf, 2 * self.r, term_cap=None)
        self.labels = {lab: i for i, lab in enumerate(self.cnf.labels)}
        self.by_codes = {c.codes: i for i, c in enumerate(self.cnf.clauses)}
        self._lit: dict[int, LinearForm] = {}
        self._phi: dict[Term, LinearForm] = {}
        v = next(iter(self.cnf.variables))
        self._anchor = Literal(v).code

    def pattern(self, j: int, a: int) -> Term:
        x, r = a - 1, self.r
        return Term(sorted(Literal(VariableId(Kind.SBit, (j,), k), bool((x >> (r - k)) & 1)).code
                           for k in range(1, r + 1)))

    def p_code(self, code: int) -> int:
        lit = decode_literal(code)
        i, j = lit.var.indices
        return Literal(VariableId(Kind.P, (j, i)), lit.positive).code

    def literal(self, code: int) -> LinearForm:
        f = self._lit.get(code)
        if f is None:
            lit = decode_literal(code)
            if lit.var.kind is Kind.P:
                f = LinearForm.of_term(Term((self.p_code(code),)))
            elif lit.var.kind is Kind.S:
                i, j = lit.var.indices
                if lit.positive:
                    f = LinearForm.of_term(self.pattern(j, i))
                else:
                    f = LinearForm({self.pattern(j, b): 1 for b in range(1, self.n + 1) if b != i})
            else:
                raise CertificateError(f"no binary image for {lit}")
            self._lit[code] = f
        return f

    def phi(self, t: Term) -> LinearForm:
        f = self._phi.get(t)
        if f is None:
            f = LinearForm.constant(1)
            for c in t:
                f = multiply(f, self.literal(c))
            self._phi[t] = f
        return f

    def image(self, form: LinearForm) -> LinearForm:
        out = LinearForm()
        for t, v in form.items():
            out.iadd(self.phi(t), v)
        return out

    # building blocks, each returning [(provenance, multiplier)]
    def nonneg(self, t: Term):
        if t is ZERO:
            return []
        if not t:
            a = self._anchor
            return [(BoundLift(decode_literal(a), UNIT, False), 1),
                    (BoundLift(decode_literal(a ^ 1), UNIT, False), 1)]
        return [(BoundLift(decode_literal(t[-1]), Term(t[:-1]), False), 1)]

    def chain(self, d: Term, t: Term):
        """``Z(d) - Z(t) >= 0`` for ``t`` extending ``d``, one literal at a time."""
        out, cur = [], d
        for c in t:
            if c in cur:
                continue
            out.append((BoundLift(decode_literal(c), cur, True), 1))
            cur = cur & Term((c,))
        return out

    def mains(self, d: tuple, ucnf: Cnf):
        """Binary inequalities whose sum matches the image of the unary
        instance ``d`` up to negation equalities."""
        kind, head, lift = d
        lift = Term(lift)
        out = []
        if kind == "clause":
            name, idx = head
            if name in ("self", "trans"):
                codes = ucnf.clauses[ucnf.labels.index(head)].codes
                bcodes = tuple(sorted({self.p_code(c) for c in codes}))
                ci = self.by_codes[bcodes]
                for t, v in self.phi(lift).items():
                    out.append((ClauseLift(ci, t), v))
            elif name == "impl":
                i, j = idx
                ci = self.labels[("skolem", (j, i))]
                pat = self.pattern(j, i)
                pc = Term((Literal(VariableId(Kind.P, (j, i))).code,))
                for t, v in self.phi(lift).items():
                    tp = t & pat
                    if tp is not ZERO:
                        out.append((ClauseLift(ci, tp), v))
                    dp = t & pc
                    if dp is not ZERO:
                        full = dp & pat
                        steps = self.nonneg(dp) if full is ZERO else self.chain(dp, full)
                        out.extend((p, v * m) for p, m in steps)
            else:
                raise CertificateError(f"unknown clause {head}")
        elif kind == "lower":
            for t, v in self.phi(lift & Term((head,))).items():
                out.extend((p, v * m) for p, m in self.nonneg(t))
        elif kind == "upper":
            lit = decode_literal(head)
            img = self.literal(head)
            for t, v in self.phi(lift).items():
                if len(img) == 1:
                    full = t & next(iter(img))
                    steps = self.nonneg(t) if full is ZERO else self.chain(t, full)
                else:
                    i, j = lit.var.indices
                    steps = self.nonneg(t & self.pattern(j, i))
                out.extend((p, v * m) for p, m in steps)
        return out

    def complete(self, residual: LinearForm, entries: dict, scale):
        """Cancel ``residual`` with negation equalities; it must vanish."""
        while True:
            neg = [t for t in residual if t.negatives]
            if not neg:
                break
            t = max(neg, key=lambda t: (t.negatives, len(t), t))
            prov = self.system.negation_provenance(t)
            f = self.system.constraint(prov).form
            k = to_rational(Fraction(residual[t]) / f[t])
            residual.iadd(f, -k)
            entries[prov] += scale * k
        if residual:
            raise AssertionError(f"binary derivation leaves {residual}")

    def derive(self, d: tuple, ucnf: Cnf, usys: LiftedSystem, entries: dict, scale):
        """Add ``scale`` times a binary derivation of the image of ``d``."""
        target = self.image(usys.constraint(resolve(ucnf, d)).form)
        for p, m in self.mains(d, ucnf):
            entries[p] += scale * m
            target.iadd(self.system.constraint(p).form, -m)
        self.complete(target, entries, scale)


def _relabel(d: tuple, g: IndexSymmetry, maps) -> tuple:
    kind, head, lift = d
    lift = tuple(sorted(g.relabel_literal(c, maps) for c in lift))
    m = maps["e"]
    if kind in ("clause", "group"):
        head = (head[0], tuple(m.get(i, i) for i in head[1]))
    else:
        head = g.relabel_literal(head, maps)
    return (kind, head, lift)


def _mentioned(d: tuple, g: IndexSymmetry) -> list[int]:
    kind, head, lift = d
    idx = set(g.mentioned(lift)["e"])
    if kind in ("clause", "group"):
        idx.update(head[1])
    else:
        idx.update(g.mentioned((head,))["e"])
    return sorted(idx)


def _tuple_orbits(n: int, k: int, group: BitAffineSymmetry | None):
    """Injective ``k``-tuples over ``[n]`` up to ``group``: (rep, orbit size)."""
    tuples = itertools.permutations(range(1, n + 1), k)
    if group is None:
        return [(t, 1) for t in tuples]
    table = np.array([[group.element(a, el) for el in group.elements] for a in range(1, n + 1)])
    orbits: dict[tuple, list] = {}
    for t in tuples:
        m = table[[a - 1 for a in t]]
        key = tuple(m[:, np.lexsort(m[::-1])[0]])
        hit = orbits.get(key)
        if hit is None:
            orbits[key] = [t, 1]
        else:
            hit[1] += 1
    return [(t, c) for t, c in orbits.values()]


def binary_from_unary(cert: FarkasCertificate, n: int, *, quotient: bool | None = None):
    """Translate a certificate for ``unary_lnp_eq(n)`` to ``binary_lnp(n)``.

    A quotient certificate is first averaged over all relabellings.  With
    ``quotient`` (default for quotient input) the result lives on the
    quotient of the binary system by its bit-affine automorphisms, otherwise
    it is fully explicit.  Returns ``(certificate, system)``.
    """
    if not isinstance(n, int) or n < 2 or n & (n - 1):
        raise CertificateError(
            f"n={n!r} is not a power of two: unused bit patterns add forbidding "
            "clauses and the substitution no longer covers every pattern")
    src_quotient = bool(cert.meta.get("quotient"))
    if quotient is None:
        quotient = src_quotient
    ucnf = unary_lnp_eq(n)
    usys = lift_system(ucnf, cert.meta.get("rank", 2), term_cap=None)
    conv = _Binary(n)
    g = IndexSymmetry.for_cnf(ucnf)
    group = BitAffineSymmetry.for_cnf(conv.cnf) if quotient else None
    entries: dict = defaultdict(Fraction)
    orbit_cache: dict[int, list] = {}
    for p, y in cert.entries:
        d = portable(ucnf, p)
        if not src_quotient:
            conv.derive(d, ucnf, usys, entries, Fraction(y))
            continue
        idx = _mentioned(d, g)
        k = len(idx)
        if k not in orbit_cache:
            orbit_cache[k] = _tuple_orbits(n, k, group)
        total = math.perm(n, k)
        for img, size in orbit_cache[k]:
            dd = _relabel(d, g, {"e": dict(zip(idx, img))})
            conv.derive(dd, ucnf, usys, entries, Fraction(y) * size / total)
    out = FarkasCertificate([(p, to_rational(m)) for p, m in entries.items() if m],
                            {"n": n, "rank": 2 * conv.r, "quotient": quotient,
                             "source_support": cert.support_size})
    system = symmetrize(conv.system, group) if quotient else conv.system
    out.meta["max_lift_degree"] = max_lift_degree(out)
    return out, system


# -- degree-2 squares for PHP -------------------------------------------------

def php_sos_degree2(m: int, n: int) -> SosCertificate:
    """Degree-2 squares refutation of unary PHP with ``m > n`` pigeons.

    Squares ``(1 - sum_i P[i,j])^2`` per hole, hole axioms lifted by
    ``P[i,j] P[i',j]`` with weight 2 and the pigeon axioms sum to ``n - m``;
    ``m - n - 1`` squares of the constant 1 close the gap to ``-1``.
    """
    cnf = unary_php(m, n)
    products: list[tuple[int, LinearForm]] = []
    for ci, (name, idx) in enumerate(cnf.labels):
        if name == "pigeon":
            products.append((ci, LinearForm.constant(1)))
        else:
            i, i2, j = idx
            t = Term(sorted(Literal(VariableId(Kind.P, (a, j))).code for a in (i, i2)))
            products.append((ci, LinearForm.of_term(t, 2)))
    squares = []
    for j in range(1, n + 1):
        f = LinearForm.constant(1)
        for i in range(1, m + 1):
            f.iadd(Term((Literal(VariableId(Kind.P, (i, j))).code,)), -1)
        squares.append(f)
    squares.extend(LinearForm.constant(1) for _ in range(m - n - 1))
    return SosCertificate(products, squares, 2, {"m": m, "n": n, "gap_squares": m - n - 1})


def php_axioms(m: int, n: int) -> list[LinearForm]:
    return [clause_axiom(c) for c in unary_php(m, n).clauses]


# -- rendering ------------------------------------------------------------------

def explain(cert: FarkasCertificate, system, limit: int | None = None) -> str:
    """One line per step: multiplier, axiom family and instance, lift term."""
    lines = []
    cnf = system.cnf
    groups: dict[str, int] = defaultdict(int)
    for k, (p, m) in enumerate(cert.entries):
        if isinstance(p, (ClauseLift, EqualityGroupLift)):
            ci = p.clause if isinstance(p, ClauseLift) else cnf.equality_groups[p.group]
            name = cnf.labels[ci][0] if cnf.labels else "clause"
        elif isinstance(p, NegationLift):
            name = "negation"
        else:
            name = "monotonicity" if not p.upper else "bound"
        groups[name] += 1
        if limit is None or k < limit:
            lines.append(f"{str(m):>12}  [{name}] {system.describe(p)}")
    if limit is not None and len(cert.entries) > limit:
        lines.append(f"... {len(cert.entries) - limit} more")
    summary = ", ".join(f"{k}: {v}" for k, v in sorted(groups.items()))
    lines.append(f"support {cert.support_size} ({summary})")
    return "\n".join(lines)
