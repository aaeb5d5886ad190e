"""Exact LP feasibility for lifted systems.

Feasibility is decided by phase-1 simplex on the Farkas system

    y >= 0,  sum_i y_i a_i = 0,  sum_i y_i (-b_i) = 1

over the constraints ``a_i . z + b_i >= 0`` (equalities as two columns).
Arithmetic is integer and fraction-free: the basis inverse is kept as an
adjugate with its determinant and updated Bareiss style, so no float ever
touches a verdict.  A zero phase-1 optimum yields the Farkas multipliers; a
positive one yields dual prices from which a feasible point is read off.

Negated literals are eliminated before solving by the positive expansion of
each term (the negation equalities then vanish).  Multipliers found on the
reduced system are completed to the original system with negation lifts.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import kernels
from .lift import (
    DEFAULT_TERM_CAP, Constraint, Derived, Provenance, QuotientSystem,
    Relation, ResourceLimitExceeded, SystemError_, lift_system, provenance_from_json,
    provenance_to_json, symmetrize,
)
from .principles import Cnf
from .terms import UNIT, LinearForm, Term, parse_rational, rational_str, to_rational

__all__ = [
    "FarkasCertificate", "LPResult", "VerifyResult", "RankResult", "feasible",
    "verify_farkas", "verify_point", "sa_rank", "solve_farkas",
]

_I64_SAFE = 1 << 62
_DEGENERATE_SWITCH = 50


@dataclass
class FarkasCertificate:
    """Multipliers on named constraints whose combination is a negative constant."""

    entries: list[tuple[Provenance, int | Fraction]]
    meta: dict = field(default_factory=dict)

    @property
    def support_size(self) -> int:
        return sum(1 for _, m in self.entries if m)

    def to_json(self) -> dict:
        return {"meta": self.meta,
                "entries": [[provenance_to_json(p), rational_str(m)] for p, m in self.entries]}

    @classmethod
    def from_json(cls, d: dict) -> "FarkasCertificate":
        return cls([(provenance_from_json(p), parse_rational(m)) for p, m in d["entries"]],
                   dict(d.get("meta", {})))


@dataclass
class VerifyResult:
    valid: bool
    reason: str
    support_size: int
    constant: int | Fraction | None = None

    def __bool__(self):
        return self.valid


@dataclass
class LPResult:
    verdict: str  # "feasible" | "infeasible"
    point: dict[Term, int | Fraction] | None = None
    certificate: FarkasCertificate | None = None
    stats: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.verdict == "feasible"


# -- simplex ----------------------------------------------------------------

def solve_farkas(colptr, rowidx, vals, nrows: int, rule: str = "hybrid"):
    """Phase-1 simplex for ``A y = e_last, y >= 0`` with integer ``A``.

    ``A`` is given column-compressed.  Returns ``("infeasible", y)`` when the
    system has a solution (the lifted system is then infeasible) with ``y``
    a dict column -> Fraction, or ``("feasible", pi)`` with dual prices
    ``pi`` (list of Fraction) certifying ``pi . a_j <= 0`` for all ``j`` and
    ``pi_last > 0``.

    ``rule="bland"`` prices by lowest index throughout.  ``"hybrid"`` prices
    by most negative reduced cost and switches to Bland's rule while pivots
    are degenerate, which keeps the anti-cycling guarantee.
    """
    if rule not in ("bland", "hybrid", "lex"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    m = nrows
    ncols = len(colptr) - 1
    colptr = np.asarray(colptr, dtype=np.int64)
    rowidx = np.asarray(rowidx, dtype=np.int64)
    big = max((abs(int(v)) for v in vals), default=0) >= _I64_SAFE
    vals = np.array(vals, dtype=object if big else np.int64)
    colsum = np.zeros(ncols, dtype=object)
    for j in range(ncols):
        colsum[j] = sum(abs(int(v)) for v in vals[colptr[j]:colptr[j + 1]])
    max_colsum = int(max(colsum, default=0))

    # T = [adj | beta]; row 0 carries the objective, rows 1..m the basis
    T = np.zeros((m + 1, m + 2), dtype=np.int64)
    T[0, 1:m + 1] = -1
    for i in range(m):
        T[i + 1, i + 1] = 1
    T[0, m + 1] = -1
    T[m, m + 1] = 1
    D = 1
    basis = [ncols + i for i in range(m)]
    basic = np.zeros(ncols, dtype=np.uint8)
    obj_mode = big
    if obj_mode:
        T = T.astype(object)
        vals = vals.astype(object)
    pivots = 0
    degenerate = 0
    while True:
        sign = 1 if D > 0 else -1
        if not obj_mode and int(np.abs(T).max()) * max_colsum >= _I64_SAFE:
            obj_mode = True
            T = T.astype(object)
            vals = vals.astype(object)
        row0 = T[0, 1:m + 1]
        if not obj_mode:
            row0 = np.ascontiguousarray(row0)
        if rule == "bland" or (rule == "hybrid" and degenerate >= _DEGENERATE_SWITCH):
            j = kernels.price(row0, colptr, rowidx, vals, basic, sign)
        else:
            j = kernels.price_dantzig(row0, colptr, rowidx, vals, basic, sign)
        if j < 0:
            break
        rows = rowidx[colptr[j]:colptr[j + 1]]
        cv = vals[colptr[j]:colptr[j + 1]]
        alpha = T[:, rows + 1] @ cv
        # ratio test over basis rows (1..m)
        r = -1
        best_b = best_a = None
        for i in range(1, m + 1):
            a = alpha[i]
            if a * sign <= 0:
                continue
            b = T[i, m + 1]
            if r < 0:
                r, best_b, best_a = i, b, a
                continue
            lhs, rhs = int(b) * int(best_a), int(best_b) * int(a)
            if lhs < rhs:
                r, best_b, best_a = i, b, a
            elif lhs == rhs:
                if rule == "lex":
                    if _lex_less(T, i, a, r, best_a, m):
                        r, best_b, best_a = i, b, a
                elif basis[i - 1] < basis[r - 1]:
                    r, best_b, best_a = i, b, a
        if r < 0:
            raise ArithmeticError("phase-1 objective unbounded; input is malformed")
        degenerate = degenerate + 1 if best_b == 0 else 0
        if not obj_mode:
            amax = int(np.abs(alpha).max())
            tmax = int(np.abs(T).max())
            if tmax * (abs(int(alpha[r])) + amax) >= _I64_SAFE:
                obj_mode = True
                T = T.astype(object)
                vals = vals.astype(object)
                alpha = alpha.astype(object)
        if obj_mode:
            kernels.pivot_obj(T, r, alpha, D)
        else:
            kernels.pivot_i64(T, r, np.ascontiguousarray(alpha, dtype=np.int64), D)
        D = int(alpha[r])
        old = basis[r - 1]
        if old < ncols:
            basic[old] = 0
        basis[r - 1] = j
        basic[j] = 1
        pivots += 1
    stats = {"pivots": pivots, "rule": rule, "rows": m, "cols": ncols, "bigint": bool(obj_mode),
             "backend": kernels.backend()}
    obj = Fraction(-int(T[0, m + 1]), D)
    if obj == 0:
        y = {}
        for i, bj in enumerate(basis):
            if bj < ncols:
                v = Fraction(int(T[i + 1, m + 1]), D)
                if v:
                    y[bj] = v
        return "infeasible", y, stats
    pi = [Fraction(-int(x), D) for x in T[0, 1:m + 1]]
    return "feasible", pi, stats


def _lex_less(T, i, ai, k, ak, m) -> bool:
    """Is row ``i`` of ``B^-1`` divided by ``ai`` lexicographically below row
    ``k`` divided by ``ak``?  Both divisors share the sign of the determinant."""
    ri = T[i, 1:m + 1].astype(object)
    rk = T[k, 1:m + 1].astype(object)
    ai, ak = int(ai), int(ak)
    diff = np.flatnonzero(ri * ak != rk * ai)
    if not len(diff):
        return False
    c = diff[0]
    return int(ri[c]) * ak < int(rk[c]) * ai


# -- reduction --------------------------------------------------------------

class _Reduced:
    """Constraints rewritten over positive terms, deduplicated, integer-scaled."""

    def __init__(self, system, constraints: Iterable[Constraint]):
        self.system = system
        self.var_index: dict[Term, int] = {}
        self.rows: list[tuple[Constraint, Relation, dict, int]] = []
        self.trivial = 0
        seen = set()
        cache: dict[Term, LinearForm] = {}
        expand = system.expansion

        def ex(t):
            f = cache.get(t)
            if f is None:
                f = expand(t)
                cache[t] = f
            return f

        for c in constraints:
            rf = c.form.substitute(ex)
            if not rf:
                self.trivial += 1
                continue
            key = (c.relation, rf)
            if key in seen:
                continue
            seen.add(key)
            scale = 1
            for v in rf._c.values():
                if isinstance(v, Fraction):
                    scale = scale * v.denominator // math.gcd(scale, v.denominator)
            self.rows.append((c, c.relation, rf, scale))
            for t in rf._c:
                if t and t not in self.var_index:
                    self.var_index[t] = -1
        order = sorted(self.var_index, key=lambda t: (len(t), t))
        self.variables = order
        self.var_index = {t: i for i, t in enumerate(order)}

    def columns(self):
        nv = len(self.variables)
        colptr, rowidx, vals, owner = [0], [], [], []
        for k, (c, rel, rf, scale) in enumerate(self.rows):
            entries = []
            for t, v in rf._c.items():
                if t:
                    entries.append((self.var_index[t], int(v * scale)))
                else:
                    entries.append((nv, -int(v * scale)))
            entries.sort()
            signs = (1, -1) if rel is Relation.EQ else (1,)
            for s in signs:
                for ri, v in entries:
                    rowidx.append(ri)
                    vals.append(s * v)
                colptr.append(len(rowidx))
                owner.append((k, s))
        return colptr, rowidx, vals, owner, nv + 1


def _complete(system, combo: LinearForm, entries: dict) -> LinearForm:
    """Cancel negated-literal terms of ``combo`` with negation lifts."""
    while True:
        neg_terms = [t for t in combo._c if t.negatives]
        if not neg_terms:
            return combo
        neg_terms.sort(key=lambda t: (-t.negatives, len(t), t))
        t = neg_terms[0]
        coeff = combo._c[t]
        prov = system.negation_provenance(t)
        f = system.constraint(prov).form
        k = -Fraction(coeff) / f[t]
        k = to_rational(k)
        combo.iadd(f, k)
        entries[prov] = to_rational(entries.get(prov, 0) + k)


def _certificate(system, red: "_Reduced", owner, payload) -> FarkasCertificate:
    mult: dict[int, Fraction] = {}
    for j, y in payload.items():
        k, s = owner[j]
        mult[k] = mult.get(k, 0) + s * y
    entries: dict = {}
    combo = LinearForm()
    for k, y in sorted(mult.items()):
        if not y:
            continue
        c, rel, rf, scale = red.rows[k]
        m = to_rational(y * scale)
        entries[c.provenance] = to_rational(entries.get(c.provenance, 0) + m)
        combo.iadd(c.form, m)
    _complete(system, combo, entries)
    return FarkasCertificate([(p, m) for p, m in entries.items() if m],
                             {"rank": system.rank, "quotient": isinstance(system, QuotientSystem)})


def _checked(system, res: LPResult, check: bool) -> LPResult:
    if not check:
        return res
    if res.certificate is not None:
        vr = verify_farkas(res.certificate, system)
        if not vr:
            raise AssertionError(f"internal certificate failed verification: {vr.reason}")
    else:
        bad = verify_point(res.point, system)
        if bad is not None:
            raise AssertionError(f"internal point violates {system.describe(bad.provenance)}")
    return res


def feasible(system, *, check: bool = True, guided: bool = False) -> LPResult:
    """Decide emptiness of ``system`` exactly.

    The certificate or point is re-checked against the system before
    returning when ``check`` is true.  With ``guided`` a floating-point LP
    (scipy's HiGHS) first proposes a Farkas support or a vertex; the exact
    code then certifies the proposal and the plain exact solve runs only if
    it cannot.
    """
    t0 = time.perf_counter()
    red = _Reduced(system, system.iter_constraints())
    colptr, rowidx, vals, owner, nrows = red.columns()
    t1 = time.perf_counter()
    if guided:
        res = _guided(system, red, colptr, rowidx, vals, owner, nrows)
        if res is not None:
            res.stats.update({"constraints": len(red.rows), "trivial": red.trivial,
                              "lp_variables": len(red.variables), "build_s": t1 - t0,
                              "total_s": time.perf_counter() - t0})
            return _checked(system, res, check)
    verdict, payload, stats = solve_farkas(colptr, rowidx, vals, nrows)
    t2 = time.perf_counter()
    stats.update({"constraints": len(red.rows), "trivial": red.trivial,
                  "lp_variables": len(red.variables), "build_s": t1 - t0, "solve_s": t2 - t1})
    if verdict == "infeasible":
        res = LPResult("infeasible", certificate=_certificate(system, red, owner, payload), stats=stats)
    else:
        pi = payload
        last = pi[-1]
        point = {UNIT: 1}
        for t, i in red.var_index.items():
            point[t] = to_rational(-pi[i] / last)
        res = LPResult("feasible", point=point, stats=stats)
    res = _checked(system, res, check)
    stats["total_s"] = time.perf_counter() - t0
    return res


# -- float-guided solving -------------------------------------------------------

def _guided(system, red, colptr, rowidx, vals, owner, nrows) -> LPResult | None:
    try:
        import scipy.sparse as sp
        from scipy.optimize import linprog
    except ImportError:
        return None
    ncols = len(colptr) - 1
    A = sp.csc_matrix((np.asarray(vals, dtype=float), np.asarray(rowidx), np.asarray(colptr)),
                      shape=(nrows, ncols))
    b = np.zeros(nrows)
    b[-1] = 1
    fl = linprog(np.ones(ncols), A_eq=A, b_eq=b, bounds=(0, None), method="highs-ds")
    if fl.status == 0:
        cols = np.flatnonzero(fl.x > 1e-9)
        sub_ptr, sub_idx, sub_val = [0], [], []
        for j in cols:
            sub_idx.extend(rowidx[colptr[j]:colptr[j + 1]])
            sub_val.extend(vals[colptr[j]:colptr[j + 1]])
            sub_ptr.append(len(sub_idx))
        verdict, payload, stats = solve_farkas(sub_ptr, sub_idx, sub_val, nrows)
        if verdict != "infeasible":
            return None
        payload = {int(cols[j]): y for j, y in payload.items()}
        stats["guided"] = "farkas-support"
        stats["guided_columns"] = len(cols)
        return LPResult("infeasible", certificate=_certificate(system, red, owner, payload), stats=stats)
    if fl.status != 2:
        return None
    point = _vertex(red, sp, linprog)
    if point is None or verify_point(point, system) is not None:
        return None
    return LPResult("feasible", point=point, stats={"guided": "vertex", "pivots": 0})


def _vertex(red, sp, linprog) -> dict | None:
    """Exact vertex of the reduced system near a HiGHS vertex, or None."""
    try:
        from gmpy2 import mpq as Q
    except ImportError:
        Q = Fraction
    nv = len(red.variables)
    rows = []
    for c, rel, rf, scale in red.rows:
        a = {red.var_index[t]: int(v * scale) for t, v in rf._c.items() if t}
        rows.append((a, int(rf._c.get(UNIT, 0) * scale), rel is Relation.EQ))

    def mat(sel):
        r, ci, v = [], [], []
        for k, (a, _, _) in enumerate(sel):
            for i, x in a.items():
                r.append(k)
                ci.append(i)
                v.append(x)
        return sp.csr_matrix((v, (r, ci)), shape=(len(sel), nv))

    eqs = [x for x in rows if x[2]]
    ineqs = [x for x in rows if not x[2]]
    # a generic objective makes the returned basic solution a vertex
    cost = np.random.default_rng(0).normal(size=nv)
    fl = linprog(cost, A_ub=-mat(ineqs) if ineqs else None,
                 b_ub=np.array([b for _, b, _ in ineqs], dtype=float) if ineqs else None,
                 A_eq=mat(eqs) if eqs else None,
                 b_eq=-np.array([b for _, b, _ in eqs], dtype=float) if eqs else None,
                 bounds=(0, 1), method="highs-ds")
    if fl.status != 0:
        return None
    x = fl.x
    active = [(a, b) for a, b, eq in rows
              if eq or abs(sum(v * x[i] for i, v in a.items()) + b) < 1e-7]
    for i in range(nv):
        if x[i] < 1e-9:
            active.append(({i: 1}, 0))
        elif x[i] > 1 - 1e-9:
            active.append(({i: 1}, -1))
    # reduced echelon rows keyed by pivot column
    piv: dict[int, tuple[dict, object]] = {}
    for a, b in active:
        r = {i: Q(v) for i, v in a.items()}
        c = Q(b)
        for p in sorted(piv):
            f = r.get(p)
            if not f:
                continue
            pr, pc = piv[p]
            for i, v in pr.items():
                w = r.get(i, 0) - f * v
                if w:
                    r[i] = w
                else:
                    r.pop(i, None)
            c -= f * pc
        if not r:
            continue
        p = min(r)
        f = r[p]
        piv[p] = ({i: v / f for i, v in r.items()}, c / f)
        if len(piv) == nv:
            break
    if len(piv) < nv:
        return None
    val: dict[int, object] = {}
    for p in sorted(piv, reverse=True):
        r, c = piv[p]
        val[p] = -c - sum(v * val[i] for i, v in r.items() if i != p)
    return {UNIT: 1, **{red.variables[i]: to_rational(Fraction(int(v.numerator), int(v.denominator)))
                        for i, v in val.items()}}


def point_value(point: dict, system, t: Term):
    """Value of an arbitrary term at a point given over positive terms."""
    return system.expansion(t).evaluate(lambda s: point.get(s, 0))


def verify_point(point: dict, system):
    """Return the first violated constraint, or None."""
    cache: dict = {}

    def val(t):
        v = cache.get(t)
        if v is None:
            v = point_value(point, system, t)
            cache[t] = v
        return v

    for c in system.iter_constraints():
        if not c.holds_at(val):
            return c
    return None


def verify_farkas(cert: FarkasCertificate, system) -> VerifyResult:
    """Independent check: every entry names a constraint of ``system``,
    inequality multipliers are non-negative, and the combination is a
    negative constant."""
    combo = LinearForm()
    for prov, m in cert.entries:
        if isinstance(prov, Derived):
            return VerifyResult(False, f"derived constraint {prov.label!r} is not an axiom",
                                cert.support_size)
        try:
            c = system.constraint(prov)
        except SystemError_ as e:
            return VerifyResult(False, f"not in system: {e}", cert.support_size)
        m = to_rational(m)
        if c.relation is Relation.GEQ and m < 0:
            return VerifyResult(False, f"negative multiplier on inequality {system.describe(prov)}",
                                cert.support_size)
        combo.iadd(c.form, m)
    if not combo.is_constant():
        left = next(t for t in combo if t)
        return VerifyResult(False, f"non-constant residual on {left}", cert.support_size)
    if combo.const >= 0:
        return VerifyResult(False, f"residual constant {combo.const} is not negative",
                            cert.support_size, combo.const)
    return VerifyResult(True, "ok", cert.support_size, combo.const)


# -- rank -------------------------------------------------------------------

@dataclass
class RankResult:
    rank: int | None  # smallest refuting rank, None if none up to r_max
    results: dict[int, LPResult]
    status: str = "ok"  # or "resource_limited"
    limit: str | None = None

    def __str__(self):
        if self.status != "ok":
            return f"resource-limited ({self.limit})"
        return str(self.rank) if self.rank is not None else f"> {max(self.results, default=-1)}"


def system_for(cnf: Cnf, r: int, symmetric: bool = False, term_cap=DEFAULT_TERM_CAP):
    sys = lift_system(cnf, r, term_cap)
    return symmetrize(sys) if symmetric else sys


def sa_rank(cnf: Cnf, r_max: int, *, symmetric: bool = False, r_min: int = 0,
            term_cap: int | None = DEFAULT_TERM_CAP, check: bool = True,
            guided: bool = False) -> RankResult:
    """Smallest ``r <= r_max`` with ``P_r`` empty, solving each rank exactly."""
    results: dict[int, LPResult] = {}
    for r in range(r_min, r_max + 1):
        try:
            sys = system_for(cnf, r, symmetric, term_cap)
        except ResourceLimitExceeded as e:
            return RankResult(None, results, "resource_limited", str(e))
        res = feasible(sys, check=check, guided=guided)
        results[r] = res
        if not res.feasible:
            return RankResult(r, results)
    return RankResult(None, results)
