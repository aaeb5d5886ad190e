import io
import itertools
import json

import pytest

from salift.lift import (
    ClauseLift, IndexSymmetry, Relation, ResourceLimitExceeded,
    SymmetryError, SystemError_, lift_bound, lift_clause, lift_negation, lift_system,
    symmetrize, term_universe_size,
)
from salift.lp import feasible, verify_point
from salift.principles import Clause, Cnf, Kind, P, S, neg, pos, unary_lnp, unary_lnp_eq, unary_php
from salift.terms import UNIT, ZERO, LinearForm, term_of

from oracles import assignments

x, y, z = P(1, 2), P(2, 1), P(3, 1)
X, Y, Z = term_of(pos(x)), term_of(pos(y)), term_of(pos(z))


def form(*pairs):
    return LinearForm(dict(pairs))


def test_lift_clause_examples():
    c = Clause([pos(x), pos(y)])
    got = lift_clause(c, Z)
    assert got.form == form((X & Z, 1), (Y & Z, 1), (Z, -1)) and got.relation is Relation.GEQ
    got = lift_clause(c, term_of(neg(x)))
    nx = term_of(neg(x))
    assert got.form == form((Y & nx, 1), (nx, -1))
    s1, s2 = S(1, 1), S(2, 1)
    eq = lift_clause(Clause([pos(s1), pos(s2)]), X, equality=True)
    assert eq.relation is Relation.EQ
    assert eq.form == form((term_of(pos(s1), pos(x)), 1), (term_of(pos(s2), pos(x)), 1), (X, -1))
    with pytest.raises(SystemError_):
        lift_clause(c, ZERO)


def test_lift_negation_examples():
    assert lift_negation(x, UNIT).form == form((X, 1), (term_of(neg(x)), 1), (UNIT, -1))
    assert lift_negation(x, X).form == LinearForm()
    assert lift_negation(x, Y).form == form((X & Y, 1), (term_of(neg(x), pos(y)), 1), (Y, -1))


def test_lift_bound_examples():
    lo, up = lift_bound(pos(x), UNIT)
    assert lo.form == form((X, 1)) and up.form == form((UNIT, 1), (X, -1))
    lo, up = lift_bound(pos(x), Y)
    assert lo.form == form((X & Y, 1)) and up.form == form((Y, 1), (X & Y, -1))


def test_monotonicity_from_chained_bounds():
    # Z(D) - Z(D & x & y) = upper(x, D) + upper(y, D & x)
    d = Z
    total = lift_bound(pos(x), d)[1].form + lift_bound(pos(y), d & X)[1].form
    assert total == form((d, 1), (d & X & Y, -1))


def test_rank_zero_is_base_system():
    f = unary_php(2, 1)
    sys = lift_system(f, 0)
    assert list(sys.lift_terms()) == [UNIT]
    forms = {c.form for c in sys.iter_constraints()}
    p1, p2 = term_of(pos(P(1, 1))), term_of(pos(P(2, 1)))
    assert form((p1, 1), (UNIT, -1)) in forms
    assert form((p2, 1), (UNIT, -1)) in forms
    assert form((term_of(neg(P(1, 1))), 1), (term_of(neg(P(2, 1))), 1), (UNIT, -1)) in forms


@pytest.mark.parametrize("nv,r", [(1, 0), (2, 1), (3, 1), (3, 2), (4, 3)])
def test_term_universe_size(nv, r):
    codes = range(nv)
    count = 0
    for k in range(0, r + 2):
        for vs in itertools.combinations(codes, k):
            count += 2 ** k
    assert term_universe_size(nv, r) == count


def test_resource_guard():
    with pytest.raises(ResourceLimitExceeded) as e:
        lift_system(unary_lnp(5), 3, term_cap=10_000)
    assert "10000" in str(e.value)


def test_system_contents_and_degree():
    f = unary_lnp(2)
    sys = lift_system(f, 1)
    for c in sys.iter_constraints():
        assert c.form.degree <= 2
        assert sys.constraint(c.provenance).form == c.form
    with pytest.raises(SystemError_):
        sys.constraint(ClauseLift(0, term_of(pos(x), pos(y))))
    eq = lift_system(unary_lnp_eq(2), 1)
    assert any(c.relation is Relation.EQ and "lower" in eq.describe(c.provenance)
               for c in eq.iter_constraints())


def test_jsonl_is_deterministic():
    sys = lift_system(unary_lnp(2), 1)
    a, b = io.StringIO(), io.StringIO()
    assert sys.to_jsonl(a) == sys.to_jsonl(b)
    assert a.getvalue() == b.getvalue()
    first = json.loads(a.getvalue().splitlines()[0])
    assert set(first) == {"relation", "provenance", "form"}


def _sat_cnf():
    a, b, c = P(1, 1), P(1, 2), P(2, 1)
    return Cnf((a, b, c), (Clause([pos(a), pos(b)]), Clause([neg(a), pos(c)]),
                           Clause([neg(b), neg(c)])))


def test_satisfying_assignment_lifts_to_feasible_point():
    f = _sat_cnf()
    sys = lift_system(f, 2)
    found = 0
    for a in assignments(f.variables):
        if not all(any(a[l.var] == l.positive for l in cl) for cl in f.clauses):
            continue
        found += 1

        def val(t, a=a):
            return int(all(a[l.var] == l.positive for l in t.literals))
        assert all(c.holds_at(val) for c in sys.iter_constraints())
    assert found


def test_feasible_point_projects_to_lower_rank():
    f = _sat_cnf()
    hi = feasible(lift_system(f, 2))
    assert hi.feasible
    lo = lift_system(f, 1)
    assert verify_point(hi.point, lo) is None


def test_symmetrize_collapses_order_atoms():
    qs = symmetrize(lift_system(unary_lnp(4), 0))
    reps = {qs.orbit(term_of(pos(P(i, j)))) for i in range(1, 5) for j in range(1, 5) if i != j}
    assert len(reps) == 1


@pytest.mark.parametrize("n", [3, 4])
def test_witness_orbit_single_representative(n):
    qs = symmetrize(lift_system(unary_lnp(n), 1))
    reps = {qs.orbit(term_of(pos(S(k, j)), pos(P(i, j))))
            for i, j, k in itertools.permutations(range(1, n + 1), 3)}
    assert len(reps) == 1
    t = term_of(pos(S(3, 2)), pos(P(1, 2)))
    assert qs.group.orbit_size(t) == n * (n - 1) * (n - 2)


def test_quotient_count_independent_of_relabelling():
    f = unary_lnp_eq(4)
    g = IndexSymmetry.for_cnf(f)
    sigma = {"e": {1: 3, 2: 1, 3: 4, 4: 2}}
    clauses = tuple(Clause([l for l in map(lambda c: _decode(g.relabel_literal(c, sigma)), cl.codes)],
                           allow_tautology=True) for cl in f.clauses)
    groups = tuple(f.equality_groups)
    relabelled = Cnf(f.variables, clauses, groups, dict(f.meta), f.labels)
    a = len(symmetrize(lift_system(f, 1)).constraints)
    b = len(symmetrize(lift_system(relabelled, 1)).constraints)
    assert a == b


def _decode(code):
    from salift.principles import decode_literal
    return decode_literal(code)


def test_bad_group_rejected():
    f = unary_lnp(3)
    bad = IndexSymmetry(((Kind.P, ("e", "e")),), (("e", 3),))
    with pytest.raises(SymmetryError):
        symmetrize(lift_system(f, 0), bad)


@pytest.mark.parametrize("f,r", [(unary_lnp(3), 0), (unary_lnp(3), 1), (unary_lnp_eq(3), 1),
                                 (unary_php(3, 2), 0), (unary_php(3, 2), 1)])
def test_quotient_agrees_with_full_system(f, r):
    full = feasible(lift_system(f, r))
    quot = feasible(symmetrize(lift_system(f, r)))
    assert full.verdict == quot.verdict


def test_quotient_multiplicity_is_orbit_count():
    qs = symmetrize(lift_system(unary_lnp(3), 0))
    for q in qs.constraints:
        total = qs.multiplicity(q)
        assert total >= 1
    self_c = next(q for q in qs.constraints if "self" in qs.describe(q.provenance))
    assert qs.multiplicity(self_c) == 3
