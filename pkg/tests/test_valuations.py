import io
import itertools
import random
from fractions import Fraction

import pytest

from salift.lift import lift_system
from salift.principles import Kind, P, S, VariableId, binary_php, neg, pos, unary_lnp
from salift.terms import UNIT, ZERO, canonical_term, term_of
from salift.valuations import (
    OutOfDomain, check_valuation, evaluate, matching_valuation, partial_injection_valuation,
    permutation_valuation,
)

from oracles import count_orders


def pbit(i, k):
    return VariableId(Kind.PBit, (i,), k)


def test_matching_examples():
    v = matching_valuation(3, {1, 2}, n=2)
    assert v(term_of(pos(pbit(1, 1)))) == Fraction(1, 2)
    assert v(UNIT) == 1
    assert v(term_of(pos(pbit(1, 1)), pos(pbit(2, 1)))) == 0
    assert evaluate(v, ZERO) == 0


def test_matching_out_of_domain():
    v = matching_valuation(4, {1, 2}, n=2)
    t = term_of(pos(pbit(1, 1)), pos(pbit(2, 1)), neg(pbit(3, 1)))
    assert not v.in_domain(t)
    with pytest.raises(OutOfDomain):
        v.evaluate_checked(t)


def _matching_terms(m, r, max_deg):
    lits = [l for i in range(1, m + 1) for k in range(1, r + 1) for l in (pos(pbit(i, k)), neg(pbit(i, k)))]
    for d in range(max_deg + 1):
        for combo in itertools.combinations(lits, d):
            t = canonical_term(combo)
            if t is not ZERO:
                yield t


def test_matching_pigeon_symmetry():
    m = 4
    v = matching_valuation(m, {1, 2, 3}, n=4)
    for t in _matching_terms(m, 2, 2):
        for perm in itertools.permutations(range(1, m + 1)):
            img = canonical_term(
                pos(pbit(perm[l.var.indices[0] - 1], l.var.bit)) if l.positive
                else neg(pbit(perm[l.var.indices[0] - 1], l.var.bit)) for l in t.literals)
            assert v(img) == v(t)


def test_matching_extension_choice_is_irrelevant():
    # value equals the count over any completion of the mentioned pigeons
    v = matching_valuation(5, {1, 3, 4}, n=4)
    for t in _matching_terms(5, 2, 2):
        if not v.in_domain(t):
            continue
        ment = v.mentioned(t)
        rest = [i for i in range(1, 6) if i not in ment]
        for extra in itertools.combinations(rest, 3 - len(ment)):
            pigeons = ment + list(extra)
            hits = total = 0
            for mt in v.matchings(pigeons):
                total += 1
                hits += all(((mt[l.var.indices[0]] - 1) >> (2 - l.var.bit) & 1) == l.positive
                            for l in t.literals)
            assert Fraction(hits, total) == v(t)


def test_negation_splitting_and_monotonicity_matching():
    v = matching_valuation(4, {1, 2, 4}, n=4)
    var_list = [pbit(i, k) for i in range(1, 5) for k in (1, 2)]
    for t in _matching_terms(4, 2, 2):
        if not v.in_domain(t):
            continue
        for x in var_list:
            a, b = t & term_of(pos(x)), t & term_of(neg(x))
            if v.in_domain(a) and v.in_domain(b):
                assert v(a) + v(b) == v(t)
                assert v(a) <= v(t)


def test_permutation_examples():
    assert permutation_valuation(2)(term_of(pos(P(1, 2)))) == Fraction(1, 2)
    assert permutation_valuation(2)(term_of(pos(P(1, 2)), pos(P(2, 1)))) == 0
    assert permutation_valuation(3)(term_of(pos(P(1, 2)), pos(P(2, 3)))) == Fraction(1, 6)
    assert evaluate(permutation_valuation(3), UNIT) == 1
    assert permutation_valuation(3)(term_of(pos(S(1, 2)))) == Fraction(1, 2)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_permutation_matches_enumeration(n):
    rng = random.Random(n)
    v = permutation_valuation(n)
    for _ in range(40):
        lits = []
        for _ in range(rng.randint(1, 4)):
            i, j = rng.randint(1, n), rng.randint(1, n)
            var = (P if rng.random() < 0.5 else S)(i, j)
            lits.append(pos(var) if rng.random() < 0.7 else neg(var))
        t = canonical_term(lits)
        if t is ZERO:
            continue

        def holds(rank, t=t):
            return all((rank[l.var.indices[0]] < rank[l.var.indices[1]]) == l.positive
                       for l in t.literals)
        assert v(t) == count_orders(n, holds)


def test_partial_injection_examples():
    v = partial_injection_valuation(3)
    models = list(v.models())
    assert len(models) == 6
    hit = sum(1 for m in models if m[1] == 1)
    assert v(term_of(pos(P(1, 1)))) == Fraction(hit, 6)
    unmapped = Fraction(sum(1 for m in models if m[1] is None), 6)
    assert sum(v(term_of(pos(P(1, j)))) for j in (1, 2)) + unmapped == v(UNIT)


@pytest.mark.parametrize("n", [3, 4])
def test_partial_injection_matches_models(n):
    v = partial_injection_valuation(n)
    models = list(v.models())
    atoms = [(i, j) for i in range(1, n + 1) for j in range(1, n)]
    for k in range(0, 3):
        for combo in itertools.combinations(atoms, k):
            for signs in itertools.product((True, False), repeat=k):
                t = canonical_term(pos(P(i, j)) if s else neg(P(i, j)) for (i, j), s in zip(combo, signs))
                if t is ZERO:
                    continue
                want = Fraction(sum(all((m[i] == j) == s for (i, j), s in zip(combo, signs))
                                    for m in models), len(models))
                assert v(t) == want


def test_prop_identity_small():
    n = 4
    v = partial_injection_valuation(n)
    atoms = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    for phi in itertools.combinations(atoms, n - 3):
        t = canonical_term(pos(P(i, j)) for i, j in phi)
        for i in range(1, n + 1):
            assert sum(v(t & term_of(pos(P(i, j)))) for j in range(1, n + 1)) == v(t)


def test_check_valuation_permutation_n5():
    rep = check_valuation(permutation_valuation(5), lift_system(unary_lnp(5), 0), degree_cap=1)
    assert rep.ok and rep.checked > 0


def test_check_valuation_records_violations():
    # the permutation valuation cannot satisfy every lifted lower axiom at n=4
    rep = check_valuation(permutation_valuation(4), lift_system(unary_lnp(4), 2), limit=5)
    assert rep.violations
    c, slack = rep.violations[0]
    assert isinstance(slack, Fraction) and slack < 0
    data = rep.to_json()
    assert data["violations"][0]["slack"].startswith("-")


def test_check_valuation_matching_binary_php():
    f = binary_php(4, 4, holes=(1, 2, 3))
    v = matching_valuation(4, (1, 2, 3), n=4)
    rep = check_valuation(v, lift_system(f, 1))
    assert rep.ok and rep.checked > 0 and rep.out_of_domain == 0
    # at rank 2 some lifts mention all four pigeons: skipped, not fatal
    rep = check_valuation(v, lift_system(f, 2))
    assert rep.ok and rep.out_of_domain > 0


def test_csv_dump():
    v = permutation_valuation(3)
    v(term_of(pos(P(1, 2))))
    buf = io.StringIO()
    v.dump_csv(buf)
    assert buf.getvalue().splitlines()[0] == "term,value"
    assert "P[1,2],1/2" in buf.getvalue()
