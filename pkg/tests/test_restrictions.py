import math

import pytest

from salift.principles import Kind, VariableId, binary_php, neg, pos
from salift.restrictions import (
    RprimeSampler, RSampler, _rng, apply, apply_cnf, apply_term, consistent_holes,
    matchable_pigeon_set, max_matching, sample_R, sample_Rprime, survival_stats, width_term,
)
from salift.terms import ZERO, term_of


def pbit(i, k):
    return VariableId(Kind.PBit, (i,), k)


def test_sample_R_is_reproducible():
    assert sample_R(8, seed=11) == sample_R(8, seed=11)
    assert sample_R(8, seed=11).to_json() == sample_R(8, seed=11).to_json()


def test_R_is_injective_and_bounded():
    s = RSampler(16)
    batch = s.batch(_rng(3), 2000)
    for row in batch:
        holes = row[row > 0]
        assert len(holes) == len(set(holes.tolist())) <= 16
        assert holes.max(initial=1) <= 16


def test_R_requires_power_of_two():
    with pytest.raises(ValueError):
        RSampler(6)


def test_Rprime_sets_one_bit_per_pigeon():
    r = sample_Rprime(32, 16, seed=4)
    assert r.size == 32
    assert all(1 <= k <= 4 and b in (0, 1) for k, b in r.assignment)
    assert sample_Rprime(32, 16, seed=4) == r


def test_Rprime_fixed_bit_frequency():
    s = RprimeSampler(17, 16)
    trials = 40_000
    batch = s.batch(_rng(9), trials)
    hits = int(((batch[:, 0, 0] == 2) & (batch[:, 0, 1] == 0)).sum())
    p = 1 / (2 * 4)
    assert abs(hits / trials - p) <= 3 * math.sqrt(p * (1 - p) / trials)


def test_apply_term():
    r = sample_R(4, seed=0)
    while r.assigned(1) is None:
        r = sample_R(4, seed=r.seed + 1)
    h = r.assigned(1)
    bit1 = (h - 1) >> 1 & 1
    wrong = term_of(pos(pbit(1, 1)) if bit1 == 0 else neg(pbit(1, 1)))
    assert apply_term(r, wrong) is ZERO
    right = term_of(neg(pbit(1, 1)) if bit1 == 0 else pos(pbit(1, 1)), pos(pbit(2, 1)))
    got = apply(r, right)
    assert got is not ZERO and len(got) <= 1


def minimal(clauses):
    """Clause sets with subsumed clauses removed."""
    sets = {frozenset(c.codes) for c in clauses}
    return {c for c in sets if not any(d < c for d in sets)}


def _free_holes(r):
    return sorted(set(range(1, r.n + 1)) - r.holes_taken())


@pytest.mark.parametrize("seed", range(5))
def test_restricted_php_is_smaller_php(seed):
    n = 16
    r = sample_R(n, seed)
    f = binary_php(n + 1, n)
    g = apply(r, f)
    free = _free_holes(r)
    m2 = n + 1 - r.size
    want = binary_php(m2, n, holes=free)
    assert minimal(g.clauses) == minimal(want.clauses)
    # clauses of the taken holes only survive as subsumed copies
    assert {frozenset(c.codes) for c in want.clauses} <= {frozenset(c.codes) for c in g.clauses}
    # satisfied clauses are gone: every remaining literal is a free pigeon's bit
    for c in g.clauses:
        assert all(l.var.indices[0] <= m2 for l in c)


def test_apply_cnf_checks_shape():
    r = sample_R(8, seed=1)
    with pytest.raises(ValueError):
        apply_cnf(r, binary_php(9, 4))


def test_survival_single_trial():
    st = survival_stats([width_term(range(1, 9))], RSampler(16), 1, seed=2)
    assert st.freq(st.survive[0]) in (0, 1)


def test_survival_stats_reproducible_and_job_independent():
    terms = [width_term(range(1, 9)), width_term(range(1, 5), bit=2, value=0)]
    a = survival_stats(terms, RSampler(16), 25_000, seed=5, below=(2,), above=(8,))
    b = survival_stats(terms, RSampler(16), 25_000, seed=5, below=(2,), above=(8,), jobs=2)
    assert a.to_json() == b.to_json()
    assert sum(a.size_hist) == 25_000


def test_slack_helpers():
    st = survival_stats([width_term([1])], RSampler(4), 100, seed=0)
    assert st.slack(0.5) == pytest.approx(3 * 0.05)
    assert st.within(0, 0.0)


def test_max_matching():
    adj = {1: [1, 2], 2: [1], 3: [2, 3]}
    m = max_matching([1, 2, 3], adj)
    assert len(m) == 3 and len(set(m.values())) == 3
    assert len(max_matching([1, 2], {1: [1], 2: [1]})) == 1


@pytest.mark.parametrize("seed", range(20))
def test_matchable_sets_have_matchings(seed):
    for m, n in [(32, 16), (12, 8), (20, 16)]:
        r = sample_Rprime(m, n, seed)
        chosen = matchable_pigeon_set(r)
        if chosen is None:
            continue
        adj = {p: consistent_holes(r, p) for p in chosen}
        assert len(max_matching(chosen, adj)) == len(chosen)


def test_R_restricted_pigeons_have_matchings():
    for seed in range(20):
        r = sample_R(16, seed)
        free_p = [p for p in range(1, 18) if r.assigned(p) is None]
        free_h = set(_free_holes(r))
        adj = {p: [h for h in consistent_holes(r, p) if h in free_h] for p in free_p}
        assert len(max_matching(free_p, adj)) == min(len(free_p), len(free_h))
