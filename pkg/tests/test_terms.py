import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from salift.principles import P, S, neg, pos
from salift.terms import (
    UNIT, ZERO, LinearForm, Term, canonical_term, linearize_square, multiply,
    parse_rational, positive_expansion, rational_str, term_of,
)

from oracles import assignments, eval_form

x, y, z = P(1, 2), P(2, 3), S(1, 3)
VARS = [P(1, k) for k in range(1, 7)]


def lf(*pairs, const=0):
    f = LinearForm({term_of(*lits): c for lits, c in pairs})
    return f + const


def test_canonical_term_rules():
    assert canonical_term([pos(x), pos(x)]) == term_of(pos(x))
    assert canonical_term([pos(y), pos(x)]) == canonical_term([pos(x), pos(y)])
    assert canonical_term([pos(x), neg(x), pos(y)]) is ZERO
    assert canonical_term([]) == UNIT and UNIT.degree == 0


def test_term_text_and_json():
    t = term_of(pos(x), neg(z))
    assert str(t) == "P[1,2]*~S[1,3]"
    assert Term.parse(str(t)) == t
    assert Term.from_json(t.to_json()) == t
    assert Term.from_json(ZERO.to_json()) is ZERO


def test_rationals():
    assert rational_str(Fraction(-3, 6)) == "-1/2"
    assert parse_rational("4/2") == 2 and isinstance(parse_rational("4/2"), int)


def test_multiply_examples():
    X = lf(((pos(x),), 1))
    nX = lf(((neg(x),), 1))
    assert multiply(X, nX) == LinearForm()
    assert multiply(1 - X, X) == LinearForm()
    s, pj, pk = pos(z), pos(P(1, 1)), pos(P(1, 2))
    r = lf(((s, pj), 1), ((s, pk), -1))
    want = lf(((s, pj), 1), ((s, pk), 1), ((s, pj, pk), -2))
    assert linearize_square(r) == want


def test_linearize_square_examples():
    p1, p2 = pos(P(1, 1)), pos(P(2, 1))
    p = lf(((p1,), -1), ((p2,), -1), const=1)
    assert linearize_square(p) == lf(((p1,), -1), ((p2,), -1), ((p1, p2), 2), const=1)
    d = lf(((pos(x),), 1), ((pos(y),), -1))
    assert linearize_square(d) == lf(((pos(x),), 1), ((pos(y),), 1), ((pos(x), pos(y)), -2))
    assert linearize_square(LinearForm()) == LinearForm()


def test_positive_expansion_matches_assignments():
    t = term_of(pos(x), neg(y), neg(z))
    e = positive_expansion(t)
    assert all(not tt.negatives for tt in e)
    for a in assignments([x, y, z]):
        assert eval_form(e, a) == eval_form(LinearForm.of_term(t), a)


def test_form_json_round_trip():
    f = lf(((pos(x), neg(y)), Fraction(2, 3)), ((pos(z),), -1), const=5)
    assert LinearForm.from_json(f.to_json()) == f


literal = st.builds(lambda k, s: pos(VARS[k]) if s else neg(VARS[k]),
                    st.integers(0, 5), st.booleans())
coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)
form = st.lists(st.tuples(st.lists(literal, max_size=3), coef), max_size=4).map(
    lambda items: LinearForm([(canonical_term(ls), c) for ls, c in items]))


@settings(max_examples=100, deadline=None)
@given(form, form)
def test_multiply_agrees_with_assignments(p, q):
    prod = multiply(p, q)
    for a in assignments(VARS):
        assert eval_form(prod, a) == eval_form(p, a) * eval_form(q, a)


@settings(max_examples=100, deadline=None)
@given(form)
def test_square_is_pointwise_square(p):
    sq = linearize_square(p)
    assert sq == multiply(p, p)
    for a in assignments(VARS):
        v = eval_form(sq, a)
        assert v == eval_form(p, a) ** 2 and v >= 0


def test_canonical_term_is_order_free():
    rng = random.Random(5)
    for _ in range(50):
        lits = [rng.choice([pos, neg])(rng.choice(VARS)) for _ in range(4)]
        shuffled = lits[:] + lits[:2]
        rng.shuffle(shuffled)
        assert canonical_term(lits) == canonical_term(shuffled)
