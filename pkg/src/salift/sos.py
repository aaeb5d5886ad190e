"""Squares layer: linearised squares, sum-of-squares refutations, moment
matrices and an exact positive-semidefiniteness test."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .principles import Cnf, Kind, Literal, VariableId
from .terms import (
    UNIT, LinearForm, Term, linearize_square, multiply, parse_rational,
    positive_expansion, rational_str,
)

__all__ = [
    "SosCertificate", "SosResult", "MomentMatrix", "PsdResult", "clause_axiom",
    "cnf_axioms", "verify_sos", "moment_matrix", "psd_check", "index_terms",
    "order_variables", "characteristic_average",
]


def clause_axiom(clause) -> LinearForm:
    """``sum of literals - 1 >= 0``."""
    f = LinearForm.constant(-1)
    for c in clause.codes:
        f.iadd(Term((c,)))
    return f


def cnf_axioms(cnf: Cnf) -> list[LinearForm]:
    return [clause_axiom(c) for c in cnf.clauses]


@dataclass
class SosCertificate:
    """``-1 = sum p_i q_i + sum r_i^2`` with ``p_i`` non-negative."""

    products: list[tuple[int, LinearForm]]
    squares: list[LinearForm]
    degree: int
    meta: dict = field(default_factory=dict)

    def total(self, axioms: Sequence[LinearForm], squares: int | None = None) -> LinearForm:
        """Exact sum, rewritten over positive terms; ``squares`` limits how
        many of the squares are included."""
        out = LinearForm()
        for ref, p in self.products:
            out.iadd(multiply(p, axioms[ref]))
        for r in self.squares[:squares]:
            out.iadd(linearize_square(r))
        return out.substitute(positive_expansion)

    def to_json(self) -> dict:
        return {"degree": self.degree, "meta": self.meta,
                "products": [[ref, p.to_json()] for ref, p in self.products],
                "squares": [r.to_json() for r in self.squares]}

    @classmethod
    def from_json(cls, d: dict) -> "SosCertificate":
        return cls([(ref, LinearForm.from_json(p)) for ref, p in d["products"]],
                   [LinearForm.from_json(r) for r in d["squares"]], d["degree"], d.get("meta", {}))


@dataclass
class SosResult:
    valid: bool
    reason: str
    total: LinearForm | None = None

    def __bool__(self):
        return self.valid


def _mdeg(f: LinearForm) -> int:
    return max((len(t) for t in f.terms()), default=0)


def verify_sos(cert: SosCertificate, axioms: Sequence[LinearForm]) -> SosResult:
    for ref, p in cert.products:
        if not 0 <= ref < len(axioms):
            return SosResult(False, f"dangling axiom reference {ref}")
        if any(v < 0 for _, v in p.items()):
            return SosResult(False, f"negative coefficient in multiplier of axiom {ref}")
        if _mdeg(multiply(p, axioms[ref])) > cert.degree:
            return SosResult(False, f"product with axiom {ref} exceeds degree {cert.degree}")
    for r in cert.squares:
        if _mdeg(linearize_square(r)) > cert.degree:
            return SosResult(False, f"square exceeds degree {cert.degree}")
    total = cert.total(axioms)
    if total != -1:
        return SosResult(False, f"sum is {total}, not -1", total)
    return SosResult(True, "ok", total)


# -- moment matrices ---------------------------------------------------------

def order_variables(n: int) -> list[VariableId]:
    """``P[i,j]`` for ``i != j``: the order atoms used for LNP moment matrices."""
    return [VariableId(Kind.P, (i, j)) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]


def index_terms(variables: Iterable[VariableId], k: int, negations: bool = False) -> list[Term]:
    """Non-zero terms of degree at most ``k``, canonical order."""
    codes = sorted(Literal(v).code for v in variables)
    out = [UNIT]
    for d in range(1, k + 1):
        for combo in itertools.combinations(codes, d):
            if negations:
                for signs in itertools.product((1, 0), repeat=d):
                    out.append(Term(sorted((c & ~1) | s for c, s in zip(combo, signs))))
            else:
                out.append(Term(combo))
    return out


@dataclass
class MomentMatrix:
    index: list[Term]
    entries: list[list[Fraction]]

    def __len__(self):
        return len(self.index)

    def to_json(self) -> dict:
        return {"index": [t.to_json() for t in self.index],
                "entries": [[rational_str(x) for x in row] for row in self.entries]}

    @classmethod
    def from_json(cls, d: dict) -> "MomentMatrix":
        return cls([Term.from_json(t) for t in d["index"]],
                   [[Fraction(parse_rational(x)) for x in row] for row in d["entries"]])


def moment_matrix(v, d: int, variables: Iterable[VariableId] | None = None,
                  negations: bool = False) -> MomentMatrix:
    """``M[T1, T2] = v(T1 & T2)`` over terms of degree at most ``d / 2``."""
    if d % 2:
        raise ValueError("moment matrix degree must be even")
    if variables is None:
        variables = order_variables(v.n)
    idx = index_terms(variables, d // 2, negations)
    rows = [[Fraction(v.evaluate_checked(a & b)) for b in idx] for a in idx]
    return MomentMatrix(idx, rows)


def characteristic_average(index: Sequence[Term], models, holds) -> list[list[Fraction]]:
    """``(1/|models|) sum V V^T`` where ``V[T] = holds(model, T)``."""
    size = len(index)
    acc = [[0] * size for _ in range(size)]
    count = 0
    for model in models:
        vec = [1 if holds(model, t) else 0 for t in index]
        ones = [i for i, x in enumerate(vec) if x]
        for i in ones:
            row = acc[i]
            for j in ones:
                row[j] += 1
        count += 1
    return [[Fraction(x, count) for x in row] for row in acc]


# -- exact PSD test ----------------------------------------------------------

@dataclass
class PsdResult:
    psd: bool
    witness: list[Fraction] | None = None
    value: Fraction | None = None
    pivots: list[tuple[int, Fraction]] = field(default_factory=list)

    def __bool__(self):
        return self.psd

    def to_json(self) -> dict:
        return {"psd": self.psd,
                "witness": None if self.witness is None else [rational_str(x) for x in self.witness],
                "value": None if self.value is None else rational_str(self.value),
                "pivots": [[i, rational_str(p)] for i, p in self.pivots]}


def _as_matrix(M) -> list[list[Fraction]]:
    rows = M.entries if isinstance(M, MomentMatrix) else M
    A = [[Fraction(x) for x in row] for row in rows]
    n = len(A)
    if any(len(r) != n for r in A):
        raise ValueError("matrix is not square")
    for i in range(n):
        for j in range(i):
            if A[i][j] != A[j][i]:
                raise ValueError(f"matrix is not symmetric at ({i}, {j})")
    return A


def quadratic_form(A, c) -> Fraction:
    return sum((A[i][j] * c[i] * c[j] for i in range(len(c)) for j in range(len(c))), Fraction(0))


def _solve(A, b):
    """Exact Gauss-Jordan solve of a non-singular system."""
    n = len(A)
    M = [list(A[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def psd_check(M) -> PsdResult:
    """Rational LDL^T with diagonal pivoting.

    The pivot is the largest remaining positive diagonal.  A negative
    diagonal, or a zero diagonal with a non-zero entry in its row, ends the
    factorisation with a witness ``c`` such that ``c^T M c < 0``.
    """
    A = _as_matrix(M)
    n = len(A)
    for i in range(n):
        if A[i][i] < 0:
            c = [Fraction(0)] * n
            c[i] = Fraction(1)
            return PsdResult(False, c, A[i][i])
    # cheap 2x2 witness e_i - sign(a_ij) e_j before factorising
    for i in range(n):
        for j in range(i + 1, n):
            a = A[i][j]
            if a and A[i][i] + A[j][j] < 2 * abs(a):
                c = [Fraction(0)] * n
                c[i], c[j] = Fraction(1), Fraction(-1 if a > 0 else 1)
                return PsdResult(False, c, quadratic_form(A, c))
    S = [row[:] for row in A]  # Schur complement, updated in place on `rest`
    rest = list(range(n))
    done: list[int] = []
    log: list[tuple[int, Fraction]] = []
    while rest:
        diag = [(S[i][i], i) for i in rest]
        neg = [i for d, i in diag if d < 0]
        if neg:
            u = {neg[0]: Fraction(1)}
            return _witness(A, done, rest, u, log)
        best = max(diag)
        if best[0] == 0:
            for i in rest:
                for j in rest:
                    if S[i][j] != 0:
                        # [[0, b], [b, c]] on (i, j): t = -(c + 1) / (2b) gives -1
                        t = -(S[j][j] + 1) / (2 * S[i][j])
                        return _witness(A, done, rest, {i: t, j: Fraction(1)}, log)
            break
        p = best[1]
        piv = S[p][p]
        log.append((p, piv))
        rest.remove(p)
        done.append(p)
        col = {i: S[i][p] for i in rest}
        for i in rest:
            if col[i]:
                f = col[i] / piv
                Si = S[i]
                for j in rest:
                    if col[j]:
                        Si[j] -= f * col[j]
    return PsdResult(True, pivots=log)


def _witness(A, done, rest, u: dict, log) -> PsdResult:
    n = len(A)
    c = [Fraction(0)] * n
    for i, x in u.items():
        c[i] = x
    if done:
        K = done
        MKK = [[A[a][b] for b in K] for a in K]
        rhs = [-sum((A[a][j] * x for j, x in u.items()), Fraction(0)) for a in K]
        cK = _solve(MKK, rhs)
        for a, x in zip(K, cK):
            c[a] = x
    val = quadratic_form(A, c)
    if val >= 0:
        raise ArithmeticError("internal witness construction failed")
    return PsdResult(False, c, val, log)
