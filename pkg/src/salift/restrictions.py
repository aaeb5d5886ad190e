"""Random restrictions for binary pigeonhole instances.

``R``: pigeons are visited in order; each is placed, with probability 1/4,
in a uniformly random hole that is still free.  ``R'``: each pigeon gets one
uniformly random bit position set to a uniformly random value.

Sampling is vectorised over trials and driven by a seeded Philox generator.
Trials are cut into fixed-size chunks, chunk ``c`` using the generator
jumped ``c`` times, so results do not depend on how chunks are scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .principles import Clause, Cnf, Kind, Literal, VariableId, bin_bits, bits_needed, decode_literal
from .terms import ZERO, Term

__all__ = [
    "Restriction", "RestrictionStats", "RSampler", "RprimeSampler", "sample_R",
    "sample_Rprime", "apply", "apply_term", "apply_cnf", "survival_stats",
    "width_term", "max_matching", "matchable_pigeon_set", "CHUNK",
]

CHUNK = 10_000


def _rng(seed: int, chunk: int = 0) -> np.random.Generator:
    bg = np.random.Philox(seed)
    if chunk:
        bg = bg.jumped(chunk)
    return np.random.Generator(bg)


@dataclass(frozen=True)
class Restriction:
    """``kind`` is ``"R"`` (pigeon -> hole) or ``"Rprime"`` (pigeon -> (bit, value))."""

    kind: str
    m: int
    n: int
    assignment: tuple  # per pigeon 1..m: hole / (bit, value) / None
    seed: int | None = None

    @property
    def bits(self) -> int:
        return bits_needed(self.n)

    @property
    def size(self) -> int:
        return sum(1 for a in self.assignment if a is not None)

    def assigned(self, pigeon: int):
        return self.assignment[pigeon - 1]

    def literal_value(self, lit: Literal) -> bool | None:
        """Truth value of a pigeon-bit literal, or None if left free."""
        v = lit.var
        if v.kind is not Kind.PBit:
            raise ValueError(f"{v} is not a pigeon bit")
        p = v.indices[0]
        if not 1 <= p <= self.m or v.bit > self.bits:
            raise ValueError(f"{v} outside the restricted instance")
        a = self.assignment[p - 1]
        if a is None:
            return None
        if self.kind == "R":
            val = bin_bits(a, self.bits)[v.bit - 1]
        else:
            k, b = a
            if k != v.bit:
                return None
            val = b
        return bool(val) == lit.positive

    def holes_taken(self) -> set[int]:
        return {a for a in self.assignment if a is not None} if self.kind == "R" else set()

    def to_json(self) -> dict:
        return {"kind": self.kind, "m": self.m, "n": self.n, "seed": self.seed,
                "assignment": [list(a) if isinstance(a, tuple) else a for a in self.assignment]}


# -- samplers ------------------------------------------------------------------

class RSampler:
    kind = "R"

    def __init__(self, n: int, m: int | None = None, p: float = 0.25):
        if n < 2 or n & (n - 1):
            raise ValueError("n must be a power of two")
        self.n, self.m, self.p = n, (m if m is not None else n + 1), p

    def batch(self, rng: np.random.Generator, trials: int) -> np.ndarray:
        """``(trials, m)`` array of holes (1-based), 0 for unassigned."""
        n, m = self.n, self.m
        holes = np.tile(np.arange(1, n + 1, dtype=np.int32), (trials, 1))
        cnt = np.zeros(trials, dtype=np.int64)
        out = np.zeros((trials, m), dtype=np.int32)
        rows = np.arange(trials)
        for p in range(m):
            coin = rng.random(trials) < self.p
            u = rng.random(trials)
            go = coin & (cnt < n)
            r = rows[go]
            c = cnt[go]
            j = c + np.floor(u[go] * (n - c)).astype(np.int64)
            a, b = holes[r, c], holes[r, j]
            holes[r, c], holes[r, j] = b, a
            out[r, p] = b
            cnt[go] += 1
        return out

    def to_restriction(self, row, seed=None) -> Restriction:
        return Restriction("R", self.m, self.n, tuple(int(h) or None for h in row), seed)


class RprimeSampler:
    kind = "Rprime"

    def __init__(self, m: int, n: int):
        if m <= n:
            raise ValueError("need m > n")
        self.m, self.n = m, n
        self.bits = bits_needed(n)

    def batch(self, rng: np.random.Generator, trials: int) -> np.ndarray:
        """``(trials, m, 2)`` array of (bit 1-based, value)."""
        k = rng.integers(1, self.bits + 1, size=(trials, self.m), dtype=np.int32)
        b = rng.integers(0, 2, size=(trials, self.m), dtype=np.int32)
        return np.stack([k, b], axis=-1)

    def to_restriction(self, row, seed=None) -> Restriction:
        return Restriction("Rprime", self.m, self.n,
                           tuple((int(k), int(b)) for k, b in row), seed)


def sample_R(n: int, seed: int, m: int | None = None) -> Restriction:
    s = RSampler(n, m)
    return s.to_restriction(s.batch(_rng(seed), 1)[0], seed)


def sample_Rprime(m: int, n: int, seed: int) -> Restriction:
    s = RprimeSampler(m, n)
    return s.to_restriction(s.batch(_rng(seed), 1)[0], seed)


# -- applying a restriction ----------------------------------------------------

def apply_term(r: Restriction, t: Term) -> Term:
    if t is ZERO:
        return ZERO
    keep = []
    for c in t:
        v = r.literal_value(decode_literal(c))
        if v is False:
            return ZERO
        if v is None:
            keep.append(c)
    return Term(keep)


def apply_cnf(r: Restriction, f: Cnf, renumber: bool = True) -> Cnf:
    """Restricted formula: satisfied clauses dropped, false literals removed.

    With ``renumber`` the free pigeons are renamed ``1..m'`` in order.
    """
    if f.meta.get("principle") != "php" or f.meta.get("encoding") != "binary":
        raise ValueError("restrictions apply to binary PHP formulas")
    if f.meta.get("m") != r.m or f.meta.get("n") != r.n:
        raise ValueError("restriction and formula disagree on (m, n)")
    free = [p for p in range(1, r.m + 1)
            if r.assignment[p - 1] is None or r.kind == "Rprime"]
    ren = {p: i for i, p in enumerate(free, start=1)} if renumber else {p: p for p in free}

    def rename(l: Literal) -> Literal:
        v = l.var
        return Literal(VariableId(Kind.PBit, (ren[v.indices[0]],), v.bit), l.positive)

    clauses, seen, labels = [], set(), []
    for ci, c in enumerate(f.clauses):
        lits, sat = [], False
        for l in c:
            v = r.literal_value(l)
            if v is True:
                sat = True
                break
            if v is None:
                lits.append(rename(l))
        if sat:
            continue
        if not lits:
            raise ValueError(f"restriction falsifies clause {c}")
        cl = Clause(lits)
        if cl.codes in seen:
            continue
        seen.add(cl.codes)
        clauses.append(cl)
        labels.append(f.labels[ci] if f.labels else ("clause", (ci,)))
    variables = sorted({l.var for c in clauses for l in c})
    meta = dict(f.meta)
    meta.update(m=len(free), restricted=True)
    return Cnf(variables, clauses, (), meta, labels)


def apply(r: Restriction, x):
    if isinstance(x, Term):
        return apply_term(r, x)
    if isinstance(x, Cnf):
        return apply_cnf(r, x)
    raise TypeError(f"cannot restrict {type(x).__name__}")


# -- statistics ----------------------------------------------------------------

def width_term(pigeons: Sequence[int], bit: int = 1, value: int = 1) -> Term:
    """One literal per pigeon: bit ``bit`` of its hole equals ``value``."""
    return Term(sorted(Literal(VariableId(Kind.PBit, (p,), bit), bool(value)).code
                       for p in pigeons))


def _term_arrays(t: Term):
    ps, ks, vs = [], [], []
    for c in t:
        l = decode_literal(c)
        ps.append(l.var.indices[0] - 1)
        ks.append(l.var.bit)
        vs.append(int(l.positive))
    return np.array(ps), np.array(ks), np.array(vs)


def _survives(sampler, batch: np.ndarray, t: Term) -> np.ndarray:
    ps, ks, vs = _term_arrays(t)
    if sampler.kind == "R":
        r = bits_needed(sampler.n)
        h = batch[:, ps]
        bit = ((h - 1) >> (r - ks)) & 1
        dead = (h > 0) & (bit != vs)
    else:
        k = batch[:, ps, 0]
        b = batch[:, ps, 1]
        dead = (k == ks) & (b != vs)
    return ~dead.any(axis=1)


def _chunk_counts(args):
    sampler, seed, chunk, trials, terms, thresholds = args
    batch = sampler.batch(_rng(seed, chunk), trials)
    out = {"survive": [int(_survives(sampler, batch, t).sum()) for t in terms]}
    if sampler.kind == "R":
        sizes = (batch > 0).sum(axis=1)
        out["below"] = {k: int((sizes < k).sum()) for k in thresholds[0]}
        out["above"] = {k: int((sizes > k).sum()) for k in thresholds[1]}
        out["size_hist"] = np.bincount(sizes, minlength=sampler.m + 1).tolist()
    return out


@dataclass
class RestrictionStats:
    sampler: str
    trials: int
    seed: int
    survive: list[int]
    below: dict = field(default_factory=dict)
    above: dict = field(default_factory=dict)
    size_hist: list[int] = field(default_factory=list)

    def freq(self, count: int) -> Fraction:
        return Fraction(count, self.trials)

    def slack(self, p: float, k: float = 3.0) -> float:
        """``k`` binomial standard deviations at probability ``p``."""
        return k * math.sqrt(p * (1 - p) / self.trials)

    def within(self, count: int, bound: float, k: float = 3.0) -> bool:
        return float(self.freq(count)) <= bound + self.slack(bound, k)

    def to_json(self) -> dict:
        return {"sampler": self.sampler, "trials": self.trials, "seed": self.seed,
                "survive": self.survive, "below": self.below, "above": self.above,
                "size_hist": self.size_hist}


def survival_stats(terms: Sequence[Term], sampler, trials: int, seed: int,
                   below: Sequence[int] = (), above: Sequence[int] = (),
                   jobs: int = 1) -> RestrictionStats:
    """Count, over seeded trials, how often each term survives and how often
    the number of assigned pigeons falls below/above the given thresholds."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = []
    done, c = 0, 0
    while done < trials:
        k = min(CHUNK, trials - done)
        tasks.append((sampler, seed, c, k, list(terms), (tuple(below), tuple(above))))
        done += k
        c += 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_chunk_counts, tasks))
    else:
        parts = [_chunk_counts(t) for t in tasks]
    st = RestrictionStats(sampler.kind, trials, seed, [0] * len(terms),
                          {k: 0 for k in below}, {k: 0 for k in above})
    for part in parts:
        st.survive = [a + b for a, b in zip(st.survive, part["survive"])]
        for k, v in part.get("below", {}).items():
            st.below[k] += v
        for k, v in part.get("above", {}).items():
            st.above[k] += v
        if "size_hist" in part:
            h = part["size_hist"]
            st.size_hist = [a + b for a, b in zip(st.size_hist or [0] * len(h), h)]
    return st


# -- matchings -------------------------------------------------------------------

def max_matching(left: Sequence, adj: dict) -> dict:
    """Maximum bipartite matching by augmenting paths; returns left -> right."""
    match_r: dict = {}

    def augment(u, seen):
        for v in adj.get(u, ()):
            if v in seen:
                continue
            seen.add(v)
            if v not in match_r or augment(match_r[v], seen):
                match_r[v] = u
                return True
        return False

    for u in left:
        augment(u, set())
    return {u: v for v, u in match_r.items()}


def matchable_pigeon_set(r: Restriction, per_type: int | None = None):
    """Greedy pick of ``per_type`` pigeons for every (bit, value) type.

    Returns the chosen pigeons, or None if some type bucket cannot be filled.
    """
    if r.kind != "Rprime":
        raise ValueError("needs an R' restriction")
    bits = r.bits
    if per_type is None:
        per_type = max(1, r.n // (4 * bits))
    buckets: dict = {(k, b): [] for k in range(1, bits + 1) for b in (0, 1)}
    for p, (k, b) in enumerate(r.assignment, start=1):
        if len(buckets[(k, b)]) < per_type:
            buckets[(k, b)].append(p)
    if any(len(v) < per_type for v in buckets.values()):
        return None
    return sorted(p for v in buckets.values() for p in v)


def consistent_holes(r: Restriction, pigeon: int) -> list[int]:
    a = r.assignment[pigeon - 1]
    holes = range(1, r.n + 1)
    if a is None:
        return list(holes)
    if r.kind == "R":
        return [a]
    k, b = a
    return [h for h in holes if bin_bits(h, r.bits)[k - 1] == b]
