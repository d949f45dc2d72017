"""Weak E and strong S backdoors.

The reduct of a formula under a partial assignment deletes satisfied
clauses and false literals; no propagation.  A weak E backdoor is a
variable set with one assignment whose reduct is empty, i.e. the
assignment alone satisfies every clause.  A strong S backdoor is a set
every assignment of which leaves a satisfiable reduct.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .cnf import Assignment, Formula, clause_satisfied
from .oracles import OracleLimitError, all_models
from .profiler import BruteOracle, UnsatisfiableError, restricted_count
from .solver import solve


@dataclass(frozen=True)
class WeakBackdoorWitness:
    vars: frozenset[int]
    assignment: tuple[tuple[int, bool], ...]

    @classmethod
    def from_assignment(cls, a: Assignment) -> "WeakBackdoorWitness":
        return cls(frozenset(a), tuple(sorted(a.items())))

    @property
    def size(self) -> int:
        return len(self.vars)

    def as_assignment(self) -> Assignment:
        return dict(self.assignment)

    def as_dict(self) -> dict:
        return {"vars": sorted(self.vars), "assignment": [v if b else -v for v, b in self.assignment]}


def is_weak_e_witness(f: Formula, assignment: Assignment) -> bool:
    return all(clause_satisfied(c, assignment) for c in f.clauses)


class FptSearch:
    """Bounded search tree for weak E backdoors of d-CNF formulas.

    Take the lowest-index clause the current assignment leaves unsatisfied
    and branch on each of its literals being true.  With budget ``k`` the
    tree has depth at most ``k`` and fan-out at most ``d``, so ``branches``
    (leaves visited) never exceeds ``d**k``.
    """

    def __init__(self, f: Formula, d: Optional[int] = None):
        self.f = f
        self.d = f.max_clause_len if d is None else d
        for c in f.clauses:
            if len(c) > self.d:
                raise ValueError(f"clause {c} longer than d={self.d}")
        self.branches = 0

    def _first_open(self, assign: Assignment) -> Optional[tuple[int, ...]]:
        for c in self.f.clauses:
            if not clause_satisfied(c, assign):
                return c
        return None

    def _search(self, assign: Assignment, k: int) -> Optional[Assignment]:
        clause = self._first_open(assign)
        if clause is None:
            self.branches += 1
            return dict(assign)
        if k == 0:
            self.branches += 1
            return None
        tried = False
        for lit in clause:
            v = abs(lit)
            if v in assign:
                continue
            tried = True
            assign[v] = lit > 0
            found = self._search(assign, k - 1)
            del assign[v]
            if found is not None:
                return found
        if not tried:
            self.branches += 1
        return None

    def run(self, k: int) -> Optional[WeakBackdoorWitness]:
        if k < 0:
            raise ValueError("k must be non-negative")
        self.branches = 0
        found = self._search({}, k)
        return None if found is None else WeakBackdoorWitness.from_assignment(found)


def weak_e_backdoor_fpt(f: Formula, k: int, d: Optional[int] = None) -> Optional[WeakBackdoorWitness]:
    return FptSearch(f, d).run(k)


def min_weak_e_backdoor(f: Formula, d: Optional[int] = None) -> Optional[tuple[int, WeakBackdoorWitness]]:
    """Smallest weak E backdoor by iterative deepening; ``None`` if UNSAT."""
    if not solve(f).sat:
        return None
    search = FptSearch(f, d)
    for k in range(f.num_vars + 1):
        w = search.run(k)
        if w is not None:
            return w.size, w
    raise AssertionError("satisfiable formula without a weak E backdoor")


def weak_e_backdoor_brute(f: Formula, k: int, n_limit: int = 20, k_limit: int = 6) -> Optional[WeakBackdoorWitness]:
    """Smallest witness of size <= k by exhaustive subset x assignment search."""
    if f.num_vars > n_limit or k > k_limit:
        raise OracleLimitError(f"brute-force weak backdoor limited to n<={n_limit}, k<={k_limit}")
    for size in range(0, min(k, f.num_vars) + 1):
        for subset in itertools.combinations(range(1, f.num_vars + 1), size):
            for values in itertools.product((False, True), repeat=size):
                a = dict(zip(subset, values))
                if not f.reduce(a).clauses:
                    return WeakBackdoorWitness.from_assignment(a)
    return None


def _is_strong_s(models: np.ndarray, subset: tuple[int, ...]) -> bool:
    # every assignment to the subset has a satisfiable reduct
    # <=> every assignment to the subset extends to a model
    if not subset:
        return len(models) > 0
    cols = models[:, [v - 1 for v in subset]]
    weights = 1 << np.arange(len(subset), dtype=np.int64)
    keys = np.unique(cols.astype(np.int64) @ weights)
    return len(keys) == (1 << len(subset))


def max_strong_s_backdoor_brute(f: Formula, n_limit: int = 14) -> tuple[int, Optional[frozenset[int]]]:
    """Largest strong S backdoor; ``(-1, None)`` when ``f`` is unsatisfiable."""
    if f.num_vars > n_limit:
        raise OracleLimitError(f"strong backdoor search limited to n<={n_limit}")
    models = all_models(f, var_limit=n_limit)
    if not len(models):
        return -1, None
    for size in range(f.num_vars, -1, -1):
        for subset in itertools.combinations(range(1, f.num_vars + 1), size):
            if _is_strong_s(models, subset):
                return size, frozenset(subset)
    raise AssertionError("unreachable: the empty set is a strong S backdoor of a satisfiable formula")


@dataclass(frozen=True)
class AuditRecord:
    n: int
    restricted: int
    weak_min: int
    strong_max: int
    holds_leq: bool
    holds_complement: bool
    holds_iff: bool
    name: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def backdoor_audit(f: Formula, name: str = "", n_limit: int = 14) -> AuditRecord:
    """Compute restricted count, minimum weak E and maximum strong S backdoor
    sizes, and evaluate how they relate."""
    if f.num_vars > n_limit:
        raise OracleLimitError(f"audit limited to n<={n_limit}")
    oracle = BruteOracle(f)
    if not oracle({}):
        raise UnsatisfiableError("audit needs a satisfiable formula")
    n = f.num_vars
    restricted, _ = restricted_count(f, oracle)
    weak = min_weak_e_backdoor(f)
    assert weak is not None
    weak_min = weak[0]
    strong_max, _ = max_strong_s_backdoor_brute(f, n_limit)
    return AuditRecord(
        n=n,
        restricted=restricted,
        weak_min=weak_min,
        strong_max=strong_max,
        holds_leq=restricted <= weak_min,
        holds_complement=strong_max >= n - weak_min,
        holds_iff=restricted == weak_min and strong_max == n - restricted,
        name=name,
    )
