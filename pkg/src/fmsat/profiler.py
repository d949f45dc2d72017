"""Restricted / unrestricted variables and the search-trace profiler.

A variable is unrestricted under a partial assignment when the assignment
extends to models with the variable true and with it false.  The profiler
replays a solver run and, every time the partial assignment changes,
classifies each unassigned variable with fresh satisfiability checks.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .cnf import Assignment, Formula
from .oracles import all_models
from .solver import Solver, SolverConfig, SolveResult, Verdict

BRUTE_BELOW = 20
DEFAULT_ORACLE_CONFLICTS = 10_000


class VarStatus(str, Enum):
    UNRESTRICTED = "unrestricted"
    POS_RESTRICTED = "pos_restricted"
    NEG_RESTRICTED = "neg_restricted"
    CONTEXT_UNSAT = "context_unsat"
    UNKNOWN = "unknown"


class UnsatisfiableError(ValueError):
    pass


# An oracle answers "does f extend this partial assignment to a model?":
# True / False, or None when it gave up.
Oracle = Callable[[Assignment], Optional[bool]]


class BruteOracle:
    """Exact oracle over the enumerated model set (small formulas only)."""

    def __init__(self, f: Formula):
        self.models = all_models(f)

    def _consistent(self, assumptions: Assignment) -> np.ndarray:
        mask = np.ones(len(self.models), dtype=bool)
        for v, b in assumptions.items():
            mask &= self.models[:, v - 1] == b
        return mask

    def __call__(self, assumptions: Assignment) -> bool:
        return bool(self._consistent(assumptions).any())

    def statuses(self, ctx: Assignment, variables: list[int]) -> dict[int, VarStatus]:
        sub = self.models[self._consistent(ctx)]
        if not len(sub):
            return {v: VarStatus.CONTEXT_UNSAT for v in variables}
        can_t = sub.any(axis=0)
        can_f = (~sub).any(axis=0)
        return {v: _status(bool(can_t[v - 1]), bool(can_f[v - 1])) for v in variables}


class SolverOracle:
    """Fresh CDCL run per query, with the assumptions as unit clauses."""

    def __init__(self, f: Formula, conflict_limit: int = DEFAULT_ORACLE_CONFLICTS, config: Optional[SolverConfig] = None):
        self.f = f
        self.config = replace(config or SolverConfig(), conflict_limit=conflict_limit)

    def __call__(self, assumptions: Assignment) -> Optional[bool]:
        r = Solver(self.f.assume(assumptions), self.config).solve()
        if r.verdict is Verdict.LIMIT:
            return None
        return r.verdict is Verdict.SAT


def default_oracle(f: Formula, conflict_limit: int = DEFAULT_ORACLE_CONFLICTS) -> Oracle:
    if f.num_vars < BRUTE_BELOW:
        return BruteOracle(f)
    return SolverOracle(f, conflict_limit)


def _status(t: Optional[bool], fl: Optional[bool]) -> VarStatus:
    if t and fl:
        return VarStatus.UNRESTRICTED
    if t is False and fl is False:
        return VarStatus.CONTEXT_UNSAT
    if t and fl is False:
        return VarStatus.POS_RESTRICTED
    if fl and t is False:
        return VarStatus.NEG_RESTRICTED
    return VarStatus.UNKNOWN


def classify_variable(f: Formula, ctx: Assignment, v: int, oracle: Optional[Oracle] = None) -> VarStatus:
    if v in ctx:
        raise ValueError(f"variable {v} is assigned in the context")
    oracle = oracle or default_oracle(f)
    return _status(oracle({**ctx, v: True}), oracle({**ctx, v: False}))


def restricted_count(f: Formula, oracle: Optional[Oracle] = None) -> tuple[int, list[tuple[int, bool]]]:
    """Number of restricted variables and their forced values.

    Each variable is classified against the empty assignment.
    """
    oracle = oracle or default_oracle(f)
    sat = oracle({})
    if sat is False:
        raise UnsatisfiableError("formula is unsatisfiable")
    forced = []
    for v in range(1, f.num_vars + 1):
        st = classify_variable(f, {}, v, oracle)
        if st is VarStatus.POS_RESTRICTED:
            forced.append((v, True))
        elif st is VarStatus.NEG_RESTRICTED:
            forced.append((v, False))
        elif st is not VarStatus.UNRESTRICTED:
            raise RuntimeError(f"oracle could not classify variable {v} ({st.value})")
    return len(forced), forced


# ------------------------------------------------------------------ profiling


@dataclass
class Snapshot:
    tick: int
    decisions: int
    conflicts: int
    assignment: Assignment
    counts: dict[VarStatus, int]

    @property
    def unassigned(self) -> int:
        return sum(self.counts.values())

    def row(self) -> dict:
        out = {"tick": self.tick, "decisions": self.decisions, "conflicts": self.conflicts, "unassigned": self.unassigned}
        for st in (VarStatus.UNRESTRICTED, VarStatus.POS_RESTRICTED, VarStatus.NEG_RESTRICTED, VarStatus.UNKNOWN, VarStatus.CONTEXT_UNSAT):
            out[st.value] = self.counts[st]
        return out


CSV_COLUMNS = ["tick", "decisions", "conflicts", "unassigned", "unrestricted", "pos_restricted", "neg_restricted", "unknown", "context_unsat"]


@dataclass
class ProfileTrace:
    snapshots: list[Snapshot]
    config: SolverConfig
    result: Optional[SolveResult] = None
    formula_name: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for s in self.snapshots:
            w.writerow(s.row())
        return buf.getvalue()


def classify_context(f: Formula, ctx: Assignment, oracle: Oracle) -> dict[int, VarStatus]:
    """Status of every variable left unassigned by ``ctx``."""
    free = [v for v in range(1, f.num_vars + 1) if v not in ctx]
    if not free:
        return {}
    if isinstance(oracle, BruteOracle):
        return oracle.statuses(ctx, free)
    if oracle(ctx) is False:
        return {v: VarStatus.CONTEXT_UNSAT for v in free}
    return {v: _status(oracle({**ctx, v: True}), oracle({**ctx, v: False})) for v in free}


def snapshot_profile(
    f: Formula,
    config: Optional[SolverConfig] = None,
    oracle: Optional[Oracle] = None,
    every: int = 1,
    name: str = "",
) -> ProfileTrace:
    """Solve ``f`` and snapshot the variable classification along the way.

    With ``every > 1`` a snapshot is only taken once at least ``every`` ticks
    (decisions + conflicts) have passed since the previous one.
    """
    config = config or SolverConfig()
    oracle = oracle or default_oracle(f)
    snaps: list[Snapshot] = []

    def listener(solver: Solver) -> None:
        m = solver.metrics
        tick = m.decisions + m.conflicts
        if snaps and tick - snaps[-1].tick < every:
            return
        ctx = solver.partial_assignment()
        counts = {st: 0 for st in VarStatus}
        for st in classify_context(f, ctx, oracle).values():
            counts[st] += 1
        snaps.append(Snapshot(tick, m.decisions, m.conflicts, ctx, counts))

    result = Solver(f, config).solve(listener)
    return ProfileTrace(snaps, config, result, name)
