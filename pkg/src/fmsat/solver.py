"""A small CDCL solver whose main features can be switched off one by one.

With every toggle off the search is plain DPLL: unit propagation over
two watched literals, static ascending branching order and chronological
backtracking.  The features layered on top:

* ``clause_learning``: first-UIP learning with non-chronological backjumping
* ``restarts``: Luby restarts (``restart_base`` conflicts per unit)
* ``vsids``: additive activity bumps, decayed by ``decay`` every
  ``decay_interval`` conflicts

Branching polarity is ``phase_default`` (false unless configured).  The
``seed`` only perturbs initial VSIDS activities, so it has no effect when
VSIDS is off.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Optional

from .cnf import Assignment, Formula, is_horn, is_tautology


class Verdict(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    LIMIT = "LIMIT"


@dataclass(frozen=True)
class SolverConfig:
    clause_learning: bool = True
    restarts: bool = True
    vsids: bool = True
    phase_default: bool = False
    seed: int = 0
    conflict_limit: Optional[int] = None
    restart_base: int = 64
    decay: float = 0.95
    decay_interval: int = 256

    @classmethod
    def plain(cls, **kw) -> "SolverConfig":
        return cls(clause_learning=False, restarts=False, vsids=False, **kw)


ALL_TOGGLES = [
    SolverConfig(clause_learning=l, restarts=r, vsids=v)
    for l in (True, False)
    for r in (True, False)
    for v in (True, False)
]


@dataclass
class SolveMetrics:
    decisions: int = 0
    conflicts: int = 0
    propagations: int = 0
    restarts_done: int = 0
    max_decision_level: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolveResult:
    verdict: Verdict
    model: Optional[Assignment] = None
    metrics: SolveMetrics = field(default_factory=SolveMetrics)

    @property
    def sat(self) -> bool:
        return self.verdict is Verdict.SAT

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "model": None if self.model is None else [v if b else -v for v, b in sorted(self.model.items())],
            "metrics": self.metrics.as_dict(),
        }


def luby(x: int) -> int:
    """``x``-th term (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return 1 << seq


def _code(lit: int) -> int:
    return (abs(lit) << 1) | (lit < 0)


def _lit(code: int) -> int:
    return -(code >> 1) if code & 1 else code >> 1


class Solver:
    """One search over one formula.  Not reusable and not thread-safe.

    Literal codes are ``2*v`` (positive) and ``2*v+1`` (negative); ``val``
    is indexed by code with 1 = true, -1 = false, 0 = unassigned.
    """

    def __init__(self, formula: Formula, config: Optional[SolverConfig] = None):
        self.formula = formula
        self.config = cfg = config or SolverConfig()
        n = self.n = formula.num_vars
        self.val = [0] * (2 * n + 2)
        self.level = [0] * (n + 1)
        self.reason = [-1] * (n + 1)
        self.seen = [False] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.flipped: list[bool] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * n + 2)]
        self.units: list[int] = []
        self.ok = True
        self.metrics = SolveMetrics()
        # variables outside every clause are never branched on
        self.relevant = [False] * (n + 1)

        # formula clause index of each unit / attached clause
        self.unit_origin: list[int] = []
        self.clause_origin: list[int] = []
        self.empty_origin = -1
        for ci, c in enumerate(formula.clauses):
            if is_tautology(c):
                continue
            for l in c:
                self.relevant[abs(l)] = True
            if not c:
                self.ok = False
                if self.empty_origin < 0:
                    self.empty_origin = ci
                continue
            lits = [_code(l) for l in c]
            if len(lits) == 1:
                self.units.append(lits[0])
                self.unit_origin.append(ci)
            else:
                self._attach(lits)
                self.clause_origin.append(ci)
        self.num_original = len(self.clauses)

        rng = random.Random(cfg.seed)
        self.activity = [0.0] + [rng.random() * 1e-3 for _ in range(n)]
        self.var_inc = 1.0
        self.heap = [(-self.activity[v], v) for v in range(1, n + 1) if self.relevant[v]]
        heapq.heapify(self.heap)
        self.next_var = 1

    # ------------------------------------------------------------------ basics

    def _attach(self, lits: list[int]) -> int:
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0]].append(ci)
        self.watches[lits[1]].append(ci)
        return ci

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    @property
    def learned(self) -> list[tuple[int, ...]]:
        return [tuple(_lit(c) for c in cl) for cl in self.clauses[self.num_original:]]

    def partial_assignment(self) -> Assignment:
        return {lit >> 1: not (lit & 1) for lit in self.trail}

    def _enqueue(self, lit: int, reason: int) -> None:
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        v = lit >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _new_level(self, flipped: bool = False) -> None:
        self.trail_lim.append(len(self.trail))
        self.flipped.append(flipped)
        if len(self.trail_lim) > self.metrics.max_decision_level:
            self.metrics.max_decision_level = len(self.trail_lim)

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        lim = self.trail_lim[lvl]
        trail, val, reason = self.trail, self.val, self.reason
        vsids = self.config.vsids
        heap, act = self.heap, self.activity
        next_var = self.next_var
        for k in range(len(trail) - 1, lim - 1, -1):
            lit = trail[k]
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = -1
            if vsids:
                heapq.heappush(heap, (-act[v], v))
            elif v < next_var:
                next_var = v
        self.next_var = next_var
        del trail[lim:]
        del self.trail_lim[lvl:]
        del self.flipped[lvl:]
        self.qhead = lim

    # ------------------------------------------------------------- propagation

    def _propagate(self) -> int:
        """Unit propagation to fixpoint; returns a conflict clause index or -1."""
        val, watches, clauses = self.val, self.watches, self.clauses
        trail, level, reason = self.trail, self.level, self.reason
        lvl = len(self.trail_lim)
        qhead = self.qhead
        props = 0
        confl = -1
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            ws = watches[false_lit]
            kept = []
            i = 0
            nws = len(ws)
            while i < nws:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[first] == 1:
                    kept.append(ci)
                    continue
                for k in range(2, len(c)):
                    l = c[k]
                    if val[l] != -1:
                        c[1] = l
                        c[k] = false_lit
                        watches[l].append(ci)
                        break
                else:
                    kept.append(ci)
                    if val[first] == -1:
                        kept.extend(ws[i:])
                        confl = ci
                        break
                    val[first] = 1
                    val[first ^ 1] = -1
                    v = first >> 1
                    level[v] = lvl
                    reason[v] = ci
                    trail.append(first)
                    props += 1
            watches[false_lit] = kept
            if confl >= 0:
                break
        self.qhead = qhead
        self.metrics.propagations += props
        return confl

    # ---------------------------------------------------------------- heuristics

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.n + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
        elif self.val[v << 1] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _rebuild_heap(self) -> None:
        val, act = self.val, self.activity
        self.heap = [(-act[v], v) for v in range(1, self.n + 1) if val[v << 1] == 0 and self.relevant[v]]
        heapq.heapify(self.heap)

    def _pick_branch_var(self) -> int:
        val = self.val
        if self.config.vsids:
            heap, act = self.heap, self.activity
            if len(heap) > 10 * self.n + 100:
                self._rebuild_heap()
                heap = self.heap
            while heap:
                a, v = heapq.heappop(heap)
                if val[v << 1] == 0 and -a == act[v]:
                    return v
            return 0
        v = self.next_var
        n = self.n
        relevant = self.relevant
        while v <= n and (val[v << 1] != 0 or not relevant[v]):
            v += 1
        self.next_var = v
        return v if v <= n else 0

    # ------------------------------------------------------------------ analysis

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP learned clause (asserting literal first) and backjump level."""
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        clauses = self.clauses
        vsids = self.config.vsids
        cur = len(self.trail_lim)
        learnt = [0]
        counter = 0
        p = -1
        idx = len(trail) - 1
        c = clauses[confl]
        while True:
            for k in range(0 if p == -1 else 1, len(c)):
                q = c[k]
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    if vsids:
                        self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            seen[v] = False
            counter -= 1
            if counter == 0:
                break
            c = clauses[reason[v]]
        learnt[0] = p ^ 1

        # local minimization: drop literals implied by the rest of the clause
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r < 0:
                kept.append(q)
                continue
            rc = clauses[r]
            for k in range(1, len(rc)):
                u = rc[k] >> 1
                if not seen[u] and level[u] > 0:
                    kept.append(q)
                    break
        for q in learnt[1:]:
            seen[q >> 1] = False
        learnt = kept

        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for k in range(2, len(learnt)):
            if level[learnt[k] >> 1] > level[learnt[best] >> 1]:
                best = k
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    # -------------------------------------------------------------------- search

    def solve(self, listener: Optional[Callable[["Solver"], None]] = None) -> SolveResult:
        """Run the search.

        ``listener`` is called whenever propagation is quiescent before a
        decision, i.e. once per change of the partial assignment (initial
        state, after each decision, after each backtrack).
        """
        cfg = self.config
        m = self.metrics
        if not self.ok:
            return SolveResult(Verdict.UNSAT, metrics=m)
        for u in self.units:
            if self.val[u] == -1:
                return SolveResult(Verdict.UNSAT, metrics=m)
            if self.val[u] == 0:
                self._enqueue(u, -1)

        learning, vsids = cfg.clause_learning, cfg.vsids
        limit = cfg.conflict_limit
        restart_idx = 0
        restart_limit = cfg.restart_base * luby(0)
        since_restart = 0

        while True:
            confl = self._propagate()
            if confl >= 0:
                m.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    return SolveResult(Verdict.UNSAT, metrics=m)
                if learning:
                    learnt, bt = self._analyze(confl)
                    self._backtrack(bt)
                    if len(learnt) == 1:
                        self._enqueue(learnt[0], -1)
                    else:
                        self._enqueue(learnt[0], self._attach(learnt))
                else:
                    if vsids:
                        for q in self.clauses[confl]:
                            self._bump(q >> 1)
                    lvl = len(self.trail_lim)
                    while lvl > 0 and self.flipped[lvl - 1]:
                        lvl -= 1
                    if lvl == 0:
                        return SolveResult(Verdict.UNSAT, metrics=m)
                    dec = self.trail[self.trail_lim[lvl - 1]]
                    self._backtrack(lvl - 1)
                    self._new_level(flipped=True)
                    self._enqueue(dec ^ 1, -1)
                if vsids and m.conflicts % cfg.decay_interval == 0:
                    self.var_inc /= cfg.decay
                if limit is not None and m.conflicts >= limit:
                    return SolveResult(Verdict.LIMIT, metrics=m)
                continue

            if cfg.restarts and since_restart >= restart_limit:
                self._backtrack(0)
                m.restarts_done += 1
                restart_idx += 1
                restart_limit = cfg.restart_base * luby(restart_idx)
                since_restart = 0
                continue

            if listener is not None:
                listener(self)
            v = self._pick_branch_var()
            if v == 0:
                val, ph = self.val, cfg.phase_default
                model = {u: val[u << 1] == 1 if val[u << 1] else ph for u in range(1, self.n + 1)}
                assert self.formula.is_satisfied_by(model), "solver produced a non-model"
                return SolveResult(Verdict.SAT, model, m)
            m.decisions += 1
            self._new_level()
            self._enqueue((v << 1) | (not cfg.phase_default), -1)


def solve(f: Formula, config: Optional[SolverConfig] = None) -> SolveResult:
    return Solver(f, config).solve()


@dataclass
class Propagation:
    assignment: Assignment
    conflict: Optional[int] = None  # 0-based index into f.clauses


def propagate(f: Formula, assignment: Optional[Assignment] = None) -> Propagation:
    """Unit propagation to fixpoint from ``assignment`` (watched literals).

    On conflict, ``conflict`` is the index of a clause falsified by the
    returned assignment.
    """
    s = Solver(f)
    if not s.ok:
        return Propagation(dict(assignment or {}), s.empty_origin)
    for v, b in sorted((assignment or {}).items()):
        s._enqueue(_code(v if b else -v), -1)
    for u, ci in zip(s.units, s.unit_origin):
        if s.val[u] == -1:
            return Propagation(s.partial_assignment(), ci)
        if s.val[u] == 0:
            s._enqueue(u, -1)
    confl = s._propagate()
    return Propagation(s.partial_assignment(), None if confl < 0 else s.clause_origin[confl])


class NotHornError(ValueError):
    pass


def solve_horn(f: Formula) -> Optional[Assignment]:
    """Linear-time Horn-SAT: the minimal model, or ``None`` if unsatisfiable.

    Counter-based forward chaining: a clause fires once all of its negative
    literals' variables are true.  Tautologies are always satisfied and
    skipped.
    """
    if not is_horn(f):
        raise NotHornError("formula contains a clause with more than one positive literal")
    n = f.num_vars
    value = [False] * (n + 1)
    pending = []
    head = []
    watchers: list[list[int]] = [[] for _ in range(n + 1)]
    queue = []
    for ci, c in enumerate(f.clauses):
        if is_tautology(c):
            pending.append(-1)
            head.append(0)
            continue
        negs = [-l for l in c if l < 0]
        pos = [l for l in c if l > 0]
        pending.append(len(negs))
        head.append(pos[0] if pos else 0)
        for v in negs:
            watchers[v].append(ci)
        if not negs:
            if not pos:
                return None
            queue.append(pos[0])
    while queue:
        v = queue.pop()
        if value[v]:
            continue
        value[v] = True
        for ci in watchers[v]:
            pending[ci] -= 1
            if pending[ci] == 0:
                h = head[ci]
                if h == 0:
                    return None
                if not value[h]:
                    queue.append(h)
    return {v: value[v] for v in range(1, n + 1)}
