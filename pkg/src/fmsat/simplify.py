"""Polynomial-time, satisfiability-preserving simplifications.

Seven techniques, run in this order per pass by :func:`simplify_fixed_point`:
equivalent-variable substitution, subsumption, self-subsuming resolution,
bounded variable elimination, asymmetric branching, RCheck, and BCP.

Each technique maps a :class:`Formula` to a new one over the same variable
space.  An unsatisfiable outcome is represented by a formula holding the
single empty clause.  Steps that remove variables (substitution,
elimination, forced literals) are recorded so a model of the core can be
extended back to a model of the input.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import networkx as nx

from .cnf import Assignment, Clause, Formula, clause_satisfied, is_tautology, normalize_clause

MAX_PASSES = 5


@dataclass(frozen=True)
class Substitution:
    var: int
    literal: int  # var takes the value of this literal


@dataclass(frozen=True)
class Elimination:
    var: int
    pos: tuple[Clause, ...]
    neg: tuple[Clause, ...]


@dataclass(frozen=True)
class Forced:
    literal: int


Step = Union[Substitution, Elimination, Forced]


def _unsat(n: int) -> Formula:
    return Formula(n, ((),))


def has_empty_clause(f: Formula) -> bool:
    return any(len(c) == 0 for c in f.clauses)


# ------------------------------------------------------------------ substitution


def equiv_var_substitution(f: Formula) -> tuple[Formula, list[Substitution]]:
    """Collapse strongly connected components of the binary implication graph.

    Each component is replaced by its literal with the lowest variable index.
    A component holding both polarities of a variable yields UNSAT.
    """
    g = nx.DiGraph()
    for c in f.clauses:
        if len(c) == 2 and c[0] != -c[1]:
            a, b = c
            g.add_edge(-a, b)
            g.add_edge(-b, a)
    rep: dict[int, int] = {}
    for comp in nx.strongly_connected_components(g):
        if len(comp) < 2:
            continue
        r = min(comp, key=abs)
        for lit in comp:
            if -lit in comp:
                return _unsat(f.num_vars), []
            rep[lit] = r
    subst = {}
    for lit, r in rep.items():
        if lit > 0 and abs(r) != lit:
            subst[lit] = r
    if not subst:
        return f, []

    def image(l: int) -> int:
        r = subst.get(abs(l))
        if r is None:
            return l
        return r if l > 0 else -r

    out = []
    for c in f.clauses:
        nc = normalize_clause(image(l) for l in c)
        if not is_tautology(nc):
            out.append(nc)
    steps = [Substitution(v, subst[v]) for v in sorted(subst)]
    return Formula(f.num_vars, tuple(out)), steps


# -------------------------------------------------------------------- subsumption


def subsumption(f: Formula) -> Formula:
    """Remove every clause that is a superset of (or equal to) another one.

    Among equal clauses the one with the lowest index survives.
    """
    if has_empty_clause(f):
        return _unsat(f.num_vars)
    sets = [frozenset(c) for c in f.clauses]
    occ: dict[int, list[int]] = defaultdict(list)
    for i, s in enumerate(sets):
        for l in s:
            occ[l].append(i)
    alive = [True] * len(sets)
    for i in sorted(range(len(sets)), key=lambda i: (len(sets[i]), i)):
        if not alive[i]:
            continue
        s = sets[i]
        pivot = min(s, key=lambda l: len(occ[l]))
        for j in occ[pivot]:
            if j != i and alive[j] and len(sets[j]) >= len(s) and s <= sets[j]:
                alive[j] = False
    return Formula(f.num_vars, tuple(c for c, a in zip(f.clauses, alive) if a))


# ------------------------------------------------------- self-subsuming resolution


def self_subsuming_resolution(f: Formula) -> Formula:
    """Shorten ``C | -x | D`` to ``C | D`` whenever ``C | x`` is present."""
    clauses = list(f.clauses)
    sets = [set(c) for c in clauses]
    occ: dict[int, set[int]] = defaultdict(set)
    for i, s in enumerate(sets):
        for l in s:
            occ[l].add(i)
    changed = True
    while changed:
        changed = False
        for i in range(len(sets)):
            if is_tautology(clauses[i]):
                continue  # resolving on a tautology strengthens nothing
            for x in sorted(sets[i], key=lambda l: (abs(l), l)):
                if x not in sets[i]:
                    continue
                rest = sets[i] - {x}
                for j in sorted(occ[-x]):
                    if j != i and rest <= sets[j]:
                        sets[j].discard(-x)
                        occ[-x].discard(j)
                        clauses[j] = tuple(l for l in clauses[j] if l != -x)
                        changed = True
    return Formula(f.num_vars, tuple(clauses))


# ------------------------------------------------------------ variable elimination


def _resolvents(pos: list[Clause], neg: list[Clause], v: int) -> list[Clause]:
    out: list[Clause] = []
    seen = set()
    for a in pos:
        for b in neg:
            r = normalize_clause([l for l in a if l != v] + [l for l in b if l != -v])
            if is_tautology(r):
                continue
            key = frozenset(r)
            if key not in seen:
                seen.add(key)
                out.append(r)
    return out


def _eliminate(clauses: list[Optional[Clause]], occ, v: int, force: bool) -> Optional[Elimination]:
    pos_idx = sorted(occ[v])
    neg_idx = sorted(occ[-v])
    if not pos_idx and not neg_idx:
        return None
    pos = [clauses[i] for i in pos_idx]
    neg = [clauses[i] for i in neg_idx]
    res = _resolvents(pos, neg, v)
    if not force and len(res) > len(pos) + len(neg):
        return None
    for i in pos_idx + neg_idx:
        for l in clauses[i]:
            occ[l].discard(i)
        clauses[i] = None
    for r in res:
        clauses.append(r)
        for l in r:
            occ[l].add(len(clauses) - 1)
        if not r:
            occ[0].add(len(clauses) - 1)  # slot 0 marks an empty resolvent
    return Elimination(v, tuple(pos), tuple(neg))


def _index(f: Formula) -> tuple[list[Optional[Clause]], dict]:
    clauses: list[Optional[Clause]] = [c for c in f.clauses if not is_tautology(c)]
    occ: dict[int, set[int]] = defaultdict(set)
    for i, c in enumerate(clauses):
        for l in c:
            occ[l].add(i)
    return clauses, occ


def eliminate_variable(f: Formula, v: int) -> tuple[Formula, Elimination]:
    """Resolve away one variable unconditionally (no size budget)."""
    clauses, occ = _index(f)
    step = _eliminate(clauses, occ, v, force=True)
    if step is None:
        step = Elimination(v, (), ())
    return Formula(f.num_vars, tuple(c for c in clauses if c is not None)), step


def variable_elimination(f: Formula) -> tuple[Formula, list[Elimination]]:
    """Bounded variable elimination, lowest index first.

    A variable is eliminated when its non-tautological resolvents are no
    more numerous than the clauses they replace; pure variables always
    qualify.  Tautologies are dropped up front.
    """
    if has_empty_clause(f):
        return _unsat(f.num_vars), []
    clauses, occ = _index(f)
    steps = []
    for v in range(1, f.num_vars + 1):
        step = _eliminate(clauses, occ, v, force=False)
        if step is None:
            continue
        steps.append(step)
        if occ[0]:
            return _unsat(f.num_vars), steps
    return Formula(f.num_vars, tuple(c for c in clauses if c is not None)), steps


# ------------------------------------------------------------------------- BCP core


class _Propagator:
    """Two-watched-literal BCP over a mutable clause list.

    ``conflict`` always starts from the empty assignment, so watch moves made
    during one call stay valid for the next.  Watch entries carry a version
    so replaced clauses invalidate their old entries lazily.
    """

    def __init__(self, clauses: Iterable[Clause]):
        self.clauses = [list(c) for c in clauses]
        self.alive = [True] * len(self.clauses)
        self.version = [0] * len(self.clauses)
        self.watch: dict[int, list[tuple[int, int]]] = defaultdict(list)
        self.units: set[int] = set()
        self.empties: set[int] = set()
        for i in range(len(self.clauses)):
            self._attach(i)

    def _attach(self, i: int) -> None:
        c = self.clauses[i]
        if len(c) >= 2:
            self.watch[c[0]].append((i, self.version[i]))
            self.watch[c[1]].append((i, self.version[i]))
        elif len(c) == 1:
            self.units.add(i)
        else:
            self.empties.add(i)

    def remove(self, i: int) -> None:
        self.alive[i] = False
        self.version[i] += 1
        self.units.discard(i)
        self.empties.discard(i)

    def replace(self, i: int, clause: Iterable[int]) -> None:
        self.remove(i)
        self.alive[i] = True
        self.clauses[i] = list(clause)
        self._attach(i)

    def conflict(self, assume: Iterable[int], skip: int = -1) -> bool:
        """Does BCP from ``assume`` over all live clauses except ``skip`` conflict?"""
        val: dict[int, bool] = {}
        trail: list[int] = []

        def assign(l: int) -> bool:
            cur = val.get(abs(l))
            if cur is None:
                val[abs(l)] = l > 0
                trail.append(l)
                return True
            return cur == (l > 0)

        if any(i != skip for i in self.empties):
            return True
        for l in assume:
            if not assign(l):
                return True
        for i in sorted(self.units):
            if i != skip and not assign(self.clauses[i][0]):
                return True

        clauses, alive, version, watch = self.clauses, self.alive, self.version, self.watch
        q = 0
        while q < len(trail):
            false_lit = -trail[q]
            q += 1
            ws = watch[false_lit]
            keep = []
            for k in range(len(ws)):
                i, ver = ws[k]
                if ver != version[i] or not alive[i]:
                    continue
                if i == skip:
                    keep.append((i, ver))
                    continue
                c = clauses[i]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = val.get(abs(first))
                if fv is not None and fv == (first > 0):
                    keep.append((i, ver))
                    continue
                for j in range(2, len(c)):
                    lj = c[j]
                    vj = val.get(abs(lj))
                    if vj is None or vj == (lj > 0):
                        c[1], c[j] = lj, false_lit
                        watch[lj].append((i, ver))
                        break
                else:
                    keep.append((i, ver))
                    if fv is not None:
                        keep.extend(ws[k + 1 :])
                        watch[false_lit] = keep
                        return True
                    assign(first)
            watch[false_lit] = keep
        return False


def asymmetric_branching(f: Formula) -> Formula:
    """For each clause ``x | C`` (every literal position ``x``): if BCP on the
    other clauses plus ``-C`` conflicts, replace the clause by ``C``."""
    if has_empty_clause(f):
        return _unsat(f.num_vars)
    clauses = [tuple(c) for c in f.clauses]
    prop = _Propagator(clauses)
    for i in range(len(clauses)):
        c = list(clauses[i])
        k = 0
        while k < len(c):
            rest = c[:k] + c[k + 1 :]
            if prop.conflict([-l for l in rest], skip=i):
                c = rest
                prop.replace(i, c)
                if not c:
                    return _unsat(f.num_vars)
            else:
                k += 1
        clauses[i] = tuple(c)
    return Formula(f.num_vars, tuple(clauses))


def rcheck(f: Formula) -> Formula:
    """Delete, in index order, each non-unit clause implied by the others modulo BCP."""
    if has_empty_clause(f):
        return _unsat(f.num_vars)
    prop = _Propagator(f.clauses)
    kept = []
    for i, c in enumerate(f.clauses):
        if len(c) > 1 and prop.conflict([-l for l in c], skip=i):
            prop.remove(i)
        else:
            kept.append(c)
    return Formula(f.num_vars, tuple(kept))


def bcp_simplify(f: Formula) -> tuple[Formula, list[int]]:
    """Unit propagation to fixpoint; satisfied clauses and false literals go.

    Returns the reduced formula and the forced literals in the order found.
    UNSAT is signalled by an empty clause in the result.
    """
    if has_empty_clause(f):
        return _unsat(f.num_vars), []
    occ: dict[int, list[int]] = defaultdict(list)
    for i, c in enumerate(f.clauses):
        for l in c:
            occ[l].append(i)
    val: Assignment = {}
    forced: list[int] = []
    queue = [c[0] for c in f.clauses if len(c) == 1]
    remaining = [len(c) for c in f.clauses]
    satisfied = [False] * len(f.clauses)
    while queue:
        lit = queue.pop(0)
        cur = val.get(abs(lit))
        if cur is not None:
            if cur != (lit > 0):
                return _unsat(f.num_vars), forced
            continue
        val[abs(lit)] = lit > 0
        forced.append(lit)
        for i in occ[lit]:
            satisfied[i] = True
        for i in occ[-lit]:
            if satisfied[i]:
                continue
            remaining[i] -= 1
            if remaining[i] == 0:
                return _unsat(f.num_vars), forced
            if remaining[i] == 1:
                for l in f.clauses[i]:
                    if abs(l) not in val:
                        queue.append(l)
                        break
    if not forced:
        return f, []
    return f.reduce(val), forced


# ----------------------------------------------------------------- fixed point


@dataclass
class CoreResult:
    core: Formula
    trail: list[Step] = field(default_factory=list)
    passes_used: int = 0
    verdict: Optional[str] = None  # "SAT", "UNSAT" or None when undecided

    @property
    def core_vars(self) -> int:
        return len(self.core.occurring_vars())


def _pass(f: Formula, trail: list[Step]) -> Formula:
    f, subst = equiv_var_substitution(f)
    trail.extend(subst)
    if has_empty_clause(f):
        return f
    f = subsumption(f)
    f = self_subsuming_resolution(f)
    if has_empty_clause(f):
        return _unsat(f.num_vars)
    f, elims = variable_elimination(f)
    trail.extend(elims)
    if has_empty_clause(f):
        return f
    f = asymmetric_branching(f)
    f = rcheck(f)
    f, forced = bcp_simplify(f)
    trail.extend(Forced(l) for l in forced)
    return f


def simplify_fixed_point(f: Formula, max_passes: int = MAX_PASSES) -> CoreResult:
    """Repeat full passes until nothing changes or ``max_passes`` is reached."""
    if max_passes < 1:
        raise ValueError("max_passes must be at least 1")
    trail: list[Step] = []
    cur = f
    used = 0
    for used in range(1, max_passes + 1):
        before = cur.clauses
        mark = len(trail)
        cur = _pass(cur, trail)
        if has_empty_clause(cur):
            return CoreResult(_unsat(f.num_vars), trail, used, "UNSAT")
        if cur.clauses == before and len(trail) == mark:
            break
    return CoreResult(cur, trail, used, "SAT" if not cur.clauses else None)


def reconstruct_model(core_model: Assignment, trail: list[Step], num_vars: int) -> Assignment:
    """Extend a model of the core to a model of the original formula.

    Variables unknown to both the core model and the trail default to false.
    Raises ``ValueError`` when an eliminated variable cannot satisfy its
    saved clauses, which means the core model or the trail is wrong.
    """
    model = {v: bool(core_model.get(v, False)) for v in range(1, num_vars + 1)}
    for step in reversed(trail):
        if isinstance(step, Forced):
            model[abs(step.literal)] = step.literal > 0
        elif isinstance(step, Substitution):
            r = step.literal
            model[step.var] = model[abs(r)] == (r > 0)
        else:
            v = step.var
            model[v] = False
            if not all(clause_satisfied(c, model) for c in step.pos):
                model[v] = True
                if not all(clause_satisfied(c, model) for c in step.neg):
                    raise ValueError(f"cannot extend model to eliminated variable {v}")
    return model


# ------------------------------------------------------------------ trail I/O


def trail_to_json(trail: list[Step]) -> list[dict]:
    out = []
    for s in trail:
        if isinstance(s, Substitution):
            out.append({"kind": "substitution", "var": s.var, "literal": s.literal})
        elif isinstance(s, Elimination):
            out.append({"kind": "eliminated", "var": s.var, "pos": [list(c) for c in s.pos], "neg": [list(c) for c in s.neg]})
        else:
            out.append({"kind": "forced", "literal": s.literal})
    return out


def trail_from_json(items: list[dict]) -> list[Step]:
    out: list[Step] = []
    for d in items:
        kind = d["kind"]
        if kind == "substitution":
            out.append(Substitution(int(d["var"]), int(d["literal"])))
        elif kind == "eliminated":
            out.append(Elimination(int(d["var"]), tuple(tuple(c) for c in d["pos"]), tuple(tuple(c) for c in d["neg"])))
        elif kind == "forced":
            out.append(Forced(int(d["literal"])))
        else:
            raise ValueError(f"unknown trail step {kind!r}")
    return out
