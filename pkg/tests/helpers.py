"""Shared generators and independent reference checkers for the tests."""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from fmsat.cnf import Formula
from fmsat.featuremodel import Feature, FeatureModel, evaluate


def rand_formula(rng: random.Random, n: int, m: int, min_w: int = 1, max_w: int = 4) -> Formula:
    clauses = []
    for _ in range(m):
        w = rng.randint(min_w, max_w)
        clauses.append(tuple(rng.choice((1, -1)) * rng.randint(1, n) for _ in range(w)))
    return Formula(n, tuple(clauses))


def rand_3cnf(rng: random.Random, n: int, density: float) -> Formula:
    m = int(density * n + 0.5)
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), min(3, n))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return Formula(n, tuple(clauses))


@st.composite
def formulas(draw, max_vars: int = 8, max_clauses: int = 20, max_width: int = 4):
    n = draw(st.integers(1, max_vars))
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from((v, -v)))
    clauses = draw(st.lists(st.lists(lit, min_size=1, max_size=max_width), max_size=max_clauses))
    return Formula(n, tuple(tuple(c) for c in clauses))


def naive_models(f: Formula) -> list[dict[int, bool]]:
    """Plain itertools enumeration, independent of the numpy oracles."""
    out = []
    for bits in itertools.product((False, True), repeat=f.num_vars):
        a = {v + 1: b for v, b in enumerate(bits)}
        if all(any(a[abs(l)] == (l > 0) for l in c) for c in f.clauses):
            out.append(a)
    return out


# ------------------------------------------------------------------ feature models


def rand_fm(rng: random.Random, num_features: int, tristate_p: float = 0.2, constraints: int = 2) -> FeatureModel:
    names = [f"f{i}" for i in range(num_features)]
    kinds = {nm: ("tristate" if rng.random() < tristate_p else "boolean") for nm in names}
    children: dict[str, list[str]] = {nm: [] for nm in names}
    for i in range(1, num_features):
        children[names[rng.randrange(i)]].append(names[i])

    def build(nm: str, is_root: bool) -> Feature:
        kids = [build(c, False) for c in children[nm]]
        group = rng.choice((None, "or", "alternative")) if len(kids) >= 2 else None
        rel = None if is_root else rng.choice(("mandatory", "optional"))
        return Feature(nm, kinds[nm], rel, group, kids)

    def ref() -> str:
        nm = rng.choice(names)
        return nm + "'" if kinds[nm] == "tristate" and rng.random() < 0.5 else nm

    def expr(depth: int) -> str:
        if depth == 0 or rng.random() < 0.3:
            return ("!" if rng.random() < 0.3 else "") + ref()
        op = rng.choice(("&", "|", "=>", "<=>"))
        return f"({expr(depth - 1)} {op} {expr(depth - 1)})"

    return FeatureModel(build(names[0], True), [expr(2) for _ in range(constraints)])


def count_configurations(fm: FeatureModel) -> int:
    """Valid configurations by direct tree semantics, no CNF involved.

    Configurations are counted over (presence, static) pairs; the static
    flag of a non-tristate feature is absent.
    """
    feats = fm.features()
    slots = []
    for f in feats:
        slots.append((f.name, False))
        if f.kind == "tristate":
            slots.append((f.name, True))
    parent = {c.name: p for p in feats for c in p.children}
    count = 0
    for bits in itertools.product((False, True), repeat=len(slots)):
        env = dict(zip(slots, bits))
        if _valid(fm, feats, parent, env):
            count += 1
    return count


def _valid(fm, feats, parent, env) -> bool:
    sel = lambda name: env[(name, False)]
    if not sel(fm.root.name):
        return False
    for f in feats:
        if f.kind == "tristate" and env[(f.name, True)] and not sel(f.name):
            return False
        if f.name in parent and sel(f.name) and not sel(parent[f.name].name):
            return False
        if sel(f.name):
            kids = [sel(c.name) for c in f.children]
            for c in f.children:
                if c.relation == "mandatory" and not sel(c.name):
                    return False
            if f.group == "or" and not any(kids):
                return False
            if f.group == "alternative" and sum(kids) != 1:
                return False
    return all(evaluate(e, env) for e in fm.parsed)


def easy_fm(rng: random.Random, num_features: int, constraints: int) -> FeatureModel:
    """Boolean FM whose constraints are all binary clauses, so no aux variables appear.

    Shaped like hand-written product lines: mostly optional children, a few
    mandatory ones and groups, and requires/excludes constraints.
    """
    names = [f"e{i}" for i in range(num_features)]
    children: dict[str, list[str]] = {nm: [] for nm in names}
    for i in range(1, num_features):
        children[names[rng.randrange(max(0, i - 8), i)]].append(names[i])

    def build(nm: str, is_root: bool) -> Feature:
        kids = [build(c, False) for c in children[nm]]
        group = rng.choice((None, None, "or", "alternative")) if len(kids) >= 2 else None
        rel = None if is_root else ("mandatory" if rng.random() < 0.2 else "optional")
        return Feature(nm, "boolean", rel, group, kids)

    cons = []
    for _ in range(constraints):
        a, b = rng.sample(names[1:], 2)
        cons.append(f"{a} => {b}" if rng.random() < 0.7 else f"{a} => !{b}")
    return FeatureModel(build(names[0], True), cons)
