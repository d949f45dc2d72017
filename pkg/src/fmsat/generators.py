"""Seeded random instances: uniform k-SAT, Horn-controlled 3-SAT, hard FMs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .cnf import Formula
from .featuremodel import Feature, FeatureModel
from .rng import SplitMix64


@dataclass(frozen=True)
class GenSpec:
    n: int
    m: Optional[int] = None
    k: int = 3
    density: Optional[float] = None
    horn_fraction: Optional[float] = None
    seed: int = 0

    @property
    def num_clauses(self) -> int:
        if self.m is not None:
            return self.m
        if self.density is None:
            raise ValueError("GenSpec needs either m or density")
        # round half up; Python's round() is banker's rounding
        return int(math.floor(self.density * self.n + 0.5))


def _draw_clause(rng: SplitMix64, n: int, k: int) -> tuple[int, ...]:
    chosen: list[int] = []
    while len(chosen) < k:
        v = rng.below(n) + 1
        if v not in chosen:
            chosen.append(v)
    chosen.sort()
    return tuple(v if rng.bit() else -v for v in chosen)


def _check(spec: GenSpec) -> None:
    if spec.n < 1 or spec.k < 1:
        raise ValueError("n and k must be positive")
    if spec.k > spec.n:
        raise ValueError(f"k={spec.k} exceeds n={spec.n}")


def random_ksat(spec: GenSpec) -> Formula:
    """``m`` clauses of ``k`` distinct variables, uniform polarities.

    Per clause: variables drawn with ``below(n)+1`` rejecting repeats, sorted
    ascending, then one ``bit()`` per literal (1 = positive).
    """
    _check(spec)
    rng = SplitMix64(spec.seed)
    return Formula(spec.n, tuple(_draw_clause(rng, spec.n, spec.k) for _ in range(spec.num_clauses)))


def _horn(clause: tuple[int, ...]) -> bool:
    return sum(1 for l in clause if l > 0) <= 1


def random_ksat_horn_mix(spec: GenSpec) -> Formula:
    """Random k-SAT with exactly ``ceil(horn_fraction * m)`` Horn clauses.

    Slot classes (Horn / non-Horn) are fixed first and shuffled; each slot
    then redraws uniform clauses until the class matches, which makes Horn
    slots uniform over Horn polarity patterns.  For k = 3 every non-Horn
    clause is anti-Horn.
    """
    _check(spec)
    frac = spec.horn_fraction
    if frac is None or not 0.0 <= frac <= 1.0:
        raise ValueError("horn_fraction must be in [0, 1]")
    m = spec.num_clauses
    horn_slots = math.ceil(frac * m - 1e-9)
    if horn_slots < m and spec.k < 2:
        raise ValueError("unit clauses are always Horn; fraction unreachable")
    rng = SplitMix64(spec.seed)
    slots = [True] * horn_slots + [False] * (m - horn_slots)
    rng.shuffle(slots)
    clauses = []
    for want in slots:
        while True:
            c = _draw_clause(rng, spec.n, spec.k)
            if _horn(c) == want:
                clauses.append(c)
                break
    return Formula(spec.n, tuple(clauses))


def leaf_name(v: int) -> str:
    return f"x{v}"


def generate_hard_fm(spec: GenSpec, tree_arity: int = 2) -> FeatureModel:
    """A tree of optional features over a random 3-SAT cross-tree formula.

    The ``n`` variables become optional leaves ``x1..xn``; leaves are grouped
    ``tree_arity`` at a time under optional internal features ``g<level>_<i>``,
    level by level, until at most ``tree_arity`` nodes remain to hang off
    the root.  Every generated clause becomes one constraint.
    """
    if tree_arity < 2:
        raise ValueError("tree_arity must be at least 2")
    cnf = random_ksat(spec)
    nodes = [Feature(leaf_name(v), relation="optional") for v in range(1, spec.n + 1)]
    level = 0
    while len(nodes) > tree_arity:
        level += 1
        grouped = []
        for i in range(0, len(nodes), tree_arity):
            grouped.append(Feature(f"g{level}_{i // tree_arity}", relation="optional", children=nodes[i : i + tree_arity]))
        nodes = grouped
    root = Feature("root", children=nodes)
    constraints = [" | ".join(leaf_name(l) if l > 0 else "!" + leaf_name(-l) for l in c) for c in cnf.clauses]
    return FeatureModel(root, constraints)
