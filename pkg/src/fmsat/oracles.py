"""Exhaustive enumeration oracles for small formulas.

Assignments are enumerated as integers in ``[0, 2**n)``; bit ``v-1`` holds
the value of variable ``v``.  Evaluation is vectorized with numpy in chunks,
so ``n`` around 20 is cheap and the 30-variable default cap is merely slow.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Iterator, Optional

import numpy as np

from .cnf import Assignment, Formula

DEFAULT_VAR_LIMIT = 30
DEFAULT_PROJECTION_LIMIT = 25
CHUNK_BITS = 18


class OracleLimitError(ValueError):
    pass


def _check_limit(f: Formula, var_limit: int) -> None:
    if f.num_vars > var_limit:
        raise OracleLimitError(f"{f.num_vars} variables exceeds brute-force limit {var_limit}")


def _chunks(n: int) -> Iterator[np.ndarray]:
    total = 1 << n
    step = 1 << CHUNK_BITS
    for lo in range(0, total, step):
        yield np.arange(lo, min(total, lo + step), dtype=np.int64)


def _sat_mask(f: Formula, idx: np.ndarray) -> np.ndarray:
    bits = {}
    mask = np.ones(idx.shape, dtype=bool)
    for clause in f.clauses:
        cm = np.zeros(idx.shape, dtype=bool)
        for lit in clause:
            v = abs(lit)
            b = bits.get(v)
            if b is None:
                b = bits[v] = ((idx >> (v - 1)) & 1).astype(bool)
            cm |= b if lit > 0 else ~b
        mask &= cm
        if not mask.any():
            break
    return mask


def iter_model_indices(f: Formula, var_limit: int = DEFAULT_VAR_LIMIT) -> Iterator[np.ndarray]:
    _check_limit(f, var_limit)
    for idx in _chunks(f.num_vars):
        sel = idx[_sat_mask(f, idx)]
        if sel.size:
            yield sel


def all_models(f: Formula, var_limit: int = 22) -> np.ndarray:
    """Boolean matrix (models x num_vars); column ``v-1`` is variable ``v``."""
    parts = list(iter_model_indices(f, var_limit))
    idx = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    cols = np.arange(f.num_vars, dtype=np.int64)
    return ((idx[:, None] >> cols[None, :]) & 1).astype(bool)


def index_to_assignment(index: int, n: int) -> Assignment:
    return {v: bool((index >> (v - 1)) & 1) for v in range(1, n + 1)}


def brute_force_solve(f: Formula, var_limit: int = DEFAULT_VAR_LIMIT) -> Optional[Assignment]:
    """Return a satisfying complete assignment, or ``None`` when UNSAT.

    Note the empty formula over zero variables returns ``{}``: test with
    ``is None``, not truthiness.
    """
    for sel in iter_model_indices(f, var_limit):
        model = index_to_assignment(int(sel[0]), f.num_vars)
        assert f.is_satisfied_by(model)
        return model
    return None


def brute_force_count(
    f: Formula,
    projection: Optional[Iterable[int]] = None,
    var_limit: int = DEFAULT_VAR_LIMIT,
    projection_limit: int = DEFAULT_PROJECTION_LIMIT,
) -> int:
    """Number of assignments to ``projection`` that extend to a model."""
    _check_limit(f, var_limit)
    if projection is None:
        return sum(int(sel.size) for sel in iter_model_indices(f, var_limit))
    proj = sorted(set(projection))
    if len(proj) > projection_limit:
        raise OracleLimitError(f"projection of {len(proj)} variables exceeds {projection_limit}")
    for v in proj:
        if not 1 <= v <= f.num_vars:
            raise ValueError(f"projection variable {v} out of range")
    if len(proj) == f.num_vars:
        return brute_force_count(f, None, var_limit)
    seen = np.zeros(1 << len(proj), dtype=bool)
    for sel in iter_model_indices(f, var_limit):
        key = np.zeros(sel.shape, dtype=np.int64)
        for j, v in enumerate(proj):
            key |= ((sel >> (v - 1)) & 1) << j
        seen[key] = True
    return int(seen.sum())


class Backbone(str, Enum):
    FREE = "free"
    FORCED_TRUE = "forced_true"
    FORCED_FALSE = "forced_false"


def backbone_brute(f: Formula, var_limit: int = DEFAULT_VAR_LIMIT) -> Optional[dict[int, Backbone]]:
    """Per-variable backbone status, or ``None`` if ``f`` is unsatisfiable."""
    n = f.num_vars
    can_true = np.zeros(n, dtype=bool)
    can_false = np.zeros(n, dtype=bool)
    any_model = False
    cols = np.arange(n, dtype=np.int64)
    for sel in iter_model_indices(f, var_limit):
        any_model = True
        m = ((sel[:, None] >> cols[None, :]) & 1).astype(bool)
        can_true |= m.any(axis=0)
        can_false |= (~m).any(axis=0)
    if not any_model:
        return None
    out = {}
    for v in range(1, n + 1):
        t, fl = can_true[v - 1], can_false[v - 1]
        out[v] = Backbone.FREE if (t and fl) else (Backbone.FORCED_TRUE if t else Backbone.FORCED_FALSE)
    return out
