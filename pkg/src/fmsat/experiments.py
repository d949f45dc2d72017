"""Batch experiments and table builders.

Every report is a pure function of its parameters and seeds.  Wall-clock
time is only recorded when ``timing=True``; it is left out by default so
that serialized reports are byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

from .backdoors import backdoor_audit
from .cnf import Formula, formula_stats, read_dimacs
from .generators import GenSpec, random_ksat, random_ksat_horn_mix
from .rng import derive_seed
from .simplify import simplify_fixed_point
from .solver import ALL_TOGGLES, Solver, SolverConfig, Verdict

PHASE_DENSITIES = tuple(3.0 + 0.25 * i for i in range(11))
HORN_FRACTIONS = (0.0, 0.1, 0.2, 0.5, 0.8, 0.9, 1.0)


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    seeds: list[int]
    cells: list[dict] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)

    def cell(self, key: Any) -> dict:
        for c in self.cells:
            if c["key"] == key:
                return c
        raise KeyError(key)

    def as_dict(self) -> dict:
        return {"experiment": self.experiment, "params": self.params, "seeds": self.seeds, "cells": self.cells, "rows": self.rows}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=1) + "\n"

    def cells_csv(self) -> str:
        return to_csv(self.cells)

    def rows_csv(self) -> str:
        return to_csv(self.rows)


def to_csv(records: list[dict]) -> str:
    if not records:
        return ""
    cols: list[str] = []
    for r in records:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(records)
    return buf.getvalue()


def _map(fn: Callable, tasks: Sequence, jobs: int = 1) -> list:
    # results always come back in task order, whatever the pool does
    if jobs <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _solve_row(f: Formula, cfg: SolverConfig, timing: bool) -> dict:
    t0 = time.perf_counter()
    r = Solver(f, cfg).solve()
    row = {"verdict": r.verdict.value, "conflicts": r.metrics.conflicts, "decisions": r.metrics.decisions, "propagations": r.metrics.propagations}
    if timing:
        row["wall_s"] = round(time.perf_counter() - t0, 6)
    return row


def aggregate(rows: list[dict], key: Any, timing: bool = False) -> dict:
    """Per-cell summary; recomputable from the rows alone."""
    conf = [r["conflicts"] for r in rows]
    dec = [r["decisions"] for r in rows]
    cell = {
        "key": key,
        "instances": len(rows),
        "mean_conflicts": round(statistics.fmean(conf), 4) if rows else None,
        "median_conflicts": statistics.median(conf) if rows else None,
        "mean_decisions": round(statistics.fmean(dec), 4) if rows else None,
        "median_decisions": statistics.median(dec) if rows else None,
        "sat": sum(r["verdict"] == "SAT" for r in rows),
        "unsat": sum(r["verdict"] == "UNSAT" for r in rows),
        "limit_hits": sum(r["verdict"] == "LIMIT" for r in rows),
    }
    if timing and rows:
        cell["mean_wall_s"] = round(statistics.fmean(r["wall_s"] for r in rows), 6)
    return cell


# ------------------------------------------------------------------ phase transition


def _phase_task(t: tuple) -> dict:
    n, density, idx, seed, cfg, timing = t
    f = random_ksat(GenSpec(n=n, density=density, seed=seed))
    return {"density": density, "instance": idx, "seed": seed, **_solve_row(f, cfg, timing)}


def run_phase_transition(
    n: int = 75,
    densities: Iterable[float] = PHASE_DENSITIES,
    instances: int = 100,
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    jobs: int = 1,
    timing: bool = False,
) -> ExperimentReport:
    """Random 3-SAT sweep over clause density; ``peak`` is the density with
    the highest mean conflict count."""
    cfg = config or SolverConfig()
    dens = [round(d, 6) for d in densities]
    tasks = [(n, d, j, derive_seed(seed, round(d * 1000), j), cfg, timing) for d in dens for j in range(instances)]
    rows = _map(_phase_task, tasks, jobs)
    rep = ExperimentReport("phase", {"n": n, "densities": dens, "instances": instances, "config": _cfg_label(cfg)}, [seed], rows=rows)
    rep.cells = [aggregate([r for r in rows if r["density"] == d], d, timing) for d in dens]
    if rep.cells:
        rep.params["peak"] = max(rep.cells, key=lambda c: (c["mean_conflicts"], -c["key"]))["key"]
    return rep


# ------------------------------------------------------------------ Horn sweep


def _horn_task(t: tuple) -> list[dict]:
    n, m, frac, idx, seed, cfg, phases, timing = t
    f = random_ksat_horn_mix(GenSpec(n=n, m=m, horn_fraction=frac, seed=seed))
    out = []
    for ph in phases:
        row = _solve_row(f, replace(cfg, phase_default=ph), timing)
        out.append({"horn_fraction": frac, "instance": idx, "seed": seed, "phase": ph, **row})
    return out


def run_horn_sweep(
    n: int = 200,
    m: int = 850,
    fractions: Iterable[float] = HORN_FRACTIONS,
    instances: int = 100,
    seed: int = 0,
    conflict_limit: Optional[int] = None,
    phases: Sequence[bool] = (False, True),
    config: Optional[SolverConfig] = None,
    jobs: int = 1,
    timing: bool = False,
) -> ExperimentReport:
    """Mean conflicts against the fraction of Horn clauses.

    Each instance is solved once per default phase in ``phases``.  A solver
    that always tries false first finds all-negative Horn clauses easy and
    all-positive anti-Horn clauses hard; averaging over both phases removes
    that bias from the p / 1-p comparison.  Runs cut off by
    ``conflict_limit`` count with the limit as their conflict value and are
    reported in ``limit_hits``.
    """
    cfg = replace(config or SolverConfig(), conflict_limit=conflict_limit)
    fracs = [round(p, 6) for p in fractions]
    tasks = [(n, m, p, j, derive_seed(seed, round(p * 1000), j), cfg, tuple(phases), timing) for p in fracs for j in range(instances)]
    rows = [r for rs in _map(_horn_task, tasks, jobs) for r in rs]
    rep = ExperimentReport(
        "horn",
        {"n": n, "m": m, "fractions": fracs, "instances": instances, "phases": list(phases), "conflict_limit": conflict_limit},
        [seed],
        rows=rows,
    )
    for p in fracs:
        cell_rows = [r for r in rows if r["horn_fraction"] == p]
        cell = aggregate(cell_rows, p, timing)
        for ph in phases:
            sub = [r["conflicts"] for r in cell_rows if r["phase"] == ph]
            cell[f"mean_conflicts_phase_{str(ph).lower()}"] = round(statistics.fmean(sub), 4) if sub else None
        rep.cells.append(cell)
    return rep


# ------------------------------------------------------------------ toggle ablation


def _cfg_label(cfg: SolverConfig) -> str:
    parts = [name for name, on in (("learning", cfg.clause_learning), ("restarts", cfg.restarts), ("vsids", cfg.vsids)) if on]
    return "+".join(parts) or "plain"


def _ablation_task(t: tuple) -> dict:
    name, f, cfg, timing = t
    return {"input": name, "config": _cfg_label(cfg), "seed": cfg.seed, **_solve_row(f, cfg, timing)}


def run_toggle_ablation(
    inputs: Sequence[tuple[str, Formula]],
    seeds: Sequence[int] = (0, 1, 2),
    conflict_limit: Optional[int] = None,
    jobs: int = 1,
    timing: bool = False,
) -> ExperimentReport:
    """Solve every input under all 8 feature toggles for every seed.

    Cells are keyed ``"<input>/<config>"``; LIMIT rows carry ``limit: true``.
    """
    tasks = [
        (name, f, replace(cfg, seed=s, conflict_limit=conflict_limit), timing)
        for name, f in inputs
        for cfg in ALL_TOGGLES
        for s in seeds
    ]
    rows = _map(_ablation_task, tasks, jobs)
    for r in rows:
        r["limit"] = r["verdict"] == Verdict.LIMIT.value
    rep = ExperimentReport(
        "ablation",
        {"inputs": [name for name, _ in inputs], "configs": [_cfg_label(c) for c in ALL_TOGGLES], "conflict_limit": conflict_limit},
        list(seeds),
        rows=rows,
    )
    for name, _ in inputs:
        for cfg in ALL_TOGGLES:
            label = _cfg_label(cfg)
            rep.cells.append(aggregate([r for r in rows if r["input"] == name and r["config"] == label], f"{name}/{label}", timing))
    return rep


# ------------------------------------------------------------------ tables


def expand_inputs(paths: Iterable[str | Path]) -> list[Path]:
    """Files as given; directories contribute their ``*.cnf`` files, sorted."""
    out: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("*.cnf")))
        else:
            out.append(p)
    return out


@dataclass
class TableResult:
    rows: list[dict]
    errors: list[dict]

    @property
    def ok(self) -> bool:
        return not self.errors


def _table(paths: Iterable[str | Path], row_fn: Callable[[Formula], dict]) -> TableResult:
    rows, errors = [], []
    for p in expand_inputs(paths):
        try:
            f = read_dimacs(p)
        except (OSError, ValueError) as e:
            errors.append({"input": str(p), "error": str(e)})
            continue
        rows.append({"input": p.name, **row_fn(f)})
    return TableResult(rows, errors)


def _stats_columns(f: Formula, num_vars: Optional[int] = None) -> dict:
    s = formula_stats(f, num_vars)
    na = lambda x: "NA" if x is None else x
    return {
        "variables": s.num_vars,
        "clauses": s.num_clauses,
        "horn_pct": na(s.pct_horn),
        "anti_horn_pct": na(s.pct_anti_horn),
        "binary_pct": na(s.pct_binary),
        "other_pct": na(s.pct_other),
    }


def stats_row(f: Formula) -> dict:
    return _stats_columns(f)


def simplify_row(f: Formula, max_passes: int = 5) -> dict:
    r = simplify_fixed_point(f, max_passes)
    row = _stats_columns(r.core, r.core_vars)
    if r.verdict == "UNSAT":
        row["clauses"] = 0  # the empty-clause marker is not a core clause
        row.update(horn_pct="NA", anti_horn_pct="NA", binary_pct="NA", other_pct="NA")
    row["verdict"] = r.verdict or "UNDECIDED"
    row["passes"] = r.passes_used
    return row


def run_stats_table(paths: Iterable[str | Path]) -> TableResult:
    return _table(paths, stats_row)


def run_simplify_table(paths: Iterable[str | Path], max_passes: int = 5) -> TableResult:
    return _table(paths, lambda f: simplify_row(f, max_passes))


def run_audit_batch(inputs: Sequence[tuple[str, Formula]]) -> TableResult:
    """Backdoor/restricted-count audit per input; failures go to ``errors``."""
    rows, errors = [], []
    for name, f in inputs:
        try:
            rows.append(backdoor_audit(f, name).as_dict())
        except ValueError as e:
            errors.append({"input": name, "error": str(e)})
    return TableResult(rows, errors)
