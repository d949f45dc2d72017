"""Command-line front end: ``fmsat <command> ...``.

Exit codes: 0 ok, 1 some inputs failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as exp
from .backdoors import (
    FptSearch,
    max_strong_s_backdoor_brute,
    min_weak_e_backdoor,
    backdoor_audit,
    weak_e_backdoor_brute,
)
from .cnf import Formula, read_dimacs, write_dimacs
from .featuremodel import encode_fm, fm_to_json, parse_fm
from .generators import GenSpec, generate_hard_fm, random_ksat, random_ksat_horn_mix
from .profiler import snapshot_profile
from .simplify import reconstruct_model, simplify_fixed_point, trail_to_json
from .solver import SolverConfig, Solver


class CliError(Exception):
    pass


def load_formula(path: str | Path) -> Formula:
    """DIMACS file, or a feature-model JSON file (encoded on the fly)."""
    p = Path(path)
    if p.suffix == ".json":
        f, _ = encode_fm(parse_fm(p.read_text()))
        return f
    return read_dimacs(p)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _text_table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[str(r.get(c, "")) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(l.rstrip() for l in lines) + "\n"


def _table_output(args, table: exp.TableResult) -> int:
    if args.json:
        text = "".join(_dump(r) for r in table.rows)
    elif args.csv:
        text = exp.to_csv(table.rows)
    else:
        text = _text_table(table.rows)
    _emit(text, getattr(args, "out", None))
    for e in table.errors:
        print(f"error: {e['input']}: {e['error']}", file=sys.stderr)
    return 0 if table.ok else 1


# ------------------------------------------------------------------ commands


def cmd_stats(args) -> int:
    return _table_output(args, exp.run_stats_table(args.inputs))


def cmd_simplify(args) -> int:
    if args.inputs:
        return _table_output(args, exp.run_simplify_table(args.inputs, args.max_passes))
    if not args.input:
        raise CliError("simplify needs --in FILE or input paths")
    f = load_formula(args.input)
    r = simplify_fixed_point(f, args.max_passes)
    core_text = write_dimacs(r.core)
    if args.out:
        Path(args.out).write_text(core_text)
    if args.trail:
        Path(args.trail).write_text(json.dumps(trail_to_json(r.trail), indent=1) + "\n")
    summary = {"verdict": r.verdict or "UNDECIDED", "passes": r.passes_used, "core_vars": r.core_vars, "core_clauses": len(r.core.clauses)}
    if r.verdict == "SAT":
        model = reconstruct_model({}, r.trail, f.num_vars)
        summary["model"] = [v if b else -v for v, b in sorted(model.items())]
    if args.json:
        sys.stdout.write(_dump(summary))
    elif not args.out:
        sys.stdout.write(core_text)
    else:
        print(f"{summary['verdict']}: {summary['core_vars']} vars, {summary['core_clauses']} clauses after {r.passes_used} passes")
    return 0


def _config(args) -> SolverConfig:
    return SolverConfig(
        clause_learning=not args.no_learning,
        restarts=not args.no_restarts,
        vsids=not args.no_vsids,
        phase_default=args.phase == "true",
        seed=args.seed,
        conflict_limit=args.conflict_limit,
    )


def cmd_solve(args) -> int:
    f = load_formula(args.input)
    r = Solver(f, _config(args)).solve()
    if args.json:
        sys.stdout.write(_dump(r.as_dict()))
        return 0
    verdict = {"SAT": "SATISFIABLE", "UNSAT": "UNSATISFIABLE", "LIMIT": "UNKNOWN"}[r.verdict.value]
    print(f"s {verdict}")
    if r.model is not None:
        lits = [str(v if b else -v) for v, b in sorted(r.model.items())]
        print("v " + " ".join(lits + ["0"]))
    m = r.metrics
    print(f"c decisions {m.decisions} conflicts {m.conflicts} propagations {m.propagations} restarts {m.restarts_done}")
    return 0


def cmd_profile(args) -> int:
    f = load_formula(args.input)
    if args.every < 1:
        raise CliError("--every must be positive")
    trace = snapshot_profile(f, _config(args), every=args.every, name=Path(args.input).name)
    _emit(trace.to_csv(), args.out)
    return 0


def _witness_json(w, extra: dict) -> dict:
    return {**extra, "found": w is not None, "witness": None if w is None else w.as_dict()}


def cmd_backdoor(args) -> int:
    p = Path(args.input)
    if args.mode == "audit":
        table = exp.TableResult([], [])
        for q in exp.expand_inputs([p]):
            try:
                table.rows.append(backdoor_audit(load_formula(q), q.name).as_dict())
            except (OSError, ValueError) as e:
                table.errors.append({"input": str(q), "error": str(e)})
        sys.stdout.write("".join(_dump(r) for r in table.rows))
        for e in table.errors:
            print(f"error: {e['input']}: {e['error']}", file=sys.stderr)
        return 0 if table.ok else 1
    f = load_formula(p)
    if args.mode == "strong":
        size, subset = max_strong_s_backdoor_brute(f)
        res = {"mode": "strong", "size": size, "vars": None if subset is None else sorted(subset)}
    elif args.mode == "fpt":
        if args.k is None:
            found = min_weak_e_backdoor(f, args.d)
            res = {"mode": "fpt", "minimum": True, "size": None if found is None else found[0]}
            res = _witness_json(None if found is None else found[1], res)
        else:
            search = FptSearch(f, args.d)
            w = search.run(args.k)
            res = _witness_json(w, {"mode": "fpt", "k": args.k, "d": search.d, "branches": search.branches})
    else:
        if args.k is None:
            raise CliError("--mode brute needs --k")
        res = _witness_json(weak_e_backdoor_brute(f, args.k), {"mode": "brute", "k": args.k})
    if args.json:
        sys.stdout.write(_dump(res))
    else:
        for k, v in res.items():
            print(f"{k}: {v}")
    return 0


def _spec(args, **extra) -> GenSpec:
    if args.m is None and args.density is None:
        raise CliError("give --m or --density")
    return GenSpec(n=args.n, m=args.m, k=args.k, density=args.density, seed=args.seed, **extra)


def cmd_gen(args) -> int:
    if args.kind == "ksat":
        text = write_dimacs(random_ksat(_spec(args)))
    elif args.kind == "hornmix":
        text = write_dimacs(random_ksat_horn_mix(_spec(args, horn_fraction=args.horn_fraction)))
    else:
        fm = generate_hard_fm(_spec(args), args.arity)
        text = json.dumps(fm_to_json(fm), indent=1) + "\n"
    _emit(text, args.out)
    return 0


def _floats(text: str) -> list[float]:
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        count = int(round((hi - lo) / step)) + 1
        return [round(lo + i * step, 6) for i in range(count)]
    return [float(x) for x in text.split(",") if x]


def cmd_exp(args) -> int:
    if args.which == "phase":
        rep = exp.run_phase_transition(args.n or 75, _floats(args.densities), args.instances, args.seed, jobs=args.jobs, timing=args.timing)
    elif args.which == "horn":
        rep = exp.run_horn_sweep(
            args.n or 200, args.m, _floats(args.fractions), args.instances, args.seed,
            conflict_limit=args.conflict_limit, jobs=args.jobs, timing=args.timing,
        )
    elif args.which == "ablation":
        if not args.inputs:
            raise CliError("ablation needs input files")
        inputs = [(p.name, load_formula(p)) for p in exp.expand_inputs(args.inputs)]
        seeds = [int(s) for s in args.seeds.split(",")]
        rep = exp.run_toggle_ablation(inputs, seeds, args.conflict_limit, args.jobs, args.timing)
    else:
        inputs = [(p.name, load_formula(p)) for p in exp.expand_inputs(args.inputs)]
        return _table_output(args, exp.run_audit_batch(inputs))
    if args.csv:
        text = rep.rows_csv() if args.rows else rep.cells_csv()
    else:
        text = rep.to_json()
    _emit(text, args.out)
    return 0


# ------------------------------------------------------------------ parser


def _global_flags(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--json", action="store_true", default=default(False), help="JSON output")
    p.add_argument("--csv", action="store_true", default=default(False), help="CSV output")
    p.add_argument("--seed", type=int, default=default(0))
    p.add_argument("--jobs", type=int, default=default(1), help="worker processes for experiments")


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-learning", action="store_true")
    p.add_argument("--no-restarts", action="store_true")
    p.add_argument("--no-vsids", action="store_true")
    p.add_argument("--phase", choices=["false", "true"], default="false", help="default decision polarity")
    p.add_argument("--conflict-limit", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fmsat", description="SAT analysis of feature-model formulas")
    _global_flags(parser, lambda v: v)
    # the same flags after the subcommand; SUPPRESS keeps top-level values
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, lambda v: argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common], help="clause-class statistics per input")
    p.add_argument("inputs", nargs="*", help="DIMACS files or directories")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("simplify", parents=[common], help="fixed-point simplification")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--trail")
    p.add_argument("--max-passes", type=int, default=5)
    p.add_argument("inputs", nargs="*", help="table mode: files or directories")
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("solve", parents=[common], help="CDCL solve")
    p.add_argument("--in", dest="input", required=True)
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("profile", parents=[common], help="restricted-variable trace as CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--every", type=int, default=1)
    _solver_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("backdoor", parents=[common], help="weak E / strong S backdoors")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=["fpt", "brute", "strong", "audit"], default="fpt")
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_backdoor)

    p = sub.add_parser("gen", parents=[common], help="random instances")
    p.add_argument("kind", choices=["ksat", "hornmix", "hardfm"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--density", type=float)
    p.add_argument("--horn-fraction", type=float)
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("exp", parents=[common], help="experiments")
    p.add_argument("which", choices=["phase", "horn", "ablation", "audit"])
    p.add_argument("inputs", nargs="*")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, default=850)
    p.add_argument("--densities", default="3.0:5.5:0.25")
    p.add_argument("--fractions", default=",".join(str(x) for x in exp.HORN_FRACTIONS))
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--conflict-limit", type=int)
    p.add_argument("--timing", action="store_true", help="record wall time (reports stop being byte-stable)")
    p.add_argument("--rows", action="store_true", help="with --csv, emit per-instance rows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_exp)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"fmsat: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"fmsat: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
