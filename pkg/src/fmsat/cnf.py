"""CNF formulas, DIMACS I/O and clause-class statistics.

Literals are signed DIMACS integers: ``v`` is the positive literal of
variable ``v`` and ``-v`` its negation.  Variables are 1-based everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

Clause = tuple[int, ...]
# Partial or complete assignment; a missing key means "unassigned".
Assignment = dict[int, bool]


class DimacsError(ValueError):
    pass


def normalize_clause(lits: Iterable[int]) -> Clause:
    """Drop repeated literals, keeping first-occurrence order."""
    seen = set()
    out = []
    for lit in lits:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def is_tautology(clause: Sequence[int]) -> bool:
    s = set(clause)
    return any(-lit in s for lit in s)


@dataclass(frozen=True)
class Formula:
    """Immutable clause database.

    Clauses are normalized on construction (duplicate literals dropped).
    Tautological clauses are kept and reported by :attr:`tautologies`.
    """

    num_vars: int
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        clauses = tuple(normalize_clause(c) for c in self.clauses)
        for c in clauses:
            for lit in c:
                if abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]], num_vars: Optional[int] = None) -> "Formula":
        clauses = [tuple(c) for c in clauses]
        if num_vars is None:
            num_vars = max((abs(l) for c in clauses for l in c), default=0)
        return cls(num_vars, tuple(clauses))

    def __len__(self) -> int:
        return len(self.clauses)

    @property
    def tautologies(self) -> tuple[int, ...]:
        """Indices of clauses containing some variable in both polarities."""
        return tuple(i for i, c in enumerate(self.clauses) if is_tautology(c))

    @property
    def num_literals(self) -> int:
        return sum(len(c) for c in self.clauses)

    @property
    def max_clause_len(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def occurring_vars(self) -> set[int]:
        return {abs(l) for c in self.clauses for l in c}

    def with_clauses(self, extra: Iterable[Iterable[int]]) -> "Formula":
        return Formula(self.num_vars, self.clauses + tuple(tuple(c) for c in extra))

    def assume(self, assignment: Assignment) -> "Formula":
        """Conjoin unit clauses fixing every variable in ``assignment``."""
        return self.with_clauses((v if b else -v,) for v, b in sorted(assignment.items()))

    def reduce(self, assignment: Assignment) -> "Formula":
        """Drop satisfied clauses and false literals; no propagation."""
        out = []
        for c in self.clauses:
            kept = []
            sat = False
            for lit in c:
                val = assignment.get(abs(lit))
                if val is None:
                    kept.append(lit)
                elif val == (lit > 0):
                    sat = True
                    break
            if not sat:
                out.append(tuple(kept))
        return Formula(self.num_vars, tuple(out))

    def is_satisfied_by(self, assignment: Assignment) -> bool:
        return all(clause_satisfied(c, assignment) for c in self.clauses)


def clause_satisfied(clause: Sequence[int], assignment: Assignment) -> bool:
    for lit in clause:
        val = assignment.get(abs(lit))
        if val is not None and val == (lit > 0):
            return True
    return False


# --------------------------------------------------------------------------- DIMACS


def parse_dimacs(text: str) -> Formula:
    num_vars = num_clauses = None
    clauses: list[Clause] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad token {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > num_vars:
                raise DimacsError(f"line {lineno}: literal {lit} out of range (1..{num_vars})")
            else:
                current.append(lit)
    if num_vars is None:
        raise DimacsError("missing problem line")
    if current:
        raise DimacsError("last clause is missing its 0 terminator")
    if len(clauses) != num_clauses:
        raise DimacsError(f"header declares {num_clauses} clauses, found {len(clauses)}")
    return Formula(num_vars, tuple(clauses))


def read_dimacs(path) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse_dimacs(fh.read())


def write_dimacs(f: Formula) -> str:
    lines = [f"p cnf {f.num_vars} {len(f.clauses)}"]
    lines.extend(" ".join(map(str, c + (0,))) for c in f.clauses)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- classes


@dataclass(frozen=True)
class ClauseClass:
    horn: bool
    anti_horn: bool
    binary: bool

    @property
    def other(self) -> bool:
        return not (self.horn or self.anti_horn or self.binary)


def classify_clause(clause: Sequence[int]) -> ClauseClass:
    pos = sum(1 for l in clause if l > 0)
    neg = len(clause) - pos
    return ClauseClass(horn=pos <= 1, anti_horn=neg <= 1, binary=len(clause) == 2)


def is_horn(f: Formula) -> bool:
    return all(sum(1 for l in c if l > 0) <= 1 for c in f.clauses)


@dataclass(frozen=True)
class StatsReport:
    """Table-1 style statistics.  Percentages are ``None`` when undefined."""

    num_vars: int
    num_clauses: int
    pct_horn: Optional[float]
    pct_anti_horn: Optional[float]
    pct_binary: Optional[float]
    pct_other: Optional[float]
    pct_pure_vars: Optional[float]

    def as_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "num_clauses": self.num_clauses,
            "pct_horn": self.pct_horn,
            "pct_anti_horn": self.pct_anti_horn,
            "pct_binary": self.pct_binary,
            "pct_other": self.pct_other,
            "pct_pure_vars": self.pct_pure_vars,
        }


def _pct(count: int, total: int) -> Optional[float]:
    if total == 0:
        return None
    return round(100.0 * count / total, 2)


def pure_vars(f: Formula) -> set[int]:
    pos, neg = set(), set()
    for c in f.clauses:
        for l in c:
            (pos if l > 0 else neg).add(abs(l))
    return pos ^ neg


def formula_stats(f: Formula, num_vars: Optional[int] = None) -> StatsReport:
    """Clause-class percentages over clauses, purity over occurring variables.

    ``num_vars`` overrides the reported variable count (cores report the
    number of variables still occurring).
    """
    counts = [0, 0, 0, 0]
    for c in f.clauses:
        cls = classify_clause(c)
        counts[0] += cls.horn
        counts[1] += cls.anti_horn
        counts[2] += cls.binary
        counts[3] += cls.other
    m = len(f.clauses)
    occurring = f.occurring_vars()
    return StatsReport(
        num_vars=f.num_vars if num_vars is None else num_vars,
        num_clauses=m,
        pct_horn=_pct(counts[0], m),
        pct_anti_horn=_pct(counts[1], m),
        pct_binary=_pct(counts[2], m),
        pct_other=_pct(counts[3], m),
        pct_pure_vars=_pct(len(pure_vars(f)), len(occurring)) if m else None,
    )
