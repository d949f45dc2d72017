"""SAT analysis toolkit for feature-model formulas."""

from .cnf import Formula, parse_dimacs, read_dimacs, write_dimacs
from .solver import SolverConfig, Verdict, solve

__all__ = ["Formula", "parse_dimacs", "read_dimacs", "write_dimacs", "SolverConfig", "Verdict", "solve"]
