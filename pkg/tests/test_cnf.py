import random

import pytest
from hypothesis import given

from fmsat.cnf import (
    DimacsError,
    Formula,
    classify_clause,
    formula_stats,
    is_horn,
    parse_dimacs,
    pure_vars,
    write_dimacs,
)
from helpers import formulas, rand_formula


def test_parse_simple():
    f = parse_dimacs("p cnf 2 1\n1 -2 0")
    assert f == Formula(2, ((1, -2),))


def test_parse_empty_formula():
    f = parse_dimacs("p cnf 1 0")
    assert f.num_vars == 1 and f.clauses == ()


def test_parse_out_of_range():
    with pytest.raises(DimacsError):
        parse_dimacs("p cnf 2 1\n1 3 0")


@pytest.mark.parametrize(
    "text",
    [
        "p cnf x 1\n1 0",
        "1 2 0",
        "p cnf 2 1\n1 2",
        "p cnf 2 2\n1 2 0",
        "p cnf 2 1\n1 a 0",
    ],
)
def test_parse_errors(text):
    with pytest.raises(DimacsError):
        parse_dimacs(text)


def test_parse_comments_and_multiline_clauses():
    text = "c hello\np cnf 3 2\n1 -2\n 3 0 -1 0\n"
    assert parse_dimacs(text).clauses == ((1, -2, 3), (-1,))


def test_write_dimacs():
    assert write_dimacs(Formula(2, ((1, -2),))) == "p cnf 2 1\n1 -2 0\n"
    assert write_dimacs(Formula(0, ())) == "p cnf 0 0\n"


def test_round_trip_random():
    rng = random.Random(7)
    for _ in range(100):
        f = rand_formula(rng, rng.randint(1, 15), rng.randint(0, 30))
        assert parse_dimacs(write_dimacs(f)) == f


@given(formulas())
def test_round_trip_property(f):
    assert parse_dimacs(write_dimacs(f)) == f


def test_normalization_drops_duplicates_keeps_tautologies():
    f = Formula(2, ((1, 1, -2), (1, -1)))
    assert f.clauses == ((1, -2), (1, -1))
    assert f.tautologies == (1,)


def test_out_of_range_formula():
    with pytest.raises(ValueError):
        Formula(1, ((2,),))


@pytest.mark.parametrize(
    "clause, expected",
    [
        ((-1, -2, 3), (True, False, False, False)),
        ((1, 2), (False, True, True, False)),
        ((1, 2, -3), (False, True, False, False)),
        ((1, 2, 3, -4, -5), (False, False, False, True)),
        ((1,), (True, True, False, False)),
    ],
)
def test_classify_clause(clause, expected):
    c = classify_clause(clause)
    assert (c.horn, c.anti_horn, c.binary, c.other) == expected


@given(formulas())
def test_horn_and_antihorn_iff_one_of_each(f):
    for c in f.clauses:
        cls = classify_clause(c)
        pos = sum(l > 0 for l in c)
        neg = len(c) - pos
        assert (cls.horn and cls.anti_horn) == (pos <= 1 and neg <= 1)
        assert cls.other == (not cls.horn and not cls.anti_horn and not cls.binary)


def test_stats_binary_pair():
    s = formula_stats(Formula(2, ((1, 2), (-1, -2))))
    assert (s.pct_binary, s.pct_horn, s.pct_anti_horn, s.pct_other, s.pct_pure_vars) == (100.0, 50.0, 50.0, 0.0, 0.0)


def test_stats_units():
    s = formula_stats(Formula(2, ((1,), (2,))))
    assert (s.pct_horn, s.pct_anti_horn, s.pct_pure_vars) == (100.0, 100.0, 100.0)


def test_stats_empty_is_na():
    s = formula_stats(Formula(3, ()))
    assert s.num_clauses == 0
    assert s.pct_horn is None and s.pct_other is None and s.pct_pure_vars is None


def test_stats_rounding():
    s = formula_stats(Formula(3, ((1, 2, 3), (-1,), (-2,))))
    assert s.pct_horn == 66.67


@given(formulas())
def test_stats_in_range(f):
    s = formula_stats(f)
    for p in (s.pct_horn, s.pct_anti_horn, s.pct_binary, s.pct_other, s.pct_pure_vars):
        assert p is None or 0 <= p <= 100


def test_pure_vars_and_is_horn():
    f = Formula(3, ((1, -2), (-1, -3)))
    assert pure_vars(f) == {2, 3}
    assert is_horn(f)
    assert not is_horn(Formula(2, ((1, 2),)))


def test_reduce_and_assume():
    f = Formula(3, ((1, 2), (-1, 3)))
    assert f.reduce({1: True}).clauses == ((3,),)
    assert f.reduce({1: False, 2: False}).clauses == ((),)
    assert f.assume({2: False, 1: True}).clauses[-2:] == ((1,), (-2,))
