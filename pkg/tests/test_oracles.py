import pytest
from hypothesis import given

from fmsat.cnf import Formula
from fmsat.oracles import (
    Backbone,
    OracleLimitError,
    all_models,
    backbone_brute,
    brute_force_count,
    brute_force_solve,
)
from helpers import formulas, naive_models


def test_solve_examples():
    assert brute_force_solve(Formula(1, ((1,), (-1,)))) is None
    assert brute_force_solve(Formula(0, ())) == {}
    m = brute_force_solve(Formula(2, ((1, 2),)))
    assert m is not None and (m[1] or m[2])


def test_count_examples():
    assert brute_force_count(Formula(3, ())) == 8
    assert brute_force_count(Formula(1, ((1,),)), [1]) == 1
    assert brute_force_count(Formula(2, ((1, 2),)), [1, 2]) == 3


def test_projection_count():
    # (a | b) over {a}: both values extend
    assert brute_force_count(Formula(3, ((1, 2),)), [1]) == 2
    assert brute_force_count(Formula(3, ((1,), (2, 3))), [1, 2]) == 2


def test_backbone_examples():
    assert backbone_brute(Formula(2, ((1,), (1, 2)))) == {1: Backbone.FORCED_TRUE, 2: Backbone.FREE}
    assert backbone_brute(Formula(2, ((1, 2),))) == {1: Backbone.FREE, 2: Backbone.FREE}
    assert backbone_brute(Formula(1, ((1,), (-1,)))) is None


def test_limits():
    with pytest.raises(OracleLimitError):
        brute_force_solve(Formula(31, ()))
    with pytest.raises(OracleLimitError):
        brute_force_count(Formula(28, ()), range(1, 27))


@given(formulas(max_vars=7))
def test_oracles_agree_with_naive_enumeration(f):
    models = naive_models(f)
    assert brute_force_count(f) == len(models)
    assert (brute_force_solve(f) is not None) == bool(models)
    assert len(all_models(f)) == len(models)


@given(formulas(max_vars=7))
def test_backbone_matches_opposite_unit_counts(f):
    bb = backbone_brute(f)
    if brute_force_count(f) == 0:
        assert bb is None
        return
    for v, status in bb.items():
        forced = brute_force_count(f.with_clauses([(-v,)])) == 0 or brute_force_count(f.with_clauses([(v,)])) == 0
        assert forced == (status is not Backbone.FREE)
