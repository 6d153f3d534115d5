import pytest
from hypothesis import given, strategies as st

from gen import X, v
from xorsat.formula import (
    CnfXorFormula,
    XorConstraint,
    eval_clause,
    eval_xor,
    lit_from_dimacs,
    lit_to_dimacs,
    mklit,
    neg,
    normalize_clause,
    normalize_xor,
    substitute,
    xor_add,
)


def test_literal_encoding():
    assert mklit(0) == 0 and mklit(0, False) == 1
    assert neg(neg(mklit(5))) == mklit(5)
    assert lit_from_dimacs(-3) == mklit(2, False)


@given(st.integers(-1000, 1000).filter(bool))
def test_dimacs_round_trip(d):
    assert lit_to_dimacs(lit_from_dimacs(d)) == d


def test_normalize_xor_cancels_pairs():
    x = normalize_xor([3, 1, 3, 2], True)
    assert x == XorConstraint((1, 2), True)
    assert normalize_xor([4, 4], False).is_tautology()
    assert normalize_xor([4, 4], True).is_contradiction()


def test_normalize_clause():
    assert normalize_clause([mklit(1), mklit(0), mklit(1)]) == (mklit(1), mklit(0))
    assert normalize_clause([mklit(1), mklit(1, False)]) is None


def test_substitute_gives_reduced_constraint():
    # a ^ b ^ d ^ e = 1 with a := c ^ e ^ 1
    got = substitute(X("abde", True), v("a"), [v("c"), v("e")], True)
    assert got == X("bcd", False)


def test_substitute_precondition():
    with pytest.raises(ValueError):
        substitute(X("bc", True), v("a"), [v("c")], True)


def test_xor_add_and_eval():
    s = xor_add(X("abc", True), X("bc", False))
    assert s == X("a", True)
    assert eval_xor(X("ab", True), {v("a"): True, v("b"): False}) is True
    assert eval_xor(X("ab", True), {v("a"): True}) is None
    assert eval_clause((mklit(0), mklit(1, False)), {0: False, 1: True}) is False


def test_formula_validation():
    with pytest.raises(ValueError):
        CnfXorFormula(2, [(mklit(3),)], [])
    f = CnfXorFormula.build(3, [[mklit(0), mklit(0, False)]], [X("aa", False), X("ab", True)])
    assert f.clauses == [] and f.xors == [X("ab", True)]
    assert CnfXorFormula.build(2, [], [X("aa", True)]).trivially_unsat
