import random

import pytest

from gen import L, X, random_cnf_xor
from test_decompose import EX6
from xorsat import oracle
from xorsat.eliminate import reconstruct_model
from xorsat.formula import CnfXorFormula
from xorsat.preprocess import preprocess, simplify


def test_units_and_binaries():
    f = CnfXorFormula(4, [(L("a"),), (L("-a"), L("b"), L("c"))], [X("bd", True), X("cd", False), X("abcd", True)])
    g, recs, counts = simplify(f)
    assert counts["fixed_units"] >= 1 and counts["substituted_binaries"] >= 1
    for m in oracle.enumerate_models(g):
        keep = {u: b for u, b in m.items() if u not in {r.var for r in recs}}
        assert f.satisfied_by(reconstruct_model(recs, keep))


def test_refutation():
    f = CnfXorFormula(2, [], [X("ab", True), X("ab", False)])
    assert preprocess(f).unsat
    f = CnfXorFormula(2, [(L("a"),)], [X("a", False)])
    assert preprocess(f).unsat


def test_stats_fields():
    pre = preprocess(CnfXorFormula(15, [], EX6))
    s = pre.stats
    # c ^ e = 1 is substituted away before decomposing
    assert s["xor_constraints"] == 8 and s["components"] == 5 and s["singleton_constraints"] == 3
    assert s["elements_decomposed"] <= s["elements_monolithic"]
    assert s["elements_eliminated"] <= s["elements_decomposed"]


@pytest.mark.parametrize("seed", range(50))
def test_equisatisfiable_and_structure(seed):
    rng = random.Random(seed)
    f = random_cnf_xor(rng, nvars=(4, 16))
    pre = preprocess(f)
    assert (not pre.unsat) == oracle.is_satisfiable(f)
    if pre.unsat:
        return
    g = pre.formula
    assert oracle.is_satisfiable(g)
    gone = {r.var for r in pre.records}
    for m in oracle.enumerate_models(g)[:50]:
        assert f.satisfied_by(reconstruct_model(pre.records, {u: b for u, b in m.items() if u not in gone}))
