"""Preprocessing pipeline run before search.

1. fix unary clauses and unit xors, to fixpoint;
2. substitute away binary xors ``x ^ y == p`` (``y := x ^ p``);
3. decompose the xor part;
4. eliminate xor-internal, non-cut variables.

Every removed variable gets an :class:`EliminationRecord`, so a model of
the result extends to a model of the input via
:func:`~xorsat.eliminate.reconstruct_model`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .decompose import Decomposition, decompose, decomposition_stats
from .eliminate import EliminationRecord, eliminable_vars, eliminate_all
from .formula import (
    CnfXorFormula,
    lit_sign,
    lit_var,
    mklit,
    normalize_clause,
    normalize_xor,
)


@dataclass
class PreprocessResult:
    formula: Optional[CnfXorFormula]
    records: list = field(default_factory=list)
    unsat: bool = False
    decomposition: Optional[Decomposition] = None
    stats: dict = field(default_factory=dict)


class _Unsat(Exception):
    pass


def _find(parent: dict, v: int):
    """Root of ``v`` and the parity between ``v`` and that root."""
    p = False
    path = []
    while v in parent:
        path.append(v)
        nxt, q = parent[v]
        p ^= q
        v = nxt
    # path compression
    acc = p
    for u in path:
        _, q = parent[u]
        parent[u] = (v, acc)
        acc ^= q
    return v, p


def _rewrite(clauses, xors, mapping):
    """Apply ``var -> (rep or None, parity)`` to every clause and xor."""
    new_clauses = []
    for cl in clauses:
        out = []
        sat = False
        for lit in cl:
            m = mapping.get(lit_var(lit))
            if m is None:
                out.append(lit)
                continue
            rep, p = m
            if rep is None:
                if lit_sign(lit) == p:
                    sat = True
                    break
                continue
            out.append(mklit(rep, lit_sign(lit) ^ p))
        if sat:
            continue
        n = normalize_clause(out)
        if n is None:
            continue
        if not n:
            raise _Unsat()
        new_clauses.append(n)
    new_xors = []
    for x in xors:
        vs = []
        par = x.parity
        for v in x.vars:
            m = mapping.get(v)
            if m is None:
                vs.append(v)
                continue
            rep, p = m
            par ^= p
            if rep is not None:
                vs.append(rep)
        y = normalize_xor(vs, par)
        if y.is_contradiction():
            raise _Unsat()
        if not y.is_tautology():
            new_xors.append(y)
    return new_clauses, new_xors


def simplify(f: CnfXorFormula):
    """Steps 1 and 2. Returns ``(formula, records, counts)``; raises on refutation."""
    clauses = [tuple(c) for c in f.clauses]
    xors = list(f.xors)
    records = []
    units = binaries = 0
    if any(not c for c in clauses) or any(x.is_contradiction() for x in xors):
        raise _Unsat()
    while True:
        fixed = {}
        for cl in clauses:
            if len(cl) == 1:
                v, val = lit_var(cl[0]), lit_sign(cl[0])
                if fixed.setdefault(v, val) != val:
                    raise _Unsat()
        for x in xors:
            if x.width == 1:
                v = x.vars[0]
                if fixed.setdefault(v, x.parity) != x.parity:
                    raise _Unsat()
        if fixed:
            mapping = {v: (None, val) for v, val in fixed.items()}
            for v in sorted(fixed):
                records.append(EliminationRecord(v, (), fixed[v]))
            units += len(fixed)
            clauses, xors = _rewrite(clauses, xors, mapping)
            continue
        parent: dict = {}
        for x in xors:
            if x.width != 2:
                continue
            a, b = x.vars
            ra, pa = _find(parent, a)
            rb, pb = _find(parent, b)
            if ra == rb:
                if pa ^ pb != x.parity:
                    raise _Unsat()
                continue
            # keep the smaller index as representative
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            parent[hi] = (lo, pa ^ pb ^ x.parity)
        if not parent:
            break
        mapping = {}
        for v in sorted(parent):
            root, p = _find(parent, v)
            mapping[v] = (root, p)
            records.append(EliminationRecord(v, (root,), p))
        binaries += len(mapping)
        clauses, xors = _rewrite(clauses, xors, mapping)
    out = CnfXorFormula(f.num_vars, clauses, xors)
    return out, records, {"fixed_units": units, "substituted_binaries": binaries}


def preprocess(f: CnfXorFormula, *, eliminate: bool = True, max_width: Optional[int] = None) -> PreprocessResult:
    try:
        g, records, stats = simplify(f)
    except _Unsat:
        return PreprocessResult(None, unsat=True, stats={"refuted_in_preprocessing": 1})
    d = decompose(g.xors)
    ds = decomposition_stats(g.xors, d)
    stats.update(
        xor_constraints=ds.constraints,
        singleton_constraints=ds.singleton_constraints,
        components=ds.components,
        elements_monolithic=ds.monolithic_elements,
        elements_decomposed=ds.nonsingleton_elements,
    )
    if eliminate and g.xors:
        allowed = eliminable_vars(g, d)
        g, elim = eliminate_all(g, allowed, decomposition=d, max_width=max_width)
        records.extend(elim)
        stats["eliminated"] = len(elim)
        if any(x.is_contradiction() for x in g.xors):
            return PreprocessResult(None, records, unsat=True, stats=stats)
        d = decompose(g.xors)
        stats["elements_eliminated"] = decomposition_stats(g.xors, d).nonsingleton_elements
    else:
        stats["eliminated"] = 0
        stats["elements_eliminated"] = stats["elements_decomposed"]
    return PreprocessResult(g, records, decomposition=d, stats=stats)
