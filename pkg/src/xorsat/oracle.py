"""Brute-force and plain-GF(2) reference checks.

Nothing here touches the tableau code; tests compare the two routes.
Model enumeration is vectorised with numpy over all ``2**num_vars``
assignments, encoded as integers with bit ``v`` holding the value of
variable ``v``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .formula import (
    CnfXorFormula,
    XorConstraint,
    lit_sign,
    lit_var,
    literal_as_xor,
    mklit,
    neg,
)

MAX_VARS = 24


class OracleLimitError(ValueError):
    pass


class Unsatisfiable:
    """Marker returned by the implication oracles for unsatisfiable input."""

    def __repr__(self) -> str:
        return "UNSAT"

    def __bool__(self) -> bool:
        return False


UNSAT = Unsatisfiable()


def _model_codes(f: CnfXorFormula, assumptions: Iterable[int] = ()) -> np.ndarray:
    n = f.num_vars
    if n > MAX_VARS:
        raise OracleLimitError(f"oracle refuses {n} variables (limit {MAX_VARS})")
    codes = np.arange(1 << n, dtype=np.uint32)
    for lit in assumptions:
        bit = (codes >> np.uint32(lit_var(lit))) & np.uint32(1)
        codes = codes[bit == (1 if lit_sign(lit) else 0)]
    for x in f.xors:
        m = np.uint32(sum(1 << v for v in x.vars))
        par = np.bitwise_count(codes & m) & np.uint8(1)
        codes = codes[par == (1 if x.parity else 0)]
        if not codes.size:
            return codes
    for cl in f.clauses:
        pos = np.uint32(sum(1 << lit_var(l) for l in cl if lit_sign(l)))
        negm = np.uint32(sum(1 << lit_var(l) for l in cl if not lit_sign(l)))
        ok = ((codes & pos) != 0) | ((~codes & negm) != 0)
        codes = codes[ok]
        if not codes.size:
            return codes
    return codes


def enumerate_models(f: CnfXorFormula, assumptions: Sequence[int] = ()) -> list:
    """All satisfying total assignments, in lexicographic order of (x0, x1, ...)."""
    codes = _model_codes(f, assumptions)
    n = f.num_vars
    models = [{v: bool(int(c) >> v & 1) for v in range(n)} for c in codes]
    models.sort(key=lambda m: [m[v] for v in range(n)])
    return models


def count_models(f: CnfXorFormula, assumptions: Sequence[int] = ()) -> int:
    return int(_model_codes(f, assumptions).size)


def is_satisfiable(f: CnfXorFormula, assumptions: Sequence[int] = ()) -> bool:
    return _model_codes(f, assumptions).size > 0


def implied_literals_bf(f: CnfXorFormula, assumptions: Sequence[int] = ()):
    """Literals true in every model, or UNSAT.

    Only variables occurring in the formula or the assumptions are reported.
    """
    codes = _model_codes(f, assumptions)
    if not codes.size:
        return UNSAT
    all_and = int(np.bitwise_and.reduce(codes))
    any_or = int(np.bitwise_or.reduce(codes))
    out = set()
    for v in _mentioned(f, assumptions):
        if all_and >> v & 1:
            out.add(mklit(v, True))
        elif not any_or >> v & 1:
            out.add(mklit(v, False))
    return out


def implied_binary_bf(f: CnfXorFormula, assumptions: Sequence[int] = ()):
    """All ``y ^ z == p`` (y < z) holding in every model, or UNSAT."""
    codes = _model_codes(f, assumptions)
    if not codes.size:
        return UNSAT
    vs = sorted(_mentioned(f, assumptions))
    cols = {v: (codes >> np.uint32(v)) & np.uint32(1) for v in vs}
    out = set()
    for i, y in enumerate(vs):
        for z in vs[i + 1:]:
            s = cols[y] ^ cols[z]
            if np.all(s == s[0]):
                out.add(XorConstraint((y, z), bool(s[0])))
    return out


def _mentioned(f: CnfXorFormula, assumptions: Iterable[int]) -> set:
    vs = f.xor_vars() | f.clause_vars()
    vs.update(lit_var(l) for l in assumptions)
    return vs


def gf2_implies(xors: Sequence[XorConstraint], e: XorConstraint) -> bool:
    """Does the conjunction of ``xors`` entail ``e``?

    True iff ``e`` is a sum of some of the xors, or some sum of them is the
    contradiction ``F == T``. Plain forward elimination on
    ``(mask << 1) | parity`` integers keyed by leading bit.
    """
    basis = {}

    def reduce(row: int) -> int:
        while row > 1:
            top = row.bit_length() - 1
            piv = basis.get(top)
            if piv is None:
                return row
            row ^= piv
        return row

    for x in xors:
        row = reduce(_pack(x))
        if row == 1:
            return True  # inconsistent system entails everything
        if row:
            basis[row.bit_length() - 1] = row
    return reduce(_pack(e)) == 0


def _pack(x: XorConstraint) -> int:
    row = int(x.parity)
    for v in x.vars:
        row ^= 1 << (v + 1)
    return row


def clause_is_consequence(xors: Sequence[XorConstraint], clause: Iterable[int]) -> bool:
    """``xors |= clause``, i.e. xors plus the negated clause literals is unsatisfiable."""
    units = [literal_as_xor(neg(l)) for l in clause]
    return gf2_implies(list(xors) + units, XorConstraint((), True))


def implication_holds(
    xors: Sequence[XorConstraint], antecedents: Iterable[int], consequent: int
) -> bool:
    """``xors & antecedents |= consequent`` via :func:`gf2_implies`."""
    units = [literal_as_xor(l) for l in antecedents]
    return gf2_implies(list(xors) + units, literal_as_xor(consequent))
