"""Substitution of xor-internal variables.

A variable that occurs only in xor-constraints can be removed by solving
one constraint for it and substituting the result into every other
constraint. The removed variable's value is recovered afterwards from the
recorded definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .decompose import Decomposition, decompose
from .formula import CnfXorFormula, XorConstraint, bits, mask_of


@dataclass(frozen=True)
class EliminationRecord:
    """``var := definition[0] ^ ... ^ parity``, recorded in elimination order."""

    var: int
    definition: tuple
    parity: bool

    def __str__(self) -> str:
        rhs = " ^ ".join(f"x{v + 1}" for v in self.definition)
        p = "T" if self.parity else "F"
        return f"x{self.var + 1} := {rhs + ' ^ ' if rhs else ''}{p}"


def xor_internal_vars(f: CnfXorFormula) -> set:
    return f.xor_vars() - f.clause_vars()


def eliminable_vars(f: CnfXorFormula, d: Decomposition) -> set:
    """Xor-internal variables that are not cut variables of ``f.xors``."""
    return xor_internal_vars(f) - d.cut_vars


def eliminate_all(
    f: CnfXorFormula,
    allowed: Iterable[int],
    *,
    decomposition: Optional[Decomposition] = None,
    max_width: Optional[int] = None,
):
    """Eliminate the ``allowed`` variables in ascending order.

    The definition for each variable is the shortest constraint containing
    it (lowest index on ties). Passing ``decomposition`` additionally skips
    any elimination that would change the biconnected structure: the
    component the variable lives in must stay one component with the same
    attachment (cut) variables and the same singleton/non-singleton kind.
    ``max_width`` skips eliminations producing a wider constraint.

    Returns ``(formula, records)``.
    """
    allowed = set(allowed)
    bad = allowed - xor_internal_vars(f)
    if bad:
        raise ValueError(f"variables {sorted(bad)} are not xor-internal")

    # constraints as [mask, parity] slots; None once removed
    rows: list = [[x.mask, x.parity] for x in f.xors]
    occurs: dict = {}
    for i, x in enumerate(f.xors):
        for v in x.vars:
            occurs.setdefault(v, set()).add(i)

    comp_of = None
    comp_members: list = []
    attach: list = []
    if decomposition is not None:
        comp_of = list(decomposition.component_of)
        comp_members = [set(c) for c in decomposition.components]
        cut = decomposition.cut_vars
        for c in decomposition.components:
            vs = set()
            for i in c:
                vs.update(f.xors[i].vars)
            attach.append(vs & cut)

    records = []
    for v in sorted(allowed):
        holders = occurs.get(v)
        if not holders:
            continue
        src = min(holders, key=lambda i: (rows[i][0].bit_count(), i))
        smask, spar = rows[src]
        others = [i for i in sorted(holders) if i != src]
        new = {i: (rows[i][0] ^ smask, rows[i][1] ^ spar) for i in others}

        if max_width is not None and any(m.bit_count() > max_width for m, _ in new.values()):
            continue
        if comp_of is not None:
            cid = comp_of[src]
            members = comp_members[cid]
            after = [
                XorConstraint.from_mask(*new[i]) if i in new else XorConstraint.from_mask(*rows[i])
                for i in sorted(members)
                if i != src
            ]
            after = [x for x in after if x.vars]
            if not _same_block(after, attach[cid], len(members) > 1):
                continue
            members.discard(src)

        rows[src] = None
        for u in bits(smask):
            occurs[u].discard(src)
        for i, (m, p) in new.items():
            old = rows[i][0]
            for u in bits(old & ~m):
                occurs[u].discard(i)
            for u in bits(m & ~old):
                occurs.setdefault(u, set()).add(i)
            rows[i] = [m, p]
        records.append(EliminationRecord(v, tuple(bits(smask & ~(1 << v))), bool(spar)))

    xors = []
    for slot in rows:
        if slot is None:
            continue
        x = XorConstraint.from_mask(slot[0], slot[1])
        if x.is_tautology():
            continue
        if x.is_contradiction():
            xors = [x]
            break
        xors.append(x)
    return CnfXorFormula(f.num_vars, list(f.clauses), xors), records


def _same_block(xors: Sequence[XorConstraint], attachments: set, was_multi: bool) -> bool:
    if not xors:
        return False
    if any(x.is_contradiction() for x in xors):
        # unsatisfiable either way; let the solver report it
        return True
    d = decompose(xors)
    if d.num_components != 1:
        return False
    if (len(xors) > 1) != was_multi:
        return False
    vs = set()
    for x in xors:
        vs.update(x.vars)
    if not attachments <= vs:
        return False
    return True


def reconstruct_model(records: Sequence[EliminationRecord], model: Mapping[int, bool]) -> dict:
    """Replay ``records`` last to first, evaluating each eliminated variable."""
    out = dict(model)
    for rec in reversed(records):
        acc = rec.parity
        for u in rec.definition:
            val = out.get(u)
            if val is None:
                raise KeyError(f"x{u + 1} unassigned while reconstructing x{rec.var + 1}")
            acc ^= val
        out[rec.var] = acc
    return out


def definition_mask(rec: EliminationRecord) -> int:
    return mask_of(rec.definition)
