"""Literals, clauses, xor-constraints and cnf-xor formulas.

Variables are 0-based ints internally. Literals use the usual packed
encoding ``2 * var + neg`` so that negation is ``lit ^ 1``; DIMACS
(1-based, signed) conversion lives in :func:`lit_from_dimacs` and
:func:`lit_to_dimacs`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

Clause = tuple  # tuple[int, ...] of packed literals
Assignment = dict  # dict[int, bool], var -> value


def mklit(var: int, positive: bool = True) -> int:
    return 2 * var + (0 if positive else 1)


def lit_var(lit: int) -> int:
    return lit >> 1


def lit_sign(lit: int) -> bool:
    """True for a positive literal."""
    return not lit & 1


def neg(lit: int) -> int:
    return lit ^ 1


def lit_from_dimacs(d: int) -> int:
    if d == 0:
        raise ValueError("0 is not a literal")
    return mklit(abs(d) - 1, d > 0)


def lit_to_dimacs(lit: int) -> int:
    v = lit_var(lit) + 1
    return v if lit_sign(lit) else -v


def lit_value(lit: int, assignment: Mapping[int, bool]) -> Optional[bool]:
    val = assignment.get(lit >> 1)
    if val is None:
        return None
    return val if not lit & 1 else not val


def lit_str(lit: int) -> str:
    return ("" if lit_sign(lit) else "-") + str(lit_var(lit) + 1)


def normalize_clause(lits: Iterable[int]) -> Optional[Clause]:
    """Drop duplicate literals, keeping first-occurrence order.

    Returns None for a tautology (a literal together with its negation).
    """
    seen = set()
    out = []
    for lit in lits:
        if lit in seen:
            continue
        if lit ^ 1 in seen:
            return None
        seen.add(lit)
        out.append(lit)
    return tuple(out)


def mask_of(vars_: Iterable[int]) -> int:
    m = 0
    for v in vars_:
        m |= 1 << v
    return m


def bits(mask: int):
    """Yield the indices of set bits in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class XorConstraint:
    """``x1 ^ ... ^ xk == parity`` over a sorted, duplicate-free variable tuple.

    Build through :func:`normalize_xor` (or :meth:`from_mask`) unless the
    variables are already sorted and distinct.
    """

    vars: tuple
    parity: bool

    @cached_property
    def mask(self) -> int:
        # bit-packed view, used for all GF(2) arithmetic
        return mask_of(self.vars)

    @classmethod
    def from_mask(cls, mask: int, parity: bool) -> "XorConstraint":
        return cls(tuple(bits(mask)), bool(parity))

    @property
    def width(self) -> int:
        return len(self.vars)

    def is_tautology(self) -> bool:
        return not self.vars and not self.parity

    def is_contradiction(self) -> bool:
        return not self.vars and self.parity

    def __add__(self, other: "XorConstraint") -> "XorConstraint":
        return xor_add(self, other)

    def __contains__(self, var: int) -> bool:
        return bool(self.mask >> var & 1)

    def __str__(self) -> str:
        lhs = " ^ ".join(f"x{v + 1}" for v in self.vars) or "F"
        return f"{lhs} == {'T' if self.parity else 'F'}"


def normalize_xor(vars_: Iterable[int], parity: bool) -> XorConstraint:
    """Cancel variables occurring an even number of times."""
    counts = Counter(vars_)
    kept = sorted(v for v, c in counts.items() if c % 2)
    return XorConstraint(tuple(kept), bool(parity))


def xor_add(d: XorConstraint, e: XorConstraint) -> XorConstraint:
    """Linear combination: symmetric difference of variables, xor of parities."""
    return XorConstraint.from_mask(d.mask ^ e.mask, d.parity ^ e.parity)


def eval_xor(c: XorConstraint, assignment: Mapping[int, bool]) -> Optional[bool]:
    acc = False
    for v in c.vars:
        val = assignment.get(v)
        if val is None:
            return None
        acc ^= val
    return acc == c.parity


def eval_clause(clause: Sequence[int], assignment: Mapping[int, bool]) -> Optional[bool]:
    undefined = False
    for lit in clause:
        val = lit_value(lit, assignment)
        if val:
            return True
        if val is None:
            undefined = True
    return None if undefined else False


def substitute(
    c: XorConstraint, var: int, definition_vars: Iterable[int], definition_parity: bool
) -> XorConstraint:
    """Replace ``var`` in ``c`` by ``definition_vars ^ definition_parity``."""
    dmask = mask_of(definition_vars)
    if not c.mask >> var & 1:
        raise ValueError(f"variable {var} does not occur in {c}")
    if dmask >> var & 1:
        raise ValueError(f"definition of {var} mentions {var} itself")
    return XorConstraint.from_mask(
        c.mask ^ (1 << var) ^ dmask, c.parity ^ bool(definition_parity)
    )


def literal_as_xor(lit: int) -> XorConstraint:
    """``x`` is ``x == T`` and ``-x`` is ``x == F``."""
    return XorConstraint((lit_var(lit),), lit_sign(lit))


@dataclass
class CnfXorFormula:
    num_vars: int
    clauses: list = field(default_factory=list)
    xors: list = field(default_factory=list)

    def __post_init__(self):
        for cl in self.clauses:
            for lit in cl:
                if lit_var(lit) >= self.num_vars:
                    raise ValueError(f"literal {lit_str(lit)} exceeds num_vars={self.num_vars}")
        for x in self.xors:
            if x.vars and x.vars[-1] >= self.num_vars:
                raise ValueError(f"xor {x} exceeds num_vars={self.num_vars}")

    @classmethod
    def build(
        cls,
        num_vars: int,
        clauses: Iterable[Iterable[int]] = (),
        xors: Iterable[XorConstraint] = (),
    ) -> "CnfXorFormula":
        """Normalizing constructor: tautological clauses and xors are dropped.

        A contradictory xor is kept so that consumers see the formula as
        trivially unsatisfiable.
        """
        cls_out = []
        for cl in clauses:
            n = normalize_clause(cl)
            if n is not None:
                cls_out.append(n)
        xs = []
        for x in xors:
            x = normalize_xor(x.vars, x.parity)
            if x.is_contradiction():
                return cls(num_vars, cls_out, [x])
            if not x.is_tautology():
                xs.append(x)
        return cls(num_vars, cls_out, xs)

    @property
    def trivially_unsat(self) -> bool:
        return any(x.is_contradiction() for x in self.xors) or any(
            len(c) == 0 for c in self.clauses
        )

    def satisfied_by(self, assignment: Mapping[int, bool]) -> bool:
        return all(eval_clause(c, assignment) for c in self.clauses) and all(
            eval_xor(x, assignment) for x in self.xors
        )

    def xor_vars(self) -> set:
        out = set()
        for x in self.xors:
            out.update(x.vars)
        return out

    def clause_vars(self) -> set:
        return {lit_var(lit) for c in self.clauses for lit in c}
