"""Incremental Gauss-Jordan elimination over GF(2).

A :class:`Tableau` keeps a conjunction of xor-constraints in reduced row
echelon form: every row has one *basic* variable that occurs in no other
row. Rows are Python ints used as bitsets over local column indices, and a
second, column-major copy (``cols[c]`` is the set of rows containing column
``c``) makes pivoting and occurrence lookups cheap.

:class:`AssignedTableau` layers a partial assignment on top. Assumptions on
basic variables first pivot the variable out of the basis, so every row
always has its basic variable last to be assigned; a row whose unassigned
counter drops to one therefore implies its basic variable. Backtracking only
rewinds the assignment and the counters, the matrix is left as is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .formula import XorConstraint, bits, lit_sign, lit_var, mklit

Explanation = tuple  # clause of packed literals; implied literal first


class XorConflict(Exception):
    """The xor-constraints given to :meth:`Tableau.build` are contradictory."""

    def __init__(self, index: int):
        super().__init__(f"xor-constraint #{index} contradicts the ones before it")
        self.index = index


@dataclass(frozen=True)
class Equation:
    basic: int
    rhs: tuple
    parity: bool

    def as_xor(self) -> XorConstraint:
        return XorConstraint(tuple(sorted((self.basic,) + self.rhs)), self.parity)

    def __str__(self) -> str:
        rhs = " ^ ".join(f"x{v + 1}" for v in self.rhs)
        p = "T" if self.parity else "F"
        return f"x{self.basic + 1} := {rhs + ' ^ ' if rhs else ''}{p}"


@dataclass
class DeductionResult:
    """Outcome of ``init``/``assume``: implied literals with explanations, or a conflict."""

    implied: list = field(default_factory=list)
    conflict: Optional[Explanation] = None

    @property
    def sat(self) -> bool:
        return self.conflict is None

    @property
    def status(self) -> str:
        return "sat" if self.conflict is None else "unsat"

    @property
    def literals(self) -> list:
        return [lit for lit, _ in self.implied]


class Tableau:
    def __init__(self, variables: Iterable[int]):
        self.vars = sorted(set(variables))
        self.index = {v: i for i, v in enumerate(self.vars)}
        n = len(self.vars)
        self.rows: list = []
        self.parity: list = []
        self.basic: list = []
        self.basic_row = [-1] * n
        self.cols = [0] * n
        self.basic_mask = 0

    @classmethod
    def build(cls, xors: Sequence[XorConstraint], variables: Iterable[int] = ()) -> "Tableau":
        """Insert the constraints one by one; raises :class:`XorConflict` if unsatisfiable."""
        vs = set(variables)
        for x in xors:
            vs.update(x.vars)
        t = cls(vs)
        for i, x in enumerate(xors):
            if not t.insert(x):
                raise XorConflict(i)
        return t

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def num_cols(self) -> int:
        return len(self.vars)

    def local_mask(self, x: XorConstraint) -> int:
        m = 0
        for v in x.vars:
            m |= 1 << self.index[v]
        return m

    def insert(self, x: XorConstraint) -> bool:
        """Add one constraint. False if it contradicts the tableau."""
        m = self.local_mask(x)
        p = x.parity
        for c in bits(m & self.basic_mask):
            r = self.basic_row[c]
            m ^= self.rows[r]
            p ^= self.parity[r]
        if not m:
            return not p
        pivot = (m & -m).bit_length() - 1  # lowest-indexed variable
        affected = self.cols[pivot]
        for r in bits(affected):
            self.rows[r] ^= m
            self.parity[r] ^= p
        r_new = len(self.rows)
        bit_new = 1 << r_new
        for c in bits(m):
            self.cols[c] ^= affected
            self.cols[c] |= bit_new
        self.rows.append(m)
        self.parity.append(p)
        self.basic.append(pivot)
        self.basic_row[pivot] = r_new
        self.basic_mask |= 1 << pivot
        return True

    def pivot(self, x: int, y: int) -> int:
        """Swap on local columns; returns the bitset of rows rewritten besides x's own."""
        r = self.basic_row[x]
        if r < 0:
            raise ValueError(f"x{self.vars[x] + 1} is not basic")
        row = self.rows[r]
        if y == x or not row >> y & 1:
            raise ValueError(f"x{self.vars[y] + 1} is not on the right-hand side of x{self.vars[x] + 1}")
        affected = self.cols[y] & ~(1 << r)
        p = self.parity[r]
        for r2 in bits(affected):
            self.rows[r2] ^= row
            self.parity[r2] ^= p
        for c in bits(row):
            self.cols[c] ^= affected
        self.basic[r] = y
        self.basic_row[y] = r
        self.basic_row[x] = -1
        self.basic_mask ^= (1 << x) | (1 << y)
        return affected

    def swap(self, x: int, y: int) -> "Tableau":
        """Make basic variable ``x`` non-basic in favour of ``y`` (global ids), in place."""
        self.pivot(self.index[x], self.index[y])
        return self

    def is_basic(self, var: int) -> bool:
        i = self.index.get(var)
        return i is not None and self.basic_row[i] >= 0

    def equation(self, r: int) -> Equation:
        b = self.basic[r]
        rhs = tuple(self.vars[c] for c in bits(self.rows[r] & ~(1 << b)))
        return Equation(self.vars[b], rhs, self.parity[r])

    def equations(self) -> list:
        return [self.equation(r) for r in range(len(self.rows))]

    def as_dict(self) -> dict:
        """``{basic: (rhs, parity)}``, convenient for order-insensitive comparison."""
        return {e.basic: (e.rhs, e.parity) for e in self.equations()}

    def occurrences(self, var: int) -> int:
        return self.cols[self.index[var]].bit_count()

    def check_coherent(self) -> None:
        """Assert the row and column views agree and the tableau is in RREF."""
        cols = [0] * len(self.vars)
        for r, row in enumerate(self.rows):
            for c in bits(row):
                cols[c] |= 1 << r
        assert cols == self.cols, "row/column views disagree"
        for r, b in enumerate(self.basic):
            assert self.basic_row[b] == r
            assert self.cols[b] == 1 << r, "basic variable occurs in another row"
        assert sum(1 for br in self.basic_row if br >= 0) == len(self.rows)

    def __str__(self) -> str:
        return "{" + ", ".join(str(e) for e in self.equations()) + "}"


def build_tableau(xors: Sequence[XorConstraint]) -> Tableau:
    return Tableau.build(xors)


def swap(t: Tableau, x: int, y: int) -> Tableau:
    return t.swap(x, y)


class AssignedTableau:
    """A tableau plus a partial assignment with a chronological trail.

    ``swap_policy`` picks the new basic variable when an assumed variable is
    basic: ``"fewest"`` takes the unassigned right-hand-side variable with
    the fewest occurrences (ties to the lowest index), ``"lowest"`` just the
    lowest index.
    """

    def __init__(self, tableau: Tableau, swap_policy: str = "fewest"):
        if swap_policy not in ("fewest", "lowest"):
            raise ValueError(f"unknown swap policy {swap_policy!r}")
        self.tableau = tableau
        self.swap_policy = swap_policy
        n = tableau.num_cols
        self.all_mask = (1 << n) - 1
        self.assigned_mask = 0
        self.value_mask = 0
        self.count = [row.bit_count() for row in tableau.rows]
        self.trail: list = []  # local column indices, in assignment order
        self.reason: dict = {}  # local column -> Explanation
        self.num_swaps = 0

    # -- queries --------------------------------------------------------

    def value(self, var: int) -> Optional[bool]:
        c = self.tableau.index.get(var)
        if c is None or not self.assigned_mask >> c & 1:
            return None
        return bool(self.value_mask >> c & 1)

    def assignment(self) -> dict:
        t = self.tableau
        return {t.vars[c]: bool(self.value_mask >> c & 1) for c in bits(self.assigned_mask)}

    def assigned_literals(self) -> set:
        t = self.tableau
        return {mklit(t.vars[c], bool(self.value_mask >> c & 1)) for c in bits(self.assigned_mask)}

    def mark(self) -> int:
        return len(self.trail)

    def explain(self, lit: int) -> Explanation:
        c = self.tableau.index.get(lit_var(lit))
        if c is None or c not in self.reason or self.value(lit_var(lit)) != lit_sign(lit):
            raise KeyError(f"no recorded deduction for literal {lit}")
        return self.reason[c]

    def is_consistent(self) -> bool:
        t = self.tableau
        for r, row in enumerate(t.rows):
            if row & ~self.assigned_mask == 0:
                if (row & self.value_mask).bit_count() & 1 != t.parity[r]:
                    return False
        return True

    def is_saturated(self) -> bool:
        t = self.tableau
        for r, row in enumerate(t.rows):
            b = t.basic[r]
            basic_assigned = bool(self.assigned_mask >> b & 1)
            rhs_assigned = (row & ~(1 << b)) & ~self.assigned_mask == 0
            if basic_assigned != rhs_assigned:
                return False
        return True

    def check_counters(self) -> None:
        unassigned = self.all_mask & ~self.assigned_mask
        fresh = [(row & unassigned).bit_count() for row in self.tableau.rows]
        assert fresh == self.count, "unassigned counters out of sync"

    # -- operations -----------------------------------------------------

    def init(self) -> DeductionResult:
        """Assign the basic variable of every constant row."""
        res = DeductionResult()
        t = self.tableau
        for r, row in enumerate(t.rows):
            b = t.basic[r]
            if row == 1 << b and not self.assigned_mask >> b & 1:
                lit = mklit(t.vars[b], t.parity[r])
                self._set(b, t.parity[r], (lit,))
                res.implied.append((lit, (lit,)))
        return res

    def assume(self, lit: int) -> DeductionResult:
        t = self.tableau
        var = lit_var(lit)
        val = lit_sign(lit)
        x = t.index.get(var)
        if x is None:
            return DeductionResult()
        if self.assigned_mask >> x & 1:
            if bool(self.value_mask >> x & 1) == val:
                return DeductionResult()
            why = self.reason.get(x)
            if why is None:
                # both values came in as assumptions
                why = (lit ^ 1, lit)
            return DeductionResult(conflict=why)

        r = t.basic_row[x]
        if r >= 0:
            cand = t.rows[r] & ~(1 << x) & ~self.assigned_mask
            y = self._choose_partner(cand)
            affected = t.pivot(x, y)
            self.num_swaps += 1
            unassigned = self.all_mask & ~self.assigned_mask
            for r2 in bits(affected):
                self.count[r2] = (t.rows[r2] & unassigned).bit_count()

        self._set(x, val, None)
        res = DeductionResult()
        for r in bits(t.cols[x]):
            if self.count[r] != 1:
                continue
            b = t.basic[r]
            rhs = t.rows[r] & ~(1 << b)
            vb = t.parity[r] ^ bool((rhs & self.value_mask).bit_count() & 1)
            implied = mklit(t.vars[b], vb)
            why = [implied]
            for c in bits(rhs):
                why.append(mklit(t.vars[c], not self.value_mask >> c & 1))
            why = tuple(why)
            self._set(b, vb, why)
            res.implied.append((implied, why))
        return res

    def backtrack_to(self, mark: int) -> None:
        t = self.tableau
        while len(self.trail) > mark:
            c = self.trail.pop()
            bit = 1 << c
            self.assigned_mask &= ~bit
            self.value_mask &= ~bit
            self.reason.pop(c, None)
            for r in bits(t.cols[c]):
                self.count[r] += 1

    def implied_binary_xors(self) -> set:
        """Every ``y ^ z == p`` entailed by the constraints and the assignment."""
        t = self.tableau
        out = set()
        assigned = list(bits(self.assigned_mask))
        for i, cy in enumerate(assigned):
            vy = bool(self.value_mask >> cy & 1)
            for cz in assigned[i + 1:]:
                out.add(_bin(t.vars[cy], t.vars[cz], vy ^ bool(self.value_mask >> cz & 1)))
        groups: dict = {}
        for r, row in enumerate(t.rows):
            b = t.basic[r]
            if self.assigned_mask >> b & 1:
                continue
            rhs = row & ~(1 << b)
            free = rhs & ~self.assigned_mask
            p = t.parity[r] ^ bool((rhs & self.value_mask).bit_count() & 1)
            if free & (free - 1) == 0:
                c = free.bit_length() - 1
                out.add(_bin(t.vars[b], t.vars[c], p))
            groups.setdefault(free, []).append((t.vars[b], p))
        for members in groups.values():
            for i, (y, py) in enumerate(members):
                for z, pz in members[i + 1:]:
                    out.add(_bin(y, z, py ^ pz))
        return out

    # -- internals ------------------------------------------------------

    def _choose_partner(self, cand: int) -> int:
        if self.swap_policy == "lowest":
            return (cand & -cand).bit_length() - 1
        cols = self.tableau.cols
        return min(bits(cand), key=lambda c: (cols[c].bit_count(), c))

    def _set(self, c: int, val: bool, why: Optional[Explanation]) -> None:
        bit = 1 << c
        self.assigned_mask |= bit
        if val:
            self.value_mask |= bit
        self.trail.append(c)
        if why is not None:
            self.reason[c] = why
        for r in bits(self.tableau.cols[c]):
            self.count[r] -= 1


def _bin(y: int, z: int, p: bool) -> XorConstraint:
    return XorConstraint((y, z) if y < z else (z, y), bool(p))


def init_assigned(t: Tableau, swap_policy: str = "fewest"):
    """Wrap ``t`` in an :class:`AssignedTableau`; returns it with the initial deductions."""
    at = AssignedTableau(t, swap_policy)
    return at, at.init()
