"""The xor-reasoning module seen by the CDCL master.

:class:`XorEngine` owns one reasoner per biconnected component (a
Gauss-Jordan :class:`~xorsat.tableau.AssignedTableau`), plus a single
:class:`UnitXorPropagator` shared by all singleton components, which unit
propagation already handles completely. Values of cut variables are relayed
between reasoners inside the engine until nothing new is derived.

All literals the engine derives are reported in derivation order, each with
a clause whose other literals are false under earlier engine literals, so
the master can enqueue them as they come.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .decompose import Decomposition
from .formula import XorConstraint, lit_sign, lit_var, mklit, neg
from .tableau import AssignedTableau, DeductionResult, Tableau, XorConflict

BACKENDS = ("gj", "gj-conflicts-only", "unitprop")


class UnitXorPropagator:
    """Counter-based unit propagation over a set of xor-constraints.

    Same interface as :class:`AssignedTableau`, so the engine can mix them.
    """

    def __init__(self, xors: Sequence[XorConstraint]):
        self.xors = list(xors)
        self.occ: dict = {}
        for i, x in enumerate(self.xors):
            for v in x.vars:
                self.occ.setdefault(v, []).append(i)
        self.count = [x.width for x in self.xors]
        self.par = [False] * len(self.xors)
        self.values: dict = {}
        self.trail: list = []
        self.reason: dict = {}

    def value(self, var: int) -> Optional[bool]:
        return self.values.get(var)

    def mark(self) -> int:
        return len(self.trail)

    def assigned_literals(self) -> set:
        return {mklit(v, b) for v, b in self.values.items()}

    def explain(self, lit: int):
        return self.reason[lit_var(lit)]

    def check_counters(self) -> None:
        for i, x in enumerate(self.xors):
            assert self.count[i] == sum(1 for v in x.vars if v not in self.values)
            assert self.par[i] == (sum(self.values[v] for v in x.vars if v in self.values) % 2 == 1)

    def init(self) -> DeductionResult:
        res = DeductionResult()
        queue = []
        for i, x in enumerate(self.xors):
            if x.width == 1 and x.vars[0] not in self.values:
                v = x.vars[0]
                lit = mklit(v, x.parity)
                self._set(v, x.parity, (lit,))
                res.implied.append((lit, (lit,)))
                queue.append(v)
            elif x.width == 1 and self.values[x.vars[0]] != x.parity:
                res.conflict = (mklit(x.vars[0], x.parity),)
                return res
        self._propagate(queue, res)
        return res

    def assume(self, lit: int) -> DeductionResult:
        v = lit_var(lit)
        val = lit_sign(lit)
        if v not in self.occ:
            return DeductionResult()
        cur = self.values.get(v)
        if cur is not None:
            if cur == val:
                return DeductionResult()
            return DeductionResult(conflict=self.reason.get(v, (neg(lit), lit)))
        self._set(v, val, None)
        res = DeductionResult()
        self._propagate([v], res)
        return res

    def backtrack_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            v = self.trail.pop()
            val = self.values.pop(v)
            self.reason.pop(v, None)
            for i in self.occ[v]:
                self.count[i] += 1
                self.par[i] ^= val

    def _set(self, v: int, val: bool, why) -> None:
        self.values[v] = val
        self.trail.append(v)
        if why is not None:
            self.reason[v] = why
        for i in self.occ[v]:
            self.count[i] -= 1
            self.par[i] ^= val

    def _propagate(self, queue: list, res: DeductionResult) -> None:
        q = deque(queue)
        while q:
            v = q.popleft()
            for i in self.occ[v]:
                c = self.count[i]
                if c > 1:
                    continue
                x = self.xors[i]
                if c == 0:
                    if self.par[i] != x.parity:
                        res.conflict = tuple(mklit(u, not self.values[u]) for u in x.vars)
                        return
                    continue
                u = next(w for w in x.vars if w not in self.values)
                val = x.parity ^ self.par[i]
                lit = mklit(u, val)
                why = (lit,) + tuple(mklit(w, not self.values[w]) for w in x.vars if w != u)
                self._set(u, val, why)
                res.implied.append((lit, why))
                q.append(u)


@dataclass
class EngineStats:
    assumes: int = 0
    implied: int = 0
    conflicts: int = 0
    swaps: int = 0


def resolve(c1, c2, var: int) -> tuple:
    out = []
    seen = set()
    for lit in list(c1) + list(c2):
        if lit_var(lit) == var or lit in seen:
            continue
        seen.add(lit)
        out.append(lit)
    return tuple(out)


class XorEngine:
    """Multiplexes ``init``/``assume``/``backtrack`` over per-component reasoners.

    ``decomposition=None`` runs one monolithic reasoner. ``report_implied``
    off (the conflict-only configuration) keeps full propagation internal
    but returns only conflicts, rewritten over the caller's assumptions.
    """

    def __init__(
        self,
        xors: Sequence[XorConstraint],
        decomposition: Optional[Decomposition] = None,
        *,
        backend: str = "gj",
        swap_policy: str = "fewest",
    ):
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}")
        self.xors = list(xors)
        self.backend = backend
        self.swap_policy = swap_policy
        self.report_implied = backend != "gj-conflicts-only"
        self.decomposition = decomposition
        self.reasoners: list = []
        self.groups: list = []  # constraint indices handled by each reasoner
        self.var_to_reasoners: dict = {}
        self.value: dict = {}
        self.reason: dict = {}  # var -> explanation, absent for assumptions
        self.trail: list = []
        self._undo: list = []
        self._levels: list = []
        self._base = 0
        self.unsat_at_init = False
        self.stats = EngineStats()

    # -- construction ----------------------------------------------------

    def _make(self, idxs: Sequence[int], gauss: bool):
        xs = [self.xors[i] for i in idxs]
        if gauss:
            t = Tableau.build(xs)
            return AssignedTableau(t, self.swap_policy)
        return UnitXorPropagator(xs)

    def init(self) -> DeductionResult:
        res = DeductionResult()
        n = len(self.xors)
        plan = []
        if self.backend == "unitprop":
            plan.append((list(range(n)), False))
        elif self.decomposition is None:
            plan.append((list(range(n)), True))
        else:
            singles = []
            for comp in self.decomposition.components:
                if len(comp) == 1:
                    singles.extend(comp)
                else:
                    plan.append((list(comp), True))
            if singles:
                plan.append((sorted(singles), False))
        for idxs, gauss in plan:
            if not idxs:
                continue
            try:
                r = self._make(idxs, gauss)
            except XorConflict:
                self.unsat_at_init = True
                res.conflict = ()
                return res
            rid = len(self.reasoners)
            self.reasoners.append(r)
            self.groups.append(idxs)
            for i in idxs:
                for v in self.xors[i].vars:
                    lst = self.var_to_reasoners.setdefault(v, [])
                    if not lst or lst[-1] != rid:
                        lst.append(rid)
        queue = deque()
        for rid, r in enumerate(self.reasoners):
            out = r.init()
            if not self._absorb(rid, out, queue, res):
                break
        else:
            self._drain(queue, res)
        if res.conflict is not None:
            # the xor part alone is contradictory
            self.unsat_at_init = True
            res.conflict = ()
        self._base = len(self.trail)
        return self._finish(res)

    # -- interface -------------------------------------------------------

    def mark(self) -> int:
        return len(self._levels)

    def assume(self, lit: int) -> DeductionResult:
        self.stats.assumes += 1
        self._levels.append((len(self._undo), len(self.trail)))
        res = DeductionResult()
        v = lit_var(lit)
        if v not in self.var_to_reasoners:
            return res
        cur = self.value.get(v)
        if cur is not None:
            if cur != lit_sign(lit):
                res.conflict = self._clash(lit, None)
            return self._finish(res)
        self._set(v, lit_sign(lit), None)
        self._drain(deque([(lit, -1)]), res)
        return self._finish(res)

    def backtrack_to(self, mark: int) -> None:
        if mark >= len(self._levels):
            return
        undo_len, trail_len = self._levels[mark]
        del self._levels[mark:]
        while len(self._undo) > undo_len:
            rid, m = self._undo.pop()
            self.reasoners[rid].backtrack_to(m)
        while len(self.trail) > trail_len:
            v = self.trail.pop()
            del self.value[v]
            self.reason.pop(v, None)

    def explain(self, lit: int):
        return self.reason[lit_var(lit)]

    def assigned_literals(self) -> set:
        return {mklit(v, b) for v, b in self.value.items()}

    def implied_binary_xors(self) -> set:
        if len(self.reasoners) != 1 or not isinstance(self.reasoners[0], AssignedTableau):
            raise ValueError("implied binary xors are only available for a single Gauss-Jordan reasoner")
        return self.reasoners[0].implied_binary_xors()

    def check_counters(self) -> None:
        for r in self.reasoners:
            r.check_counters()

    def component_dims(self) -> list:
        out = []
        for r in self.reasoners:
            if isinstance(r, AssignedTableau):
                out.append((r.tableau.num_rows, r.tableau.num_cols))
        return out

    # -- internals -------------------------------------------------------

    def _set(self, v: int, val: bool, why) -> None:
        self.value[v] = val
        self.trail.append(v)
        if why is not None:
            self.reason[v] = why

    def _touch(self, rid: int, touched: set) -> None:
        if self._levels and rid not in touched:
            self._undo.append((rid, self.reasoners[rid].mark()))
            touched.add(rid)

    def _drain(self, queue: deque, res: DeductionResult) -> None:
        touched: set = set()
        while queue and res.conflict is None:
            lit, src = queue.popleft()
            for rid in self.var_to_reasoners.get(lit_var(lit), ()):
                if rid == src:
                    continue
                self._touch(rid, touched)
                out = self.reasoners[rid].assume(lit)
                if not self._absorb(rid, out, queue, res):
                    return

    def _absorb(self, rid: int, out: DeductionResult, queue: deque, res: DeductionResult) -> bool:
        for lit, why in out.implied:
            v = lit_var(lit)
            cur = self.value.get(v)
            if cur is None:
                self._set(v, lit_sign(lit), why)
                res.implied.append((lit, why))
                self.stats.implied += 1
                queue.append((lit, rid))
            elif cur != lit_sign(lit):
                res.conflict = self._clash(lit, why)
                return False
        if out.conflict is not None:
            res.conflict = out.conflict
            return False
        return True

    def _clash(self, lit: int, why) -> tuple:
        """Conflict between a new literal (with explanation ``why``) and the engine value."""
        v = lit_var(lit)
        prior = self.reason.get(v)
        if why is None and prior is None:
            return (neg(lit), lit)
        if why is None:
            return prior
        if prior is None:
            return why
        return resolve(why, prior, v)

    def _finish(self, res: DeductionResult) -> DeductionResult:
        if res.conflict is not None:
            self.stats.conflicts += 1
        if not self.report_implied:
            if res.conflict is not None:
                res.conflict = self.over_assumptions(res.conflict)
            res.implied = []
        return res

    def over_assumptions(self, clause) -> tuple:
        """Resolve away engine-derived literals so only assumption literals remain."""
        out = []
        seen = set()
        stack = list(clause)
        while stack:
            q = stack.pop()
            v = lit_var(q)
            if v in seen:
                continue
            seen.add(v)
            why = self.reason.get(v)
            cur = self.value.get(v)
            if why is None or cur is None or cur == lit_sign(q):
                out.append(q)
            else:
                stack.extend(x for x in why if lit_var(x) != v)
        return tuple(sorted(out))
