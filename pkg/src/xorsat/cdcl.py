"""A small CDCL solver acting as the master of one or more xor engines.

Clauses use two watched literals; decisions follow decayed variable
activities with phase saving; restarts follow the Luby sequence. Every
literal on the trail over an xor variable is passed to the xor engines once
clause propagation is saturated, and the literals they derive are enqueued
with their explanation clause as the reason, so conflict analysis resolves
through CNF clauses and xor explanations alike.
"""

from __future__ import annotations

import heapq
import logging
import random
import time
from dataclasses import dataclass, field
from typing import Optional

from .decompose import clausify_singletons, decompose
from .eliminate import reconstruct_model
from .engine import BACKENDS, XorEngine
from .formula import CnfXorFormula, neg
from .preprocess import preprocess

log = logging.getLogger(__name__)

SAT = "SATISFIABLE"
UNSAT = "UNSATISFIABLE"
UNKNOWN = "UNKNOWN"


@dataclass
class SolverConfig:
    backend: str = "gj"
    decompose: bool = True
    eliminate: bool = True
    preprocess: bool = True
    clausify_singletons: bool = False
    seed: int = 0
    max_conflicts: Optional[int] = None
    restart_base: int = 100
    var_decay: float = 0.95
    learn_explanations: bool = True
    swap_policy: str = "fewest"

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}, expected one of {BACKENDS}")


@dataclass
class SolverStats:
    decisions: int = 0
    conflicts: int = 0
    cnf_propagations: int = 0
    xor_propagations: int = 0
    xor_conflicts: int = 0
    restarts: int = 0
    learned: int = 0
    learned_explanations: int = 0
    deleted: int = 0


@dataclass
class SolveResult:
    status: str
    model: Optional[dict] = None
    stats: SolverStats = field(default_factory=SolverStats)
    info: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == SAT


class Clause:
    __slots__ = ("lits", "learnt", "lbd", "activity", "deleted")

    def __init__(self, lits, learnt=False, lbd=0):
        self.lits = list(lits)
        self.learnt = learnt
        self.lbd = lbd
        self.activity = 0.0
        self.deleted = False


def luby(i: int) -> int:
    """The i-th element (0-based) of 1, 1, 2, 1, 1, 2, 4, ..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    """CDCL over ``f.clauses`` with ``f.xors`` delegated to xor engines."""

    def __init__(self, f: CnfXorFormula, config: Optional[SolverConfig] = None, decomposition=None):
        self.config = config or SolverConfig()
        self.formula = f
        self.n = f.num_vars
        n = self.n
        self.assigns = [-1] * n
        self.level = [0] * n
        self.reason: list = [None] * n
        self.trail: list = []
        self.trail_lim: list = []
        self.qhead = 0
        self.xqhead = 0
        self.watches: list = [[] for _ in range(2 * n)]
        self.clauses: list = []
        self.learnts: list = []
        self.activity = [0.0] * n
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.polarity = [False] * n
        self.heap: list = []
        self.stats = SolverStats()
        self.ok = True
        self._fed: list = []  # (trail index, engine marks before feeding it)
        self._pending_expl: list = []

        rng = random.Random(self.config.seed)
        if self.config.seed:
            self.activity = [rng.random() * 1e-5 for _ in range(n)]
        self.heap = [(-self.activity[v], v) for v in range(n)]
        heapq.heapify(self.heap)

        self.engines = self._make_engines(f, decomposition)
        self.xor_var = [False] * n
        for v in f.xor_vars():
            self.xor_var[v] = True

        for cl in f.clauses:
            if not self.ok:
                break
            self._add_problem_clause(cl)
        if self.ok:
            for e in self.engines:
                res = e.init()
                if res.conflict is not None:
                    self.ok = False
                    break
                for lit, why in res.implied:
                    if not self._enqueue_checked(lit, why):
                        self.ok = False
                        break

    # -- setup -----------------------------------------------------------

    def _make_engines(self, f: CnfXorFormula, decomposition):
        if not f.xors:
            return []
        cfg = self.config
        if cfg.backend == "unitprop":
            return [XorEngine(f.xors, backend="unitprop")]
        d = decomposition
        if d is None and cfg.decompose:
            d = decompose(f.xors)
        gj = XorEngine(f.xors, d if cfg.decompose else None, backend=cfg.backend, swap_policy=cfg.swap_policy)
        if cfg.backend == "gj-conflicts-only":
            return [XorEngine(f.xors, backend="unitprop"), gj]
        return [gj]

    def _add_problem_clause(self, lits) -> None:
        lits = list(dict.fromkeys(lits))
        if any(neg(l) in lits for l in lits):
            return
        lits = [l for l in lits if self._val(l) != 0]
        if any(self._val(l) == 1 for l in lits):
            return
        if not lits:
            self.ok = False
        elif len(lits) == 1:
            self._enqueue(lits[0], None)
        else:
            c = Clause(lits)
            self.clauses.append(c)
            self._watch(c)

    def _watch(self, c: Clause) -> None:
        self.watches[c.lits[0]].append(c)
        self.watches[c.lits[1]].append(c)

    # -- assignment ------------------------------------------------------

    def _val(self, lit: int) -> int:
        a = self.assigns[lit >> 1]
        return -1 if a < 0 else a ^ (lit & 1)

    def _enqueue(self, lit: int, reason) -> None:
        v = lit >> 1
        self.assigns[v] = 0 if lit & 1 else 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _enqueue_checked(self, lit: int, reason) -> bool:
        val = self._val(lit)
        if val == 1:
            return True
        if val == 0:
            return False
        self._enqueue(lit, reason)
        return True

    def decision_level(self) -> int:
        return len(self.trail_lim)

    def _cancel_until(self, lvl: int) -> None:
        if self.decision_level() <= lvl:
            return
        stop = self.trail_lim[lvl]
        for i in range(len(self.trail) - 1, stop - 1, -1):
            v = self.trail[i] >> 1
            self.polarity[v] = bool(self.assigns[v])
            self.assigns[v] = -1
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, stop)
        if self.xqhead > stop:
            self.xqhead = stop
            marks = None
            while self._fed and self._fed[-1][0] >= stop:
                marks = self._fed.pop()[1]
            if marks is not None:
                for e, m in zip(self.engines, marks):
                    e.backtrack_to(m)

    # -- propagation -----------------------------------------------------

    def _propagate_cnf(self):
        trail = self.trail
        watches = self.watches
        assigns = self.assigns
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            keep = []
            i = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c.deleted:
                    continue
                lits = c.lits
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], false_lit
                first = lits[0]
                a = assigns[first >> 1]
                if a >= 0 and a ^ (first & 1) == 1:
                    keep.append(c)
                    continue
                for k in range(2, len(lits)):
                    lk = lits[k]
                    ak = assigns[lk >> 1]
                    if ak < 0 or ak ^ (lk & 1) == 1:
                        lits[1], lits[k] = lk, false_lit
                        watches[lk].append(c)
                        break
                else:
                    keep.append(c)
                    if a >= 0:
                        keep.extend(ws[i:])
                        watches[false_lit] = keep
                        self.qhead = len(trail)
                        return c
                    self._enqueue(first, c)
                    self.stats.cnf_propagations += 1
            watches[false_lit] = keep
        return None

    def _propagate(self):
        """Clauses to fixpoint, then one trail literal at a time through the engines."""
        while True:
            confl = self._propagate_cnf()
            if confl is not None:
                return confl
            if not self.engines:
                return None
            progressed = False
            while self.xqhead < len(self.trail):
                idx = self.xqhead
                lit = self.trail[idx]
                self.xqhead += 1
                if not self.xor_var[lit >> 1]:
                    continue
                self._fed.append((idx, [e.mark() for e in self.engines]))
                before = len(self.trail)
                for e in self.engines:
                    res = e.assume(lit)
                    for il, why in res.implied:
                        val = self._val(il)
                        if val == 1:
                            continue
                        if val == 0:
                            self.stats.xor_conflicts += 1
                            return why
                        self._enqueue(il, why)
                        self.stats.xor_propagations += 1
                    if res.conflict is not None:
                        self.stats.xor_conflicts += 1
                        return res.conflict
                if len(self.trail) > before:
                    progressed = True
                    break
            if not progressed and self.qhead == len(self.trail):
                return None

    # -- conflict analysis -----------------------------------------------

    def _reason_lits(self, r):
        return r.lits if isinstance(r, Clause) else r

    def _analyze(self, confl):
        seen = set()
        learnt = [0]
        path = 0
        p = -1
        idx = len(self.trail) - 1
        cur = self.decision_level()
        clause = confl
        while True:
            if isinstance(clause, Clause):
                if clause.learnt:
                    self._bump_clause(clause)
                lits = clause.lits
            else:
                lits = clause
                if p >= 0 and self.config.learn_explanations and len(lits) > 2:
                    self._pending_expl.append(tuple(lits))
            for q in lits:
                v = q >> 1
                if p >= 0 and v == p >> 1:
                    continue
                if v in seen or self.level[v] == 0:
                    continue
                seen.add(v)
                self._bump_var(v)
                if self.level[v] >= cur:
                    path += 1
                else:
                    learnt.append(q)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.discard(p >> 1)
            path -= 1
            if path <= 0:
                break
            clause = self.reason[p >> 1]
        learnt[0] = p ^ 1
        learnt = self._minimize(learnt)
        if len(learnt) == 1:
            bt = 0
        else:
            best = max(range(1, len(learnt)), key=lambda k: self.level[learnt[k] >> 1])
            learnt[1], learnt[best] = learnt[best], learnt[1]
            bt = self.level[learnt[1] >> 1]
        return learnt, bt

    def _minimize(self, learnt):
        """Drop literals whose reason is entirely inside the clause (local minimization)."""
        inside = {l >> 1 for l in learnt}
        out = [learnt[0]]
        for q in learnt[1:]:
            r = self.reason[q >> 1]
            if r is None:
                out.append(q)
                continue
            lits = self._reason_lits(r)
            if all((x >> 1) == (q >> 1) or (x >> 1) in inside or self.level[x >> 1] == 0 for x in lits):
                continue
            out.append(q)
        return out

    def _bump_var(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(self.n) if self.assigns[u] < 0]
            heapq.heapify(self.heap)
        elif self.assigns[v] < 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _bump_clause(self, c: Clause) -> None:
        c.activity += self.cla_inc
        if c.activity > 1e20:
            for d in self.learnts:
                d.activity *= 1e-20
            self.cla_inc *= 1e-20

    def _lbd(self, lits) -> int:
        return len({self.level[l >> 1] for l in lits})

    # -- search ----------------------------------------------------------

    def _pick_branch(self) -> int:
        heap = self.heap
        while heap:
            act, v = heapq.heappop(heap)
            if self.assigns[v] < 0 and -act == self.activity[v]:
                return v
        for v in range(self.n):
            if self.assigns[v] < 0:
                return v
        return -1

    def _attach_explanations(self) -> None:
        for lits in self._pending_expl:
            # non-false literals first, then false ones by decreasing level
            order = sorted(
                lits,
                key=lambda l: (self._val(l) == 0, -self.level[l >> 1] if self._val(l) == 0 else 0),
            )
            c = Clause(order, learnt=True, lbd=len(order))
            self.learnts.append(c)
            self._watch(c)
            self.stats.learned_explanations += 1
        self._pending_expl.clear()

    def _reduce_db(self) -> None:
        locked = {id(r) for r in self.reason if isinstance(r, Clause)}
        cand = [c for c in self.learnts if c.lbd > 3 and id(c) not in locked]
        cand.sort(key=lambda c: (-c.lbd, c.activity))
        drop = cand[: len(cand) // 2]
        for c in drop:
            c.deleted = True
        self.stats.deleted += len(drop)
        self.learnts = [c for c in self.learnts if not c.deleted]

    def _handle_conflict(self, confl) -> bool:
        """Learn from ``confl`` and backjump. False when the formula is refuted."""
        lits = self._reason_lits(confl)
        if not lits:
            return False
        top = max(self.level[l >> 1] for l in lits)
        if top == 0:
            return False
        if top < self.decision_level():
            at_top = [l for l in lits if self.level[l >> 1] == top]
            if len(at_top) == 1:
                rest = [self.level[l >> 1] for l in lits if self.level[l >> 1] != top]
                bt = max(rest, default=0)
                self._cancel_until(bt)
                self._learn([at_top[0]] + [l for l in lits if l != at_top[0]], bt)
                return True
            self._cancel_until(top)
        learnt, bt = self._analyze(confl)
        self._cancel_until(bt)
        self._learn(learnt, bt)
        self._attach_explanations()
        return True

    def _learn(self, learnt, bt) -> None:
        self.stats.learned += 1
        if len(learnt) == 1:
            self._enqueue(learnt[0], None)
            return
        if len(learnt) > 2:
            # second watch on a literal of the backjump level
            best = max(range(1, len(learnt)), key=lambda k: self.level[learnt[k] >> 1])
            learnt[1], learnt[best] = learnt[best], learnt[1]
        c = Clause(learnt, learnt=True, lbd=self._lbd(learnt))
        self._bump_clause(c)
        self.learnts.append(c)
        self._watch(c)
        self._enqueue(learnt[0], c)

    def solve(self) -> SolveResult:
        if not self.ok:
            return SolveResult(UNSAT, stats=self.stats)
        confl = self._propagate()
        if confl is not None:
            return SolveResult(UNSAT, stats=self.stats)
        cfg = self.config
        max_learnts = max(len(self.clauses) / 3, 100.0)
        restart_i = 0
        while True:
            budget = luby(restart_i) * cfg.restart_base
            conflicts_here = 0
            while True:
                confl = self._propagate()
                if confl is not None:
                    self.stats.conflicts += 1
                    conflicts_here += 1
                    if not self._handle_conflict(confl):
                        return SolveResult(UNSAT, stats=self.stats)
                    self.var_inc /= cfg.var_decay
                    self.cla_inc /= 0.999
                    if cfg.max_conflicts is not None and self.stats.conflicts >= cfg.max_conflicts:
                        return SolveResult(UNKNOWN, stats=self.stats)
                    continue
                if conflicts_here >= budget:
                    break
                if len(self.learnts) - len(self.trail) >= max_learnts:
                    self._reduce_db()
                v = self._pick_branch()
                if v < 0:
                    model = {u: bool(self.assigns[u]) for u in range(self.n)}
                    return SolveResult(SAT, model=model, stats=self.stats)
                self.stats.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._enqueue(2 * v + (0 if self.polarity[v] else 1), None)
            self._cancel_until(0)
            restart_i += 1
            self.stats.restarts += 1
            max_learnts *= 1.1


def solve(f: CnfXorFormula, config: Optional[SolverConfig] = None) -> SolveResult:
    """Preprocess, solve and map the model back onto the original variables.

    The returned model is always checked against ``f``.
    """
    cfg = config or SolverConfig()
    t0 = time.perf_counter()
    info: dict = {}
    if f.trivially_unsat:
        return SolveResult(UNSAT, info=info)
    records: list = []
    work = f
    if cfg.preprocess:
        pre = preprocess(f, eliminate=cfg.eliminate)
        info.update(pre.stats)
        if pre.unsat:
            info["time"] = time.perf_counter() - t0
            return SolveResult(UNSAT, info=info)
        work, records = pre.formula, pre.records
    if cfg.clausify_singletons and work.xors:
        work, refused = clausify_singletons(work, decompose(work.xors))
        info["clausify_refused"] = len(refused)
    solver = Solver(work, cfg)
    res = solver.solve()
    res.info.update(info)
    for e in solver.engines:
        res.info.setdefault("engine_dims", []).extend(e.component_dims())
    if res.sat:
        model = reconstruct_model(records, res.model)
        if not f.satisfied_by(model):
            raise AssertionError("solver produced a model violating the input formula")
        res.model = model
    res.info["time"] = time.perf_counter() - t0
    return res
