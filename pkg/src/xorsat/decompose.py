"""Cut variables and biconnected components of a conjunction of xor-constraints.

The constraint graph is bipartite: one vertex per variable, one per
constraint, and an edge whenever the variable occurs in the constraint.
Its articulation points restricted to variable vertices are exactly the
cut variables; two constraints then belong to the same component when they
are linked by a chain of shared non-cut variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .formula import CnfXorFormula, XorConstraint, mklit

DEFAULT_CLAUSIFY_LIMIT = 6


@dataclass
class ConstraintGraph:
    """Vertices ``0..len(variables)-1`` are variables, the rest constraints."""

    variables: list
    parities: list
    adj: list
    var_vertex: dict = field(default_factory=dict)

    @property
    def num_var_vertices(self) -> int:
        return len(self.variables)

    @property
    def num_constraint_vertices(self) -> int:
        return len(self.parities)

    @property
    def num_vertices(self) -> int:
        return len(self.adj)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def constraint_vertex(self, index: int) -> int:
        return len(self.variables) + index

    def is_var_vertex(self, vertex: int) -> bool:
        return vertex < len(self.variables)

    def describe(self, vertex: int):
        """``("var", v)`` or ``("xor", i)`` for a vertex id."""
        if vertex < len(self.variables):
            return ("var", self.variables[vertex])
        return ("xor", vertex - len(self.variables))


def build_graph(xors: Sequence[XorConstraint]) -> ConstraintGraph:
    variables = sorted({v for x in xors for v in x.vars})
    var_vertex = {v: i for i, v in enumerate(variables)}
    nv = len(variables)
    adj = [[] for _ in range(nv + len(xors))]
    for i, x in enumerate(xors):
        cv = nv + i
        for v in x.vars:
            adj[cv].append(var_vertex[v])
            adj[var_vertex[v]].append(cv)
    return ConstraintGraph(variables, [x.parity for x in xors], adj, var_vertex)


def _blocks(g: ConstraintGraph):
    """Hopcroft-Tarjan lowpoints with an explicit stack.

    Returns ``(cut_vertices, blocks)``; each block is the vertex list of one
    biconnected component of the graph.
    """
    n = g.num_vertices
    adj = g.adj
    disc = [-1] * n
    low = [0] * n
    cuts = set()
    blocks = []
    time = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = time
        time += 1
        root_children = 0
        pending = [root]  # discovered vertices not yet assigned to a block
        if not adj[root]:
            blocks.append([root])
        # frames: (vertex, parent, next neighbour position)
        stack = [(root, -1, 0)]
        while stack:
            u, parent, i = stack[-1]
            if i < len(adj[u]):
                stack[-1] = (u, parent, i + 1)
                w = adj[u][i]
                if disc[w] < 0:
                    disc[w] = low[w] = time
                    time += 1
                    if u == root:
                        root_children += 1
                    pending.append(w)
                    stack.append((w, u, 0))
                elif w != parent:
                    if disc[w] < low[u]:
                        low[u] = disc[w]
                continue
            stack.pop()
            if parent < 0:
                continue
            if low[u] < low[parent]:
                low[parent] = low[u]
            if low[u] >= disc[parent]:
                if parent != root:
                    cuts.add(parent)
                block = [parent]
                while True:
                    w = pending.pop()
                    block.append(w)
                    if w == u:
                        break
                blocks.append(block)
        if root_children > 1:
            cuts.add(root)
    return cuts, blocks


def cut_vertices(g: ConstraintGraph) -> set:
    """Articulation points, in O(|V| + |E|)."""
    return _blocks(g)[0]


@dataclass
class Decomposition:
    cut_vars: set
    components: list  # lists of constraint indices, ascending
    component_of: list  # constraint index -> component id

    @property
    def singleton_ids(self) -> set:
        return {i for i, c in enumerate(self.components) if len(c) == 1}

    @property
    def num_components(self) -> int:
        return len(self.components)

    def non_singleton_count(self) -> int:
        return sum(1 for c in self.components if len(c) > 1)


def decompose(xors: Sequence[XorConstraint]) -> Decomposition:
    """Group constraints lying in a common biconnected block of the constraint graph.

    This agrees with "share a non-cut variable" except when two constraints
    share two or more cut variables and nothing else; such constraints lie
    on a common cycle and are grouped together here.
    """
    g = build_graph(xors)
    cuts, blocks = _blocks(g)
    cut_vars = {g.variables[v] for v in cuts if g.is_var_vertex(v)}

    parent = list(range(len(xors)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    nv = g.num_var_vertices
    for block in blocks:
        cons = [u - nv for u in block if u >= nv]
        for j in cons[1:]:
            a, b = find(cons[0]), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)

    ids = {}
    components = []
    component_of = [0] * len(xors)
    for i in range(len(xors)):
        root = find(i)
        cid = ids.get(root)
        if cid is None:
            cid = ids[root] = len(components)
            components.append([])
        components[cid].append(i)
        component_of[i] = cid
    return Decomposition(cut_vars, components, component_of)


def xor_to_clauses(x: XorConstraint) -> list:
    """The ``2**(w-1)`` clauses forbidding each wrong-parity assignment."""
    out = []
    for signs in product((False, True), repeat=x.width):
        # signs[i] True means the clause has the positive literal, i.e. it
        # forbids the assignment with x_i false
        ones = sum(1 for s in signs if not s)
        if ones % 2 != x.parity:
            out.append(tuple(mklit(v, s) for v, s in zip(x.vars, signs)))
    return out


def clausify_singletons(
    f: CnfXorFormula, d: Decomposition, width_limit: int = DEFAULT_CLAUSIFY_LIMIT
):
    """Rewrite singleton-component xors as clauses.

    Returns ``(formula, refused)`` where ``refused`` lists the indices of
    singleton constraints left in place because they are wider than
    ``width_limit``.
    """
    clauses = list(f.clauses)
    xors = []
    refused = []
    singles = d.singleton_ids
    for i, x in enumerate(f.xors):
        if d.component_of[i] in singles:
            if x.width <= width_limit:
                clauses.extend(xor_to_clauses(x))
                continue
            refused.append(i)
        xors.append(x)
    return CnfXorFormula(f.num_vars, clauses, xors), refused


def matrix_elements(xors: Sequence[XorConstraint]) -> int:
    """Dense matrix size for a group of constraints: rows times distinct columns."""
    if not xors:
        return 0
    return len(xors) * len({v for x in xors for v in x.vars})


@dataclass
class DecompositionStats:
    constraints: int
    singleton_constraints: int
    components: int
    monolithic_elements: int
    decomposed_elements: int
    nonsingleton_elements: int


def decomposition_stats(xors: Sequence[XorConstraint], d: Decomposition) -> DecompositionStats:
    per = [matrix_elements([xors[i] for i in comp]) for comp in d.components]
    singles = d.singleton_ids
    return DecompositionStats(
        constraints=len(xors),
        singleton_constraints=len(singles),
        components=d.num_components,
        monolithic_elements=matrix_elements(xors),
        decomposed_elements=sum(per),
        nonsingleton_elements=sum(e for i, e in enumerate(per) if i not in singles),
    )
