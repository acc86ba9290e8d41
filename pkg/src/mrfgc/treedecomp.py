"""Nice tree decompositions: construction for trees and small graphs, and a
structural validator.

Node ids are assigned in post-order, so every child id is smaller than its
parent's and the root is the last node. The root bag is always empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx

from .errors import GraphError, PreconditionError
from .model import Graph, RootedTree

LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"


@dataclass(frozen=True)
class Bag:
    vertices: frozenset
    kind: str
    vertex: Optional[int] = None
    children: tuple[int, ...] = ()


class NiceTreeDecomposition:
    def __init__(self, nodes: Sequence[Bag], n: int, root: Optional[int] = None):
        self.nodes = tuple(nodes)
        self.n = n
        self.root = len(self.nodes) - 1 if root is None else root
        self.parent = [-1] * len(self.nodes)
        for j, b in enumerate(self.nodes):
            for c in b.children:
                self.parent[c] = j
        self._down: list[Optional[frozenset]] = [None] * len(self.nodes)

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, j) -> Bag:
        return self.nodes[j]

    @property
    def width(self) -> int:
        return max((len(b.vertices) for b in self.nodes), default=0) - 1

    def postorder(self) -> list[int]:
        out = []
        stack = [(self.root, False)]
        while stack:
            j, done = stack.pop()
            if done:
                out.append(j)
                continue
            stack.append((j, True))
            for c in reversed(self.nodes[j].children):
                stack.append((c, False))
        return out

    def _check(self, j):
        if not isinstance(j, int) or not 0 <= j < len(self.nodes):
            raise PreconditionError(f"bad bag id {j!r}")

    def below(self, j: int) -> frozenset:
        """Union of the bags in the subtree rooted at ``j``."""
        self._check(j)
        out = set()
        stack = [j]
        while stack:
            i = stack.pop()
            out |= self.nodes[i].vertices
            stack.extend(self.nodes[i].children)
        return frozenset(out)

    def v_down(self, j: int) -> frozenset:
        self._check(j)
        if self._down[j] is None:
            self._down[j] = self.below(j) - self.nodes[j].vertices
        return self._down[j]

    def v_up(self, j: int) -> frozenset:
        return frozenset(range(self.n)) - self.v_down(j) - self.nodes[j].vertices

    def __eq__(self, other):
        return isinstance(other, NiceTreeDecomposition) and (self.nodes, self.n, self.root) == (
            other.nodes,
            other.n,
            other.root,
        )

    def __repr__(self):
        return f"NiceTreeDecomposition(nodes={len(self.nodes)}, width={self.width})"


def v_down(d: NiceTreeDecomposition, j: int) -> frozenset:
    return d.v_down(j)


def v_up(d: NiceTreeDecomposition, j: int) -> frozenset:
    return d.v_up(j)


class _Builder:
    def __init__(self):
        self.nodes: list[Bag] = []

    def add(self, bag, kind, vertex=None, children=()):
        self.nodes.append(Bag(frozenset(bag), kind, vertex, tuple(children)))
        return len(self.nodes) - 1

    def bag(self, j):
        return self.nodes[j].vertices

    def morph(self, j, target) -> int:
        """Forget then introduce vertices until node ``j``'s bag equals ``target``."""
        cur = self.bag(j)
        for v in sorted(cur - target):
            cur = cur - {v}
            j = self.add(cur, FORGET, v, (j,))
        for v in sorted(target - cur):
            cur = cur | {v}
            j = self.add(cur, INTRODUCE, v, (j,))
        return j

    def joined(self, tops) -> int:
        j = tops[0]
        for other in tops[1:]:
            j = self.add(self.bag(j), JOIN, None, (j, other))
        return j


def decompose_tree(t: RootedTree | Graph) -> NiceTreeDecomposition:
    """Width-1 nice decomposition of a tree; each edge appears in a bag.

    Children with subtrees of their own are joined in; leaf children are
    introduced and forgotten directly on the chain above, which avoids a join
    per leaf and keeps the tables below small.
    """
    if isinstance(t, Graph):
        if not t.is_tree():
            raise GraphError("input is not a tree")
        t = RootedTree(t, 0)
    b = _Builder()
    top: dict[int, int] = {}
    for v in reversed(t.bfs_order):
        if not t.children[v] and v != t.root:
            continue  # handled on its parent's chain
        branches = []
        leaves = []
        for c in t.children[v]:
            if t.children[c]:
                j = b.add({c, v}, INTRODUCE, v, (top[c],))
                branches.append(b.add({v}, FORGET, c, (j,)))
            else:
                leaves.append(c)
        if not branches:
            leaf = b.add((), LEAF)
            branches.append(b.add({v}, INTRODUCE, v, (leaf,)))
        j = b.joined(branches)
        for c in leaves:
            j = b.add({v, c}, INTRODUCE, c, (j,))
            j = b.add({v}, FORGET, c, (j,))
        top[v] = j
    b.add((), FORGET, t.root, (top[t.root],))
    return NiceTreeDecomposition(b.nodes, t.n)


def make_nice(bags: Sequence, edges: Sequence[tuple[int, int]], n: Optional[int] = None, graph: Optional[Graph] = None) -> NiceTreeDecomposition:
    """Convert a tree decomposition (bags plus tree edges) into a nice one
    of the same width, rooted at bag 0 with an empty bag above it."""
    bags = [frozenset(x) for x in bags]
    if not bags:
        raise PreconditionError("invalid decomposition: no bags")
    if n is None:
        n = graph.n if graph is not None else 1 + max((v for x in bags for v in x), default=-1)
    tg = nx.Graph()
    tg.add_nodes_from(range(len(bags)))
    tg.add_edges_from(edges)
    if not nx.is_tree(tg):
        raise PreconditionError("invalid decomposition: bag graph is not a tree")
    for v in range(n):
        holders = [i for i, x in enumerate(bags) if v in x]
        if not holders or not nx.is_connected(tg.subgraph(holders)):
            raise PreconditionError(f"invalid decomposition: vertex {v} is missing or split")
    if graph is not None:
        for u, v in graph.edges:
            if not any(u in x and v in x for x in bags):
                raise PreconditionError(f"invalid decomposition: edge ({u}, {v}) uncovered")
    b = _Builder()
    top: dict[int, int] = {}
    order = list(nx.dfs_postorder_nodes(tg, 0))
    parent = dict(nx.bfs_predecessors(tg, 0))
    kids: dict[int, list[int]] = {i: [] for i in range(len(bags))}
    for c, p in parent.items():
        kids[p].append(c)
    for i in order:
        branches = [b.morph(top[c], bags[i]) for c in sorted(kids[i])]
        if not branches:
            branches = [b.morph(b.add((), LEAF), bags[i])]
        top[i] = b.joined(branches)
    b.morph(top[0], frozenset())
    return NiceTreeDecomposition(b.nodes, n)


def decompose_graph(g: Graph) -> NiceTreeDecomposition:
    """Nice decomposition from networkx's min-degree elimination heuristic."""
    if g.n == 0:
        raise GraphError("empty graph")
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    _, tree = nx.algorithms.approximation.treewidth_min_degree(h)
    nodes = sorted(tree.nodes, key=lambda s: (sorted(s), len(s)))
    index = {x: i for i, x in enumerate(nodes)}
    edges = [(index[a], index[b]) for a, b in tree.edges]
    return make_nice([set(x) for x in nodes], edges, g.n, g)


def decompose(g: Graph, root: int = 0) -> NiceTreeDecomposition:
    """Nice decomposition; trees are rooted at ``root``."""
    return decompose_tree(RootedTree(g, root)) if g.is_tree() else decompose_graph(g)


@dataclass
class DecompositionReport:
    missing_vertices: list[int] = field(default_factory=list)
    uncovered_edges: list[tuple[int, int]] = field(default_factory=list)
    split_vertices: list[int] = field(default_factory=list)
    kind_violations: list[str] = field(default_factory=list)
    root_nonempty: bool = False

    @property
    def ok(self) -> bool:
        return not (
            self.missing_vertices
            or self.uncovered_edges
            or self.split_vertices
            or self.kind_violations
            or self.root_nonempty
        )

    def failures(self) -> list[str]:
        out = [f"vertex {v} in no bag" for v in self.missing_vertices]
        out += [f"edge {e} in no bag" for e in self.uncovered_edges]
        out += [f"bags holding vertex {v} are not connected" for v in self.split_vertices]
        out += self.kind_violations
        if self.root_nonempty:
            out.append("root bag is not empty")
        return out


def validate_decomposition(g: Graph, d: NiceTreeDecomposition) -> DecompositionReport:
    rep = DecompositionReport()
    seen = set()
    for b in d.nodes:
        seen |= b.vertices
    rep.missing_vertices = [v for v in range(g.n) if v not in seen]
    rep.uncovered_edges = [(u, v) for u, v in g.edges if not any(u in b.vertices and v in b.vertices for b in d.nodes)]
    for v in range(g.n):
        holders = {j for j, b in enumerate(d.nodes) if v in b.vertices}
        # the holders are connected iff exactly one of them has a parent outside the set
        tops = [j for j in holders if d.parent[j] not in holders]
        if len(tops) > 1:
            rep.split_vertices.append(v)
    for j, b in enumerate(d.nodes):
        kids = [d.nodes[c].vertices for c in b.children]
        if b.kind == LEAF:
            ok = not kids and not b.vertices
        elif b.kind == INTRODUCE:
            ok = len(kids) == 1 and b.vertex not in kids[0] and b.vertices == kids[0] | {b.vertex}
        elif b.kind == FORGET:
            ok = len(kids) == 1 and b.vertex in kids[0] and b.vertices == kids[0] - {b.vertex}
        elif b.kind == JOIN:
            ok = len(kids) == 2 and kids[0] == kids[1] == b.vertices
        else:
            ok = False
        if not ok:
            rep.kind_violations.append(f"bag {j} violates the {b.kind} node rule")
    rep.root_nonempty = bool(d.nodes[d.root].vertices)
    return rep
