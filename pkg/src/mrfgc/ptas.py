"""Approximation on trees: epsilon-tree-covers, greedy traversal with
regrouping, and the error bounds it is measured against."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import networkx as nx

from .errors import BudgetExceeded, InfeasibleInstance, NonCollapsibleError, PreconditionError
from .library import generate_connectivity_library, is_collapsible, regroup_sequence
from .model import Configuration, Instance, RootedTree, Traversal, validate_traversal


def _threshold(eps) -> Fraction:
    """``1/eps`` as an exact fraction so that e.g. eps=0.1 flushes above 10."""
    if isinstance(eps, Fraction):
        e = eps
    else:
        e = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    if not 0 < e < 1:
        raise PreconditionError(f"epsilon must lie in (0, 1), got {eps}")
    return 1 / e


@dataclass(frozen=True)
class Subtree:
    root: int
    vertices: frozenset
    flushed: bool = True

    def __len__(self):
        return len(self.vertices)


@dataclass
class TreeCover:
    """Flushed subtrees plus the residual subtree holding the tree root."""

    tree: RootedTree
    eps: Fraction
    flushed: list[Subtree]
    residual: Subtree
    size: int

    @property
    def subtrees(self) -> list[Subtree]:
        return self.flushed + [self.residual]

    def cover_tree(self) -> nx.Graph:
        """Each subtree is linked to the one holding its root as a non-root
        vertex; subtrees rooted at the tree root hang off the residual."""
        subs = self.subtrees
        res = len(subs) - 1
        owner: dict[int, int] = {}
        for i, s in enumerate(subs):
            for v in s.vertices:
                if v != s.root:
                    owner[v] = i
        h = nx.Graph()
        h.add_nodes_from(range(len(subs)))
        for i, s in enumerate(subs[:-1]):
            h.add_edge(i, owner.get(s.root, res))
        return h

    def rooted_at(self, v: int) -> list[Subtree]:
        return [s for s in self.subtrees if s.root == v]


def tree_cover(t: RootedTree, eps) -> TreeCover:
    """Bottom-up cover: each vertex gathers the residual trees of its children
    and flushes them, rooted at itself, as soon as their size exceeds 1/eps."""
    limit = _threshold(eps)
    size = [1] * t.n
    tau: list[Optional[set]] = [None] * t.n
    flushed: list[Subtree] = []
    for r in reversed(t.bfs_order):
        cur = {r}
        sz = 1
        for u in t.children[r]:
            sz += size[u]
            cur |= tau[u]
            tau[u] = None
            if sz > limit:
                flushed.append(Subtree(r, frozenset(cur)))
                cur = {r}
                sz = 1
        size[r] = sz
        tau[r] = cur
    root = t.root
    return TreeCover(t, 1 / limit, flushed, Subtree(root, frozenset(tau[root]), False), size[root])


@dataclass
class CoverReport:
    uncovered: list[int] = field(default_factory=list)
    overlaps: list[tuple[int, int]] = field(default_factory=list)
    disconnected: list[int] = field(default_factory=list)
    bad_links: list[str] = field(default_factory=list)
    oversized: list[int] = field(default_factory=list)
    undersized: list[int] = field(default_factory=list)
    residual_too_big: bool = False
    too_many: bool = False

    @property
    def ok(self) -> bool:
        return not self.failures()

    def failures(self) -> list[str]:
        out = [f"vertex {v} is in no subtree" for v in self.uncovered]
        out += [f"subtrees {a} and {b} share more than one vertex" for a, b in self.overlaps]
        out += [f"subtree {i} is not connected" for i in self.disconnected]
        out += self.bad_links
        out += [f"subtree {i} exceeds 2/eps vertices" for i in self.oversized]
        out += [f"flushed subtree {i} has fewer than 1/eps vertices" for i in self.undersized]
        if self.residual_too_big:
            out.append("residual subtree exceeds 1/eps vertices")
        if self.too_many:
            out.append("more than n*eps flushed subtrees")
        return out


def validate_tree_cover(t: RootedTree, eps, cover: TreeCover) -> CoverReport:
    limit = _threshold(eps)
    rep = CoverReport()
    subs = cover.subtrees
    seen = set()
    for s in subs:
        seen |= s.vertices
    rep.uncovered = [v for v in range(t.n) if v not in seen]
    holders: dict[int, list[int]] = {}
    for i, s in enumerate(subs):
        for v in s.vertices:
            holders.setdefault(v, []).append(i)
    shared: dict[tuple[int, int], list[int]] = {}
    for v, hs in holders.items():
        for a in range(len(hs)):
            for b in range(a + 1, len(hs)):
                shared.setdefault((hs[a], hs[b]), []).append(v)
    for i, s in enumerate(subs):
        # connected and rooted: every non-root vertex has its parent inside
        if s.root not in s.vertices or any(t.parent[v] not in s.vertices for v in s.vertices if v != s.root):
            rep.disconnected.append(i)
    for (i, j), common in sorted(shared.items()):
        if len(common) > 1:
            rep.overlaps.append((i, j))
            continue
        (v,) = common
        if v not in (subs[i].root, subs[j].root):
            rep.bad_links.append(f"subtrees {i} and {j} meet at {v}, the root of neither")
    if not nx.is_tree(cover.cover_tree()):
        rep.bad_links.append("cover tree is not a tree")
    rep.oversized = [i for i, s in enumerate(subs) if len(s) > 2 * limit]
    rep.undersized = [i for i, s in enumerate(subs) if s.flushed and len(s) < limit]
    rep.residual_too_big = len(cover.residual) > limit
    rep.too_many = len(cover.flushed) > t.n / limit
    return rep


# ---------------------------------------------------------------- greedy


def f_plus(backend) -> int:
    """Cost of regrouping at a vertex and coming back."""
    return 2 * backend.max_pattern_edges


def f_count(backend, max_degree: int) -> int:
    """Bound on the configurations rooted at one vertex."""
    return backend.formation_count * max(max_degree, 1) ** backend.max_pattern_vertices


def f_minus(backend, max_degree: int) -> int:
    return 2 * backend.max_pattern_edges * f_count(backend, max_degree)


def check_collapsible(backend) -> None:
    if getattr(backend, "kind", None) == "explicit":
        ok = is_collapsible(backend.library)
    else:
        k = backend.types.k
        ok = k <= 3 and is_collapsible(generate_connectivity_library(k, backend.types))
    if not ok:
        raise NonCollapsibleError("formation library is not collapsible")


def _subsolver(name) -> Callable[[Instance], Traversal]:
    if callable(name):
        return name
    if name == "oracle":
        from .oracle import solve_exact_bfs

        def run(inst):
            res = solve_exact_bfs(inst)
            if res.traversal is None:
                raise InfeasibleInstance("subtree cannot be traversed")
            return res.traversal

        return run
    if name == "fpt":
        from .fpt import solve_fpt

        return solve_fpt
    raise PreconditionError(f"unknown subsolver {name!r}")


def _all_at(v: int, inst: Instance) -> Configuration:
    return Configuration.all_at(v, inst.types)


def solve_subtree(inst: Instance, sub: Subtree, solver) -> list[Configuration]:
    """Optimal traversal of one subtree from and back to all robots at its root."""
    h, order = inst.graph.induced(sub.vertices)
    pos = {v: i for i, v in enumerate(order)}
    start = _all_at(pos[sub.root], inst)
    local = Instance(h, inst.types, inst.backend, start, start, pos[sub.root])
    return [x.relabel(order) for x in solver(local)]


def greedy_traverse(inst: Instance, cover: TreeCover, subsolver="oracle", optima: Optional[dict] = None) -> Traversal:
    """Traverse every subtree optimally; the first time a vertex rooting deeper
    subtrees is occupied, regroup there, traverse everything below it, and
    undo the regrouping. Vertices are handled deepest first, so no recursion
    is needed."""
    check_collapsible(inst.backend)
    t = cover.tree
    g = inst.graph
    root_conf = _all_at(t.root, inst)
    if inst.x0 != root_conf or inst.xf != root_conf:
        raise PreconditionError("start and end must place every robot at the tree root")
    solver = _subsolver(subsolver)
    if optima is None:
        optima = {}
    by_root: dict[int, list[Subtree]] = {}
    for s in cover.subtrees:
        by_root.setdefault(s.root, []).append(s)
    depth = {t.root: 0}
    for v in t.bfs_order[1:]:
        depth[v] = depth[t.parent[v]] + 1
    below: dict[int, list[Configuration]] = {}  # traversal of everything under v, from all-at-v
    for v in sorted(by_root, key=lambda u: (-depth[u], u)):
        seq = [_all_at(v, inst)]
        for s in by_root[v]:
            key = (s.root, s.vertices)
            if key not in optima:
                optima[key] = solve_subtree(inst, s, solver)
            y = optima[key]
            inner = sorted(u for u in s.vertices if u != v and u in by_root)
            seq += _splice(g, inst.backend, y, inner, below)[1:]
        below[v] = seq
    return Traversal(below[t.root])


def _splice(g, backend, y: list[Configuration], inner: list[int], below: dict) -> list[Configuration]:
    pending = set(inner)
    out: list[Configuration] = []
    for x in y:
        out.append(x)
        hit = sorted(u for u in pending if u in x.occupied())
        for u in hit:
            pending.discard(u)
            path = [x] + regroup_sequence(g, x, u, backend)
            out += path[1:] + below[u][1:] + path[::-1][1:]
    if pending:
        raise PreconditionError(f"subtree traversal never occupies {sorted(pending)}")
    return out


@dataclass
class PTASResult:
    traversal: Traversal
    cover: TreeCover
    t_greedy: int
    t_cover: int
    t_star: Optional[int]
    wall_ms: float

    @property
    def time(self) -> int:
        return self.t_greedy


def solve_ptas(inst: Instance, eps, subsolver="oracle", oracle_states: Optional[int] = 200_000) -> PTASResult:
    """Cover, then greedy traversal; reports the subtree-optimum sum and, when
    the exact search fits in ``oracle_states``, the optimum."""
    start = time.perf_counter()
    t = inst.tree
    cover = tree_cover(t, eps)
    optima: dict = {}
    trav = greedy_traverse(inst, cover, subsolver, optima)
    rep = validate_traversal(inst, trav)
    if not rep.ok:
        raise PreconditionError("greedy traversal is invalid: " + "; ".join(rep.failures()))
    t_cover = sum(len(y) - 1 for y in optima.values())
    t_star = None
    if oracle_states:
        from .oracle import solve_exact_bfs

        try:
            t_star = solve_exact_bfs(inst, max_states=oracle_states).time
        except BudgetExceeded:
            t_star = None
    wall = (time.perf_counter() - start) * 1000
    return PTASResult(trav, cover, trav.time, t_cover, t_star, wall)
