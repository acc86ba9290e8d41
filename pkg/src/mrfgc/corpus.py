"""Seeded random hosts and instances, and the small hand-made fixtures."""

from __future__ import annotations

import random
from typing import Optional

import networkx as nx

from .errors import PreconditionError
from .formations import ExplicitBackend, Formation, FormationLibrary, ImplicitConnectedBackend, Transposition
from .model import Configuration, Graph, Instance, RobotTypes, RootedTree


def gen_random_tree(n: int, max_degree: int, seed) -> RootedTree:
    """Random tree on ``0..n-1`` rooted at 0; each new vertex hangs off a
    uniformly chosen earlier vertex that still has spare degree."""
    if n < 1:
        raise PreconditionError("a tree needs at least one vertex")
    if n > 1 and max_degree < 1 or n > 2 and max_degree < 2:
        raise PreconditionError(f"no tree on {n} vertices has maximum degree {max_degree}")
    rng = random.Random(seed)
    deg = [0] * n
    edges = []
    for v in range(1, n):
        u = rng.choice([u for u in range(v) if deg[u] < max_degree])
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
    return RootedTree(Graph(n, edges), 0)


def gen_random_graph(n: int, target_tw: int, seed, keep: float = 0.7) -> Graph:
    """Connected partial k-tree: grow a ``target_tw``-tree, then drop edges
    at random while the graph stays connected. Treewidth is at most
    ``target_tw``."""
    if n < 1 or target_tw < 1:
        raise PreconditionError("need n >= 1 and target_tw >= 1")
    rng = random.Random(seed)
    k = target_tw
    base = min(n, k + 1)
    edges = {(u, v) for u in range(base) for v in range(u + 1, base)}
    cliques = [tuple(range(base))] if base <= k else [c for c in _subsets(range(base), k)]
    for v in range(base, n):
        c = rng.choice(cliques)
        for u in c:
            edges.add((u, v))
        for drop in c:
            cliques.append(tuple(sorted((set(c) - {drop}) | {v})))
    h = nx.Graph()
    h.add_nodes_from(range(n))
    h.add_edges_from(edges)
    for e in sorted(edges):
        if rng.random() > keep:
            h.remove_edge(*e)
            if not nx.is_connected(h):
                h.add_edge(*e)
    return Graph(n, h.edges)


def _subsets(items, k):
    import itertools

    return [tuple(c) for c in itertools.combinations(items, k)]


def random_tree_instance(n: int, k: int, seed, max_degree: int = 3) -> Instance:
    """Homogeneous robots under the connectivity constraint, all starting and
    ending on one random vertex of a random tree."""
    rng = random.Random(seed)
    t = gen_random_tree(n, max_degree, rng.random())
    types = RobotTypes.homogeneous(k)
    x0 = Configuration.all_at(rng.randrange(n), types)
    return Instance(t.graph, types, ImplicitConnectedBackend(types), x0, x0)


def random_graph_instance(n: int, k: int, seed, target_tw: int = 2, library: Optional[FormationLibrary] = None) -> Instance:
    """Random partial k-tree host with an explicit library (by default the
    connectivity library of ``k`` robots)."""
    from .library import generate_connectivity_library

    rng = random.Random(seed)
    g = gen_random_graph(n, target_tw, rng.random())
    types = RobotTypes.homogeneous(k)
    lib = library or generate_connectivity_library(k, types)
    x0 = Configuration.all_at(rng.randrange(n), lib.types)
    return Instance(g, lib.types, ExplicitBackend(lib), x0, x0)


# ---------------------------------------------------------------- fixtures


def star_instance(leaves: int = 3, k: int = 3) -> Instance:
    g = Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)], ["c"] + [f"l{i}" for i in range(1, leaves + 1)])
    types = RobotTypes.homogeneous(k)
    x0 = Configuration.all_at(0, types)
    return Instance(g, types, ImplicitConnectedBackend(types), x0, x0)


ROUTER_CLEANER_TYPES = RobotTypes(("r", "b"), (1, 2))


def _placement(g: Graph, spec: dict) -> Configuration:
    return Configuration.from_counts({(g.index(v), ROUTER_CLEANER_TYPES.index(t)): c for (v, t), c in spec.items()})


def router_cleaner_library(with_transposition: bool = True) -> FormationLibrary:
    """One router and two cleaners that must stay next to it.

    alpha: path u-v-w with the router in the middle; beta: edge u-v with the
    router on u and both cleaners on v; gamma: triangle with the router on u.
    The only transposition moves beta to gamma on the graph u'-v', v'-w',
    w'-t', v'-t'.
    """
    a = Graph.from_labeled_edges(["u", "v", "w"], [("u", "v"), ("v", "w")])
    b = Graph.from_labeled_edges(["u", "v"], [("u", "v")])
    c = Graph.from_labeled_edges(["u", "v", "w"], [("u", "v"), ("v", "w"), ("u", "w")])
    forms = (
        Formation("alpha", a, _placement(a, {("v", "r"): 1, ("u", "b"): 1, ("w", "b"): 1})),
        Formation("beta", b, _placement(b, {("u", "r"): 1, ("v", "b"): 2})),
        Formation("gamma", c, _placement(c, {("u", "r"): 1, ("v", "b"): 1, ("w", "b"): 1})),
    )
    trans = ()
    if with_transposition:
        h = Graph.from_labeled_edges(["u'", "v'", "w'", "t'"], [("u'", "v'"), ("v'", "w'"), ("w'", "t'"), ("v'", "t'")])
        trans = (
            Transposition(
                "beta-gamma",
                h,
                _placement(h, {("u'", "r"): 1, ("v'", "b"): 2}),
                _placement(h, {("v'", "r"): 1, ("w'", "b"): 1, ("t'", "b"): 1}),
                "beta",
                "gamma",
            ),
        )
    return FormationLibrary(ROUTER_CLEANER_TYPES, forms, trans)


def router_cleaner_host() -> Graph:
    return Graph.from_labeled_edges(
        list("abcdefgh"),
        [("a", "b"), ("b", "c"), ("b", "d"), ("c", "e"), ("c", "f"), ("d", "f"), ("e", "g"), ("e", "f"), ("f", "h")],
    )


def router_cleaner_transition(with_transposition: bool = True):
    """``(graph, backend, before, after)`` for the beta to gamma move that
    maps u', v', w', t' onto b, c, e, f."""
    g = router_cleaner_host()
    be = ExplicitBackend(router_cleaner_library(with_transposition))
    before = _placement(g, {("b", "r"): 1, ("c", "b"): 2})
    after = _placement(g, {("c", "r"): 1, ("e", "b"): 1, ("f", "b"): 1})
    return g, be, before, after


def router_cleaner_instance(with_transposition: bool = True) -> Instance:
    g, be, before, after = router_cleaner_transition(with_transposition)
    return Instance(g, ROUTER_CLEANER_TYPES, be, before, after)
