"""Formation-library construction: collapsibility, closure under contraction,
the connectivity library, and regrouping a team onto one vertex."""

from __future__ import annotations

import itertools
from collections import deque
from functools import lru_cache

import networkx as nx

from .errors import ConfigurationError, NonCollapsibleError, PreconditionError
from .formations import ExplicitBackend, Formation, FormationLibrary, Transposition, is_in_form, placements
from .model import Configuration, Graph, RobotTypes, as_config, contract_edge

CONNECTIVITY_BOUND = 4


def _nx_labeled(g: Graph, labels) -> nx.Graph:
    h = nx.Graph()
    for v in range(g.n):
        h.add_node(v, label=repr(labels[v]))
    h.add_edges_from(g.edges)
    return h


class _IsoIndex:
    """Deduplicates vertex-labelled graphs up to label-preserving isomorphism."""

    def __init__(self):
        self._buckets: dict[tuple, list[nx.Graph]] = {}

    def add(self, g: Graph, labels) -> bool:
        h = _nx_labeled(g, labels)
        key = (
            g.n,
            len(g.edges),
            tuple(sorted(map(repr, labels))),
            nx.weisfeiler_lehman_graph_hash(h, node_attr="label"),
        )
        bucket = self._buckets.setdefault(key, [])
        match = nx.algorithms.isomorphism.categorical_node_match("label", None)
        for other in bucket:
            if nx.is_isomorphic(h, other, node_match=match):
                return False
        bucket.append(h)
        return True


def _vec_labels(g: Graph, x: Configuration, ntypes: int):
    vecs = x.vectors(ntypes)
    zero = (0,) * ntypes
    return [vecs.get(v, zero) for v in range(g.n)]


def contraction_targets(f: Formation):
    """Single-edge contractions of ``f``, grouped per pattern edge.

    Each entry is ``(edge, moves, contracted graph, contracted placement)``
    where ``moves`` lists ``((keep, drop), merged placement on G_a)`` for the
    merge directions whose result is still in contracted form on ``G_a``
    (both directions when neither is, as for a 4-cycle).
    """
    m = 1 + max((t for _, t, _ in f.placement.items), default=0)
    out = []
    for u, v in f.graph.edges:
        cg, mapping = contract_edge(f.graph, (u, v))
        cx = f.placement.relabel(mapping)
        contracted = Formation("_", cg, cx)
        moves = []
        for keep, drop in ((u, v), (v, u)):
            merged = f.placement.relabel({w: (keep if w == drop else w) for w in range(f.graph.n)})
            moves.append(((keep, drop), merged, next(is_in_form(merged, contracted, f.graph, m), None) is not None))
        good = [(kd, x) for kd, x, fits in moves if fits] or [(kd, x) for kd, x, _ in moves]
        out.append(((u, v), good, cg, cx))
    return out


def is_collapsible(lib: FormationLibrary) -> bool:
    """Whether every formation may contract any pattern edge in one valid move."""
    backend = ExplicitBackend(lib)
    for f in lib.formations:
        for _, moves, _, _ in contraction_targets(f):
            if not any(backend.is_valid_transition(f.graph, f.placement, x) for _, x in moves):
                return False
    return True


def collapsible_closure(lib: FormationLibrary) -> FormationLibrary:
    """Smallest extension of ``lib`` that is collapsible.

    Contracted formations are added (deduplicated up to isomorphism) and a
    contraction transposition is added for each contraction not already valid.
    Applying it to a collapsible library returns an equal library.
    """
    m = len(lib.types)
    formations = list(lib.formations)
    transpositions = list(lib.transpositions)
    seen = _IsoIndex()
    for f in formations:
        seen.add(f.graph, _vec_labels(f.graph, f.placement, m))
    queue = deque(formations)
    changed = False
    while queue:
        f = queue.popleft()
        backend = ExplicitBackend(FormationLibrary(lib.types, tuple(formations), tuple(transpositions)))
        for (u, v), moves, cg, cx in contraction_targets(f):
            if seen.add(cg, _vec_labels(cg, cx, m)):
                nf = Formation(f"{f.id}/{f.graph.labels[u]}{f.graph.labels[v]}", cg, cx)
                formations.append(nf)
                queue.append(nf)
                changed = True
            if any(backend.is_valid_transition(f.graph, f.placement, x) for _, x in moves):
                continue
            for (keep, drop), merged in moves:
                tid = f"contract:{f.id}:{f.graph.labels[drop]}>{f.graph.labels[keep]}"
                transpositions.append(Transposition(tid, f.graph, f.placement, merged, f.id, None))
            backend = ExplicitBackend(FormationLibrary(lib.types, tuple(formations), tuple(transpositions)))
            changed = True
    if not changed:
        return lib
    return FormationLibrary(lib.types, tuple(formations), tuple(transpositions))


def _spanning_trees(vertices: tuple[int, ...]):
    """All labelled spanning trees of the complete graph on ``vertices``."""
    n = len(vertices)
    if n <= 1:
        yield ()
        return
    if n == 2:
        yield ((vertices[0], vertices[1]),)
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        edges = [(vertices[a], vertices[b]) for a, b in nx.from_prufer_sequence(list(seq)).edges]
        yield tuple(sorted(tuple(sorted(e)) for e in edges))


def _flows(src: list[int], dst: list[int], allowed):
    """Nonnegative integer matrices with given row/column sums on allowed cells."""
    rows, cols = len(src), len(dst)
    cells = [(i, j) for i in range(rows) for j in range(cols) if allowed(i, j)]

    def rec(idx, rem_r, rem_c, acc):
        if idx == len(cells):
            if not any(rem_r) and not any(rem_c):
                yield dict(acc)
            return
        i, j = cells[idx]
        for c in range(min(rem_r[i], rem_c[j]), -1, -1):
            rem_r[i] -= c
            rem_c[j] -= c
            if c:
                acc[(i, j)] = c
            yield from rec(idx + 1, rem_r, rem_c, acc)
            acc.pop((i, j), None)
            rem_r[i] += c
            rem_c[j] += c

    yield from rec(0, list(src), list(dst), {})


def _positive_placements(nverts: int, types: RobotTypes):
    return list(placements(range(nverts), types.counts))


@lru_cache(maxsize=None)
def generate_connectivity_library(k: int, types: RobotTypes | None = None, bound: int = CONNECTIVITY_BOUND) -> FormationLibrary:
    """Explicit library whose valid configurations are exactly the connected ones.

    Formations are all connected graphs on at most k vertices with every vertex
    occupied; transpositions are the unions of a spanning tree of the source
    support, a spanning tree of the target support and the move edges, over
    every way of moving robots along at most one edge.
    """
    if types is None:
        types = RobotTypes.homogeneous(k)
    if types.k != k:
        raise ConfigurationError(f"robot types hold {types.k} robots, expected {k}")
    if k > bound:
        raise ConfigurationError(f"connectivity library for k={k} exceeds bound {bound}")
    m = len(types)
    formations = []
    seen = _IsoIndex()
    for nv in range(1, k + 1):
        possible = list(itertools.combinations(range(nv), 2))
        graphs = []
        for r in range(nv - 1, len(possible) + 1):
            for es in itertools.combinations(possible, r):
                g = Graph(nv, es)
                if g.is_connected():
                    graphs.append(g)
        for g in graphs:
            for x in _positive_placements(nv, types):
                if seen.add(g, _vec_labels(g, x, m)):
                    formations.append(Formation(f"c{len(formations)}", g, x))

    transpositions = []
    tseen = _IsoIndex()
    for s in range(1, k + 1):
        for d in range(1, k + 1):
            for overlap in range(0, min(s, d) + 1):
                u = s + d - overlap
                S = tuple(range(s))
                D = tuple(range(s - overlap, u))
                for xs in placements(S, types.counts):
                    for xd in placements(D, types.counts):
                        sv = xs.vectors(m)
                        dv = xd.vectors(m)
                        for moves in _type_flows(sv, dv, S, D, m):
                            move_edges = {tuple(sorted((a, b))) for a, b in moves if a != b}
                            for ts in _spanning_trees(S):
                                for td in _spanning_trees(D):
                                    es = set(ts) | set(td) | move_edges
                                    g = Graph(u, es)
                                    if not g.is_connected():
                                        continue
                                    labels = [(sv.get(v, (0,) * m), dv.get(v, (0,) * m)) for v in range(u)]
                                    if tseen.add(g, labels):
                                        transpositions.append(Transposition(f"t{len(transpositions)}", g, xs, xd))
    return FormationLibrary(types, tuple(formations), tuple(transpositions))


def _type_flows(sv, dv, S, D, m):
    """Distinct sets of (from, to) move pairs realisable by some per-type flow."""
    zero = (0,) * m
    found = set()
    per_type = []
    for t in range(m):
        src = [sv.get(v, zero)[t] for v in S]
        dst = [dv.get(v, zero)[t] for v in D]
        options = set()
        for fl in _flows(src, dst, lambda i, j: True):
            options.add(frozenset((S[i], D[j]) for (i, j) in fl))
        per_type.append(options)
    for combo in itertools.product(*per_type):
        found.add(frozenset().union(*combo))
    return sorted(found, key=sorted)


def _pattern_of(backend, g: Graph, x: Configuration):
    """Host vertices and host edges of the pattern anchoring ``x``."""
    if getattr(backend, "kind", None) == "explicit":
        for a in backend.anchors(g, x):
            f = backend.library.formation(a.formation)
            verts = set(a.phi)
            edges = [(a.phi[p], a.phi[q]) for p, q in f.graph.edges]
            return verts, edges
        raise PreconditionError("configuration is not valid under the backend")
    occ = x.occupied()
    return set(occ), [(u, v) for u, v in g.edges if u in occ and v in occ]


def regroup_sequence(g: Graph, a, target: int, backend, check: bool = True) -> list[Configuration]:
    """Transitions collapsing every robot onto ``target``, excluding ``a`` itself.

    The pattern is walked in reverse breadth-first order from ``target``: each
    step first tries to pull every robot on the deepest occupied level one
    edge inward at once and falls back to one vertex at a time.
    """
    x = as_config(a)
    verts, edges = _pattern_of(backend, g, x)
    if target not in verts:
        raise PreconditionError(f"target {target} is not active")
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    parent = {target: target}
    depth = {target: 0}
    order = [target]
    for u in order:
        for w in sorted(adj[u]):
            if w not in parent:
                parent[w] = u
                depth[w] = depth[u] + 1
                order.append(w)
    if len(order) != len(verts):
        raise PreconditionError("anchoring pattern is not connected")

    def move(cur: Configuration, movers) -> Configuration:
        mapping = {v: v for v in range(g.n)}
        for w in movers:
            mapping[w] = parent[w]
        return cur.relabel(mapping)

    def ok(cur, nxt):
        if not check:
            return True
        return backend.is_valid_config(g, nxt) and backend.is_valid_transition(g, cur, nxt)

    out = []
    cur = x
    while cur.occupied() != {target}:
        occ = cur.occupied()
        deepest = max(depth[v] for v in occ)
        level = sorted(v for v in occ if depth[v] == deepest)
        nxt = move(cur, level)
        if not ok(cur, nxt):
            for w in level:
                nxt = move(cur, [w])
                if ok(cur, nxt):
                    break
            else:
                raise NonCollapsibleError(f"no contraction move available from {cur}")
        out.append(nxt)
        cur = nxt
    return out
