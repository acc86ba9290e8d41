"""Host graphs, robot configurations, traversals and the traversal checker.

Vertices are dense integers ``0..n-1``; optional string labels are only used at
I/O boundaries. Configurations are immutable sparse count maps keyed by
``(vertex, type_index)`` and compare by their counts alone.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import ConfigurationError, GraphError, PreconditionError


class Graph:
    """Undirected simple graph on vertices ``0..n-1``."""

    __slots__ = ("n", "_adj", "_edges", "labels", "_masks", "_index")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), labels: Optional[Sequence[str]] = None):
        if n < 0:
            raise GraphError("vertex count must be non-negative")
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self._adj = tuple(tuple(sorted(a)) for a in adj)
        self._edges = tuple(sorted((u, v) for u in range(n) for v in self._adj[u] if u < v))
        self._masks = tuple(sum(1 << w for w in a) for a in self._adj)
        if labels is None:
            labels = [str(v) for v in range(n)]
        labels = tuple(str(s) for s in labels)
        if len(labels) != n or len(set(labels)) != n:
            raise GraphError("labels must be a bijection onto the vertex set")
        self.labels = labels
        self._index = {s: i for i, s in enumerate(labels)}

    @classmethod
    def from_labeled_edges(cls, vertices: Sequence[str], edges: Iterable[tuple[str, str]]) -> "Graph":
        index = {s: i for i, s in enumerate(vertices)}
        try:
            pairs = [(index[a], index[b]) for a, b in edges]
        except KeyError as exc:
            raise GraphError(f"unknown vertex label {exc.args[0]!r}") from None
        return cls(len(vertices), pairs, vertices)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self._edges

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def neighbor_mask(self, v: int) -> int:
        return self._masks[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return (self._masks[u] >> v) & 1 == 1

    def index(self, label: str) -> int:
        return self._index[label]

    def is_connected(self, vertices: Optional[Iterable[int]] = None) -> bool:
        """Whether ``vertices`` (default: all) induce a connected subgraph."""
        verts = set(range(self.n)) if vertices is None else set(vertices)
        if not verts:
            return True
        start = next(iter(verts))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self._adj[u]:
                if w in verts and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(verts)

    def is_tree(self) -> bool:
        return self.n >= 1 and len(self._edges) == self.n - 1 and self.is_connected()

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", tuple[int, ...]]:
        """Induced subgraph with its vertices renumbered; also returns new->old map."""
        order = tuple(sorted(set(vertices)))
        pos = {v: i for i, v in enumerate(order)}
        edges = [(pos[u], pos[v]) for u, v in self._edges if u in pos and v in pos]
        return Graph(len(order), edges, [self.labels[v] for v in order]), order

    def _key(self):
        return (self.n, self._edges, self.labels)

    def __eq__(self, other):
        return isinstance(other, Graph) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Graph(n={self.n}, edges={list(self._edges)})"


class RootedTree:
    """A tree together with a root, parent array and ordered children lists."""

    def __init__(self, graph: Graph, root: int = 0):
        if not graph.is_tree():
            raise GraphError("graph is not a tree")
        if not 0 <= root < graph.n:
            raise GraphError(f"root {root} out of range")
        parent = [-1] * graph.n
        order = [root]
        seen = {root}
        for u in order:  # list grows while iterating: BFS
            for w in graph.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    parent[w] = u
                    order.append(w)
        self.graph = graph
        self.root = root
        self.parent = tuple(parent)
        self.bfs_order = tuple(order)
        kids: list[list[int]] = [[] for _ in range(graph.n)]
        for v in order[1:]:
            kids[parent[v]].append(v)
        self.children = tuple(tuple(sorted(c)) for c in kids)

    @property
    def n(self) -> int:
        return self.graph.n

    def subtree_vertices(self, v: int) -> frozenset[int]:
        out = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for c in self.children[u]:
                out.add(c)
                stack.append(c)
        return frozenset(out)

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]


@dataclass(frozen=True)
class RobotTypes:
    names: tuple[str, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.counts) or not self.names:
            raise ConfigurationError("robot types need one positive count per type")
        if len(set(self.names)) != len(self.names):
            raise ConfigurationError("duplicate robot type name")
        if any(c < 1 for c in self.counts):
            raise ConfigurationError("every robot type needs at least one robot")

    @classmethod
    def homogeneous(cls, k: int, name: str = "r") -> "RobotTypes":
        return cls((name,), (k,))

    @property
    def k(self) -> int:
        return sum(self.counts)

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True, order=True)
class Configuration:
    """Sparse count map ``(vertex, type) -> count`` with positive counts only.

    ``items`` holds sorted ``(vertex, type, count)`` triples, so equality and
    hashing depend on the count map alone.
    """

    items: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        prev = None
        for v, t, c in self.items:
            if c <= 0:
                raise ConfigurationError("configuration counts must be positive")
            if prev is not None and (v, t) <= prev:
                raise ConfigurationError("configuration items must be sorted and unique")
            prev = (v, t)

    @classmethod
    def from_counts(cls, counts: Mapping[tuple[int, int], int]) -> "Configuration":
        return cls(tuple(sorted((v, t, c) for (v, t), c in counts.items() if c > 0)))

    @classmethod
    def all_at(cls, vertex: int, types: RobotTypes) -> "Configuration":
        return cls(tuple((vertex, t, c) for t, c in enumerate(types.counts)))

    def counts(self) -> dict[tuple[int, int], int]:
        return {(v, t): c for v, t, c in self.items}

    def count(self, v: int, t: int) -> int:
        for u, s, c in self.items:
            if u == v and s == t:
                return c
        return 0

    def occupied(self) -> frozenset[int]:
        return frozenset(v for v, _, _ in self.items)

    @property
    def mask(self) -> int:
        m = 0
        for v, _, _ in self.items:
            m |= 1 << v
        return m

    def vectors(self, ntypes: int) -> dict[int, tuple[int, ...]]:
        """Per occupied vertex, the tuple of counts by type."""
        out: dict[int, list[int]] = {}
        for v, t, c in self.items:
            out.setdefault(v, [0] * ntypes)[t] = c
        return {v: tuple(vec) for v, vec in out.items()}

    def totals(self, ntypes: int) -> tuple[int, ...]:
        tot = [0] * ntypes
        for _, t, c in self.items:
            tot[t] += c
        return tuple(tot)

    def relabel(self, mapping: Mapping[int, int] | Sequence[int]) -> "Configuration":
        """Push the configuration through a vertex map, adding merged counts."""
        acc: dict[tuple[int, int], int] = {}
        for v, t, c in self.items:
            key = (mapping[v], t)
            acc[key] = acc.get(key, 0) + c
        return Configuration.from_counts(acc)

    def __repr__(self):
        return "Configuration(" + ", ".join(f"{v}:{t}x{c}" for v, t, c in self.items) + ")"


@dataclass(frozen=True)
class AnchoredConfiguration:
    """A configuration plus the formation and monomorphism witnessing it.

    The anchor is auxiliary: equality only looks at ``config``.
    """

    config: Configuration
    formation: Optional[str] = field(default=None, compare=False)
    phi: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.phi and not self.config.occupied() <= frozenset(self.phi):
            raise ConfigurationError("occupied vertices must be active")

    @property
    def active(self) -> frozenset[int]:
        return frozenset(self.phi) if self.phi else self.config.occupied()


def as_config(x) -> Configuration:
    return x.config if isinstance(x, AnchoredConfiguration) else x


@dataclass(frozen=True)
class Traversal:
    """Sequence ``(x^0, ..., x^t)`` of configurations; time is ``t``."""

    configs: tuple[Configuration, ...]

    def __init__(self, configs: Iterable):
        object.__setattr__(self, "configs", tuple(as_config(x) for x in configs))

    def __len__(self):
        return len(self.configs)

    def __iter__(self) -> Iterator[Configuration]:
        return iter(self.configs)

    def __getitem__(self, i):
        return self.configs[i]

    @property
    def time(self) -> int:
        return traversal_time(self)


@dataclass(frozen=True)
class Instance:
    graph: Graph
    types: RobotTypes
    backend: object
    x0: Configuration
    xf: Configuration
    root: Optional[int] = None
    decomposition: object = None

    def __post_init__(self):
        for name in ("x0", "xf"):
            x = getattr(self, name)
            if x.totals(len(self.types)) != self.types.counts:
                raise ConfigurationError(f"{name} does not place exactly k_m robots of every type")
            if any(v >= self.graph.n for v in x.occupied()):
                raise ConfigurationError(f"{name} uses a vertex outside the graph")
            if not self.backend.is_valid_config(self.graph, x):
                raise ConfigurationError(f"{name} is not a valid configuration")

    @property
    def tree(self) -> RootedTree:
        root = self.root
        if root is None:
            root = min(self.x0.occupied())
        return RootedTree(self.graph, root)


def occupied(config: Configuration) -> frozenset[int]:
    return config.occupied()


def is_connected_configuration(g: Graph, config) -> bool:
    occ = as_config(config).occupied()
    for v in occ:
        if not 0 <= v < g.n:
            raise GraphError(f"vertex {v} out of range")
    return g.is_connected(occ)


def contract_edge(g: Graph, e: tuple[int, int]) -> tuple[Graph, tuple[int, ...]]:
    """Merge the endpoints of ``e`` into one vertex.

    The merged vertex takes the smaller id; later ids shift down by one.
    Returns the contracted graph and the old->new vertex map.
    """
    u, v = e
    if not g.has_edge(u, v):
        raise GraphError(f"edge {e} not present")
    keep, drop = min(u, v), max(u, v)
    mapping = tuple(keep if x == drop else (x - 1 if x > drop else x) for x in range(g.n))
    edges = {tuple(sorted((mapping[a], mapping[b]))) for a, b in g.edges}
    edges = [(a, b) for a, b in edges if a != b]
    labels = [g.labels[x] for x in range(g.n) if x != drop]
    labels[keep] = g.labels[keep] + "+" + g.labels[drop]
    return Graph(g.n - 1, edges, labels), mapping


def traversal_time(x: Traversal | Sequence) -> int:
    if len(x) == 0:
        raise PreconditionError("empty traversal has no time")
    return len(x) - 1


@dataclass
class ValidationReport:
    start_ok: bool
    end_ok: bool
    invalid_configs: list[int]
    invalid_steps: list[int]
    unvisited: list[int]
    time: Optional[int]

    @property
    def ok(self) -> bool:
        return (
            self.start_ok
            and self.end_ok
            and not self.invalid_configs
            and not self.invalid_steps
            and not self.unvisited
            and self.time is not None
        )

    def failures(self) -> list[str]:
        out = []
        if self.time is None:
            out.append("empty traversal")
        if not self.start_ok:
            out.append("start configuration differs from x0")
        if not self.end_ok:
            out.append("end configuration differs from xf")
        for i in self.invalid_configs:
            out.append(f"configuration {i} is not valid")
        for i in self.invalid_steps:
            out.append(f"transition {i}->{i + 1} is not valid")
        if self.unvisited:
            out.append("coverage incomplete; unvisited: " + ", ".join(map(str, self.unvisited)))
        return out


def validate_traversal(inst: Instance, x: Traversal | Sequence) -> ValidationReport:
    """Check endpoints, every step, and coverage. Never raises."""
    configs = [as_config(c) for c in x]
    g, backend = inst.graph, inst.backend
    if not configs:
        return ValidationReport(False, False, [], [], list(range(g.n)), None)
    bad_cfg = []
    for i, c in enumerate(configs):
        try:
            ok = all(v < g.n for v in c.occupied()) and backend.is_valid_config(g, c)
        except Exception:
            ok = False
        if not ok:
            bad_cfg.append(i)
    bad_steps = []
    for i in range(len(configs) - 1):
        if i in bad_cfg or i + 1 in bad_cfg:
            bad_steps.append(i)
            continue
        try:
            ok = backend.is_valid_transition(g, configs[i], configs[i + 1])
        except Exception:
            ok = False
        if not ok:
            bad_steps.append(i)
    seen = 0
    for c in configs:
        seen |= c.mask
    unvisited = [v for v in range(g.n) if not (seen >> v) & 1]
    return ValidationReport(
        configs[0] == inst.x0,
        configs[-1] == inst.xf,
        bad_cfg,
        bad_steps,
        unvisited,
        len(configs) - 1,
    )


def bfs_distances(g: Graph, source: int) -> list[int]:
    dist = [-1] * g.n
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for w in g.neighbors(u):
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist
