"""Formations, transpositions and the two constraint backends.

A backend answers three queries about a host graph: is a configuration valid,
is a pair of configurations a valid transition, and what are the valid
successors of a configuration. ``ExplicitBackend`` evaluates a formation
library through monomorphisms; ``ImplicitConnectedBackend`` is the fast path
where every connected configuration is valid and a transition is any
one-edge-per-robot move between connected configurations.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import ConfigurationError
from .matching import find_monomorphisms, transport_plan
from .model import AnchoredConfiguration, Configuration, Graph, RobotTypes, as_config

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Formation:
    id: str
    graph: Graph
    placement: Configuration


@dataclass(frozen=True)
class Transposition:
    """Pattern graph with a source and target placement one move apart.

    Transpositions are undirected: the reversed pair is equally valid.
    """

    id: str
    graph: Graph
    source: Configuration
    target: Configuration
    source_formation: Optional[str] = None
    target_formation: Optional[str] = None

    def moves(self, ntypes: int):
        """A witness move assignment, or ``None`` if the robots cannot be routed."""
        return transport_plan(self.graph, self.source, self.target, ntypes)


@dataclass(frozen=True)
class FormationLibrary:
    types: RobotTypes
    formations: tuple[Formation, ...]
    transpositions: tuple[Transposition, ...]

    def __post_init__(self):
        ids = set()
        for f in self.formations:
            if f.id in ids:
                raise ConfigurationError(f"duplicate formation id {f.id!r}")
            ids.add(f.id)
            if not f.graph.is_connected() or f.graph.n == 0:
                raise ConfigurationError(f"formation {f.id!r} has a disconnected pattern graph")
            if f.placement.totals(len(self.types)) != self.types.counts:
                raise ConfigurationError(f"formation {f.id!r} does not place k_m robots per type")
        for t in self.transpositions:
            for ref in (t.source_formation, t.target_formation):
                if ref is not None and ref not in ids:
                    raise ConfigurationError(f"transposition {t.id!r} references unknown formation {ref!r}")

    def formation(self, fid: str) -> Formation:
        for f in self.formations:
            if f.id == fid:
                return f
        raise KeyError(fid)

    @property
    def size(self) -> int:
        """Representation length: adjacency lists plus |V_a| x |M| placement tables."""
        m = len(self.types)
        return sum(f.graph.n + 2 * len(f.graph.edges) + f.graph.n * m for f in self.formations)

    @property
    def max_pattern_vertices(self) -> int:
        return max((f.graph.n for f in self.formations), default=1)

    @property
    def max_pattern_edges(self) -> int:
        return max((len(f.graph.edges) for f in self.formations), default=0)


def _zero(ntypes: int) -> tuple[int, ...]:
    return (0,) * ntypes


def _label_masks(g: Graph, vecs: dict[int, tuple], ntypes: int) -> dict[tuple, int]:
    masks: dict[tuple, int] = {}
    for v in range(g.n):
        lab = vecs.get(v, _zero(ntypes))
        masks[lab] = masks.get(lab, 0) | (1 << v)
    return masks


def _pattern_labels(n: int, vecs: dict[int, tuple], ntypes: int) -> tuple[tuple, ...]:
    return tuple(vecs.get(p, _zero(ntypes)) for p in range(n))


def _form_key(vecs: dict[int, tuple]) -> tuple:
    return tuple(sorted(vecs.values()))


def is_in_form(config, f: Formation, host: Graph, ntypes: Optional[int] = None) -> Iterator[AnchoredConfiguration]:
    """One anchored configuration per monomorphism witnessing ``config`` in ``f``-form."""
    x = as_config(config)
    if ntypes is None:
        ntypes = 1 + max((t for _, t, _ in f.placement.items), default=0)
    xv = x.vectors(ntypes)
    fv = f.placement.vectors(ntypes)
    if _form_key(xv) != _form_key(fv):
        return
    masks = _label_masks(host, xv, ntypes)
    labels = _pattern_labels(f.graph.n, fv, ntypes)
    cand = {p: masks.get(lab, 0) for p, lab in enumerate(labels)}
    for phi in find_monomorphisms(f.graph, host, candidates=cand):
        yield AnchoredConfiguration(x, f.id, phi)


def check_transposition(t: Transposition, types: RobotTypes) -> list[str]:
    """Diagnostics for a transposition; empty when it is valid."""
    m = len(types)
    problems = []
    if t.source.totals(m) != t.target.totals(m):
        problems.append("source and target robot totals differ per type")
    if any(v >= t.graph.n for v in t.source.occupied() | t.target.occupied()):
        problems.append("placement uses a vertex outside the pattern graph")
    if not problems and t.moves(m) is None:
        problems.append("no assignment moves every robot along at most one edge")
    return problems


def validate_transposition(t: Transposition, types: RobotTypes) -> bool:
    problems = check_transposition(t, types)
    for p in problems:
        log.info("transposition %s invalid: %s", t.id, p)
    return not problems


class _Orientation:
    __slots__ = ("graph", "src", "dst", "src_labels", "dst_labels", "pair_key", "src_key")

    def __init__(self, graph: Graph, src: Configuration, dst: Configuration, ntypes: int):
        self.graph = graph
        self.src = src
        self.dst = dst
        sv, dv = src.vectors(ntypes), dst.vectors(ntypes)
        self.src_labels = _pattern_labels(graph.n, sv, ntypes)
        self.dst_labels = _pattern_labels(graph.n, dv, ntypes)
        zero = _zero(ntypes)
        self.pair_key = tuple(
            sorted((a, b) for a, b in zip(self.src_labels, self.dst_labels) if a != zero or b != zero)
        )
        self.src_key = _form_key(sv)


class ExplicitBackend:
    """Constraint backend driven by an explicit formation library."""

    kind = "explicit"

    def __init__(self, library: FormationLibrary):
        self.library = library
        self.types = library.types
        m = self.ntypes = len(library.types)
        self._forms: dict[tuple, list[Formation]] = {}
        for f in library.formations:
            self._forms.setdefault(_form_key(f.placement.vectors(m)), []).append(f)
        self._by_pair: dict[tuple, list[_Orientation]] = {}
        self._by_src: dict[tuple, list[_Orientation]] = {}
        for t in library.transpositions:
            for src, dst in ((t.source, t.target), (t.target, t.source)):
                o = _Orientation(t.graph, src, dst, m)
                self._by_pair.setdefault(o.pair_key, []).append(o)
                self._by_src.setdefault(o.src_key, []).append(o)

    @property
    def formation_count(self) -> int:
        return len(self.library.formations)

    @property
    def max_pattern_vertices(self) -> int:
        return self.library.max_pattern_vertices

    @property
    def max_pattern_edges(self) -> int:
        return self.library.max_pattern_edges

    def anchors(self, g: Graph, config) -> Iterator[AnchoredConfiguration]:
        x = as_config(config)
        if x.totals(self.ntypes) != self.types.counts:
            return
        for f in self._forms.get(_form_key(x.vectors(self.ntypes)), ()):
            yield from is_in_form(x, f, g, self.ntypes)

    def is_valid_config(self, g: Graph, config) -> bool:
        return next(self.anchors(g, config), None) is not None

    def footprint(self, g: Graph, config) -> frozenset[int]:
        """Union of the active sets of every anchoring (connected, contains Occ)."""
        out: set[int] = set()
        for a in self.anchors(g, config):
            out.update(a.phi)
        return frozenset(out)

    def is_valid_transition(self, g: Graph, a, b) -> bool:
        a, b = as_config(a), as_config(b)
        m = self.ntypes
        av, bv = a.vectors(m), b.vectors(m)
        zero = _zero(m)
        union = set(av) | set(bv)
        key = tuple(sorted((av.get(v, zero), bv.get(v, zero)) for v in union))
        orients = self._by_pair.get(key)
        if not orients:
            return False
        masks: dict[tuple, int] = {}
        for v in range(g.n):
            lab = (av.get(v, zero), bv.get(v, zero))
            masks[lab] = masks.get(lab, 0) | (1 << v)
        for o in orients:
            cand = {p: masks.get((o.src_labels[p], o.dst_labels[p]), 0) for p in range(o.graph.n)}
            if next(find_monomorphisms(o.graph, g, candidates=cand), None) is not None:
                return True
        return False

    def successors(self, g: Graph, config) -> list[Configuration]:
        a = as_config(config)
        m = self.ntypes
        av = a.vectors(m)
        masks = _label_masks(g, av, m)
        out = set()
        for o in self._by_src.get(_form_key(av), ()):
            cand = {p: masks.get(lab, 0) for p, lab in enumerate(o.src_labels)}
            for phi in find_monomorphisms(o.graph, g, candidates=cand):
                out.add(o.dst.relabel(phi))
        return sorted(b for b in out if self.is_valid_config(g, b))

    def all_configurations(self, g: Graph) -> list[Configuration]:
        out = set()
        for f in self.library.formations:
            for phi in find_monomorphisms(f.graph, g):
                out.add(f.placement.relabel(phi))
        return sorted(out)


def placements(vertices, counts: tuple[int, ...]) -> Iterator[Configuration]:
    """All configurations putting ``counts[t]`` robots of type t on ``vertices``
    such that every listed vertex holds at least one robot."""
    vertices = tuple(sorted(vertices))
    per_type = [list(itertools.combinations_with_replacement(vertices, c)) for c in counts]
    need = set(vertices)
    for choice in itertools.product(*per_type):
        acc: dict[tuple[int, int], int] = {}
        for t, vs in enumerate(choice):
            for v in vs:
                acc[(v, t)] = acc.get((v, t), 0) + 1
        if {v for v, _ in acc} == need:
            yield Configuration.from_counts(acc)


def connected_subsets(g: Graph, max_size: int) -> list[frozenset[int]]:
    """All non-empty vertex sets of size <= max_size inducing a connected subgraph."""
    found: set[frozenset[int]] = set()
    frontier = [frozenset([v]) for v in range(g.n)]
    found.update(frontier)
    for _ in range(max_size - 1):
        nxt = []
        for s in frontier:
            for u in s:
                for w in g.neighbors(u):
                    if w not in s:
                        t = s | {w}
                        if t not in found:
                            found.add(t)
                            nxt.append(t)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


class ImplicitConnectedBackend:
    """All connected configurations are valid; transitions move each robot
    along at most one edge and keep both endpoints connected."""

    kind = "implicit"

    def __init__(self, types: RobotTypes):
        self.types = types
        self.ntypes = len(types)
        self._stats = None

    def _library_stats(self):
        if self._stats is None:
            from .library import generate_connectivity_library

            lib = generate_connectivity_library(self.types.k, self.types)
            self._stats = (len(lib.formations), lib.max_pattern_vertices, lib.max_pattern_edges)
        return self._stats

    @property
    def formation_count(self) -> int:
        return self._library_stats()[0]

    @property
    def max_pattern_vertices(self) -> int:
        return self.types.k

    @property
    def max_pattern_edges(self) -> int:
        return self._library_stats()[2]

    def is_valid_config(self, g: Graph, config) -> bool:
        x = as_config(config)
        if x.totals(self.ntypes) != self.types.counts:
            return False
        occ = x.occupied()
        return all(v < g.n for v in occ) and g.is_connected(occ)

    def anchors(self, g: Graph, config) -> Iterator[AnchoredConfiguration]:
        x = as_config(config)
        if self.is_valid_config(g, x):
            yield AnchoredConfiguration(x, "connected", tuple(sorted(x.occupied())))

    def footprint(self, g: Graph, config) -> frozenset[int]:
        return as_config(config).occupied()

    def is_valid_transition(self, g: Graph, a, b) -> bool:
        a, b = as_config(a), as_config(b)
        if not (self.is_valid_config(g, a) and self.is_valid_config(g, b)):
            return False
        return transport_plan(g, a, b, self.ntypes) is not None

    def successors(self, g: Graph, config) -> list[Configuration]:
        a = as_config(config)
        options = []
        for v, t, c in a.items:
            targets = (v,) + g.neighbors(v)
            options.append([(t, combo) for combo in itertools.combinations_with_replacement(targets, c)])
        out = set()
        for choice in itertools.product(*options):
            acc: dict[tuple[int, int], int] = {}
            for t, combo in choice:
                for w in combo:
                    acc[(w, t)] = acc.get((w, t), 0) + 1
            b = Configuration.from_counts(acc)
            if g.is_connected(b.occupied()):
                out.add(b)
        return sorted(out)

    def all_configurations(self, g: Graph) -> list[Configuration]:
        out = []
        for s in connected_subsets(g, self.types.k):
            out.extend(placements(s, self.types.counts))
        return sorted(set(out))


def is_valid_transition(backend, g: Graph, a, b) -> bool:
    return backend.is_valid_transition(g, a, b)


def enumerate_transitions(backend, g: Graph, a) -> list[Configuration]:
    """Complete, duplicate-free, sorted list of valid successors of ``a``."""
    return backend.successors(g, a)


class ConfigSpace:
    """Memoised successor sets and footprints of one backend on one host graph."""

    def __init__(self, graph: Graph, backend):
        self.graph = graph
        self.backend = backend
        self._succ: dict[Configuration, tuple[Configuration, ...]] = {}
        self._succ_set: dict[Configuration, frozenset[Configuration]] = {}
        self._foot: dict[Configuration, frozenset[int]] = {}

    def successors(self, x: Configuration) -> tuple[Configuration, ...]:
        s = self._succ.get(x)
        if s is None:
            s = self._succ[x] = tuple(self.backend.successors(self.graph, x))
        return s

    def successor_set(self, x: Configuration) -> frozenset[Configuration]:
        s = self._succ_set.get(x)
        if s is None:
            s = self._succ_set[x] = frozenset(self.successors(x))
        return s

    def is_transition(self, a: Configuration, b: Configuration) -> bool:
        return b in self.successor_set(a)

    def footprint(self, x: Configuration) -> frozenset[int]:
        f = self._foot.get(x)
        if f is None:
            f = self._foot[x] = self.backend.footprint(self.graph, x)
        return f
