"""Graph monomorphism enumeration and per-type robot transport feasibility."""

from __future__ import annotations

from typing import Iterator, Mapping, Optional

from .model import Configuration, Graph


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def find_monomorphisms(
    pattern: Graph,
    host: Graph,
    pin: Optional[Mapping[int, int]] = None,
    candidates: Optional[Mapping[int, object]] = None,
) -> Iterator[tuple[int, ...]]:
    """Yield every injective map ``pattern -> host`` sending edges to edges.

    Maps are tuples indexed by pattern vertex, produced in lexicographic order.
    ``pin`` fixes some images; ``candidates`` restricts the image of a pattern
    vertex to a given iterable (or bitmask) of host vertices.
    """
    m = pattern.n
    if m == 0:
        yield ()
        return
    if m > host.n:
        return
    full = (1 << host.n) - 1
    domain = [full] * m
    for p in range(m):
        deg = pattern.degree(p)
        if deg:
            domain[p] &= sum(1 << v for v in range(host.n) if host.degree(v) >= deg)
    if candidates:
        for p, allowed in candidates.items():
            if isinstance(allowed, int):
                domain[p] &= allowed
            else:
                domain[p] &= sum(1 << v for v in allowed)
    if pin:
        for p, v in pin.items():
            domain[p] &= 1 << v
    if any(d == 0 for d in domain):
        return
    earlier = [[q for q in pattern.neighbors(p) if q < p] for p in range(m)]
    image = [0] * m

    def extend(p: int, used: int) -> Iterator[tuple[int, ...]]:
        allowed = domain[p] & ~used
        for q in earlier[p]:
            allowed &= host.neighbor_mask(image[q])
            if not allowed:
                return
        for v in _bits(allowed):
            image[p] = v
            if p + 1 == m:
                yield tuple(image)
            else:
                yield from extend(p + 1, used | (1 << v))

    yield from extend(0, 0)


def _max_matching(left: list[int], right: list[int], ok) -> tuple[int, list[int]]:
    match_r = [-1] * len(right)

    def augment(i: int, seen: list[bool]) -> bool:
        for j in range(len(right)):
            if not seen[j] and ok(left[i], right[j]):
                seen[j] = True
                if match_r[j] < 0 or augment(match_r[j], seen):
                    match_r[j] = i
                    return True
        return False

    size = 0
    for i in range(len(left)):
        if augment(i, [False] * len(right)):
            size += 1
    return size, match_r


def transport_plan(
    graph: Graph, src: Configuration, dst: Configuration, ntypes: int
) -> Optional[list[tuple[int, int, int, int]]]:
    """Assign robots of ``src`` to ``dst`` moving each along at most one edge.

    Robots of a type are interchangeable, so this is a per-type bipartite
    matching between robot units. Returns ``(from, to, type, count)`` moves or
    ``None`` when no such assignment exists.
    """
    if src.totals(ntypes) != dst.totals(ntypes):
        return None

    def reachable(u: int, w: int) -> bool:
        return u == w or graph.has_edge(u, w)

    moves: dict[tuple[int, int, int], int] = {}
    for t in range(ntypes):
        left = [v for v, s, c in src.items if s == t for _ in range(c)]
        right = [v for v, s, c in dst.items if s == t for _ in range(c)]
        size, match_r = _max_matching(left, right, reachable)
        if size != len(left):
            return None
        for j, i in enumerate(match_r):
            key = (left[i], right[j], t)
            moves[key] = moves.get(key, 0) + 1
    return sorted((u, w, t, c) for (u, w, t), c in moves.items())
