"""Transition shapes of three homogeneous robots entering a subtree.

A transition enters the subtree of a vertex ``R`` (parent ``P``) when before
it robots sit on ``R`` but nowhere below, and after it some child of ``R`` is
occupied. Its shape is the pair of local occupancy descriptors around ``R``;
they depend on counts alone, never on which neighbour or child is used.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .errors import PreconditionError
from .model import Configuration, Graph, Instance, RobotTypes, RootedTree, Traversal, as_config, validate_traversal
from .oracle import z_transform

BAR = "̄"
PBAR = "P" + BAR

# (robots next to P other than R, at P, at R)
PRE_TAGS = {(0, 0, 3): "O", (0, 1, 2): PBAR, (0, 2, 1): "P", (1, 1, 1): "L"}
# (at P, at R, sorted counts on the occupied children of R)
POST_TAGS = {
    (0, 0, (3,)): "O",
    (0, 1, (2,)): PBAR,
    (0, 2, (1,)): "P",
    (0, 1, (1, 1)): "V",
    (1, 1, (1,)): "L",
}


@dataclass(frozen=True, order=True)
class ShapeClass:
    pre: tuple
    post: tuple

    @property
    def pre_tag(self) -> str:
        return PRE_TAGS[self.pre]

    @property
    def post_tag(self) -> str:
        return POST_TAGS[self.post]

    @property
    def name(self) -> str:
        return self.pre_tag + self.post_tag

    @property
    def ascii_name(self) -> str:
        return self.name.replace(PBAR, "Pbar")

    def __str__(self):
        return self.name


def _check_k3(types: RobotTypes):
    if len(types) != 1 or types.k != 3:
        raise PreconditionError("shape analysis needs exactly three homogeneous robots")


def _descriptors(t: RootedTree, a: Configuration, b: Configuration, r: int):
    p = t.parent[r]
    kids = set(t.children[r])
    ca, cb = a.counts(), b.counts()

    def at(c, v):
        return 0 if v is None or v < 0 else c.get((v, 0), 0)

    qs = [w for w in t.graph.neighbors(p) if w != r] if p is not None and p >= 0 else []
    pre = (sum(at(ca, q) for q in qs), at(ca, p), at(ca, r))
    post = (at(cb, p), at(cb, r), tuple(sorted((cb[(c, 0)] for c in kids if (c, 0) in cb), reverse=True)))
    return pre, post


def is_entering(t: RootedTree, a, b, r: int) -> bool:
    """``a`` occupies ``r`` and nothing below it, ``b`` occupies a child of ``r``."""
    a, b = as_config(a), as_config(b)
    below = t.subtree_vertices(r) - {r}
    occ_a = a.occupied()
    return r in occ_a and not occ_a & below and any(c in b.occupied() for c in t.children[r])


def classify_transition_shape(t: RootedTree, a, b, pivot: int, types: Optional[RobotTypes] = None) -> Optional[ShapeClass]:
    """Shape of the transition ``a -> b`` entering the subtree of ``pivot``,
    or ``None`` when it does not enter there."""
    a, b = as_config(a), as_config(b)
    if types is not None:
        _check_k3(types)
    elif sum(c for _, _, c in a.items) != 3 or any(tp != 0 for _, tp, _ in a.items):
        raise PreconditionError("shape analysis needs exactly three homogeneous robots")
    if not is_entering(t, a, b, pivot):
        return None
    pre, post = _descriptors(t, a, b, pivot)
    if pre not in PRE_TAGS or post not in POST_TAGS:
        return None
    return ShapeClass(pre, post)


def shape_host() -> tuple[Graph, int]:
    """Neighbourhood large enough for every local shape: ``P`` with two
    further neighbours and a pivot ``R`` with four children."""
    # 0,1 = Q0,Q1; 2 = P; 3 = R; 4..7 children of R
    edges = [(0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (3, 6), (3, 7)]
    return Graph(8, edges), 3


def enumerate_shapes() -> list[ShapeClass]:
    """Every shape realised by a valid transition on the host, deduplicated."""
    from .formations import ImplicitConnectedBackend

    g, r = shape_host()
    types = RobotTypes.homogeneous(3)
    backend = ImplicitConnectedBackend(types)
    t = RootedTree(g, 0)
    found = set()
    for a in backend.all_configurations(g):
        if r not in a.occupied():
            continue
        for b in backend.successors(g, a):
            s = classify_transition_shape(t, a, b, r, types)
            if s is not None:
                found.add(s)
    return sorted(found, key=lambda s: (list(PRE_TAGS.values()).index(s.pre_tag), list(POST_TAGS.values()).index(s.post_tag)))


# ------------------------------------------------------------ repetitions


def entering_transitions(t: RootedTree, x, pivot: int) -> list[int]:
    configs = [as_config(c) for c in x]
    return [i for i in range(len(configs) - 1) if is_entering(t, configs[i], configs[i + 1], pivot)]


def count_entries(t: RootedTree, x) -> dict[int, int]:
    """Per vertex, how many transitions enter its subtree."""
    return {v: len(entering_transitions(t, x, v)) for v in range(t.n) if t.children[v]}


def repeated_shapes(t: RootedTree, x) -> list[tuple[int, int, int]]:
    """All ``(i, i', R)`` where two transitions enter ``R`` with one shape."""
    configs = [as_config(c) for c in x]
    out = []
    for r in range(t.n):
        if not t.children[r]:
            continue
        seen: dict[ShapeClass, list[int]] = {}
        for i in entering_transitions(t, configs, r):
            s = classify_transition_shape(t, configs[i], configs[i + 1], r)
            if s is not None:
                seen.setdefault(s, []).append(i)
        for idx in seen.values():
            out += [(a, b, r) for k, a in enumerate(idx) for b in idx[k + 1 :]]
    return sorted(out)


def find_repeated_shape(t: RootedTree, x) -> Optional[tuple[int, int, int]]:
    """Earliest ``(i, i', R)`` where two transitions enter ``R`` with one shape."""
    reps = repeated_shapes(t, x)
    return reps[0] if reps else None


def shape_z_transform(inst: Instance, x, i: int, j: int, pivot: int) -> Traversal:
    """Remove one of two same-shape entries into the subtree of ``pivot``.

    When the entries start from the same configuration the walk between them
    is reversed, then rejoined either directly (one or two steps shorter) or
    through all robots on ``pivot`` (same time). Otherwise the pre and post
    configurations are bridged directly, which keeps the time.
    """
    _check_k3(inst.types)
    t = inst.tree
    x = [as_config(c) for c in x]
    if not (0 <= i < j < len(x) - 1):
        raise PreconditionError(f"indices ({i}, {j}) do not name two transitions")
    s = classify_transition_shape(t, x[i], x[i + 1], pivot)
    if s is None or s != classify_transition_shape(t, x[j], x[j + 1], pivot):
        raise PreconditionError("transitions do not enter the subtree with the same shape")
    g, be = inst.graph, inst.backend

    def step(a, b):
        return a == b or be.is_valid_transition(g, a, b)

    if x[i] == x[j]:
        if x[i + 1] == x[j + 1]:
            return z_transform(x, i, j)
        if step(x[i + 1], x[j + 1]):
            out = x[: i + 1] + x[i + 1 : j][::-1] + x[j + 1 :]
        else:
            out = x[: i + 1] + x[i + 1 : j][::-1] + [Configuration.all_at(pivot, inst.types)] + x[j + 1 :]
    else:
        if not (step(x[i], x[j]) and step(x[i + 1], x[j + 1])):
            raise PreconditionError(f"shape {s} cannot be bridged here")
        out = x[: i + 1] + x[i + 1 : j + 1][::-1] + x[j + 1 :]
    out = [c for k, c in enumerate(out) if k == 0 or c != out[k - 1]]
    for a, b in zip(out, out[1:]):
        if not be.is_valid_transition(g, a, b):
            raise PreconditionError(f"shape {s} cannot be bridged here")
    return Traversal(out)


def normalize_shapes(inst: Instance, x, max_steps: int = 10_000) -> Traversal:
    """Apply ``shape_z_transform`` while some repetition can be removed
    without growing the time or the total number of subtree entries.

    Repetitions whose shared start already has every robot on the pivot
    come back unchanged from the regroup bridge and are left in place.
    """
    cur = Traversal(x)
    t = inst.tree

    def measure(y):
        return (y.time, sum(count_entries(t, y).values()))

    for _ in range(max_steps):
        key = measure(cur)
        for i, j, r in repeated_shapes(t, cur):
            try:
                nxt = shape_z_transform(inst, cur, i, j, r)
            except PreconditionError:
                continue
            if measure(nxt) < key and validate_traversal(inst, nxt).ok:
                cur = nxt
                break
        else:
            return cur
    raise PreconditionError(f"no fixed point after {max_steps} steps")


def _path(g, be, src, goal) -> list:
    """Shortest transition path from ``src`` to the first configuration
    satisfying ``goal``, excluding ``src``."""
    prev = {src: None}
    q = deque([src])
    while q:
        u = q.popleft()
        for w in sorted(be.successors(g, u)):
            if w in prev:
                continue
            prev[w] = u
            if goal(w):
                out = []
                while w != src:
                    out.append(w)
                    w = prev[w]
                return out[::-1]
            q.append(w)
    raise PreconditionError("goal unreachable")


def _covering_tour(g, be, start) -> list:
    """A closed walk from ``start`` occupying every vertex of ``g``."""
    cov = set(start.occupied())
    cur, out = start, []
    while len(cov) < g.n:
        step = _path(g, be, cur, lambda y: not y.occupied() <= cov)
        for y in step:
            cov |= y.occupied()
        out += step
        cur = step[-1]
    if cur != start:
        out += _path(g, be, cur, lambda y: y == start)
    return out


def shape_repeat_example(shape: ShapeClass):
    """A traversal on the shape host entering the pivot twice with ``shape``.

    Returns ``(inst, x, i, j, pivot)``. Both entries start from the same
    configuration and use posts that are not one transition apart, except
    when the shape allows two different starts that are one transition apart
    (LL); then posts one transition apart are used. A closed covering tour
    follows the repeat, so ``x`` and every splice of the repeat cover the host.
    """
    from .formations import ImplicitConnectedBackend

    g, r = shape_host()
    types = RobotTypes.homogeneous(3)
    be = ImplicitConnectedBackend(types)
    t = RootedTree(g, 0)
    by_pre: dict = {}
    for a in be.all_configurations(g):
        if r not in a.occupied():
            continue
        posts = [b for b in be.successors(g, a) if classify_transition_shape(t, a, b, r, types) == shape]
        if posts:
            by_pre[a] = posts
    if not by_pre:
        raise PreconditionError(f"shape {shape} has no realisation on the host")
    pres = sorted(by_pre)
    pre1 = pres[0]
    post1 = by_pre[pre1][0]
    pre2 = next((a for a in pres[1:] if be.is_valid_transition(g, pre1, a)), None)
    if pre2 is not None:
        post2 = next(b for b in by_pre[pre2] if b != post1 and be.is_valid_transition(g, post1, b))
        x = [pre1, post1, pre2, post2, pre1]
    else:
        rest = [b for b in by_pre[pre1] if b != post1]
        far = [b for b in rest if not be.is_valid_transition(g, post1, b)]
        post2 = (far or rest or [post1])[0]
        x = [pre1, post1, pre1, post2, pre1]
    x += _covering_tour(g, be, pre1)
    for u, w in zip(x, x[1:]):
        if not be.is_valid_transition(g, u, w):
            raise PreconditionError(f"example for {shape} is not a traversal")
    inst = Instance(g, types, be, pre1, pre1, root=0)
    return inst, Traversal(x), 0, 2, r
