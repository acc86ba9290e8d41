"""Exact breadth-first search over (configuration, coverage) states, plus the
splice that removes a repeated transition from a traversal."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .errors import BudgetExceeded, PreconditionError
from .formations import ConfigSpace
from .model import Instance, Traversal, as_config, validate_traversal

DEFAULT_MAX_STATES = 2_000_000


@dataclass
class SearchResult:
    traversal: Optional[Traversal]
    status: str  # "optimal" or "infeasible"
    states: int
    wall_ms: float

    @property
    def time(self) -> Optional[int]:
        return None if self.traversal is None else self.traversal.time


def solve_exact_bfs(
    inst: Instance,
    max_states: int = DEFAULT_MAX_STATES,
    max_ms: Optional[float] = None,
    space: Optional[ConfigSpace] = None,
) -> SearchResult:
    """Minimal-time traversal by layered BFS.

    States are ``(configuration, coverage mask)``; the anchor of a
    configuration never enters the key. Successors are expanded in the
    backend's deterministic order, so ties resolve reproducibly. Raises
    ``BudgetExceeded`` when the state count or wall clock limit is hit.
    """
    start = time.perf_counter()
    g = inst.graph
    space = space or ConfigSpace(g, inst.backend)
    full = (1 << g.n) - 1
    x0 = inst.x0
    s0 = (x0, x0.mask)
    parent = {s0: None}
    frontier = [s0]
    goal = None
    if s0 == (inst.xf, full):
        goal = s0
    while frontier and goal is None:
        nxt = []
        for state in frontier:
            x, cov = state
            for y in space.successors(x):
                s = (y, cov | y.mask)
                if s in parent:
                    continue
                parent[s] = state
                if s[1] == full and y == inst.xf:
                    goal = s
                    break
                nxt.append(s)
                if len(parent) > max_states:
                    raise BudgetExceeded(f"state limit {max_states} exceeded")
            if goal is not None:
                break
            if max_ms is not None and (time.perf_counter() - start) * 1000 > max_ms:
                raise BudgetExceeded(f"time limit {max_ms} ms exceeded")
        frontier = nxt
    wall = (time.perf_counter() - start) * 1000
    if goal is None:
        return SearchResult(None, "infeasible", len(parent), wall)
    path = []
    s = goal
    while s is not None:
        path.append(s[0])
        s = parent[s]
    path.reverse()
    return SearchResult(Traversal(path), "optimal", len(parent), wall)


def find_repeated_transition(x) -> Optional[tuple[int, int]]:
    """Earliest ``(i, i')`` with ``i < i'`` and the same transition at both."""
    configs = [as_config(c) for c in x]
    first: dict[tuple, int] = {}
    best = None
    for i in range(len(configs) - 1):
        key = (configs[i], configs[i + 1])
        if key in first:
            cand = (first[key], i)
            if best is None or cand < best:
                best = cand
        else:
            first[key] = i
    return best


def z_transform(x, i: int, j: int) -> Traversal:
    """Splice out the repeated transition at ``i`` and ``j``.

    Follows ``x`` to ``x[i]`` (equal to ``x[j]``), walks back from ``x[j-1]``
    to ``x[i+1]`` (equal to ``x[j+1]``), then continues from ``x[j+2]``.
    Every transition of the result is a transition of ``x`` or its reverse,
    and time drops by exactly two.
    """
    configs = [as_config(c) for c in x]
    if not (0 <= i < j < len(configs) - 1):
        raise PreconditionError(f"indices ({i}, {j}) do not name two transitions")
    if configs[i] != configs[j] or configs[i + 1] != configs[j + 1]:
        raise PreconditionError(f"transitions at {i} and {j} differ")
    return Traversal(configs[: i + 1] + configs[i + 1 : j][::-1] + configs[j + 2 :])


def normalize_traversal(x) -> Traversal:
    """Apply ``z_transform`` until no transition repeats."""
    cur = Traversal(x)
    while True:
        rep = find_repeated_transition(cur)
        if rep is None:
            return cur
        cur = z_transform(cur, *rep)


def detect_contradiction(inst: Instance, x) -> Optional[Traversal]:
    """A strictly shorter valid traversal obtained by splicing out a repeated
    transition of ``x``, or ``None``. Never returns one for an optimum."""
    rep = find_repeated_transition(x)
    if rep is None:
        return None
    y = z_transform(x, *rep)
    if y.time < Traversal(x).time and validate_traversal(inst, y).ok:
        return y
    return None
