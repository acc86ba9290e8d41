"""Exact solver by dynamic programming over a nice tree decomposition.

A signature at bag ``j`` is the condensed projection of a traversal: each
configuration whose active set meets ``B_j`` is kept, every other one becomes
``UP`` (active set above the bag) or ``DOWN`` (active set below it), and runs
of equal symbols are merged. Tables map signatures to the least number of
configurations living entirely below the bag.

Tables are grown forward from the children's rows instead of scanning a
pre-enumerated signature space: an introduce node expands every ``UP`` of a
child row into the runs that reduce to it, a forget node lifts, and a join
node pairs rows agreeing outside their ``DOWN`` positions. Only rows that can
still be part of a traversal no longer than a known upper bound are kept.
"""

from __future__ import annotations

import heapq
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Optional, Sequence

from .errors import BudgetExceeded, InfeasibleInstance, MRFGCError, PreconditionError
from .formations import ConfigSpace
from .model import Instance, Traversal, as_config, validate_traversal
from .treedecomp import FORGET, INTRODUCE, JOIN, LEAF, NiceTreeDecomposition, decompose

log = logging.getLogger(__name__)

UP = "↑"
DOWN = "↓"
_UP, _DOWN = -1, -2
_INF = float("inf")
DEFAULT_MAX_ROWS = 3_000_000


# ---------------------------------------------------------------- signatures


def _mask(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


@lru_cache(maxsize=1 << 16)
def _bits(m: int) -> tuple[int, ...]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return tuple(out)


def condense(seq: Sequence) -> tuple:
    """Merge runs of equal consecutive symbols."""
    out = []
    for s in seq:
        if not out or out[-1] != s:
            out.append(s)
    return tuple(out)


def _active(space: ConfigSpace, x) -> frozenset:
    return space.footprint(as_config(x))


def project(x, d: NiceTreeDecomposition, j: int, space: ConfigSpace) -> tuple:
    """Per-step classification of a traversal against bag ``j`` (not condensed)."""
    bag = d[j].vertices
    down = d.v_down(j)
    out = []
    for c in x:
        act = _active(space, c)
        if act & bag:
            out.append(as_config(c))
        elif act <= down:
            out.append(DOWN)
        else:
            out.append(UP)
    return tuple(out)


def signature(x, d: NiceTreeDecomposition, j: int, space: ConfigSpace) -> tuple:
    return condense(project(x, d, j, space))


def reduce(seq: Sequence, a, space: ConfigSpace) -> tuple:
    """Replace configurations whose active set misses ``a`` by ``UP``; condense."""
    a = frozenset(a)
    return condense(s if s in (UP, DOWN) or _active(space, s) & a else UP for s in seq)


def lift(seq: Sequence, a, space: ConfigSpace) -> tuple:
    """Replace configurations whose active set misses ``a`` by ``DOWN``; condense."""
    a = frozenset(a)
    return condense(s if s in (UP, DOWN) or _active(space, s) & a else DOWN for s in seq)


def combines(x: Sequence, y: Sequence, z: Sequence) -> bool:
    if not len(x) == len(y) == len(z):
        return False
    for a, b, c in zip(x, y, z):
        if a == DOWN:
            if (b, c) not in ((DOWN, UP), (UP, DOWN)):
                return False
        elif not a == b == c:
            return False
    return True


def partial_traversal(x, d: NiceTreeDecomposition, j: int, space: ConfigSpace) -> tuple:
    """Configurations touching the bag or below it kept explicitly; the rest ``UP``."""
    up = d.v_up(j)
    return condense(UP if _active(space, c) <= up else as_config(c) for c in x)


def partial_cost(p: Sequence, d: NiceTreeDecomposition, j: int, space: ConfigSpace) -> int:
    """Number of configurations of a partial traversal living below the bag."""
    down = d.v_down(j)
    return sum(1 for s in p if s != UP and _active(space, s) <= down)


def pattern_length_bound(backend, max_degree: int, width: int) -> int:
    """Signature length bound ``f * g * (tw + 1)`` from the pigeon-hole argument."""
    nf = backend.formation_count
    vmax = backend.max_pattern_vertices
    d = max(max_degree, 1)
    f = nf * d**vmax
    g = 2 * max(comb(nf, 2), 1) * d**vmax
    return f * g * (width + 1)


# ---------------------------------------------------------------- the solver


@dataclass
class Table:
    patterns: list = field(default_factory=list)
    costs: list = field(default_factory=list)
    ptrs: list = field(default_factory=list)


@dataclass
class FPTResult:
    traversal: Traversal
    cost: int
    rows: int
    upper_bound: int
    wall_ms: float

    @property
    def time(self) -> int:
        return self.traversal.time


class FPTSolver:
    """Bottom-up table computation and reconstruction for one instance."""

    def __init__(
        self,
        inst: Instance,
        decomposition: Optional[NiceTreeDecomposition] = None,
        upper_bound: Optional[int] = None,
        max_rows: int = DEFAULT_MAX_ROWS,
        max_ms: Optional[float] = None,
        space: Optional[ConfigSpace] = None,
    ):
        self.inst = inst
        self.g = inst.graph
        # rooting a tree at the start keeps the start out of most bags, which
        # leaves far fewer signatures to track
        self.d = decomposition or inst.decomposition or decompose(inst.graph, min(inst.x0.occupied()))
        self.space = space or ConfigSpace(self.g, inst.backend)
        self.max_rows = max_rows
        self.max_ms = max_ms
        self.tables: list[Optional[Table]] = [None] * len(self.d)
        self.rows = 0
        self._t0: Optional[float] = None
        self._prepare()
        self.fixed_upper = upper_bound is not None
        self.greedy = self._greedy_upper_bound()
        self.upper = upper_bound if upper_bound is not None else self.greedy
        self.length_bound = pattern_length_bound(inst.backend, self.g.max_degree, max(self.d.width, 0))

    # -- configuration universe

    def _prepare(self):
        g, space, inst = self.g, self.space, self.inst
        seen = {inst.x0: 0}
        order = [inst.x0]
        for x in order:  # BFS over configurations reachable from x0
            for y in space.successors(x):
                if y not in seen:
                    seen[y] = len(order)
                    order.append(y)
        if inst.xf not in seen:
            raise InfeasibleInstance("end configuration is not reachable from the start configuration")
        cover = 0
        for x in order:
            cover |= x.mask
        if cover != (1 << g.n) - 1:
            missing = [v for v in range(g.n) if not (cover >> v) & 1]
            raise InfeasibleInstance(f"vertices {missing} can never be occupied")
        order.sort()
        self.configs = order
        self.index = {x: i for i, x in enumerate(order)}
        self.foot = [_mask(space.footprint(x)) for x in order]
        self.occ = [x.mask for x in order]
        self.max_occ = max(bin(m).count("1") for m in self.occ)
        self.succ = [frozenset(self.index[y] for y in space.successors(x)) for x in order]
        self.succ_list = [tuple(sorted(s)) for s in self.succ]
        pred: list[list[int]] = [[] for _ in order]
        for x, ys in enumerate(self.succ_list):
            for y in ys:
                pred[y].append(x)
        self.pred_list = [tuple(p) for p in pred]
        self.x0 = self.index[inst.x0]
        self.xf = self.index[inst.xf]
        self.bag = [_mask(b.vertices) for b in self.d.nodes]
        self.down = [_mask(self.d.v_down(j)) for j in range(len(self.d))]
        self.upm = [_mask(self.d.v_up(j)) for j in range(len(self.d))]
        self._count_cache: dict[tuple[int, int], int] = {}
        self._region_cache: dict[int, list[int]] = {}
        self._dist_cache: dict = {}
        self._run_cache: dict = {}

    def lower_bound(self) -> int:
        """Every vertex must be occupied somewhere on a walk from x0 to xf."""
        dist_from = self._region_dist(-1, (self.x0,))
        dist_to = self._dist_to(-1, None)
        best: dict[int, int] = {}
        for y, dy in dist_from.items():
            if y not in dist_to:
                continue
            t = dy + dist_to[y]
            m = self.occ[y]
            while m:
                low = m & -m
                u = low.bit_length() - 1
                if t < best.get(u, _INF):
                    best[u] = t
                m ^= low
        return max(best.values(), default=0)

    def _greedy_upper_bound(self) -> int:
        """Time of a valid traversal: walk to the nearest configuration covering
        something new until everything is covered, then walk to the end."""
        full = (1 << self.g.n) - 1
        cur, cov, t = self.x0, self.occ[self.x0], 0
        while True:
            if cov == full:
                goal = lambda y: y == self.xf  # noqa: E731
            else:
                goal = lambda y: self.occ[y] & ~cov  # noqa: E731
            if goal(cur) and cov == full:
                return t
            prev = {cur: None}
            q = deque([cur])
            hit = None
            while q and hit is None:
                u = q.popleft()
                for w in self.succ_list[u]:
                    if w not in prev:
                        prev[w] = u
                        if goal(w):
                            hit = w
                            break
                        q.append(w)
            path = []
            while hit is not None and hit != cur:
                path.append(hit)
                hit = prev[hit]
            for y in reversed(path):
                cov |= self.occ[y]
            t += len(path)
            cur = path[0]

    # -- classification helpers

    def classify(self, x: int, j: int) -> int:
        f = self.foot[x]
        if f & self.bag[j]:
            return x
        return _DOWN if f & self.down[j] else _UP

    def _count_in(self, x: int, region: int) -> int:
        key = (x, region)
        c = self._count_cache.get(key)
        if c is None:
            c = sum(1 for y in self.succ_list[x] if self.foot[y] & ~region == 0)
            self._count_cache[key] = c
        return c

    def _region_configs(self, region: int) -> list[int]:
        r = self._region_cache.get(region)
        if r is None:
            r = self._region_cache[region] = [x for x in range(len(self.configs)) if self.foot[x] & ~region == 0]
        return r

    def _boundary(self, region: int, a: Optional[int], end: int) -> tuple[int, ...]:
        """Configurations inside ``region`` that may follow ``a`` (or be ``end``
        itself when ``a`` is the start/finish of the whole traversal)."""
        if a is None:
            return (end,) if self.foot[end] & ~region == 0 else ()
        return tuple(y for y in self.succ_list[a] if self.foot[y] & ~region == 0)

    def _region_dist(self, region: int, sources: tuple[int, ...]) -> dict[int, int]:
        key = (region, sources)
        dist = self._dist_cache.get(key)
        if dist is None:
            dist = {x: 0 for x in sources}
            q = deque(sources)
            while q:
                u = q.popleft()
                for w in self.succ_list[u]:
                    if w not in dist and self.foot[w] & ~region == 0:
                        dist[w] = dist[u] + 1
                        q.append(w)
            self._dist_cache[key] = dist
        return dist

    def _dist_to(self, region: int, b: Optional[int]) -> dict[int, int]:
        """Configurations inside ``region`` still needed after each configuration
        of ``region`` before the excursion can hand over to ``b``."""
        key = (region, "to", b)
        dist = self._dist_cache.get(key)
        if dist is None:
            targets = self._boundary(region, b, self.xf)
            dist = {x: 0 for x in targets}
            q = deque(targets)
            while q:
                u = q.popleft()
                for w in self.pred_list[u]:
                    if w not in dist and self.foot[w] & ~region == 0:
                        dist[w] = dist[u] + 1
                        q.append(w)
            self._dist_cache[key] = dist
        return dist

    def _reach(self, da: dict[int, int], db: dict[int, int], offset: int) -> tuple:
        """Per vertex, least ``da[y] + db[y] + offset`` over configurations
        ``y`` occupying it (infinite when none does)."""
        reach = [_INF] * self.g.n
        for y, dy in da.items():
            d2 = db.get(y)
            if d2 is None:
                continue
            extra = dy + d2 + offset
            m = self.occ[y]
            while m:
                low = m & -m
                u = low.bit_length() - 1
                if extra < reach[u]:
                    reach[u] = extra
                m ^= low
        return tuple(reach)

    def _run_info(self, region: int, a: Optional[int], b: Optional[int]):
        """Least number of configurations of an excursion inside ``region``
        between ``a`` and ``b``, and per vertex the extra configurations an
        excursion needs to also occupy that vertex."""
        key = (region, a, b)
        info = self._run_cache.get(key)
        if info is None:
            da = self._region_dist(region, self._boundary(region, a, self.x0))
            tb = self._boundary(region, b, self.xf)
            base = min((da[y] + 1 for y in tb if y in da), default=_INF)
            if base < _INF:
                reach = self._reach(da, self._region_dist(region, tb), 1 - base)
            else:
                reach = (_INF,) * self.g.n
            info = self._run_cache[key] = (base, reach)
        return info

    def _tail_info(self, region: int, s: int, b: Optional[int]):
        """Like ``_run_info`` for the rest of an excursion already at ``s``."""
        key = (region, s, "tail", b)
        info = self._run_cache.get(key)
        if info is None:
            dt = self._dist_to(region, b)
            d = dt.get(s, _INF)
            if d < _INF:
                reach = self._reach(self._region_dist(region, (s,)), dt, -d)
            else:
                reach = (_INF,) * self.g.n
            info = self._run_cache[key] = (d, reach)
        return info

    def _spread(self, region: int, init: dict[int, int]) -> dict[int, int]:
        """Shortest distances inside ``region`` from sources with head starts."""
        dist = dict(init)
        heap = [(d, x) for x, d in init.items()]
        heapq.heapify(heap)
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for w in self.succ_list[u]:
                if self.foot[w] & ~region == 0 and d + 1 < dist.get(w, _INF):
                    dist[w] = d + 1
                    heapq.heappush(heap, (d + 1, w))
        return dist

    def _pair_info(self, region: int, a: Optional[int], b: Optional[int], u: int) -> tuple:
        """Per vertex ``w``, extra configurations one excursion between ``a``
        and ``b`` needs to occupy both ``u`` and ``w``, in either order."""
        key = (region, a, b, "pair", u)
        info = self._run_cache.get(key)
        if info is None:
            base = self._run_info(region, a, b)[0]
            da = self._region_dist(region, self._boundary(region, a, self.x0))
            db = self._region_dist(region, self._boundary(region, b, self.xf))
            ubit = 1 << u
            holders = [y for y in da if self.occ[y] & ubit and y in db]
            first = self._spread(region, {y: da[y] for y in holders})
            second = self._spread(region, {y: db[y] for y in holders})
            best = [_INF] * self.g.n
            for y, d1 in first.items():
                t = min(d1 + db.get(y, _INF), da.get(y, _INF) + second.get(y, _INF))
                if t >= _INF:
                    continue
                extra = t + 1 - base
                m = self.occ[y]
                while m:
                    low = m & -m
                    w = low.bit_length() - 1
                    if extra < best[w]:
                        best[w] = extra
                    m ^= low
            info = self._run_cache[key] = tuple(best)
        return info

    def up_lower_bound(self, pat: Sequence[int], j: int) -> int:
        """Least number of configurations the ``UP`` entries of ``pat`` stand for."""
        region = self.upm[j]
        covered = 0
        for s in pat:
            if s >= 0:
                covered |= self.occ[s]
        need = region & ~covered
        total = 0
        best = [_INF] * self.g.n
        runs = []
        last = len(pat) - 1
        for i, s in enumerate(pat):
            if s != _UP:
                continue
            run = (pat[i - 1] if i else None, pat[i + 1] if i < last else None)
            runs.append(run)
            base, reach = self._run_info(region, *run)
            if base >= _INF:
                return _INF
            total += base
            best = list(map(min, best, reach))
        if need:
            if not runs:
                return _INF
            bits = _bits(need)
            far = max(bits, key=lambda u: best[u])
            extra = best[far]
            if len(bits) > 1 and extra < _INF:
                # a second vertex is reached either by the same excursion or
                # by another one paying its own extra
                pair = [self._pair_info(region, a, b, far) for a, b in runs]
                for w in bits:
                    if w == far:
                        continue
                    e = best[far] + best[w]
                    for p in pair:
                        if p[w] < e:
                            e = p[w]
                    if e > extra:
                        extra = e
            total = max(total + extra, -(-len(bits) // self.max_occ))
        return total

    def _endpoint(self, x: int, j: int) -> int:
        return self.classify(x, j)

    def check_pattern(self, pat: Sequence[int], j: int, cost: int = 0) -> Optional[str]:
        """Reason the pattern can't be a signature of a traversal within the
        upper bound, or ``None``. Encodes the three signature conditions plus
        endpoint, separation, coverage and length-budget filters."""
        if not pat:
            return "empty"
        bag, down, up = self.bag[j], self.down[j], self.upm[j]
        if pat[0] != self._endpoint(self.x0, j):
            return "start"
        if pat[-1] != self._endpoint(self.xf, j):
            return "end"
        pairs = set()
        arrows: dict[tuple[int, int], int] = {}
        nconf = nup = 0
        cover = 0
        for i, s in enumerate(pat):
            if s >= 0:
                nconf += 1
                cover |= self.occ[s]
                if not self.foot[s] & bag:
                    return "config off bag"
            elif s == _UP:
                nup += 1
                if not up:
                    return "up with empty region"
            elif not down:
                return "down with empty region"
            if i == 0:
                continue
            p = pat[i - 1]
            if p == s:
                return "not condensed"
            if p >= 0 and s >= 0:
                if s not in self.succ[p]:
                    return "invalid transition"
                if (p, s) in pairs:
                    return "repeated transition"
                pairs.add((p, s))
            elif p < 0 and s < 0:
                return "up next to down"
            else:
                x, arrow = (p, s) if p >= 0 else (s, p)
                key = (x, arrow * 2 + (p >= 0))
                arrows[key] = arrows.get(key, 0) + 1
                region = up if arrow == _UP else down
                if arrows[key] > self._count_in(x, region):
                    return "arrow budget"
        if cover & bag != bag:
            return "bag not covered"
        if cost + nconf + self.up_lower_bound(pat, j) > self.upper + 1:
            return "over budget"
        if len(pat) > self.length_bound:
            return "too long"
        return None

    # -- table updates

    def _new_row(self, table: Table, pat, cost, ptr):
        table.patterns.append(pat)
        table.costs.append(cost)
        table.ptrs.append(ptr)
        self.rows += 1
        if self.rows > self.max_rows:
            raise BudgetExceeded(f"row limit {self.max_rows} exceeded")

    def _tick(self):
        if self.max_ms is not None and (time.perf_counter() - self._t0) * 1000 > self.max_ms:
            raise BudgetExceeded(f"time limit {self.max_ms} ms exceeded")

    def _leaf(self, j):
        t = Table()
        pat = (_UP,)
        if self.check_pattern(pat, j) is None:
            self._new_row(t, pat, 0, None)
        return t

    def _introduce(self, j):
        node = self.d[j]
        ct = self.tables[node.children[0]]
        t = Table()
        bag, down, up = self.bag[j], self.down[j], self.upm[j]
        vbit = 1 << node.vertex
        cbag = self.bag[node.children[0]]
        fresh = [x for x in range(len(self.configs)) if self.foot[x] & vbit and not self.foot[x] & cbag]
        fresh_set = set(fresh)
        lead = [_UP] if up else []
        after_cache: dict[int, list[int]] = {}

        def run_syms(p):
            # symbols that may follow ``p`` inside a run
            if p < 0:
                return fresh
            r = after_cache.get(p)
            if r is None:
                r = after_cache[p] = lead + [y for y in self.succ_list[p] if y in fresh_set]
            return r

        first_sym = self._endpoint(self.x0, j)
        last_sym = self._endpoint(self.xf, j)
        budget = self.upper + 1
        limit = self.length_bound
        succ, foot, occ = self.succ, self.foot, self.occ
        count_in = self._count_in
        run_info = self._run_info
        up_lb = self.up_lower_bound
        cup = self.upm[node.children[0]]
        tails: dict = {}

        def tail_reach(s, b):
            key = (s, b)
            r = tails.get(key)
            if r is None:
                r = tails[key] = self._tail_info(cup, s, b)[1]
            return r

        none_reach = (_INF,) * self.g.n
        max_occ = self.max_occ
        bits = _bits

        for row, (cpat, ccost) in enumerate(zip(ct.patterns, ct.costs)):
            self._tick()
            out: list[int] = []
            undo: list = []
            pairs: set = set()
            arrows: dict = {}
            nsym = [0]  # lower bound on configurations the entries so far stand for
            covers = [0]  # vertices occupied by the configurations so far
            nconf = [0]  # configurations so far
            closed: list = []  # per vertex, extra cost via each closed UP
            ncpat = len(cpat)
            # least number of configurations each suffix of the child row stands
            # for, what its fixed configurations occupy, and the least extra
            # cost of reaching each vertex from its excursions
            rem = [0] * (ncpat + 1)
            fut_occ = [0] * (ncpat + 1)
            fut_conf = [0] * (ncpat + 1)
            fut_reach = [none_reach] * (ncpat + 1)
            ahead: list = [None] * ncpat
            for i in range(ncpat - 1, -1, -1):
                c = cpat[i]
                fut_occ[i] = fut_occ[i + 1]
                fut_reach[i] = fut_reach[i + 1]
                fut_conf[i] = fut_conf[i + 1] + (c >= 0)
                if c >= 0:
                    rem[i] = rem[i + 1] + 1
                    fut_occ[i] |= occ[c]
                elif c == _UP:
                    b = cpat[i + 1] if i + 1 < ncpat else None
                    base, reach = run_info(cup, cpat[i - 1] if i else None, b)
                    rem[i] = rem[i + 1] + base
                    fut_reach[i] = tuple(map(min, fut_reach[i + 1], reach))
                    ahead[i] = self._dist_to(cup, b)
                else:
                    rem[i] = rem[i + 1]

            def cover_ok(idx) -> bool:
                # out ends with a configuration, so every UP in it is closed
                need = up & ~fut_occ[idx + 1] & ~covers[-1]
                if not need:
                    return True
                nb = bits(need)
                if ccost + nconf[0] + fut_conf[idx + 1] + (len(nb) + max_occ - 1) // max_occ > budget:
                    return False
                total = ccost + nsym[0] + rem[idx + 1]
                fr = fut_reach[idx + 1]
                for u in nb:
                    b = fr[u]
                    for reach in closed:
                        if reach[u] < b:
                            b = reach[u]
                    if total + b > budget:
                        return False
                return True

            def push(s, after=0) -> bool:
                if len(out) >= limit:
                    return False
                add = 0 if s == _DOWN else 1
                reach = None
                if out and out[-1] == _UP:
                    base, reach = run_info(up, out[-2] if len(out) > 1 else None, s)
                    if base >= _INF:
                        return False
                    add += base - 1
                if ccost + nsym[0] + add + after > budget:
                    return False
                entry = None
                if not out:
                    if s != first_sym:
                        return False
                else:
                    p = out[-1]
                    if p == s:
                        return False
                    if p >= 0 and s >= 0:
                        if s not in succ[p] or (p, s) in pairs:
                            return False
                        pairs.add((p, s))
                        entry = ("pair", (p, s))
                    elif p < 0 and s < 0:
                        return False
                    else:
                        x, arrow = (p, s) if p >= 0 else (s, p)
                        key = (x, arrow * 2 + (p >= 0))
                        c = arrows.get(key, 0) + 1
                        if c > count_in(x, up if arrow == _UP else down):
                            return False
                        arrows[key] = c
                        entry = ("arrow", key)
                out.append(s)
                undo.append((entry, add, reach))
                nsym[0] += add
                if s >= 0:
                    covers.append(covers[-1] | occ[s])
                    nconf[0] += 1
                else:
                    covers.append(covers[-1])
                if reach is not None:
                    closed.append(reach)
                return True

            def pop():
                if out.pop() >= 0:
                    nconf[0] -= 1
                covers.pop()
                entry, add, reach = undo.pop()
                if reach is not None:
                    closed.pop()
                nsym[0] -= add
                if entry is None:
                    return
                if entry[0] == "pair":
                    pairs.discard(entry[1])
                else:
                    arrows[entry[1]] -= 1

            def finish():
                if out[-1] != last_sym or covers[-1] & bag != bag:
                    return
                pat = tuple(out)
                if ccost + sum(1 for x in pat if x >= 0) + up_lb(pat, j) > budget:
                    return
                self._new_row(t, pat, ccost, row)

            def walk(idx):
                if idx == ncpat:
                    finish()
                    return
                s = cpat[idx]
                if s != _UP:
                    if push(s, rem[idx + 1]):
                        if s < 0 or cover_ok(idx):
                            walk(idx + 1)
                        pop()
                    return
                run(idx)

            def run(idx):
                dist = ahead[idx]
                if out:
                    prev = out[-1]
                    syms = run_syms(prev)
                else:
                    prev = None
                    syms = lead + fresh
                closing = prev == _UP
                before = out[-2] if closing and len(out) > 1 else None
                nxt = cpat[idx + 1] if idx + 1 < ncpat else None
                rem1 = rem[idx + 1]
                start = ccost + nsym[0] + rem1
                conf_lb = ccost + nconf[0] + 1 + fut_conf[idx + 1]
                need0 = up & ~fut_occ[idx + 1] & ~covers[-1]
                # per still uncovered vertex, least extra cost via a closed
                # excursion or a later one of the child row
                fr = fut_reach[idx + 1]
                cl = {}
                for u in bits(need0):
                    b = fr[u]
                    for reach in closed:
                        if reach[u] < b:
                            b = reach[u]
                    cl[u] = b
                for s in syms:
                    if s >= 0:
                        d = dist.get(s)
                        if d is None:
                            continue
                        # the checks ``push`` and ``cover_ok`` would make,
                        # done before touching the stacks
                        creach = None
                        if closing:
                            add, creach = run_info(up, before, s)
                            if add >= _INF:
                                continue
                        else:
                            add = 1
                        total = start + add + d
                        if total > budget:
                            continue
                        need = need0 & ~occ[s]
                        if need:
                            nb = bits(need)
                            if conf_lb + (len(nb) + max_occ - 1) // max_occ > budget:
                                continue
                            tr = tail_reach(s, nxt)
                            ok = True
                            for u in nb:
                                b = cl[u]
                                if tr[u] < b:
                                    b = tr[u]
                                if creach is not None and creach[u] < b:
                                    b = creach[u]
                                if total + b > budget:
                                    ok = False
                                    break
                            if not ok:
                                continue
                        after = d + rem1
                    else:
                        after = rem1
                    if push(s, after):
                        walk(idx + 1)
                        run(idx)
                        pop()

            walk(0)
        return t

    def _forget(self, j):
        node = self.d[j]
        cj = node.children[0]
        ct = self.tables[cj]
        vbit = 1 << node.vertex
        bag = self.bag[j]
        t = Table()
        where: dict[tuple, int] = {}
        for row, (cpat, ccost) in enumerate(zip(ct.patterns, ct.costs)):
            self._tick()
            if not any(s >= 0 and self.occ[s] & vbit for s in cpat):
                continue
            lifted = []
            extra = 0
            for s in cpat:
                if s >= 0 and not self.foot[s] & bag:
                    extra += 1
                    s = _DOWN
                if not lifted or lifted[-1] != s:
                    lifted.append(s)
            pat = tuple(lifted)
            cost = ccost + extra
            k = where.get(pat)
            if k is None:
                if self.check_pattern(pat, j, cost) is not None:
                    continue
                where[pat] = len(t.patterns)
                self._new_row(t, pat, cost, row)
            elif cost < t.costs[k]:
                t.costs[k] = cost
                t.ptrs[k] = row
        return t

    def _join(self, j):
        a, b = self.d[j].children
        ta, tb = self.tables[a], self.tables[b]
        groups: dict[tuple, list[int]] = {}
        for row, pat in enumerate(tb.patterns):
            key = tuple(_UP if s == _DOWN else s for s in pat)
            groups.setdefault(key, []).append(row)
        t = Table()
        where: dict[tuple, int] = {}
        for ra, pa in enumerate(ta.patterns):
            self._tick()
            key = tuple(_UP if s == _DOWN else s for s in pa)
            downs_a = {i for i, s in enumerate(pa) if s == _DOWN}
            for rb in groups.get(key, ()):
                pb = tb.patterns[rb]
                merged = list(pa)
                ok = True
                for i, s in enumerate(pb):
                    if s == _DOWN:
                        if i in downs_a:
                            ok = False
                            break
                        merged[i] = _DOWN
                if not ok:
                    continue
                pat = tuple(merged)
                cost = ta.costs[ra] + tb.costs[rb]
                k = where.get(pat)
                if k is None:
                    if self.check_pattern(pat, j, cost) is not None:
                        continue
                    where[pat] = len(t.patterns)
                    self._new_row(t, pat, cost, (ra, rb))
                elif cost < t.costs[k]:
                    t.costs[k] = cost
                    t.ptrs[k] = (ra, rb)
        return t

    def update_all_tables(self) -> list[Table]:
        if self._t0 is None:
            self._t0 = time.perf_counter()
        for j in self.d.postorder():
            kind = self.d[j].kind
            if kind == LEAF:
                self.tables[j] = self._leaf(j)
            elif kind == INTRODUCE:
                self.tables[j] = self._introduce(j)
            elif kind == FORGET:
                self.tables[j] = self._forget(j)
            elif kind == JOIN:
                self.tables[j] = self._join(j)
            else:
                raise PreconditionError(f"unknown node kind {kind!r}")
        return self.tables

    # -- reconstruction

    def _segments(self, p: list, j: int) -> list[list]:
        """Split a partial traversal into the runs behind each signature entry."""
        segs: list[list] = []
        last = None
        for s in p:
            c = s if s == _UP else self.classify(s, j)
            if segs and c == last:
                segs[-1].append(s)
            else:
                segs.append([s])
                last = c
        return segs

    def reconstruct(self, j: int, row: int) -> list[int]:
        """Partial traversal (``UP`` plus explicit configuration ids) of a row."""
        result: dict[tuple[int, int], list[int]] = {}
        stack = [(j, row, False)]
        while stack:
            node, r, ready = stack.pop()
            b = self.d[node]
            ptr = self.tables[node].ptrs[r]
            if b.kind == LEAF:
                result[(node, r)] = [_UP]
                continue
            kids = [(b.children[0], ptr)] if b.kind != JOIN else [(b.children[0], ptr[0]), (b.children[1], ptr[1])]
            if not ready:
                stack.append((node, r, True))
                for k in kids:
                    if k not in result:
                        stack.append((k[0], k[1], False))
                continue
            pat = self.tables[node].patterns[r]
            if b.kind == FORGET:
                result[(node, r)] = result[kids[0]]
            elif b.kind == INTRODUCE:
                cnode = kids[0][0]
                segs = self._segments(result[kids[0]], cnode)
                cpat = self.tables[cnode].patterns[kids[0][1]]
                if len(segs) != len(cpat):
                    raise MRFGCError("reconstruction misaligned at introduce node")
                cbag = self.bag[cnode]
                out: list[int] = []
                ci = 0
                in_run = False
                for s in pat:
                    fresh = s == _UP or (s >= 0 and not self.foot[s] & cbag)
                    if fresh:
                        if not in_run:
                            ci += 1
                            in_run = True
                        out.append(s)
                    else:
                        in_run = False
                        out.extend(segs[ci])
                        ci += 1
                result[(node, r)] = out
            else:
                (na, ra), (nb, rb) = kids
                sa = self._segments(result[kids[0]], na)
                sb = self._segments(result[kids[1]], nb)
                pa = self.tables[na].patterns[ra]
                out = []
                for i, s in enumerate(pat):
                    if s == _DOWN:
                        out.extend(sa[i] if pa[i] == _DOWN else sb[i])
                    else:
                        out.append(s)
                result[(node, r)] = out
        return result[(j, row)]

    def solve(self) -> FPTResult:
        """Optimal traversal. Without a given upper bound the tables are
        rebuilt for increasing bounds from a lower bound up to a greedy
        traversal's time; the first bound leaving a root row is optimal."""
        start = self._t0 = time.perf_counter()
        bounds = [self.upper] if self.fixed_upper else range(min(self.lower_bound(), self.greedy), self.greedy + 1)
        for u in bounds:
            self.upper = u
            self.tables = [None] * len(self.d)
            self.update_all_tables()
            root = self.tables[self.d.root]
            if root.patterns:
                break
        else:
            raise MRFGCError("no root row survived; upper bound or pruning is inconsistent")
        best = min(range(len(root.costs)), key=lambda r: (root.costs[r], r))
        ids = self.reconstruct(self.d.root, best)
        trav = Traversal(self.configs[i] for i in ids)
        if len(trav) != root.costs[best]:
            raise MRFGCError(f"reconstructed {len(trav)} configurations, table cost {root.costs[best]}")
        rep = validate_traversal(self.inst, trav)
        if not rep.ok:
            raise MRFGCError("reconstructed traversal is invalid: " + "; ".join(rep.failures()))
        wall = (time.perf_counter() - start) * 1000
        return FPTResult(trav, root.costs[best], self.rows, self.upper, wall)

    # -- public views on symbols

    def decode(self, pat: Sequence[int]) -> tuple:
        return tuple(UP if s == _UP else DOWN if s == _DOWN else self.configs[s] for s in pat)

    def encode(self, pat: Sequence) -> tuple[int, ...]:
        return tuple(_UP if s == UP else _DOWN if s == DOWN else self.index[as_config(s)] for s in pat)

    def row_of(self, j: int, pat: Sequence) -> Optional[int]:
        """Row index of a decoded signature in table ``j``, if present."""
        try:
            enc = self.encode(pat)
        except KeyError:
            return None
        t = self.tables[j]
        for r, p in enumerate(t.patterns):
            if p == enc:
                return r
        return None


def solve_fpt(inst: Instance, **kwargs) -> Traversal:
    """Optimal traversal via the tree-decomposition dynamic program."""
    return FPTSolver(inst, **kwargs).solve().traversal


def run_fpt(inst: Instance, **kwargs) -> FPTResult:
    return FPTSolver(inst, **kwargs).solve()


# ------------------------------------------------ signature-space membership


def pattern_violations(inst: Instance, d: NiceTreeDecomposition, j: int, pat: Sequence, space: ConfigSpace) -> list[str]:
    """Which signature-space rules a decoded pattern breaks at bag ``j``.

    Checks the three signature conditions (entries meet the bag, no
    configuration-to-configuration transition repeats, consecutive
    configurations are transitions), condensation, the start/end filters,
    the root filter and the length bound.
    """
    bag = d[j].vertices
    out = []
    if any(pat[i] == pat[i + 1] for i in range(len(pat) - 1)):
        out.append("not condensed")
    for s in pat:
        if s not in (UP, DOWN) and not _active(space, s) & bag:
            out.append("configuration misses the bag")
            break
    seen = set()
    for a, b in zip(pat, pat[1:]):
        if a in (UP, DOWN) or b in (UP, DOWN):
            continue
        if not space.is_transition(as_config(a), as_config(b)):
            out.append("consecutive configurations are not a transition")
        if (a, b) in seen:
            out.append("transition repeats")
        seen.add((a, b))
    for x, where in ((inst.x0, 0), (inst.xf, -1)):
        if _active(space, x) & bag and pat and pat[where] != x:
            out.append("endpoint filter")
    if j == d.root and UP in pat:
        out.append("root pattern contains up")
    if len(pat) > pattern_length_bound(inst.backend, inst.graph.max_degree, max(d.width, 0)):
        out.append("too long")
    return out


def enumerate_patterns(
    inst: Instance,
    d: NiceTreeDecomposition,
    j: int,
    space: Optional[ConfigSpace] = None,
    max_len: Optional[int] = None,
) -> list[tuple]:
    """Every sequence satisfying the signature-space rules at bag ``j``.

    Exhaustive depth-first extension; only practical for tiny instances
    since the space grows exponentially with the length bound.
    """
    space = space or ConfigSpace(inst.graph, inst.backend)
    bag = d[j].vertices
    bound = pattern_length_bound(inst.backend, inst.graph.max_degree, max(d.width, 0))
    if max_len is not None:
        bound = min(bound, max_len)
    alphabet = [c for c in inst.backend.all_configurations(inst.graph) if space.footprint(c) & bag]
    arrows = [DOWN] if j == d.root else [UP, DOWN]
    symbols = arrows + alphabet
    x0_in = bool(space.footprint(inst.x0) & bag)
    xf_in = bool(space.footprint(inst.xf) & bag)
    out = []
    seq: list = []
    pairs: set = set()

    def rec():
        if seq and (not xf_in or seq[-1] == inst.xf):
            out.append(tuple(seq))
        if len(seq) >= bound:
            return
        for s in symbols:
            if not seq and x0_in and s != inst.x0:
                continue
            if seq:
                p = seq[-1]
                if p == s:
                    continue
                if p not in (UP, DOWN) and s not in (UP, DOWN):
                    if (p, s) in pairs or not space.is_transition(p, s):
                        continue
                    pairs.add((p, s))
            seq.append(s)
            rec()
            seq.pop()
            if seq and seq[-1] not in (UP, DOWN) and s not in (UP, DOWN):
                pairs.discard((seq[-1], s))

    rec()
    return out
