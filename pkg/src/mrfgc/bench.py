"""Benchmark harness: a seeded corpus, every requested solver on every
instance, and the proven bounds checked row by row."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from .corpus import random_graph_instance, random_tree_instance
from .errors import BudgetExceeded, InfeasibleInstance, MRFGCError
from .model import Instance, validate_traversal

DEFAULT_SUITE = {
    "seed": 0,
    "trees": {"count": 12, "n": [3, 10], "k": [1, 3], "max_degree": 3},
    "graphs": {"count": 6, "n": [4, 8], "k": [1, 2], "tw": 2},
    "solvers": ["oracle", "fpt", "ptas"],
    "epsilons": [0.5, 0.25],
    "max_states": 200_000,
    "max_ms": 60_000,
}

COLUMNS = [
    "instance", "family", "n", "k", "solver", "epsilon", "status", "time", "states",
    "optimum", "gap", "bound", "violation", "wall_ms",
]


@dataclass
class BenchRow:
    instance: str
    family: str
    n: int
    k: int
    solver: str
    epsilon: Optional[float] = None
    status: str = "ok"
    time: Optional[int] = None
    states: Optional[int] = None
    optimum: Optional[int] = None
    gap: Optional[int] = None
    bound: Optional[float] = None
    violation: str = ""
    wall_ms: float = 0.0


@dataclass
class BenchReport:
    suite: dict
    rows: list[BenchRow] = field(default_factory=list)

    @property
    def violations(self) -> list[BenchRow]:
        return [r for r in self.rows if r.violation]

    def summary(self) -> dict:
        out: dict = {}
        for r in self.rows:
            key = r.solver if r.epsilon is None else f"{r.solver}@{r.epsilon}"
            s = out.setdefault(key, {"rows": 0, "ok": 0, "violations": 0, "mean_gap": 0.0, "gaps": 0})
            s["rows"] += 1
            s["ok"] += r.status == "ok"
            s["violations"] += bool(r.violation)
            if r.gap is not None:
                s["mean_gap"] += r.gap
                s["gaps"] += 1
        for s in out.values():
            s["mean_gap"] = round(s["mean_gap"] / s["gaps"], 4) if s["gaps"] else None
            del s["gaps"]
        return out

    def to_csv(self, timing: bool = True) -> str:
        cols = COLUMNS if timing else COLUMNS[:-1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            d = asdict(r)
            w.writerow(["" if d[c] is None else _fmt(d[c]) for c in cols])
        return buf.getvalue()

    def digest(self) -> str:
        """Hash of everything except wall-clock times."""
        return hashlib.sha256(self.to_csv(timing=False).encode()).hexdigest()

    def table(self) -> str:
        cols = ["family", "n", "k", "solver", "epsilon", "status", "time", "optimum", "gap", "violation"]
        data = [[str(_fmt(getattr(r, c))) if getattr(r, c) is not None else "-" for c in cols] for r in self.rows]
        widths = [max(len(c), *(len(row[i]) for row in data)) if data else len(c) for i, c in enumerate(cols)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in data]
        return "\n".join(line.rstrip() for line in lines) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3f}" if not v.is_integer() else str(int(v)) if abs(v) < 1e15 else str(v)
    return v


def build_corpus(suite: dict) -> list[tuple[str, Instance]]:
    """Deterministic list of ``(family, instance)`` pairs."""
    rng = random.Random(suite.get("seed", 0))
    out = []
    spec = suite.get("trees")
    if spec:
        for _ in range(spec["count"]):
            n = rng.randint(*spec["n"])
            k = rng.randint(*spec["k"])
            out.append(("tree", random_tree_instance(n, k, rng.randrange(2**31), spec.get("max_degree", 3))))
    spec = suite.get("graphs")
    if spec:
        for _ in range(spec["count"]):
            n = rng.randint(*spec["n"])
            k = rng.randint(*spec["k"])
            out.append(("graph", random_graph_instance(n, k, rng.randrange(2**31), spec.get("tw", 2))))
    return out


def _rows_for(family: str, inst: Instance, suite: dict) -> list[BenchRow]:
    from .io import instance_ref
    from .oracle import solve_exact_bfs

    ref = instance_ref(inst)[7:23]
    base = dict(instance=ref, family=family, n=inst.graph.n, k=inst.types.k)
    max_states = suite.get("max_states")
    max_ms = suite.get("max_ms")
    rows = []
    opt = None
    start = time.perf_counter()
    orow = BenchRow(solver="oracle", **base)
    try:
        res = solve_exact_bfs(inst, max_states=max_states or 10**12, max_ms=max_ms)
        opt = res.time
        orow.time, orow.states = res.time, res.states
        if res.traversal is None:
            orow.status = "infeasible"
    except BudgetExceeded:
        orow.status = "budget"
    orow.wall_ms = (time.perf_counter() - start) * 1000
    solvers = suite.get("solvers", ["oracle"])
    if "oracle" in solvers:
        rows.append(orow)
    if "fpt" in solvers:
        rows.append(_fpt_row(inst, base, opt, suite))
    if "ptas" in solvers and family == "tree":
        for eps in suite.get("epsilons", []):
            rows.append(_ptas_row(inst, base, opt, eps))
    return rows


def _fpt_row(inst, base, opt, suite) -> BenchRow:
    from .fpt import DEFAULT_MAX_ROWS, run_fpt

    row = BenchRow(solver="fpt", optimum=opt, **base)
    start = time.perf_counter()
    try:
        res = run_fpt(inst, max_rows=suite.get("max_rows", DEFAULT_MAX_ROWS), max_ms=suite.get("max_ms"))
        row.time, row.states = res.time, res.rows
        if not validate_traversal(inst, res.traversal).ok:
            row.violation = "invalid traversal"
        if opt is not None:
            row.gap = row.time - opt
            row.bound = opt
            if row.gap != 0:
                row.violation = "not optimal"
    except BudgetExceeded:
        row.status = "budget"
    except InfeasibleInstance:
        row.status = "infeasible"
    except MRFGCError as exc:
        row.status = "error"
        row.violation = str(exc)
    row.wall_ms = (time.perf_counter() - start) * 1000
    return row


def _ptas_row(inst, base, opt, eps) -> BenchRow:
    from .ptas import f_minus, f_plus, solve_ptas, validate_tree_cover

    row = BenchRow(solver="ptas", epsilon=eps, optimum=opt, **base)
    start = time.perf_counter()
    try:
        tree = inst.tree
        root_inst = inst if inst.root is not None else Instance(inst.graph, inst.types, inst.backend, inst.x0, inst.xf, tree.root)
        res = solve_ptas(root_inst, eps, oracle_states=None)
        row.time, row.states = res.time, len(res.cover.subtrees)
        problems = []
        if not validate_tree_cover(tree, eps, res.cover).ok:
            problems.append("cover bounds")
        if opt is not None:
            n = inst.graph.n
            be = inst.backend
            row.gap = res.t_greedy - opt
            row.bound = round(n * eps * (f_plus(be) + f_minus(be, inst.graph.max_degree)), 6)
            if row.gap > row.bound:
                problems.append("greedy gap")
            if row.gap < 0:
                problems.append("below optimum")
            if inst.types.k == 3 and res.t_cover - opt > 52 * n * eps:
                problems.append("3-robot gap")
        row.violation = "; ".join(problems)
    except BudgetExceeded:
        row.status = "budget"
    except MRFGCError as exc:
        row.status = "error"
        row.violation = str(exc)
    row.wall_ms = (time.perf_counter() - start) * 1000
    return row


def _run_one(args):
    family, inst, suite = args
    return _rows_for(family, inst, suite)


def run_bench(suite: Optional[dict] = None, jobs: int = 1) -> BenchReport:
    suite = {**DEFAULT_SUITE, **(suite or {})}
    corpus = build_corpus(suite)
    work = [(f, inst, suite) for f, inst in corpus]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_one, work))
    else:
        parts = [_run_one(w) for w in work]
    return BenchReport(suite, [r for part in parts for r in part])


def load_suite(text: str) -> dict:
    return json.loads(text)
