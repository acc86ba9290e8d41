"""Exact solvers side by side.

Run with ``python notebooks/01_exact_solvers.py``. Generates a few small
instances, solves each with the breadth-first oracle and with the
tree-decomposition solver, and prints the optimal times and one traversal.
"""

import time

from mrfgc.corpus import random_graph_instance, random_tree_instance, star_instance
from mrfgc.fpt import run_fpt
from mrfgc.model import validate_traversal
from mrfgc.oracle import solve_exact_bfs


def show(x, labels):
    for i, c in enumerate(x):
        cells = ", ".join(f"{labels[v]}x{n}" for v, _, n in c.items)
        print(f"  {i:2d}: {cells}")


cases = [
    ("star, 3 robots", star_instance(3, 3)),
    ("tree n=8 k=2", random_tree_instance(8, 2, seed=1)),
    ("tree n=9 k=3", random_tree_instance(9, 3, seed=5)),
    ("graph n=6 k=2", random_graph_instance(6, 2, seed=2)),
]

print(f"{'instance':16} {'oracle':>6} {'fpt':>4} {'states':>7} {'rows':>7} {'ms oracle':>9} {'ms fpt':>7}")
for name, inst in cases:
    t0 = time.perf_counter()
    o = solve_exact_bfs(inst)
    t1 = time.perf_counter()
    f = run_fpt(inst)
    t2 = time.perf_counter()
    assert validate_traversal(inst, f.traversal).ok
    print(f"{name:16} {o.time:6d} {f.time:4d} {o.states:7d} {f.rows:7d} {1000 * (t1 - t0):9.1f} {1000 * (t2 - t1):7.1f}")

print("\nOptimal traversal of the star (three robots fan out, regroup, fan out again):")
inst = cases[0][1]
show(solve_exact_bfs(inst).traversal, inst.graph.labels)
