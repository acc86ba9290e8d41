"""Covering a tree by small subtrees and stitching their optimal traversals.

Run with ``python notebooks/02_tree_cover_and_greedy.py``. Shows how the
number and size of cover subtrees react to epsilon, then compares the greedy
traversal built on the cover with the exact optimum on a small tree.
"""

from mrfgc.corpus import gen_random_tree, random_tree_instance
from mrfgc.model import Instance
from mrfgc.oracle import solve_exact_bfs
from mrfgc.ptas import f_minus, f_plus, solve_ptas, tree_cover, validate_tree_cover

t = gen_random_tree(500, 3, seed=4)
print("tree with 500 vertices")
print(f"{'eps':>5} {'subtrees':>8} {'largest':>7} {'smallest flushed':>16} valid")
for eps in (0.05, 0.1, 0.2, 0.5):
    cover = tree_cover(t, eps)
    sizes = [len(s) for s in cover.flushed]
    ok = validate_tree_cover(t, eps, cover).ok
    print(f"{eps:5} {len(cover.subtrees):8d} {max(sizes):7d} {min(sizes):16d} {ok}")

base = random_tree_instance(11, 3, seed=8)
inst = Instance(base.graph, base.types, base.backend, base.x0, base.xf, base.tree.root)
opt = solve_exact_bfs(inst).time
print(f"\ntree with 11 vertices and 3 robots, optimum {opt}")
print(f"{'eps':>5} {'subtrees':>8} {'sum of parts':>12} {'greedy':>6} {'allowed':>7}")
for eps in (0.2, 0.25, 0.34, 0.5):
    res = solve_ptas(inst, eps, oracle_states=None)
    allowed = opt + inst.graph.n * eps * (f_plus(inst.backend) + f_minus(inst.backend, inst.graph.max_degree))
    print(f"{eps:5} {len(res.cover.subtrees):8d} {res.t_cover:12d} {res.t_greedy:6d} {allowed:7.0f}")
