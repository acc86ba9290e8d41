from fractions import Fraction

import pytest

from mrfgc.corpus import gen_random_tree, random_tree_instance, router_cleaner_library
from mrfgc.errors import NonCollapsibleError, PreconditionError
from mrfgc.formations import ExplicitBackend, ImplicitConnectedBackend
from mrfgc.model import Graph, Instance, RobotTypes, RootedTree, validate_traversal
from mrfgc.oracle import solve_exact_bfs
from mrfgc.ptas import (
    Subtree,
    TreeCover,
    check_collapsible,
    f_count,
    f_minus,
    f_plus,
    greedy_traverse,
    solve_ptas,
    tree_cover,
    validate_tree_cover,
)

BINARY = RootedTree(Graph(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]), 0)


def test_cover_of_a_binary_tree():
    cover = tree_cover(BINARY, 0.5)
    got = [(s.root, sorted(s.vertices), s.flushed) for s in cover.subtrees]
    assert got == [(2, [2, 5, 6], True), (1, [1, 3, 4], True), (0, [0, 1, 2], True), (0, [0], False)]
    assert validate_tree_cover(BINARY, 0.5, cover).ok
    h = cover.cover_tree()
    assert sorted(h.edges) == [(0, 2), (1, 2), (2, 3)]
    assert [s.root for s in cover.rooted_at(0)] == [0, 0]


def test_epsilon_must_be_a_fraction_of_one():
    for eps in (0, 1, 1.5, -0.1):
        with pytest.raises(PreconditionError):
            tree_cover(BINARY, eps)
    assert tree_cover(BINARY, Fraction(1, 3)).eps == Fraction(1, 3)


@pytest.mark.parametrize("n", [1, 2, 17, 60])
@pytest.mark.parametrize("eps", [0.05, 0.2, 0.5])
def test_random_covers_are_valid(n, eps):
    t = gen_random_tree(n, 3, n)
    cover = tree_cover(t, eps)
    rep = validate_tree_cover(t, eps, cover)
    assert rep.ok, rep.failures()


def test_validator_catches_broken_covers():
    t = BINARY
    lone = Subtree(3, frozenset({3, 4}))
    cover = TreeCover(t, Fraction(1, 2), [lone], Subtree(0, frozenset({0, 1, 2, 5, 6})), 0)
    fails = validate_tree_cover(t, 0.5, cover).failures()
    assert "subtree 0 is not connected" in fails
    assert "residual subtree exceeds 1/eps vertices" in fails
    assert any("exceeds 2/eps" in f for f in fails)
    gap = TreeCover(t, Fraction(1, 2), [], Subtree(0, frozenset({0, 1})), 0)
    assert "vertex 2 is in no subtree" in validate_tree_cover(t, 0.5, gap).failures()


def test_cost_constants():
    be = ImplicitConnectedBackend(RobotTypes.homogeneous(3))
    assert f_plus(be) == 6
    assert f_count(be, 3) == 4 * 3**3
    assert f_minus(be, 3) == 6 * f_count(be, 3)


def test_collapsibility_precondition():
    for k in (1, 2, 3):
        check_collapsible(ImplicitConnectedBackend(RobotTypes.homogeneous(k)))
    with pytest.raises(NonCollapsibleError):
        check_collapsible(ImplicitConnectedBackend(RobotTypes.homogeneous(4)))
    with pytest.raises(NonCollapsibleError):
        check_collapsible(ExplicitBackend(router_cleaner_library()))


def _rooted(inst):
    return Instance(inst.graph, inst.types, inst.backend, inst.x0, inst.xf, inst.tree.root)


@pytest.mark.parametrize("seed", range(8))
def test_greedy_traversal_is_valid_and_bounded(seed):
    inst = _rooted(random_tree_instance(4 + seed, 1 + seed % 3, seed))
    eps = 0.34
    res = solve_ptas(inst, eps)
    assert validate_traversal(inst, res.traversal).ok
    opt = solve_exact_bfs(inst).time
    assert res.t_star == opt
    assert opt <= res.t_greedy
    assert res.t_greedy <= opt + inst.graph.n * eps * (f_plus(inst.backend) + f_minus(inst.backend, inst.graph.max_degree))
    assert res.time == res.t_greedy


def test_greedy_with_fpt_subsolver():
    inst = _rooted(random_tree_instance(8, 2, 3))
    cover = tree_cover(inst.tree, 0.25)
    oa, ob = {}, {}
    a = greedy_traverse(inst, cover, "oracle", oa)
    b = greedy_traverse(inst, cover, "fpt", ob)
    assert validate_traversal(inst, a).ok and validate_traversal(inst, b).ok
    # subtree optima agree; the regroup detours depend on which optimum was found
    assert {k: len(v) for k, v in oa.items()} == {k: len(v) for k, v in ob.items()}


def test_single_subtree_is_optimal():
    inst = _rooted(random_tree_instance(5, 2, 9))
    res = solve_ptas(inst, 0.1)
    assert len(res.cover.subtrees) == 1
    assert res.t_greedy == res.t_star == res.t_cover
