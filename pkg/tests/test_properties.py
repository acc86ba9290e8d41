"""Invariants checked on generated inputs."""

import math
import random
from fractions import Fraction

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mrfgc.corpus import gen_random_graph, gen_random_tree, random_tree_instance
from mrfgc.formations import ExplicitBackend, ImplicitConnectedBackend
from mrfgc.io import parse_instance, parse_traversal, serialize_instance, serialize_traversal
from mrfgc.library import generate_connectivity_library
from mrfgc.matching import find_monomorphisms, transport_plan
from mrfgc.model import Configuration, Graph, RobotTypes, RootedTree, validate_traversal
from mrfgc.oracle import find_repeated_transition, normalize_traversal, solve_exact_bfs, z_transform
from mrfgc.ptas import tree_cover, validate_tree_cover
from mrfgc.treedecomp import decompose, validate_decomposition

seeds = st.integers(0, 2**31 - 1)
fast = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@fast
@given(n=st.integers(1, 120), d=st.integers(2, 4), seed=seeds, m=st.integers(2, 25))
def test_tree_cover_is_valid_when_one_over_eps_is_whole(n, d, seed, m):
    t = gen_random_tree(n, d, seed)
    rep = validate_tree_cover(t, Fraction(1, m), tree_cover(t, Fraction(1, m)))
    assert rep.ok, rep.failures()


@fast
@given(n=st.integers(1, 120), seed=seeds, eps=st.floats(0.03, 0.97))
def test_tree_cover_for_any_eps(n, seed, eps):
    # with 1/eps fractional, a path of 11 vertices and eps = 0.9 has no cover
    # meeting every bound; only the count bound is relaxed to floor(1/eps)
    t = gen_random_tree(n, 3, seed)
    cover = tree_cover(t, eps)
    rep = validate_tree_cover(t, eps, cover)
    assert rep.failures() in ([], ["more than n*eps flushed subtrees"])
    assert len(cover.flushed) <= (n - 1) / math.floor(1 / Fraction(str(eps)))


def test_no_cover_meets_every_bound_for_fractional_one_over_eps():
    t = RootedTree(Graph(11, [(i, i + 1) for i in range(10)]), 0)
    rep = validate_tree_cover(t, 0.9, tree_cover(t, 0.9))
    assert rep.failures() == ["more than n*eps flushed subtrees"]


@fast
@given(n=st.integers(1, 12), tw=st.integers(1, 3), seed=seeds)
def test_decompositions_are_valid(n, tw, seed):
    g = gen_random_graph(n, tw, seed)
    assert g.is_connected()
    d = decompose(g)
    assert validate_decomposition(g, d).ok


def _random_walk(backend, g, start, steps, rng):
    x = [start]
    for _ in range(steps):
        succ = [b for b in backend.successors(g, x[-1]) if b != x[-1]]
        x.append(rng.choice(succ))
    return x


@fast
@given(seed=seeds, steps=st.integers(2, 40), k=st.integers(1, 3))
def test_normalize_removes_repeats_and_keeps_validity(seed, steps, k):
    rng = random.Random(seed)
    t = gen_random_tree(6, 3, seed)
    types = RobotTypes.homogeneous(k)
    be = ImplicitConnectedBackend(types)
    walk = _random_walk(be, t.graph, Configuration.all_at(0, types), steps, rng)
    y = normalize_traversal(walk)
    assert find_repeated_transition(y) is None
    assert y[0] == walk[0] and y[-1] == walk[-1]
    assert (len(walk) - len(y)) % 2 == 0
    for a, b in zip(y, y[1:]):
        assert be.is_valid_transition(t.graph, a, b)
    # every configuration of the walk is still visited
    assert set(walk) == set(y)


@fast
@given(seed=seeds, steps=st.integers(2, 30))
def test_z_transform_drops_two(seed, steps):
    rng = random.Random(seed)
    t = gen_random_tree(5, 3, seed)
    types = RobotTypes.homogeneous(2)
    be = ImplicitConnectedBackend(types)
    walk = _random_walk(be, t.graph, Configuration.all_at(0, types), steps, rng)
    rep = find_repeated_transition(walk)
    if rep is None:
        return
    z = z_transform(walk, *rep)
    assert z.time == len(walk) - 3


@fast
@given(n=st.integers(2, 6), seed=seeds, k=st.integers(1, 3))
def test_explicit_connectivity_library_agrees_with_implicit(n, seed, k):
    g = gen_random_graph(n, 2, seed)
    types = RobotTypes.homogeneous(k)
    imp = ImplicitConnectedBackend(types)
    exp = ExplicitBackend(generate_connectivity_library(k, types))
    rng = random.Random(seed)
    configs = imp.all_configurations(g)
    for a in rng.sample(configs, min(4, len(configs))):
        assert set(imp.successors(g, a)) - {a} == set(exp.successors(g, a)) - {a}


@fast
@given(seed=seeds, k=st.integers(1, 3))
def test_transitions_are_symmetric(seed, k):
    rng = random.Random(seed)
    t = gen_random_tree(7, 3, seed)
    types = RobotTypes.homogeneous(k)
    be = ImplicitConnectedBackend(types)
    a = _random_walk(be, t.graph, Configuration.all_at(0, types), 3, rng)[-1]
    for b in be.successors(t.graph, a):
        assert be.is_valid_transition(t.graph, b, a)
        assert transport_plan(t.graph, b, a, 1) is not None


@fast
@given(n=st.integers(1, 9), seed=seeds, k=st.integers(1, 3))
def test_serialization_round_trips(n, seed, k):
    inst = random_tree_instance(n, k, seed)
    text = serialize_instance(inst)
    back = parse_instance(text)
    assert serialize_instance(back) == text
    x = [inst.x0]
    tt = serialize_traversal(inst, x)
    assert serialize_traversal(back, parse_traversal(tt, back)) == tt


@settings(max_examples=15, deadline=None)
@given(n=st.integers(1, 7), seed=seeds, k=st.integers(1, 3))
def test_oracle_optimum_is_valid_and_bounded_below(n, seed, k):
    inst = random_tree_instance(n, k, seed)
    x = solve_exact_bfs(inst).traversal
    assert validate_traversal(inst, x).ok
    assert find_repeated_transition(x) is None
    # k robots reach at most k new vertices per step
    assert x.time * inst.types.k >= inst.graph.n - len(inst.x0.occupied())


@fast
@given(n=st.integers(1, 6), seed=seeds)
def test_monomorphisms_of_a_graph_into_itself_are_automorphisms(n, seed):
    g = gen_random_graph(n, 2, seed)
    for phi in find_monomorphisms(g, g):
        assert sorted(phi) == list(range(g.n))
        assert sorted(tuple(sorted((phi[u], phi[v]))) for u, v in g.edges) == list(g.edges)


@fast
@given(counts=st.dictionaries(st.tuples(st.integers(0, 5), st.integers(0, 1)), st.integers(1, 3), min_size=1), target=st.integers(0, 5))
def test_relabel_preserves_totals(counts, target):
    x = Configuration.from_counts(counts)
    y = x.relabel({v: target for v in range(6)})
    assert y.totals(2) == x.totals(2)
    assert y.occupied() == {target}


@fast
@given(n=st.integers(2, 10), seed=seeds)
def test_graph_edges_are_canonical(n, seed):
    rng = random.Random(seed)
    pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(n)]
    pairs = [(u, v) for u, v in pairs if u != v]
    g = Graph(n, pairs)
    h = Graph(n, [(v, u) for u, v in reversed(pairs)])
    assert g == h and hash(g) == hash(h)
