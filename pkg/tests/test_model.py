import pytest

from mrfgc.errors import ConfigurationError, GraphError, PreconditionError
from mrfgc.formations import ImplicitConnectedBackend
from mrfgc.model import (
    AnchoredConfiguration,
    Configuration,
    Graph,
    Instance,
    RobotTypes,
    RootedTree,
    Traversal,
    bfs_distances,
    contract_edge,
    is_connected_configuration,
    traversal_time,
    validate_traversal,
)


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cfg(*items):
    return Configuration.from_counts({(v, t): c for v, t, c in items})


def test_graph_basics():
    g = Graph(4, [(0, 1), (1, 2), (2, 0), (2, 3), (1, 0)])
    assert g.edges == ((0, 1), (0, 2), (1, 2), (2, 3))
    assert g.neighbors(2) == (0, 1, 3)
    assert g.degree(3) == 1
    assert g.max_degree == 3
    assert g.has_edge(3, 2) and not g.has_edge(0, 3)
    assert g.is_connected()
    assert not g.is_connected([0, 3])
    assert not g.is_tree()
    assert path(4).is_tree()


@pytest.mark.parametrize(
    "n,edges",
    [(-1, []), (2, [(0, 2)]), (2, [(1, 1)])],
)
def test_graph_rejects_bad_input(n, edges):
    with pytest.raises(GraphError):
        Graph(n, edges)


def test_graph_labels():
    g = Graph.from_labeled_edges(["a", "b", "c"], [("a", "b"), ("c", "b")])
    assert g.index("c") == 2
    assert g.edges == ((0, 1), (1, 2))
    with pytest.raises(GraphError):
        Graph.from_labeled_edges(["a"], [("a", "z")])
    with pytest.raises(GraphError):
        Graph(2, [], ["x", "x"])


def test_induced_subgraph():
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)], list("abcde"))
    h, order = g.induced([4, 2, 3])
    assert order == (2, 3, 4)
    assert h.edges == ((0, 1), (1, 2))
    assert h.labels == ("c", "d", "e")


def test_rooted_tree():
    t = RootedTree(Graph(5, [(0, 1), (0, 2), (2, 3), (2, 4)]), 2)
    assert t.parent == (2, 0, -1, 2, 2)
    assert t.children[2] == (0, 3, 4)
    assert t.subtree_vertices(0) == {0, 1}
    assert t.is_leaf(1) and not t.is_leaf(0)
    with pytest.raises(GraphError):
        RootedTree(Graph(3, [(0, 1)]))
    with pytest.raises(GraphError):
        RootedTree(path(3), 5)


def test_configuration_is_a_count_map():
    a = cfg((2, 0, 1), (0, 0, 2))
    b = Configuration.from_counts({(0, 0): 2, (2, 0): 1, (1, 0): 0})
    assert a == b and hash(a) == hash(b)
    assert a.occupied() == {0, 2}
    assert a.count(0, 0) == 2 and a.count(1, 0) == 0
    assert a.mask == 0b101
    assert a.totals(1) == (3,)
    assert a.relabel({0: 1, 2: 1}) == cfg((1, 0, 3))
    with pytest.raises(ConfigurationError):
        Configuration(((0, 0, 0),))
    with pytest.raises(ConfigurationError):
        Configuration(((1, 0, 1), (0, 0, 1)))


def test_anchored_configuration_compares_by_config():
    x = cfg((0, 0, 1), (1, 0, 1))
    a = AnchoredConfiguration(x, "f", (0, 1, 2))
    assert a == AnchoredConfiguration(x, "g", (1, 0))
    assert a.active == {0, 1, 2}
    with pytest.raises(ConfigurationError):
        AnchoredConfiguration(x, "f", (0, 2))


def test_robot_types():
    t = RobotTypes(("r", "b"), (1, 2))
    assert t.k == 3 and len(t) == 2 and t.index("b") == 1
    with pytest.raises(ConfigurationError):
        RobotTypes(("r",), (0,))
    with pytest.raises(ConfigurationError):
        RobotTypes(("r", "r"), (1, 1))


def test_contract_edge():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)], list("abcd"))
    h, m = contract_edge(g, (1, 2))
    assert m == (0, 1, 1, 2)
    assert h.edges == ((0, 1), (0, 2), (1, 2))
    assert h.labels == ("a", "b+c", "d")
    with pytest.raises(GraphError):
        contract_edge(g, (0, 2))


def test_connected_configuration_and_distances():
    g = path(4)
    assert is_connected_configuration(g, cfg((1, 0, 1), (2, 0, 1)))
    assert not is_connected_configuration(g, cfg((0, 0, 1), (2, 0, 1)))
    assert bfs_distances(g, 1) == [1, 0, 1, 2]


def _path_instance(n, k):
    types = RobotTypes.homogeneous(k)
    x0 = Configuration.all_at(0, types)
    return Instance(path(n), types, ImplicitConnectedBackend(types), x0, x0)


def test_instance_checks_endpoints():
    types = RobotTypes.homogeneous(2)
    be = ImplicitConnectedBackend(types)
    with pytest.raises(ConfigurationError):
        Instance(path(3), types, be, cfg((0, 0, 1)), cfg((0, 0, 2)))
    with pytest.raises(ConfigurationError):
        Instance(path(3), types, be, cfg((0, 0, 1), (2, 0, 1)), cfg((0, 0, 2)))
    assert _path_instance(3, 2).tree.root == 0


def test_validate_traversal_reports_each_failure():
    inst = _path_instance(3, 1)
    at = [cfg((v, 0, 1)) for v in range(3)]
    good = [at[0], at[1], at[2], at[1], at[0]]
    assert validate_traversal(inst, good).ok
    assert traversal_time(good) == 4 == Traversal(good).time

    rep = validate_traversal(inst, [at[0], at[2], at[1], at[0]])
    assert rep.invalid_steps == [0] and not rep.ok
    rep = validate_traversal(inst, [at[0], at[1], at[0]])
    assert rep.unvisited == [2]
    rep = validate_traversal(inst, [at[1], at[2], at[1]])
    assert not rep.start_ok and not rep.end_ok
    rep = validate_traversal(inst, [at[0], cfg((0, 0, 1), (2, 0, 1)), at[0]])
    assert rep.invalid_configs == [1] and rep.invalid_steps == [0, 1]
    assert any("unvisited" in f for f in validate_traversal(inst, [at[0]]).failures())
    rep = validate_traversal(inst, [])
    assert rep.time is None and "empty traversal" in rep.failures()
    with pytest.raises(PreconditionError):
        traversal_time([])
