import itertools

import pytest

from mrfgc.corpus import router_cleaner_host, router_cleaner_library
from mrfgc.errors import ConfigurationError
from mrfgc.formations import (
    ConfigSpace,
    ExplicitBackend,
    Formation,
    FormationLibrary,
    ImplicitConnectedBackend,
    Transposition,
    check_transposition,
    connected_subsets,
    enumerate_transitions,
    is_in_form,
    placements,
    validate_transposition,
)
from mrfgc.library import generate_connectivity_library
from mrfgc.model import Configuration, Graph, RobotTypes


def cfg(*items):
    return Configuration.from_counts({(v, t): c for v, t, c in items})


HOSTS = [
    Graph(4, [(0, 1), (1, 2), (2, 3)]),
    Graph(4, [(0, 1), (0, 2), (0, 3)]),
    Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
    Graph(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]),
]


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("host", HOSTS, ids=["path", "star", "cycle", "kite"])
def test_connectivity_library_matches_implicit_backend(k, host):
    types = RobotTypes.homogeneous(k)
    imp = ImplicitConnectedBackend(types)
    exp = ExplicitBackend(generate_connectivity_library(k, types))
    configs = imp.all_configurations(host)
    assert configs == exp.all_configurations(host)
    for a in configs:
        assert exp.is_valid_config(host, a)
        assert set(imp.successors(host, a)) - {a} == set(exp.successors(host, a)) - {a}
        assert exp.footprint(host, a) == a.occupied()


def test_implicit_backend():
    g = HOSTS[0]
    be = ImplicitConnectedBackend(RobotTypes.homogeneous(2))
    a = cfg((0, 0, 1), (1, 0, 1))
    assert be.is_valid_config(g, a)
    assert not be.is_valid_config(g, cfg((0, 0, 1), (2, 0, 1)))
    assert not be.is_valid_config(g, cfg((0, 0, 1)))
    assert be.is_valid_transition(g, a, cfg((1, 0, 1), (2, 0, 1)))
    assert not be.is_valid_transition(g, a, cfg((2, 0, 1), (3, 0, 1)))
    succ = enumerate_transitions(be, g, a)
    assert succ == sorted(set(succ))
    assert cfg((1, 0, 2)) in succ and cfg((0, 0, 2)) in succ


def test_placements_and_connected_subsets():
    out = list(placements([0, 1], (3,)))
    assert sorted(out) == [cfg((0, 0, 1), (1, 0, 2)), cfg((0, 0, 2), (1, 0, 1))]
    assert list(placements([0, 1, 2], (2,))) == []
    subs = connected_subsets(HOSTS[0], 2)
    assert len(subs) == 4 + 3
    assert all(HOSTS[0].is_connected(s) for s in subs)


def test_is_in_form_counts_monomorphisms():
    types = RobotTypes.homogeneous(2)
    edge = Graph(2, [(0, 1)])
    f = Formation("pair", edge, cfg((0, 0, 1), (1, 0, 1)))
    a = cfg((1, 0, 1), (2, 0, 1))
    found = list(is_in_form(a, f, HOSTS[3]))
    assert len(found) == 2
    assert {x.phi for x in found} == {(1, 2), (2, 1)}
    assert list(is_in_form(cfg((0, 0, 1), (3, 0, 1)), f, HOSTS[3])) == []
    assert types.k == 2


def test_router_cleaner_anchoring():
    g = router_cleaner_host()
    be = ExplicitBackend(router_cleaner_library())
    beta = cfg((g.index("b"), 0, 1), (g.index("c"), 1, 2))
    assert be.is_valid_config(g, beta)
    [anchor] = list(be.anchors(g, beta))
    assert anchor.formation == "beta"
    # the alpha form needs the router in the middle of a path of cleaners
    alpha = cfg((g.index("a"), 1, 1), (g.index("b"), 0, 1), (g.index("c"), 1, 1))
    assert be.is_valid_config(g, alpha)
    assert not be.is_valid_config(g, cfg((g.index("a"), 0, 1), (g.index("b"), 1, 1), (g.index("c"), 1, 1)))


def test_library_validation():
    types = RobotTypes.homogeneous(2)
    edge = Graph(2, [(0, 1)])
    f = Formation("a", edge, cfg((0, 0, 1), (1, 0, 1)))
    with pytest.raises(ConfigurationError):
        FormationLibrary(types, (f, f), ())
    with pytest.raises(ConfigurationError):
        FormationLibrary(types, (Formation("b", Graph(2, []), cfg((0, 0, 1), (1, 0, 1))),), ())
    with pytest.raises(ConfigurationError):
        FormationLibrary(types, (Formation("c", edge, cfg((0, 0, 1))),), ())
    t = Transposition("t", edge, cfg((0, 0, 2)), cfg((0, 0, 1), (1, 0, 1)), "a", "zz")
    with pytest.raises(ConfigurationError):
        FormationLibrary(types, (f,), (t,))


def test_transposition_checks():
    types = RobotTypes.homogeneous(2)
    p3 = Graph(3, [(0, 1), (1, 2)])
    ok = Transposition("t", p3, cfg((0, 0, 2)), cfg((0, 0, 1), (1, 0, 1)))
    assert validate_transposition(ok, types)
    assert check_transposition(ok, types) == []
    far = Transposition("u", p3, cfg((0, 0, 2)), cfg((0, 0, 1), (2, 0, 1)))
    assert not validate_transposition(far, types)
    assert check_transposition(far, types)


def test_config_space_memoises():
    g = HOSTS[2]
    be = ImplicitConnectedBackend(RobotTypes.homogeneous(2))
    space = ConfigSpace(g, be)
    a = cfg((0, 0, 2))
    assert space.successors(a) is space.successors(a)
    for b in space.successors(a):
        assert space.is_transition(a, b) == be.is_valid_transition(g, a, b)
    assert space.footprint(a) == {0}


def test_transitions_are_symmetric():
    g = HOSTS[3]
    be = ExplicitBackend(generate_connectivity_library(3))
    configs = be.all_configurations(g)
    for a, b in itertools.product(configs[:12], configs):
        assert be.is_valid_transition(g, a, b) == be.is_valid_transition(g, b, a)
