import pytest

from mrfgc.corpus import router_cleaner_instance, star_instance
from mrfgc.errors import BudgetExceeded, PreconditionError
from mrfgc.formations import ImplicitConnectedBackend
from mrfgc.model import Configuration, Graph, Instance, RobotTypes, validate_traversal
from mrfgc.oracle import (
    detect_contradiction,
    find_repeated_transition,
    normalize_traversal,
    solve_exact_bfs,
    z_transform,
)


def path_instance(n, k, start=0):
    types = RobotTypes.homogeneous(k)
    x0 = Configuration.all_at(start, types)
    return Instance(Graph(n, [(i, i + 1) for i in range(n - 1)]), types, ImplicitConnectedBackend(types), x0, x0)


def at(*vs):
    return Configuration.from_counts({(v, 0): 1 for v in vs})


# values frozen from the exact search
@pytest.mark.parametrize("n,expected", [(1, 0), (2, 2), (3, 4), (5, 8)])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_paths_from_an_end(n, k, expected):
    res = solve_exact_bfs(path_instance(n, k))
    assert res.time == expected
    assert res.status == "optimal"


@pytest.mark.parametrize("k,expected", [(1, 6), (2, 4), (3, 3)])
def test_star_with_three_leaves(k, expected):
    inst = star_instance(3, k)
    res = solve_exact_bfs(inst)
    assert res.time == expected
    assert validate_traversal(inst, res.traversal).ok


def test_start_and_end_may_differ():
    types = RobotTypes.homogeneous(1)
    g = Graph(3, [(0, 1), (1, 2)])
    inst = Instance(g, types, ImplicitConnectedBackend(types), at(0), at(2))
    assert solve_exact_bfs(inst).time == 2


def test_unreachable_end_is_infeasible():
    inst = router_cleaner_instance(with_transposition=False)
    res = solve_exact_bfs(inst)
    assert res.traversal is None and res.status == "infeasible"


def test_state_budget():
    with pytest.raises(BudgetExceeded):
        solve_exact_bfs(path_instance(6, 3), max_states=10)


def test_z_transform_splices_a_loop():
    x = [at(0), at(1), at(2), at(1), at(0), at(1), at(2), at(1), at(0)]
    assert find_repeated_transition(x) == (0, 4)
    y = z_transform(x, 0, 4)
    assert y.time == len(x) - 3
    assert list(y) == [at(0), at(1), at(2), at(1), at(2), at(1), at(0)]
    with pytest.raises(PreconditionError):
        z_transform(x, 0, 1)
    with pytest.raises(PreconditionError):
        z_transform(x, 3, 2)


def test_normalize_and_contradiction():
    inst = path_instance(3, 1)
    x = [at(0), at(1), at(0), at(1), at(2), at(1), at(0)]
    assert validate_traversal(inst, x).ok
    y = normalize_traversal(x)
    assert find_repeated_transition(y) is None
    assert validate_traversal(inst, y).ok and y.time == 4
    assert detect_contradiction(inst, x) is not None
    assert detect_contradiction(inst, y) is None
