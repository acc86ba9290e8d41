import json

import pytest

from mrfgc.corpus import random_graph_instance, random_tree_instance, router_cleaner_instance, router_cleaner_library
from mrfgc.errors import ParseError, SemanticError
from mrfgc.io import (
    canonical,
    digest,
    instance_ref,
    library_ref,
    parse_instance,
    parse_library,
    parse_traversal,
    read_instance,
    read_traversal,
    serialize_instance,
    serialize_library,
    serialize_traversal,
    write_instance,
    write_traversal,
)
from mrfgc.model import Instance
from mrfgc.oracle import solve_exact_bfs
from mrfgc.treedecomp import decompose


def test_canonical_form():
    assert canonical({"b": 1, "a": "é"}) == '{\n  "a": "é",\n  "b": 1\n}\n'
    assert digest("x") == "sha256:2d711642b726b04401627ca9fbac32f5c8530fb1903cc4db02258717921a4881"


@pytest.mark.parametrize(
    "inst",
    [random_tree_instance(7, 2, 1), random_graph_instance(6, 2, 2), router_cleaner_instance()],
    ids=["tree", "graph", "router"],
)
def test_instance_round_trip(inst, tmp_path):
    text = serialize_instance(inst, inline_library=True)
    back = parse_instance(text)
    assert serialize_instance(back, inline_library=True) == text
    assert instance_ref(back) == instance_ref(inst)
    path = tmp_path / "x.mrfgc"
    write_instance(inst, path)
    again = read_instance(path)
    assert serialize_instance(again) == path.read_text(encoding="utf-8")


def test_root_and_decomposition_round_trip():
    base = random_tree_instance(6, 1, 4)
    d = decompose(base.graph, 2)
    inst = Instance(base.graph, base.types, base.backend, base.x0, base.xf, 2, d)
    text = serialize_instance(inst)
    back = parse_instance(text)
    assert back.root == 2
    assert [b.vertices for b in back.decomposition.nodes] == [b.vertices for b in d.nodes]
    assert serialize_instance(back) == text


def test_library_round_trip():
    lib = router_cleaner_library()
    text = serialize_library(lib)
    assert serialize_library(parse_library(text)) == text
    assert library_ref(parse_library(text)) == library_ref(lib)


def test_referenced_library_must_be_found(tmp_path):
    inst = router_cleaner_instance()
    text = serialize_instance(inst)
    with pytest.raises(SemanticError) as err:
        parse_instance(text)
    assert err.value.path == "$.backend.library_ref"
    lib = inst.backend.library
    assert serialize_instance(parse_instance(text, libraries={library_ref(lib): lib})) == text


def test_traversal_round_trip(tmp_path):
    inst = random_tree_instance(6, 2, 3)
    x = solve_exact_bfs(inst).traversal
    text = serialize_traversal(inst, x)
    assert json.loads(text)["time"] == x.time
    assert parse_traversal(text, inst) == x
    write_traversal(inst, x, tmp_path / "x.trav")
    assert read_traversal(tmp_path / "x.trav", inst) == x
    other = random_tree_instance(6, 2, 4)
    with pytest.raises(SemanticError) as err:
        parse_traversal(text, other)
    assert err.value.path == "$.instance"
    doc = json.loads(text)
    doc["time"] += 1
    with pytest.raises(SemanticError, match="disagrees"):
        parse_traversal(canonical(doc), inst)


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as err:
        parse_instance('{\n  "schema": ,\n}')
    assert (err.value.line, err.value.column) == (2, 13)


def _doc(inst):
    return json.loads(serialize_instance(inst, inline_library=True))


@pytest.mark.parametrize(
    "mutate,path",
    [
        (lambda d: d.update(schema="mrfgc-instance/9"), "$.schema"),
        (lambda d: d.pop("graph"), "$"),
        (lambda d: d["graph"]["edges"].append(["0", "zz"]), "$.graph.edges[6][1]"),
        (lambda d: d["graph"]["vertices"].append("0"), "$.graph.vertices"),
        (lambda d: d["robots"][0].update(count="two"), "$.robots[0].count"),
        (lambda d: d["backend"].update(kind="magic"), "$.backend.kind"),
        (lambda d: d["x0"][0].update(vertex="nowhere"), "$.x0[0].vertex"),
        (lambda d: d["x0"][0].update(type="drone"), "$.x0[0].type"),
        (lambda d: d["x0"][0].update(count=1), "$.x0"),
        (lambda d: d.update(root="nowhere"), "$.root"),
    ],
)
def test_semantic_errors_carry_paths(mutate, path):
    doc = _doc(random_tree_instance(7, 2, 1))
    mutate(doc)
    with pytest.raises(SemanticError) as err:
        parse_instance(canonical(doc))
    assert err.value.path == path


def test_invalid_start_is_rejected():
    inst = random_tree_instance(7, 2, 1)
    g = inst.graph
    u, v = next((u, v) for u in range(g.n) for v in range(u + 1, g.n) if not g.has_edge(u, v))
    doc = _doc(inst)
    doc["x0"] = [{"vertex": g.labels[u], "type": "r", "count": 1}, {"vertex": g.labels[v], "type": "r", "count": 1}]
    with pytest.raises(SemanticError) as err:
        parse_instance(canonical(doc))
    assert err.value.path == "$"
