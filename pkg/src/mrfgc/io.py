"""Canonical text documents for instances (``.mrfgc``), traversals
(``.trav``) and formation libraries (``.flib``).

Documents are JSON objects with a ``schema`` field. The canonical form is
UTF-8, LF line ends, two-space indent, sorted keys and a final newline, so
serializing a parsed canonical document gives back the same bytes and
content hashes are stable.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping, Optional

from .errors import ConfigurationError, GraphError, MRFGCError, ParseError, PreconditionError, SemanticError
from .formations import ExplicitBackend, Formation, FormationLibrary, ImplicitConnectedBackend, Transposition
from .model import Configuration, Graph, Instance, RobotTypes, Traversal, as_config
from .treedecomp import Bag, NiceTreeDecomposition, make_nice, validate_decomposition

INSTANCE_SCHEMA = "mrfgc-instance/1"
TRAVERSAL_SCHEMA = "mrfgc-traversal/1"
LIBRARY_SCHEMA = "mrfgc-library/1"


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def _load(text: str, schema: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise SemanticError("document must be an object", "$")
    if doc.get("schema") != schema:
        raise SemanticError(f"expected schema {schema!r}, found {doc.get('schema')!r}", "$.schema")
    return doc


def _get(obj, key: str, path: str, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SemanticError(f"missing field {key!r}", path)
    val = obj[key]
    if kind is not None and not isinstance(val, kind) or isinstance(val, bool) and kind is int:
        raise SemanticError(f"field {key!r} has the wrong type", f"{path}.{key}")
    return val


# ---------------------------------------------------------------- pieces


def _types_doc(types: RobotTypes) -> list:
    return [{"name": n, "count": c} for n, c in zip(types.names, types.counts)]


def _parse_types(doc, path: str) -> RobotTypes:
    if not isinstance(doc, list) or not doc:
        raise SemanticError("robot types must be a non-empty list", path)
    names, counts = [], []
    for i, t in enumerate(doc):
        p = f"{path}[{i}]"
        names.append(_get(t, "name", p, str))
        counts.append(_get(t, "count", p, int))
    try:
        return RobotTypes(tuple(names), tuple(counts))
    except ConfigurationError as exc:
        raise SemanticError(str(exc), path) from None


def _graph_doc(g: Graph) -> dict:
    return {"vertices": list(g.labels), "edges": [[g.labels[u], g.labels[v]] for u, v in g.edges]}


def _parse_graph(doc, path: str) -> Graph:
    verts = _get(doc, "vertices", path, list)
    edges = _get(doc, "edges", path, list)
    for i, v in enumerate(verts):
        if not isinstance(v, str):
            raise SemanticError("vertex labels must be strings", f"{path}.vertices[{i}]")
    if len(set(verts)) != len(verts):
        raise SemanticError("duplicate vertex label", f"{path}.vertices")
    index = {s: i for i, s in enumerate(verts)}
    pairs = []
    for i, e in enumerate(edges):
        p = f"{path}.edges[{i}]"
        if not isinstance(e, list) or len(e) != 2:
            raise SemanticError("an edge is a pair of vertex labels", p)
        for j, s in enumerate(e):
            if s not in index:
                raise SemanticError(f"unknown vertex label {s!r}", f"{p}[{j}]")
        pairs.append((index[e[0]], index[e[1]]))
    try:
        return Graph(len(verts), pairs, verts)
    except GraphError as exc:
        raise SemanticError(str(exc), f"{path}.edges") from None


def _config_doc(x: Configuration, labels, types: RobotTypes) -> list:
    return [{"vertex": labels[v], "type": types.names[t], "count": c} for v, t, c in as_config(x).items]


def _parse_config(doc, path: str, g: Graph, types: RobotTypes) -> Configuration:
    if not isinstance(doc, list):
        raise SemanticError("a configuration is a list of placements", path)
    acc: dict[tuple[int, int], int] = {}
    for i, item in enumerate(doc):
        p = f"{path}[{i}]"
        lab = _get(item, "vertex", p, str)
        name = _get(item, "type", p, str)
        c = _get(item, "count", p, int)
        try:
            v = g.index(lab)
        except (KeyError, ValueError):
            raise SemanticError(f"unknown vertex label {lab!r}", f"{p}.vertex") from None
        if name not in types.names:
            raise SemanticError(f"unknown robot type {name!r}", f"{p}.type")
        if c <= 0:
            raise SemanticError("counts must be positive", f"{p}.count")
        key = (v, types.index(name))
        if key in acc:
            raise SemanticError("placement listed twice", p)
        acc[key] = c
    x = Configuration.from_counts(acc)
    if x.totals(len(types)) != types.counts:
        raise SemanticError("configuration does not place exactly the declared robots of every type", path)
    return x


# ---------------------------------------------------------------- libraries


def library_doc(lib: FormationLibrary) -> dict:
    forms = []
    for f in lib.formations:
        d = _graph_doc(f.graph)
        d.update(id=f.id, placement=_config_doc(f.placement, f.graph.labels, lib.types))
        forms.append(d)
    trans = []
    for t in lib.transpositions:
        d = _graph_doc(t.graph)
        d.update(
            id=t.id,
            source=_config_doc(t.source, t.graph.labels, lib.types),
            target=_config_doc(t.target, t.graph.labels, lib.types),
        )
        if t.source_formation is not None:
            d["source_formation"] = t.source_formation
        if t.target_formation is not None:
            d["target_formation"] = t.target_formation
        trans.append(d)
    return {"schema": LIBRARY_SCHEMA, "types": _types_doc(lib.types), "formations": forms, "transpositions": trans}


def serialize_library(lib: FormationLibrary) -> str:
    return canonical(library_doc(lib))


def library_ref(lib: FormationLibrary) -> str:
    return digest(serialize_library(lib))


def _library_from_doc(doc: dict, path: str = "$") -> FormationLibrary:
    types = _parse_types(_get(doc, "types", path), f"{path}.types")
    forms = []
    for i, f in enumerate(_get(doc, "formations", path, list)):
        p = f"{path}.formations[{i}]"
        g = _parse_graph(f, p)
        forms.append(Formation(_get(f, "id", p, str), g, _parse_placement(f.get("placement"), f"{p}.placement", g, types)))
    trans = []
    for i, t in enumerate(_get(doc, "transpositions", path, list)):
        p = f"{path}.transpositions[{i}]"
        g = _parse_graph(t, p)
        trans.append(
            Transposition(
                _get(t, "id", p, str),
                g,
                _parse_placement(t.get("source"), f"{p}.source", g, types),
                _parse_placement(t.get("target"), f"{p}.target", g, types),
                t.get("source_formation"),
                t.get("target_formation"),
            )
        )
    try:
        return FormationLibrary(types, tuple(forms), tuple(trans))
    except ConfigurationError as exc:
        raise SemanticError(str(exc), path) from None


def _parse_placement(doc, path, g, types) -> Configuration:
    if doc is None:
        raise SemanticError("missing placement", path)
    return _parse_config(doc, path, g, types)


def parse_library(text: str) -> FormationLibrary:
    return _library_from_doc(_load(text, LIBRARY_SCHEMA))


# ---------------------------------------------------------------- instances


def _decomposition_doc(d: NiceTreeDecomposition, labels) -> dict:
    nodes = []
    for b in d.nodes:
        node = {"kind": b.kind, "bag": [labels[v] for v in sorted(b.vertices)], "children": list(b.children)}
        if b.vertex is not None:
            node["vertex"] = labels[b.vertex]
        nodes.append(node)
    return {"root": d.root, "nodes": nodes}


def _parse_decomposition(doc, path: str, g: Graph) -> NiceTreeDecomposition:
    def labels_of(seq, p):
        out = []
        for i, s in enumerate(seq):
            if s not in g.labels:
                raise SemanticError(f"unknown vertex label {s!r}", f"{p}[{i}]")
            out.append(g.index(s))
        return out

    try:
        if isinstance(doc, dict) and "nodes" in doc:
            nodes = []
            for i, nd in enumerate(_get(doc, "nodes", path, list)):
                p = f"{path}.nodes[{i}]"
                vert = nd.get("vertex")
                nodes.append(
                    Bag(
                        frozenset(labels_of(_get(nd, "bag", p, list), f"{p}.bag")),
                        _get(nd, "kind", p, str),
                        None if vert is None else labels_of([vert], f"{p}.vertex")[0],
                        tuple(_get(nd, "children", p, list)),
                    )
                )
            d = NiceTreeDecomposition(nodes, g.n, _get(doc, "root", path, int))
        else:
            bags = [labels_of(b, f"{path}.bags[{i}]") for i, b in enumerate(_get(doc, "bags", path, list))]
            edges = [tuple(e) for e in _get(doc, "edges", path, list)]
            d = make_nice(bags, edges, g.n, g)
    except (PreconditionError, IndexError, TypeError) as exc:
        raise SemanticError(f"invalid decomposition: {exc}", path) from None
    rep = validate_decomposition(g, d)
    if not rep.ok:
        raise SemanticError("invalid decomposition: " + "; ".join(rep.failures()), path)
    return d


def instance_doc(inst: Instance, inline_library: bool = False) -> dict:
    g, types = inst.graph, inst.types
    be = inst.backend
    if getattr(be, "kind", None) == "explicit":
        backend = {"kind": "explicit"}
        if inline_library:
            backend["library"] = library_doc(be.library)
        else:
            backend["library_ref"] = library_ref(be.library)
    else:
        backend = {"kind": "implicit"}
    doc = {
        "schema": INSTANCE_SCHEMA,
        "graph": _graph_doc(g),
        "robots": _types_doc(types),
        "backend": backend,
        "x0": _config_doc(inst.x0, g.labels, types),
        "xf": _config_doc(inst.xf, g.labels, types),
    }
    if inst.root is not None:
        doc["root"] = g.labels[inst.root]
    if inst.decomposition is not None:
        doc["decomposition"] = _decomposition_doc(inst.decomposition, g.labels)
    return doc


def serialize_instance(inst: Instance, inline_library: bool = False) -> str:
    return canonical(instance_doc(inst, inline_library))


def instance_ref(inst: Instance) -> str:
    """Content hash of an instance; the library always counts by reference."""
    return digest(serialize_instance(inst))


def parse_instance(
    text: str,
    libraries: Optional[Mapping[str, FormationLibrary]] = None,
    search_dir: Optional[str | Path] = None,
) -> Instance:
    """Instance from its document. A referenced library is looked up in
    ``libraries`` (keyed by ``library_ref``) and then among the ``*.flib``
    files of ``search_dir``."""
    doc = _load(text, INSTANCE_SCHEMA)
    g = _parse_graph(_get(doc, "graph", "$"), "$.graph")
    types = _parse_types(_get(doc, "robots", "$"), "$.robots")
    bdoc = _get(doc, "backend", "$", dict)
    kind = _get(bdoc, "kind", "$.backend", str)
    if kind == "implicit":
        backend = ImplicitConnectedBackend(types)
    elif kind == "explicit":
        if "library" in bdoc:
            lib = _library_from_doc(bdoc["library"], "$.backend.library")
        else:
            ref = _get(bdoc, "library_ref", "$.backend", str)
            lib = _resolve_library(ref, libraries, search_dir)
        if lib.types != types:
            raise SemanticError("library robot types differ from the instance's", "$.backend")
        backend = ExplicitBackend(lib)
    else:
        raise SemanticError(f"unknown backend kind {kind!r}", "$.backend.kind")
    x0 = _parse_config(_get(doc, "x0", "$"), "$.x0", g, types)
    xf = _parse_config(_get(doc, "xf", "$"), "$.xf", g, types)
    root = None
    if "root" in doc:
        if doc["root"] not in g.labels:
            raise SemanticError(f"unknown vertex label {doc['root']!r}", "$.root")
        root = g.index(doc["root"])
    dec = None
    if "decomposition" in doc:
        dec = _parse_decomposition(doc["decomposition"], "$.decomposition", g)
    try:
        return Instance(g, types, backend, x0, xf, root, dec)
    except (ConfigurationError, GraphError) as exc:
        raise SemanticError(str(exc), "$") from None


def _resolve_library(ref: str, libraries, search_dir) -> FormationLibrary:
    if libraries and ref in libraries:
        return libraries[ref]
    if search_dir is not None:
        for p in sorted(Path(search_dir).glob("*.flib")):
            text = p.read_text(encoding="utf-8")
            if digest(text) == ref:
                return parse_library(text)
            try:
                lib = parse_library(text)
            except MRFGCError:
                continue
            if library_ref(lib) == ref:
                return lib
    raise SemanticError(f"library {ref} not found", "$.backend.library_ref")


# ---------------------------------------------------------------- traversals


def serialize_traversal(inst: Instance, x) -> str:
    x = Traversal(x)
    doc = {
        "schema": TRAVERSAL_SCHEMA,
        "instance": instance_ref(inst),
        "time": x.time,
        "configurations": [_config_doc(c, inst.graph.labels, inst.types) for c in x],
    }
    return canonical(doc)


def parse_traversal(text: str, inst: Instance) -> Traversal:
    """Traversal of ``inst``; refuses documents written for another instance."""
    doc = _load(text, TRAVERSAL_SCHEMA)
    ref = _get(doc, "instance", "$", str)
    if ref != instance_ref(inst):
        raise SemanticError("traversal was written for a different instance", "$.instance")
    confs = _get(doc, "configurations", "$", list)
    x = Traversal(_parse_config(c, f"$.configurations[{i}]", inst.graph, inst.types) for i, c in enumerate(confs))
    if "time" in doc and doc["time"] != x.time:
        raise SemanticError(f"time {doc['time']} disagrees with {len(x)} configurations", "$.time")
    return x


# ---------------------------------------------------------------- files


def read_instance(path: str | Path, libraries=None) -> Instance:
    p = Path(path)
    return parse_instance(p.read_text(encoding="utf-8"), libraries, p.parent)


def write_instance(inst: Instance, path: str | Path) -> None:
    """Write ``path`` and, for explicit backends, the referenced library
    next to it as ``<hash prefix>.flib``."""
    p = Path(path)
    if getattr(inst.backend, "kind", None) == "explicit":
        lib = inst.backend.library
        ref = library_ref(lib)
        (p.parent / f"{ref.split(':')[1][:16]}.flib").write_text(serialize_library(lib), encoding="utf-8", newline="\n")
    p.write_text(serialize_instance(inst), encoding="utf-8", newline="\n")


def write_traversal(inst: Instance, x, path: str | Path) -> None:
    Path(path).write_text(serialize_traversal(inst, x), encoding="utf-8", newline="\n")


def read_traversal(path: str | Path, inst: Instance) -> Traversal:
    return parse_traversal(Path(path).read_text(encoding="utf-8"), inst)
