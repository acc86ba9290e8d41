"""Command-line front end.

Exit codes: 0 success, 1 validation failed, 2 infeasible instance, 3 budget
exceeded, 64 usage error, 65 bad input data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import BudgetExceeded, InfeasibleInstance, MRFGCError, NonCollapsibleError, ParseError, PreconditionError, SemanticError

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_BUDGET, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3, 64, 65

log = logging.getLogger("mrfgc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _err(msg: str):
    print(f"mrfgc: {msg}", file=sys.stderr)


def _read_instance(path):
    from .io import read_instance

    try:
        return read_instance(path)
    except OSError as exc:
        raise SemanticError(f"cannot read {path}: {exc.strerror}") from None


# ---------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    import time

    from .io import write_traversal

    if args.algo == "ptas" and args.epsilon is None:
        raise UsageError("--epsilon is required with --algo ptas")
    if args.epsilon is not None and not 0 < args.epsilon < 1:
        raise UsageError("--epsilon must lie in (0, 1)")
    inst = _read_instance(args.instance)
    start = time.perf_counter()
    if args.algo == "oracle":
        from .oracle import DEFAULT_MAX_STATES, solve_exact_bfs

        res = solve_exact_bfs(inst, max_states=args.max_states or DEFAULT_MAX_STATES, max_ms=args.max_ms)
        if res.traversal is None:
            raise InfeasibleInstance("no traversal covers every vertex")
        trav, states = res.traversal, res.states
    elif args.algo == "fpt":
        from .fpt import DEFAULT_MAX_ROWS, run_fpt

        res = run_fpt(inst, max_rows=args.max_states or DEFAULT_MAX_ROWS, max_ms=args.max_ms)
        trav, states = res.traversal, res.rows
    else:
        from .model import Instance
        from .ptas import solve_ptas

        rooted = inst
        if inst.root is None:
            rooted = Instance(inst.graph, inst.types, inst.backend, inst.x0, inst.xf, inst.tree.root, inst.decomposition)
        res = solve_ptas(rooted, args.epsilon, subsolver=args.subsolver, oracle_states=None)
        trav, states = res.traversal, len(res.cover.subtrees)
    wall = (time.perf_counter() - start) * 1000
    out = Path(args.out) if args.out else Path(args.instance).with_suffix(".trav")
    write_traversal(inst, trav, out)
    print(f"time={trav.time} states={states} wall_ms={wall:.1f}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .io import read_traversal
    from .model import validate_traversal

    inst = _read_instance(args.instance)
    try:
        x = read_traversal(args.traversal, inst)
    except OSError as exc:
        raise SemanticError(f"cannot read {args.traversal}: {exc.strerror}") from None
    rep = validate_traversal(inst, x)
    if rep.ok:
        print(f"ok time={x.time}")
        return EXIT_OK
    for f in rep.failures():
        print(f"FAIL {f}")
    return EXIT_INVALID


def cmd_gen(args) -> int:
    from .corpus import random_graph_instance, random_tree_instance, router_cleaner_instance, star_instance
    from .formations import ExplicitBackend
    from .io import write_instance
    from .library import generate_connectivity_library
    from .model import Instance

    seed = args.seed if args.seed is not None else 0
    if args.kind == "tree":
        inst = random_tree_instance(args.n, args.k, seed, args.max_degree)
    elif args.kind == "graph":
        inst = random_graph_instance(args.n, args.k, seed, args.tw)
    elif args.kind == "star":
        inst = star_instance(args.n - 1 if args.n > 1 else 3, args.k)
    else:
        inst = router_cleaner_instance()
    if args.backend == "explicit" and inst.backend.kind != "explicit":
        lib = generate_connectivity_library(inst.types.k, inst.types)
        inst = Instance(inst.graph, inst.types, ExplicitBackend(lib), inst.x0, inst.xf, inst.root, inst.decomposition)
    elif args.backend == "implicit" and inst.backend.kind != "implicit":
        raise UsageError("this instance kind needs an explicit library")
    if args.out:
        write_instance(inst, args.out)
    else:
        from .io import serialize_instance

        sys.stdout.write(serialize_instance(inst, inline_library=True))
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import load_suite, run_bench

    suite = {}
    if args.suite:
        try:
            suite = load_suite(Path(args.suite).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SemanticError(f"cannot load suite {args.suite}: {exc}") from None
    if args.seed is not None:
        suite["seed"] = args.seed
    if args.max_states is not None:
        suite["max_states"] = args.max_states
    if args.max_ms is not None:
        suite["max_ms"] = args.max_ms
    rep = run_bench(suite, jobs=args.jobs)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(rep.to_csv(), encoding="utf-8", newline="\n")
        (out / "summary.json").write_text(
            json.dumps({"digest": rep.digest(), "summary": rep.summary()}, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
            newline="\n",
        )
    sys.stdout.write(rep.table())
    print(f"digest={rep.digest()} violations={len(rep.violations)}")
    return EXIT_OK


def cmd_shapes(args) -> int:
    from .shapes import enumerate_shapes

    shapes = enumerate_shapes()
    doc = [{"name": s.name, "pre": list(s.pre), "post": [s.post[0], s.post[1], list(s.post[2])]} for s in shapes]
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        for s in shapes:
            print(f"{s.name:4} pre(Q,P,R)={s.pre} post(P,R,children)={s.post}")
    print(f"{len(shapes)} shapes")
    return EXIT_OK


def cmd_cover(args) -> int:
    from .ptas import tree_cover, validate_tree_cover

    if args.epsilon is None:
        raise UsageError("--epsilon is required")
    if not 0 < args.epsilon < 1:
        raise UsageError("--epsilon must lie in (0, 1)")
    inst = _read_instance(args.instance)
    t = inst.tree
    cover = tree_cover(t, args.epsilon)
    rep = validate_tree_cover(t, args.epsilon, cover)
    labels = inst.graph.labels
    doc = {
        "epsilon": args.epsilon,
        "root": labels[t.root],
        "subtrees": [
            {"root": labels[s.root], "vertices": [labels[v] for v in sorted(s.vertices)], "flushed": s.flushed}
            for s in cover.subtrees
        ],
        "cover_tree": sorted([a, b] for a, b in cover.cover_tree().edges),
        "valid": rep.ok,
        "failures": rep.failures(),
    }
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep.ok else EXIT_INVALID


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mrfgc", description="Multi-robot formation graph coverage")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="solve an instance and write a traversal")
    s.add_argument("instance")
    s.add_argument("--algo", choices=["oracle", "fpt", "ptas"], default="oracle")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--subsolver", choices=["oracle", "fpt"], default="oracle")
    s.add_argument("--max-states", type=int)
    s.add_argument("--max-ms", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("validate", help="check a traversal against its instance")
    s.add_argument("instance")
    s.add_argument("traversal")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("gen", help="write a generated instance")
    s.add_argument("--kind", choices=["tree", "graph", "star", "router-cleaner"], default="tree")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--max-degree", type=int, default=3)
    s.add_argument("--tw", type=int, default=2)
    s.add_argument("--seed", type=int)
    s.add_argument("--backend", choices=["implicit", "explicit"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("bench", help="run a benchmark suite")
    s.add_argument("suite", nargs="?")
    s.add_argument("--seed", type=int)
    s.add_argument("--max-states", type=int)
    s.add_argument("--max-ms", type=float)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("shapes", help="list the three-robot transition shapes")
    s.add_argument("--out")
    s.set_defaults(func=cmd_shapes)

    s = sub.add_parser("cover", help="print an epsilon tree cover of a tree instance")
    s.add_argument("instance")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_cover)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        return args.func(args)
    except UsageError as exc:
        _err(f"usage: {exc}")
        return EXIT_USAGE
    except (ParseError, SemanticError, NonCollapsibleError, PreconditionError) as exc:
        _err(str(exc))
        return EXIT_DATA
    except InfeasibleInstance as exc:
        _err(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    except BudgetExceeded as exc:
        _err(f"budget exceeded: {exc}")
        return EXIT_BUDGET
    except MRFGCError as exc:
        _err(str(exc))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
