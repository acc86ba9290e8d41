from mrfgc.bench import COLUMNS, DEFAULT_SUITE, build_corpus, load_suite, run_bench

SMALL = {
    "seed": 1,
    "trees": {"count": 3, "n": [3, 6], "k": [1, 3], "max_degree": 3},
    "graphs": {"count": 2, "n": [4, 5], "k": [1, 2], "tw": 2},
    "epsilons": [0.5, 0.25],
}


def test_corpus_is_seeded():
    a = build_corpus({**DEFAULT_SUITE, **SMALL})
    b = build_corpus({**DEFAULT_SUITE, **SMALL})
    assert [f for f, _ in a] == ["tree"] * 3 + ["graph"] * 2
    assert [i.graph for _, i in a] == [i.graph for _, i in b]


def test_report_shape():
    rep = run_bench(SMALL)
    assert rep.violations == []
    solvers = [r.solver for r in rep.rows]
    # trees get oracle, fpt and two ptas rows; graphs skip the ptas
    assert solvers.count("oracle") == 5 and solvers.count("fpt") == 5 and solvers.count("ptas") == 6
    assert all(r.gap == 0 for r in rep.rows if r.solver == "fpt")
    lines = rep.to_csv().splitlines()
    assert lines[0].split(",") == COLUMNS
    assert len(lines) == len(rep.rows) + 1
    assert "wall_ms" not in rep.to_csv(timing=False)
    summary = rep.summary()
    assert summary["fpt"]["mean_gap"] == 0
    assert set(summary) == {"oracle", "fpt", "ptas@0.5", "ptas@0.25"}
    assert rep.table().splitlines()[0].split()[:3] == ["family", "n", "k"]


def test_parallel_matches_serial():
    assert run_bench(SMALL, jobs=2).digest() == run_bench(SMALL).digest()


def test_budget_rows():
    rep = run_bench({**SMALL, "solvers": ["oracle"], "max_states": 3})
    assert {r.status for r in rep.rows} == {"budget"}


def test_load_suite():
    assert load_suite('{"seed": 5}') == {"seed": 5}
