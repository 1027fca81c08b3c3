import pytest

import qig

STAR = {"nodes": ["a", "b", "c", "d"], "edges": [["a", "c"], ["b", "c"], ["c", "d"]]}


def test_star_polytope():
    rows = qig.facet_rows(STAR, targets=["a", "d"])
    assert len(rows) == 7
    assert len(qig.vertices(STAR, targets=["a", "d"])) == 2 ** 3 - 3 + 2
    h = qig.facets(STAR, targets=["a", "d"])
    assert len(h["inequalities"]) == 7


def test_bad_tree():
    with pytest.raises(ValueError):
        qig.facets(STAR, targets=["c"])


def test_simulate_learn_score(tmp_path):
    dag = {"nodes": ["1", "2", "3", "4"], "arcs": [["1", "2"], ["3", "2"], ["2", "4"]]}
    manifest = qig.simulate(dag, ["1", "4"], 3000, 5, tmp_path)
    report = qig.learn(manifest)
    assert sorted(map(sorted, report["skeleton"]["edges"])) == [["1", "2"], ["2", "3"], ["2", "4"]]
    assert qig.learn(manifest) == report
    s = qig.score(manifest, report["dag"])
    assert s["bic"] == pytest.approx(report["score"], rel=1e-9)


def test_verify_suite():
    (r,) = qig.verify("bic")
    assert r["pass"]
