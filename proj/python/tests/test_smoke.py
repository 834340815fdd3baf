from pathlib import Path

import pytest

import imtree

FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def example():
    return imtree.Tree.from_file(str(FIXTURES / "dilation.json"))


def test_dilation_example():
    t = example()
    r = imtree.posterior(t, "1", {"2": "x2", "3": "x3"}, event="a")
    assert r["lower"] == pytest.approx(0.4, abs=1e-9)
    assert r["upper"] == pytest.approx(0.6, abs=1e-9)
    assert not r["vacuous"]
    assert r["evidence_upper_prob"] == pytest.approx(0.3)


def test_strong_interval_is_a_point_here():
    s = imtree.strong_interval(example(), "1", {"2": "x2", "3": "x3"}, event="a")
    assert s["lower"] == pytest.approx(0.5)
    assert s["upper"] == pytest.approx(0.5)


def test_tree_round_trip_and_shape():
    t = example()
    assert imtree.Tree.from_json(t.to_json()) == t
    assert len(t) == 3
    assert t.root == "1"
    assert t.is_chain
    assert t.states("2") == ["x2", "y2"]
    assert t.parent("3") == "2"
    assert imtree.validate(t)["preconditions_met"]


def test_vacuous_query():
    t = imtree.Tree.from_file(str(FIXTURES / "vacuous.json"))
    r = imtree.posterior(t, "1", {"2": "v"}, gamble=[3.0, -2.0])
    assert r["vacuous"]
    assert (r["lower"], r["upper"]) == (-2.0, 3.0)


def test_errors():
    t = example()
    with pytest.raises(imtree.StructuralError):
        imtree.posterior(t, "2", {"2": "x2"}, event="x2")
    with pytest.raises(imtree.StructuralError):
        imtree.Tree.from_json({"nodes": []})
    with pytest.raises(imtree.PreconditionError):
        imtree.find_rightmost_root(lambda m: -1.0 - m, 0.0, 1.0)


def test_precise_tree_agrees_with_strong_enumeration():
    t = imtree.random_tree(nodes=5, imprecision=0.0, seed=3)
    target = t.ids[-1]
    g = [float(i) for i in range(len(t.states(target)))]
    ev = {t.root: t.states(t.root)[0]}
    r = imtree.posterior(t, target, ev, gamble=g)
    s = imtree.strong_interval(t, target, ev, gamble=g)
    assert r["lower"] == pytest.approx(s["lower"], abs=1e-9)
    assert r["upper"] == pytest.approx(s["upper"], abs=1e-9)


def test_root_finder():
    r = imtree.find_rightmost_root(lambda m: 0.1 - 0.25 * m, 0.0, 1.0)
    assert r["root"] == pytest.approx(0.4, abs=1e-9)
    b = imtree.find_rightmost_root(lambda m: 0.1 - 0.25 * m, 0.0, 1.0, bisection=True)
    assert r["evaluations"] < b["evaluations"]


def test_hmm_round_trip_and_prediction():
    gen = (FIXTURES / "hmm_generative.txt").read_text().split()
    obs = (FIXTURES / "hmm_observed.txt").read_text().split()
    h = imtree.HMM.learn(gen, obs, s=2.0)
    assert h.alphabet == ["a", "b", "c"]
    h2 = imtree.HMM.from_json(h.to_json())
    p = h2.predict("abca")
    assert p["precise_state"] in p["maximal_states"]
    m = h.evaluate(gen, obs, window=2)
    assert m["instances"] == 19


def test_chain_study():
    row = imtree.chain_study(8, runs=20)
    assert row["containment_violations"] == 0
    assert row["mean_difference"] > 0.0
