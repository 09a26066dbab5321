import itertools
import json
import random
from fractions import Fraction

import pytest

from ontosearch.evaluation import (
    Comparison,
    EvaluationError,
    RandomizationReport,
    average_precision,
    compare,
    evaluate_run,
    f_measure,
    fisher_randomization,
    format_comparison,
    format_percent,
    format_report,
    improvement,
    interpolated_precision_curve,
    mean_average_precision,
    read_qrels,
    read_run,
    two_sided_p,
    win_tie_loss,
)


def ap_oracle(ranking, relevant):
    precisions = [len(set(ranking[:r]) & relevant) / r for r in range(1, len(ranking) + 1)
                  if ranking[r - 1] in relevant]
    total = 0.0
    for p in precisions:
        total += p
    return total / len(relevant)


def curve_oracle(ranking, relevant):
    """Exact interpolation over every cutoff with rational recall."""
    points = []
    for k in range(1, len(ranking) + 1):
        hits = len(set(ranking[:k]) & relevant)
        points.append((Fraction(hits, len(relevant)), Fraction(hits, k)))
    return [float(max((p for r, p in points if r >= Fraction(i, 10)), default=0)) for i in range(11)]


def sign_flip_oracle(d):
    """Enumerate every sign vector with exact rational arithmetic."""
    d = [Fraction(x).limit_denominator(10**9) for x in d]
    bound = abs(sum(d))
    n_plus = n_minus = 0
    for signs in itertools.product((1, -1), repeat=len(d)):
        s = sum(si * di for si, di in zip(signs, d))
        n_plus += s >= bound
        n_minus += s <= -bound
    return n_minus, n_plus, 2 ** len(d)


def test_average_precision_examples():
    assert average_precision(["d1", "d2", "d3"], {"d1", "d3"}) == pytest.approx(5 / 6)
    assert average_precision(["a", "b", "x"], {"a", "b"}) == 1.0
    assert average_precision(["x", "y"], {"a"}) == 0.0
    with pytest.raises(EvaluationError):
        average_precision(["a"], set())


def test_interpolated_curve_examples():
    curve = interpolated_precision_curve(["r1", "n1", "r2", "n2"], {"r1", "r2"})
    assert curve[:6] == [1.0] * 6
    assert curve[6:] == pytest.approx([2 / 3] * 5)
    assert interpolated_precision_curve(["a", "b"], {"a", "b"}) == [1.0] * 11
    assert interpolated_precision_curve(["x"], {"a"}) == [0.0] * 11
    with pytest.raises(EvaluationError):
        interpolated_precision_curve(["a"], set())


def test_f_measure():
    assert f_measure(0.5, 0.5) == 0.5
    assert f_measure(0.7, 0) == 0
    assert f_measure(0, 0) == 0
    assert f_measure(0.372, 1.0) == pytest.approx(0.5423, abs=5e-5)


def test_map_and_improvement():
    assert mean_average_precision([0.5, 1.0]) == 0.75
    with pytest.raises(EvaluationError):
        mean_average_precision([])
    assert format_percent(improvement(0.6451, 0.5099)) == "26.5%"
    assert format_percent(improvement(0.6451, 0.5474)) == "17.8%"


@pytest.mark.parametrize("seed", range(5))
def test_metrics_against_oracles(seed):
    rng = random.Random(seed)
    for _ in range(100):
        docs = [f"d{i}" for i in range(rng.randint(1, 30))]
        ranking = rng.sample(docs, rng.randint(0, len(docs)))
        relevant = set(rng.sample(docs, rng.randint(1, len(docs))))
        assert average_precision(ranking, relevant) == ap_oracle(ranking, relevant)
        curve = interpolated_precision_curve(ranking, relevant)
        assert curve == pytest.approx(curve_oracle(ranking, relevant), abs=1e-15)
        assert all(a >= b for a, b in zip(curve, curve[1:]))
        assert all(0 <= v <= 1 for v in curve)


def test_map_permutation_invariant():
    aps = [random.Random(1).random() for _ in range(20)]
    shuffled = aps[:]
    random.Random(2).shuffle(shuffled)
    assert mean_average_precision(aps) == mean_average_precision(shuffled)


def test_reporting_identity_reproduces_published_rows():
    assert f"{two_sided_p(1691, 1630, 100_000):.5f}" == "0.03321"
    assert f"{two_sided_p(2207, 2268, 100_000):.5f}" == "0.04475"


def test_fisher_identical_lists():
    r = fisher_randomization([0.3, 0.5, 0.9], [0.3, 0.5, 0.9], exhaustive=True)
    assert r.p_two_sided == 1.0
    assert r.n_plus == r.n_minus == r.permutations == 8


def test_fisher_two_query_enumeration():
    r = fisher_randomization([0.2, 0.0], [0.0, 0.1], exhaustive=True)
    assert (r.permutations, r.n_plus, r.n_minus, r.p_two_sided) == (4, 2, 2, 1.0)
    assert r.observed_diff == pytest.approx(0.05)


def test_fisher_all_positive():
    a = [0.9, 0.8, 0.7, 0.95, 0.6]
    b = [0.5, 0.3, 0.65, 0.1, 0.2]
    r = fisher_randomization(a, b, exhaustive=True)
    n_minus, n_plus, total = sign_flip_oracle([x - y for x, y in zip(a, b)])
    assert (r.n_minus, r.n_plus, r.permutations) == (n_minus, n_plus, total) == (1, 1, 32)
    assert r.p_two_sided == 2 / 32


@pytest.mark.parametrize("seed", range(10))
def test_fisher_exhaustive_matches_rational_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 10)
    a = [round(rng.random(), 3) for _ in range(n)]
    b = [round(rng.random(), 3) if rng.random() < 0.8 else a[i] for i in range(n)]
    r = fisher_randomization(a, b, exhaustive=True)
    assert (r.n_minus, r.n_plus, r.permutations) == sign_flip_oracle([x - y for x, y in zip(a, b)])


def test_fisher_symmetries():
    rng = random.Random(5)
    a = [rng.random() for _ in range(15)]
    b = [rng.random() for _ in range(15)]
    ab = fisher_randomization(a, b, 20_000, seed=9)
    ba = fisher_randomization(b, a, 20_000, seed=9)
    assert ab.p_two_sided == ba.p_two_sided
    assert (ab.n_minus, ab.n_plus) == (ba.n_plus, ba.n_minus)
    neg = fisher_randomization([-x for x in a], [-x for x in b], 20_000, seed=9)
    assert neg.p_two_sided == ab.p_two_sided


def test_fisher_seed_determinism_and_chunking():
    a, b = [0.1, 0.5, 0.7, 0.2], [0.3, 0.2, 0.6, 0.1]
    r1 = fisher_randomization(a, b, 5000, seed=3)
    assert r1 == fisher_randomization(a, b, 5000, seed=3)
    assert r1.mode == "sampled" and r1.permutations == 5000


def test_fisher_errors():
    with pytest.raises(EvaluationError):
        fisher_randomization([0.1], [0.1, 0.2])
    with pytest.raises(EvaluationError):
        fisher_randomization([], [])
    with pytest.raises(EvaluationError):
        fisher_randomization([0.1] * 21, [0.0] * 21, exhaustive=True)


def test_report_identity_checked_on_load():
    r = fisher_randomization([0.9, 0.1, 0.4], [0.2, 0.3, 0.1], 1000, seed=1)
    again = RandomizationReport.from_dict(json.loads(json.dumps(r.to_dict())))
    assert again == r
    bad = r.to_dict() | {"p_two_sided": 0.5}
    with pytest.raises(EvaluationError):
        RandomizationReport.from_dict(bad)


def test_evaluate_run_and_compare():
    qrels = {"q1": {"a", "b"}, "q2": {"c"}, "q3": set()}
    run_a = {"q1": ["a", "x", "b"], "q2": ["c"]}
    run_b = {"q1": ["x", "a", "b"], "q2": ["y", "c"]}
    ra = evaluate_run(run_a, qrels, "A")
    rb = evaluate_run(run_b, qrels, "B")
    assert ra.excluded == ["q3"]
    assert ra.ap == pytest.approx({"q1": (1 + 2 / 3) / 2, "q2": 1.0})
    assert ra.map == pytest.approx(sum(ra.ap.values()) / 2, abs=1e-12)
    assert len(ra.mean_precision) == 11
    c = compare(ra, rb, exhaustive=True)
    assert (c.wins, c.ties, c.losses) == (2, 0, 0)
    assert c.randomization.p_two_sided == 0.5
    assert Comparison.from_dict(json.loads(json.dumps(c.to_dict()))) == c
    assert "A better / equal / worse on 2 / 0 / 0" in format_comparison(c)
    assert "MAP" in format_report(ra)


def test_missing_query_counts_as_zero():
    r = evaluate_run({"q1": ["a"]}, {"q1": {"a"}, "q2": {"b"}})
    assert r.ap == {"q1": 1.0, "q2": 0.0}


def test_disjoint_query_ids():
    with pytest.raises(EvaluationError):
        evaluate_run({"zz": ["a"]}, {"q1": {"a"}})


def test_win_tie_loss_tolerance():
    assert win_tie_loss({"a": 0.5, "b": 0.6, "c": 0.1}, {"a": 0.5 + 1e-12, "b": 0.5, "c": 0.2}) == (1, 1, 1)


def test_trec_files(tmp_path):
    q = tmp_path / "qrels"
    q.write_text("1 0 d1 1\n1 0 d2 0\n2 0 d3 0\n")
    assert read_qrels(q) == {"1": {"d1"}, "2": set()}
    r = tmp_path / "run"
    r.write_text("1 Q0 d2 2 0.5 t\n1 Q0 d1 1 0.9 t\n")
    assert read_run(r) == {"1": ["d1", "d2"]}
    r.write_text("1 Q0 d2 2\n")
    with pytest.raises(EvaluationError):
        read_run(r)
    q.write_text("1 0 d1 yes\n")
    with pytest.raises(EvaluationError):
        read_qrels(q)
