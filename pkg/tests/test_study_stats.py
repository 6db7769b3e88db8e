import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lvq import _spearman_table
from lvq.catalog import ASPECT_KEYS, KNOWLEDGE_GAIN
from lvq.errors import InsufficientDataError, UndefinedCorrelation, ValidationError
from lvq.ingest import QuizResponse, StudyRecord
from lvq.study_stats import (
    ALPHA_LEVELS, QuizScore, aspect_means, classify_significance, correlate, correlation_table,
    knowledge_gain, pearson, quiz_scores, score_question, spearman, t_pvalue,
)


def brute_ranks(xs):
    """Average 1-based ranks by counting, no sorting helpers."""
    out = []
    for x in xs:
        below = sum(1 for y in xs if y < x)
        equal = sum(1 for y in xs if y == x)
        out.append(below + (equal + 1) / 2)
    return out


def brute_pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def q(key, marked, n=5, phase="pre"):
    bits = lambda s: tuple(c == "1" for c in s)  # noqa: E731
    return QuizResponse("q", phase, n, bits(key), None if marked is None else bits(marked))


def test_score_question_examples():
    assert score_question(q("10010", "10010")) == 5
    assert score_question(q("10010", "01101")) == -5
    assert score_question(q("10010", None)) == 0
    assert score_question(q("10010", "10011")) == 3


def test_score_question_length_mismatch():
    class Broken:
        question_id, n_options, key, marked = "q", 5, (True,) * 4, None

    with pytest.raises(ValidationError):
        score_question(Broken())


def test_quiz_scores():
    rec = StudyRecord("v", "p", {}, (q("11000", "11000"), q("11000", None),
                                     q("11000", "11001", phase="post")))
    assert quiz_scores([rec]) == [QuizScore("p", "v", 5, 3)]


def scores(pre, post, video="v"):
    return [QuizScore(f"p{i}", video, a, b) for i, (a, b) in enumerate(zip(pre, post))]


def test_knowledge_gain_example():
    g = knowledge_gain(scores([0, 0], [2, 2]), "v")
    assert (g.mu, g.sigma) == (1.0, 1.0)
    assert set(g.normalized_pre.values()) == {-1.0}
    assert set(g.normalized_post.values()) == {1.0}
    assert set(g.per_participant.values()) == {2.0}
    assert g.kg == 2.0
    assert g.printed_mu == 1.0


def test_knowledge_gain_degenerate():
    g = knowledge_gain(scores([3, 3], [3, 3]), "v")
    assert g.degenerate and g.kg is None
    with pytest.raises(InsufficientDataError):
        knowledge_gain(scores([1], [2]), "v")
    assert knowledge_gain(scores([1, 4, -2], [1, 4, -2]), "v").kg == 0.0


def test_aspect_means():
    recs = [StudyRecord("v", "a", {"summary": 4}), StudyRecord("v", "b", {"summary": 1})]
    assert aspect_means(recs) == {"v": {"summary": 2.5}}


def test_spearman_examples():
    assert spearman([1, 2, 3, 4, 5], [2, 4, 6, 8, 10]) == 1.0
    assert spearman([1, 2, 3, 4, 5], [5, 4, 3, 2, 1]) == -1.0
    assert spearman([1, 2, 3, 4], [1, 2, 2, 4]) == pytest.approx(0.9487, abs=1e-4)
    assert spearman([1, 2, 3, 4], [1, 2, 2, 4]) == pytest.approx(
        brute_pearson([1, 2, 3, 4], [1, 2.5, 2.5, 4]), abs=1e-12)
    with pytest.raises(UndefinedCorrelation):
        spearman([1, 2, 3, 4], [7, 7, 7, 7])
    with pytest.raises(ValidationError):
        spearman([1, 2, 3], [1, 2, 3])


def test_pearson_examples():
    assert pearson([1, 2, 3, 4], [5, 7, 9, 11]) == pytest.approx(1.0, abs=1e-15)
    assert pearson([1, 2, 3, 4], [-1, -2, -3, -4]) == pytest.approx(-1.0, abs=1e-15)
    assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(UndefinedCorrelation):
        pearson([1, 1, 1], [1, 2, 3])


def test_tie_free_spearman_exact():
    rng = random.Random(5)
    for _ in range(300):
        n = rng.randint(4, 7)
        x = rng.sample(range(100), n)
        y = rng.sample(range(100), n)
        rx, ry = brute_ranks(x), brute_ranks(y)
        d2 = sum((a - b) ** 2 for a, b in zip(rx, ry))
        assert spearman(x, y) == 1 - 6 * d2 / (n * (n * n - 1))


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=4, max_size=12))
def test_spearman_properties(pairs):
    x = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    try:
        r = spearman(x, y)
    except UndefinedCorrelation:
        assert len(set(x)) == 1 or len(set(y)) == 1
        return
    assert -1 <= r <= 1
    assert spearman(y, x) == pytest.approx(r, abs=1e-12)
    # strictly monotone transforms leave it unchanged
    assert spearman([math.exp(v) for v in x], [v ** 3 for v in y]) == pytest.approx(r, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=12),
       st.floats(0.01, 100), st.floats(-100, 100))
def test_pearson_properties(pairs, a, b):
    x = [p for p, _ in pairs]
    y = [q for _, q in pairs]
    try:
        r = pearson(x, y)
    except UndefinedCorrelation:
        return
    if min(max(x) - min(x), max(y) - min(y)) < 1e-3:
        return
    assert -1 <= r <= 1
    assert pearson(y, x) == pytest.approx(r, abs=1e-9)
    assert pearson([a * v + b for v in x], y) == pytest.approx(r, abs=1e-6)
    assert pearson([-v for v in x], y) == pytest.approx(-r, abs=1e-9)


def test_pearson_t_threshold_example():
    # two-tailed critical r at df = 20 and alpha 0.05 is about 0.4227
    assert t_pvalue(0.4227, 22) == pytest.approx(0.05, abs=2e-4)
    assert classify_significance(0.42, 22, "pearson") == 0.1


def test_classify_paper_examples():
    assert classify_significance(0.608, 22, "spearman") == 0.005
    assert classify_significance(0.368, 22, "spearman") == 0.1
    assert classify_significance(1.0, 8, "spearman") == ALPHA_LEVELS[-1]
    assert classify_significance(0.01, 22, "spearman") is None
    with pytest.raises(ValidationError):
        classify_significance(0.5, 4, "spearman")


def exact_null(n):
    """Σd² over every permutation of n ranks."""
    base = list(range(n))
    return [sum((i - p) ** 2 for i, p in enumerate(perm)) for perm in itertools.permutations(base)]


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_critical_table_against_enumeration(n):
    values = exact_null(n)
    total = len(values)
    rhos = sorted(1 - 6 * d / (n * (n * n - 1)) for d in values)
    for alpha, crit in zip(_spearman_table.ALPHAS, _spearman_table.CRITICAL[n]):
        if crit is None:
            # even rho = 1 is not rare enough at this level
            assert 2 * sum(1 for r in rhos if r >= 1 - 1e-12) / total > alpha
            continue
        tail = 2 * sum(1 for r in rhos if r >= crit - 1e-9) / total
        assert tail <= alpha + 1e-12
        # the next smaller attainable value would exceed alpha
        smaller = max(r for r in rhos if r < crit - 1e-6)
        assert 2 * sum(1 for r in rhos if r >= smaller - 1e-9) / total > alpha


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(5, 60), st.sampled_from(["spearman", "pearson"]))
def test_classify_monotone(r1, r2, n, method):
    lo, hi = sorted((r1, r2))
    a = classify_significance(lo, n, method)
    b = classify_significance(hi, n, method)
    if a is not None:
        assert b is not None and b <= a


def test_correlate_drops_missing_pairs():
    xs = [1, 2, None, 4, 5, 6]
    ys = [2, 1, 3, None, 5, 7]
    r = correlate("f", "a", "spearman", xs, ys)
    assert r.n == 4 and r.error.startswith("InsufficientData")
    r = correlate("f", "a", "spearman", [1, 2, 3, 4, 5], [3] * 5)
    assert r.bucket == "undefined" and r.error.startswith("UndefinedCorrelation")


def test_correlation_table_shape():
    rng = random.Random(2)
    videos = [f"v{i:02d}" for i in range(22)]
    feats = {v: {"f1": rng.random(), "f2": rng.random()} for v in videos}
    aspects = {v: {a: rng.randint(1, 5) + rng.random() for a in ASPECT_KEYS} for v in videos}
    aspects = {v: dict(per, summary=3.0) for v, per in aspects.items()}
    kg = {v: rng.gauss(0, 1) for v in videos}
    rows = correlation_table(feats, aspects, kg)
    assert len(rows) == 2 * 16
    assert [(r.feature, r.aspect) for r in rows] == sorted((r.feature, r.aspect) for r in rows)
    assert all(r.df == 20 for r in rows)
    assert {r.method for r in rows if r.aspect == KNOWLEDGE_GAIN} == {"pearson"}
    assert all(r.bucket == "undefined" for r in rows if r.aspect == "summary")
    for r in rows:
        if r.aspect not in (KNOWLEDGE_GAIN, "summary"):
            xs = [feats[v][r.feature] for v in videos]
            ys = [aspects[v][r.aspect] for v in videos]
            assert r.r == pytest.approx(brute_pearson(brute_ranks(xs), brute_ranks(ys)), abs=1e-9)
