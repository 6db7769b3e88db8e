"""Quiz scoring, knowledge-gain normalization, rating means and correlation tests."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from . import _spearman_table
from .catalog import ASPECT_KEYS, KNOWLEDGE_GAIN
from .errors import InsufficientDataError, UndefinedCorrelation, ValidationError
from .ingest import QuizResponse

# two-tailed levels, loosest first
ALPHA_LEVELS = _spearman_table.ALPHAS
NOT_SIGNIFICANT = "not-significant"
UNDEFINED = "undefined"
MIN_CORRELATION_N = 5


@dataclass(frozen=True)
class QuizScore:
    participant_id: str
    video_id: str
    pre: int
    post: int


@dataclass(frozen=True)
class KnowledgeGain:
    video_id: str
    n: int
    mu: float
    sigma: float
    # Σ(post - pre) / 2n, kept for comparison with the pooled mean
    printed_mu: float
    normalized_pre: dict = field(default_factory=dict)
    normalized_post: dict = field(default_factory=dict)
    per_participant: dict = field(default_factory=dict)
    kg: Optional[float] = None
    degenerate: bool = False


@dataclass(frozen=True)
class CorrelationResult:
    feature: str
    aspect: str
    method: str
    r: Optional[float]
    n: int
    alpha: Optional[float] = None
    # None when r is defined, otherwise why it is not
    error: Optional[str] = None

    @property
    def df(self) -> int:
        return self.n - 2

    @property
    def bucket(self) -> str:
        if self.error:
            return UNDEFINED
        return NOT_SIGNIFICANT if self.alpha is None else f"{self.alpha:g}"


# ---------------------------------------------------------------------------
# quiz scoring

def score_question(q: QuizResponse) -> int:
    """+1 for every option judged like the key, -1 otherwise; a skip scores 0."""
    if len(q.key) != q.n_options or (q.marked is not None and len(q.marked) != q.n_options):
        raise ValidationError(f"question {q.question_id}: bit-vector length mismatch")
    if q.marked is None:
        return 0
    return sum(1 if m == k else -1 for m, k in zip(q.marked, q.key))


def quiz_scores(records) -> list[QuizScore]:
    """Sum question scores per participant and phase."""
    out = []
    for rec in records:
        if not rec.quiz:
            continue
        totals = {"pre": 0, "post": 0}
        for q in rec.quiz:
            totals[q.phase] += score_question(q)
        out.append(QuizScore(rec.participant_id, rec.video_id, totals["pre"], totals["post"]))
    return out


def knowledge_gain(scores, video) -> KnowledgeGain:
    """Normalize pre/post scores of one video by their pooled mean and spread.

    mu and sigma are taken over all 2n pre and post scores together; each
    participant's gain is normalized post minus normalized pre, and the
    video's gain is their mean.
    """
    rows = [s for s in scores if s.video_id == video]
    n = len(rows)
    if n < 2:
        raise InsufficientDataError(f"video {video}: {n} participant(s), need at least 2")
    pre = np.array([s.pre for s in rows], dtype=np.float64)
    post = np.array([s.post for s in rows], dtype=np.float64)
    mu = float((pre.sum() + post.sum()) / (2 * n))
    printed = float((post - pre).sum() / (2 * n))
    sigma = math.sqrt((np.sum((pre - mu) ** 2) + np.sum((post - mu) ** 2)) / (2 * n))
    if sigma == 0:
        return KnowledgeGain(video, n, mu, 0.0, printed, degenerate=True)
    ids = [s.participant_id for s in rows]
    npre = (pre - mu) / sigma
    npost = (post - mu) / sigma
    gain = npost - npre
    return KnowledgeGain(
        video, n, mu, sigma, printed,
        dict(zip(ids, npre.tolist())), dict(zip(ids, npost.tolist())),
        dict(zip(ids, gain.tolist())), float(gain.mean()))


def aspect_means(records, min_raters: int = 1) -> dict:
    """video -> aspect -> mean rating over raters."""
    sums: dict = defaultdict(lambda: defaultdict(list))
    for rec in records:
        for aspect, score in rec.ratings.items():
            sums[rec.video_id][aspect].append(score)
    return {v: {a: sum(s) / len(s) for a, s in per.items() if len(s) >= min_raters}
            for v, per in sorted(sums.items())}


# ---------------------------------------------------------------------------
# correlation

def _check(x, y, minimum):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("inputs must be equal-length vectors")
    if len(x) < minimum:
        raise ValidationError(f"need at least {minimum} pairs, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("inputs must be finite")
    return x, y


def pearson(x, y) -> float:
    x, y = _check(x, y, 2)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("constant input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def average_ranks(values) -> np.ndarray:
    """1-based ranks, ties receiving the mean of the positions they span."""
    return stats.rankdata(values, method="average")


def spearman(x, y) -> float:
    """Pearson correlation of average ranks; 1 - 6Σd²/(n(n²-1)) when tie-free."""
    x, y = _check(x, y, 4)
    rx, ry = average_ranks(x), average_ranks(y)
    n = len(x)
    if len(np.unique(x)) == n and len(np.unique(y)) == n:
        d2 = int(np.sum((rx.astype(np.int64) - ry.astype(np.int64)) ** 2))
        return 1 - 6 * d2 / (n * (n * n - 1))
    return pearson(rx, ry)


def t_pvalue(r: float, n: int) -> float:
    """Two-tailed p of t = r sqrt((n-2)/(1-r²)) under Student-t with n-2 df."""
    if abs(r) >= 1:
        return 0.0
    t = abs(r) * math.sqrt((n - 2) / (1 - r * r))
    return float(2 * stats.t.sf(t, n - 2))


def classify_significance(r: float, n: int, method: str) -> Optional[float]:
    """Tightest two-tailed alpha reached by r, or None.

    Spearman with n <= 30 uses the exact critical-value table, otherwise
    the t approximation with n - 2 degrees of freedom.
    """
    if n < MIN_CORRELATION_N:
        raise ValidationError(f"need n >= {MIN_CORRELATION_N} to classify, got {n}")
    if method not in ("spearman", "pearson"):
        raise ValidationError(f"unknown method {method!r}")
    if abs(r) >= 1:
        return ALPHA_LEVELS[-1]
    best = None
    if method == "spearman" and n in _spearman_table.CRITICAL:
        for alpha, crit in zip(ALPHA_LEVELS, _spearman_table.CRITICAL[n]):
            if crit is not None and abs(r) >= crit - 1e-12:
                best = alpha
    else:
        p = t_pvalue(r, n)
        for alpha in ALPHA_LEVELS:
            if p < alpha:
                best = alpha
    return best


def correlate(feature, aspect, method, xs, ys) -> CorrelationResult:
    """Correlate paired values, dropping pairs where either side is missing."""
    pairs = [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None
             and math.isfinite(x) and math.isfinite(y)]
    n = len(pairs)
    if n < MIN_CORRELATION_N:
        return CorrelationResult(feature, aspect, method, None, n,
                                 error=f"InsufficientData: {n} videos")
    x = [p[0] for p in pairs]
    y = [p[1] for p in pairs]
    try:
        r = spearman(x, y) if method == "spearman" else pearson(x, y)
    except UndefinedCorrelation as exc:
        return CorrelationResult(feature, aspect, method, None, n,
                                 error=f"UndefinedCorrelation: {exc}")
    return CorrelationResult(feature, aspect, method, r, n, classify_significance(r, n, method))


def correlation_table(features: dict, aspects: dict, kg: dict,
                      feature_keys=None, aspect_keys=ASPECT_KEYS) -> list[CorrelationResult]:
    """Every feature against every aspect (Spearman) and against knowledge gain (Pearson).

    ``features``: video -> feature -> value or None; ``aspects``: video ->
    aspect -> mean rating; ``kg``: video -> KG or None. Rows come out sorted
    by (feature, target).
    """
    videos = sorted(features)
    if feature_keys is None:
        feature_keys = sorted({k for per in features.values() for k in per})
    rows = []
    for fk in feature_keys:
        xs = [features[v].get(fk) for v in videos]
        for ak in aspect_keys:
            ys = [aspects.get(v, {}).get(ak) for v in videos]
            rows.append(correlate(fk, ak, "spearman", xs, ys))
        rows.append(correlate(fk, KNOWLEDGE_GAIN, "pearson", xs, [kg.get(v) for v in videos]))
    rows.sort(key=lambda r: (r.feature, r.aspect))
    return rows
