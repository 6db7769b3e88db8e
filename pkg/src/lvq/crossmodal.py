"""Alignment of transcript, slides and audio, and the features built on it.

The transcript is cut into 10 s blocks. Each timed slide collects the words
of the blocks it overlaps, trimmed proportionally at its boundaries. Vocal
emphasis is a moment where F0, loudness and energy peak together; the words
of the block nearest to it are taken as emphasized.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .audio_dsp import Contour, PitchTrack
from .errors import ValidationError
from .ingest import SlideLayout, SlideTiming, Transcript
from .slide_layout import mean_and_sample_variance
from .text_semantics import Lexicon, lemmatize, tokenize

BLOCK_SECONDS = 10.0
EMPHASIS_TOLERANCE = 1.0
SMOOTH_FRAMES = 5


@dataclass(frozen=True)
class TranscriptBlock:
    index: int
    start: float
    end: float
    words: tuple[str, ...] = ()

    @property
    def center(self) -> float:
        return (self.start + self.end) / 2


@dataclass(frozen=True)
class SlideWindow:
    slide_index: int
    start: float
    end: float
    words_said: tuple[str, ...] = ()
    # (block, fraction of the block inside the window)
    blocks: tuple[tuple[TranscriptBlock, float], ...] = ()

    @property
    def flagged(self) -> bool:
        """True when no transcript block overlaps the slide."""
        return not self.blocks


@dataclass(frozen=True)
class EmphasisEvent:
    timestamp: float
    block_index: int
    words: tuple[str, ...] = ()


@dataclass(frozen=True)
class SlideScores:
    """Per-slide values with their mean and sample variance; skipped slides listed."""

    per_slide: dict = field(default_factory=dict)
    mean: Optional[float] = None
    var: Optional[float] = None
    skipped: tuple[int, ...] = ()


@dataclass(frozen=True)
class CrossmodalFeatures:
    highlight: Optional[float]
    detailing_mean: Optional[float]
    detailing_var: Optional[float]
    coverage_mean: Optional[float]
    coverage_var: Optional[float]


def split_words(text: str) -> list[str]:
    """Whitespace tokens with surrounding punctuation removed."""
    out = []
    for tok in text.split():
        tok = tok.strip(string.punctuation + "“”‘’«»…–—")
        if tok:
            out.append(tok)
    return out


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5 + 1e-9))


def block_transcript(t: Transcript, block_seconds: float = BLOCK_SECONDS) -> list[TranscriptBlock]:
    """Tile [0, transcript end] with blocks; each word goes where its midpoint falls.

    Words are spread uniformly over their cue.
    """
    if not t.cues:
        raise ValidationError("empty transcript")
    end = t.end
    n_blocks = max(1, math.ceil(end / block_seconds - 1e-9))
    buckets: list[list[str]] = [[] for _ in range(n_blocks)]
    for cue in t.cues:
        words = split_words(cue.text)
        step = (cue.end - cue.start) / len(words) if words else 0.0
        for j, w in enumerate(words):
            mid = cue.start + (j + 0.5) * step
            k = min(int(mid // block_seconds), n_blocks - 1)
            buckets[k].append(w)
    return [TranscriptBlock(k, k * block_seconds, min((k + 1) * block_seconds, end), tuple(ws))
            for k, ws in enumerate(buckets)]


def _cut(block, start, end):
    """Words of ``block`` proportionally inside [start, end], plus the overlap fraction."""
    length = block.end - block.start
    lo, hi = max(start, block.start), min(end, block.end)
    if hi <= lo or length <= 0:
        return (), 0.0
    p = (hi - lo) / length
    words = block.words
    n = len(words)
    if lo <= block.start and hi >= block.end:
        return words, 1.0
    count = round_half_up(p * n)
    if lo <= block.start:
        return words[:count], p
    if hi >= block.end:
        return words[n - count:] if count else (), p
    first = round_half_up(n * (lo - block.start) / length)
    return words[first:first + count], p


def words_said(blocks, timing: SlideTiming) -> list[SlideWindow]:
    """Per slide: the words of every overlapping block, trimmed at the slide's edges.

    A block hanging over the slide's start keeps its last round(p*n) words,
    one hanging over the end keeps its first round(p*n) words, where p is the
    fraction of the block inside the slide.
    """
    windows = []
    for entry in timing.entries:
        said: list[str] = []
        overlapping = []
        for block in blocks:
            words, p = _cut(block, entry.start, entry.end)
            if p > 0:
                overlapping.append((block, p))
                said.extend(words)
        windows.append(SlideWindow(entry.slide_index, entry.start, entry.end,
                                   tuple(said), tuple(overlapping)))
    return windows


def smooth(values, width: int = SMOOTH_FRAMES) -> np.ndarray:
    """Centred moving average; edges average over the samples available."""
    values = np.asarray(values, dtype=np.float64)
    if width <= 1 or len(values) == 0:
        return values.copy()
    kernel = np.ones(width)
    num = np.convolve(values, kernel, mode="same")
    den = np.convolve(np.ones(len(values)), kernel, mode="same")
    return num / den


def local_maxima(values) -> np.ndarray:
    """Indices of interior maxima; a plateau reports its first frame."""
    v = np.asarray(values)
    if len(v) < 3:
        return np.array([], dtype=int)
    out = []
    i = 1
    while i < len(v) - 1:
        if v[i] > v[i - 1]:
            j = i
            while j + 1 < len(v) and v[j + 1] == v[i]:
                j += 1
            if j + 1 < len(v) and v[j + 1] < v[i]:
                out.append(i)
            i = j + 1
        else:
            i += 1
    return np.array(out, dtype=int)


def _nearest(sorted_times, t):
    k = int(np.searchsorted(sorted_times, t))
    best = None
    for j in (k - 1, k):
        if 0 <= j < len(sorted_times):
            if best is None or abs(sorted_times[j] - t) < abs(best - t):
                best = sorted_times[j]
    return best


def detect_emphasis(pitch: PitchTrack, loud: Contour, energy: Contour, window: SlideWindow,
                    tolerance: float = EMPHASIS_TOLERANCE,
                    smoothing: int = SMOOTH_FRAMES) -> list[EmphasisEvent]:
    """Moments inside the slide where F0, loudness and energy all peak.

    Each F0 maximum is paired with the nearest loudness and energy maxima;
    the triple fires when all three lie within ``tolerance`` of their mean.
    Unvoiced frames count as F0 = 0.
    """
    if len(loud) != len(pitch) or len(energy) != len(pitch):
        raise ValidationError("contours are not on one frame grid")
    times = pitch.times
    inside = (times >= window.start) & (times <= window.end)
    if np.count_nonzero(inside) < 1 or window.end - window.start < pitch.hop:
        raise ValidationError(f"slide {window.slide_index}: window shorter than one frame")
    t = times[inside]
    f0 = np.nan_to_num(pitch.f0[inside], nan=0.0)
    peaks = [t[local_maxima(smooth(c, smoothing))]
             for c in (f0, loud.values[inside], energy.values[inside])]
    if any(len(p) == 0 for p in peaks):
        return []
    events = []
    seen = set()
    for a in peaks[0]:
        b = _nearest(peaks[1], a)
        c = _nearest(peaks[2], a)
        key = (a, b, c)
        if key in seen:
            continue
        seen.add(key)
        centre = (a + b + c) / 3
        if max(abs(a - centre), abs(b - centre), abs(c - centre)) > tolerance + 1e-9:
            continue
        block = _nearest_block(window, centre)
        if block is None:
            continue
        events.append(EmphasisEvent(float(centre), block.index, block.words))
    return events


def _nearest_block(window, t):
    best = None
    for block, _ in window.blocks:
        if best is None or abs(block.center - t) < abs(best.center - t):
            best = block
    return best


def emphasized_terms(events, lexicon: Lexicon) -> frozenset:
    words = []
    for e in events:
        words.extend(tokenize(" ".join(e.words)))
    return lemmatize(words, lexicon)


def highlight_feature(statement_terms, events, lexicon: Lexicon) -> Optional[float]:
    """|St & Tr| / |St|; None when there are no important statements."""
    st = frozenset(statement_terms)
    if not st:
        return None
    tr = emphasized_terms(events, lexicon)
    return len(st & tr) / len(st)


def _slide_text(layout: SlideLayout) -> str:
    return " ".join(b.text for b in layout.text_boxes)


def _aggregate(per, skipped):
    if not per:
        return SlideScores({}, None, None, tuple(skipped))
    mean, var = mean_and_sample_variance(per.values())
    return SlideScores(per, mean, var, tuple(skipped))


def _pair(windows, layouts):
    by_index = {s.slide_index: s for s in layouts}
    for w in windows:
        layout = by_index.get(w.slide_index)
        if layout is None:
            raise ValidationError(f"slide {w.slide_index} is timed but has no layout")
        yield w, layout


def detailing(windows, layouts) -> SlideScores:
    """Words said during a slide divided by words shown on it."""
    per, skipped = {}, []
    for w, layout in _pair(windows, layouts):
        shown = len(split_words(_slide_text(layout)))
        if shown == 0:
            skipped.append(w.slide_index)
            continue
        per[w.slide_index] = len(w.words_said) / shown
    return _aggregate(per, skipped)


def coverage(windows, layouts, lexicon: Lexicon) -> SlideScores:
    """Share of the slide's lemmas that were also said during it."""
    per, skipped = {}, []
    for w, layout in _pair(windows, layouts):
        shown = lemmatize(tokenize(_slide_text(layout)), lexicon)
        if not shown:
            skipped.append(w.slide_index)
            continue
        said = lemmatize(tokenize(" ".join(w.words_said)), lexicon)
        per[w.slide_index] = len(shown & said) / len(shown)
    return _aggregate(per, skipped)
