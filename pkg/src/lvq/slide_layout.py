"""Slide coverage ratios and area clustering of text lines."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .ingest import SlideLayout, TextBox

DEFAULT_CLUSTER_THRESHOLD = 0.01
LINE_OVERLAP = 0.5


@dataclass(frozen=True)
class SlideRatios:
    text_ratio: tuple[float, ...]
    image_ratio: tuple[float, ...]
    text_ratio_mean: float
    text_ratio_var: float
    image_ratio_mean: float
    image_ratio_var: float


@dataclass(frozen=True)
class ImportantText:
    slide_index: int
    # (line text, line area), largest first
    lines: tuple[tuple[str, float], ...] = ()

    @property
    def texts(self):
        return [t for t, _ in self.lines]


def mean_and_sample_variance(values):
    """Mean and n-1 variance; the variance of a single value is 0."""
    values = list(values)
    n = len(values)
    if n == 0:
        raise ValidationError("no values")
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    return mean, sum((v - mean) ** 2 for v in values) / (n - 1)


def _clipped_area(box, slide):
    w = min(box.x + box.w, slide.width) - max(box.x, 0.0)
    h = min(box.y + box.h, slide.height) - max(box.y, 0.0)
    return max(w, 0.0) * max(h, 0.0)


def slide_ratio(slide: SlideLayout):
    """(text ratio, image ratio); boxes clipped to the page, overlaps not removed."""
    if not slide.area > 0:
        raise ValidationError(f"slide {slide.slide_index} has zero area")
    text = sum(_clipped_area(b, slide) for b in slide.text_boxes)
    image = sum(_clipped_area(b, slide) for b in slide.image_boxes)
    return text / slide.area, image / slide.area


def ratios(layouts) -> SlideRatios:
    if not layouts:
        raise ValidationError("no slides")
    per = [slide_ratio(s) for s in layouts]
    text = tuple(t for t, _ in per)
    image = tuple(i for _, i in per)
    tm, tv = mean_and_sample_variance(text)
    im, iv = mean_and_sample_variance(image)
    return SlideRatios(text, image, tm, tv, im, iv)


def _vertical_overlap(a, b):
    top = max(a.y, b.y)
    bottom = min(a.y + a.h, b.y + b.h)
    shorter = min(a.h, b.h)
    if shorter <= 0:
        return 1.0 if top <= bottom else 0.0
    return max(bottom - top, 0.0) / shorter


def merge_lines(boxes) -> list[TextBox]:
    """Merge word boxes that overlap vertically by at least half into line boxes."""
    lines: list[list[TextBox]] = []
    for box in sorted(boxes, key=lambda b: (b.y, b.x)):
        for line in lines:
            if _vertical_overlap(_union(line), box) >= LINE_OVERLAP:
                line.append(box)
                break
        else:
            lines.append([box])
    return [_union(line) for line in lines]


def _union(words):
    x0 = min(b.x for b in words)
    y0 = min(b.y for b in words)
    x1 = max(b.x + b.w for b in words)
    y1 = max(b.y + b.h for b in words)
    text = " ".join(b.text for b in sorted(words, key=lambda b: b.x) if b.text)
    return TextBox(x0, y0, x1 - x0, y1 - y0, text)


def cluster_areas(areas, min_gap):
    """Split descending areas into clusters wherever the consecutive gap reaches min_gap."""
    ordered = sorted(areas, reverse=True)
    clusters: list[list[float]] = []
    for i, a in enumerate(ordered):
        if i == 0 or ordered[i - 1] - a >= min_gap:
            clusters.append([a])
        else:
            clusters[-1].append(a)
    return clusters


def important_text(layout: SlideLayout,
                   cluster_threshold: float = DEFAULT_CLUSTER_THRESHOLD) -> ImportantText:
    """Text lines in the first two area clusters, walking from the largest line down.

    A line joins the current cluster when it is less than
    ``cluster_threshold * slide area`` smaller than the previous line.
    """
    lines = [b for b in merge_lines(layout.text_boxes) if b.text.strip()]
    if not lines:
        return ImportantText(layout.slide_index)
    lines.sort(key=lambda b: b.area, reverse=True)
    min_gap = cluster_threshold * layout.area
    selected = []
    clusters = 1
    for i, line in enumerate(lines):
        if i > 0 and lines[i - 1].area - line.area >= min_gap:
            clusters += 1
            if clusters > 2:
                break
        selected.append((line.text, line.area))
    return ImportantText(layout.slide_index, tuple(selected))
