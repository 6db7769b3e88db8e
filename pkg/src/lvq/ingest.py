"""Parsers for every external input format.

Audio arrives as WAV, transcripts as SubRip, slide layouts either as the
bounding-box XHTML of ``pdftotext -bbox`` plus the XML of ``pdftohtml -xml``
or as the canonical layout JSON, slide timing and study data as CSV.
Everything here is a pure function from text/bytes to immutable values.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import struct
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .catalog import aspect_key
from .errors import FormatError, UnsupportedError, ValidationError

__all__ = [
    "AudioTrack", "Cue", "Transcript", "TextBox", "ImageBox", "SlideLayout",
    "TimingEntry", "SlideTiming", "QuizResponse", "StudyRecord",
    "parse_wav", "parse_srt", "parse_layout_xhtml", "parse_layout_xml",
    "merge_layouts", "load_canonical_json", "dump_canonical_json",
    "parse_timing_csv", "parse_study_csvs",
]


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True, eq=False)
class AudioTrack:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValidationError("audio samples must be one-dimensional")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValidationError(f"sample rate must be a positive integer, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValidationError("audio samples must be finite")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate

    def __eq__(self, other):
        if not isinstance(other, AudioTrack):
            return NotImplemented
        return (self.sample_rate == other.sample_rate
                and np.array_equal(self.samples, other.samples))

    __hash__ = None


@dataclass(frozen=True)
class Cue:
    start: float
    end: float
    text: str


@dataclass(frozen=True)
class Transcript:
    cues: tuple[Cue, ...] = ()

    @property
    def end(self) -> float:
        return max((c.end for c in self.cues), default=0.0)


@dataclass(frozen=True)
class TextBox:
    x: float
    y: float
    w: float
    h: float
    text: str

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class ImageBox:
    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class SlideLayout:
    """One slide; coordinates in the producing tool's units, top-left origin."""

    slide_index: int
    width: float
    height: float
    text_boxes: tuple[TextBox, ...] = ()
    image_boxes: tuple[ImageBox, ...] = ()

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValidationError(
                f"slide {self.slide_index}: width and height must be positive")
        for box in (*self.text_boxes, *self.image_boxes):
            if box.w < 0 or box.h < 0:
                raise ValidationError(f"slide {self.slide_index}: box with negative size")

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class TimingEntry:
    slide_index: int
    start: float
    end: float


@dataclass(frozen=True)
class SlideTiming:
    entries: tuple[TimingEntry, ...] = ()

    def __post_init__(self):
        entries = tuple(sorted(self.entries, key=lambda e: (e.start, e.end)))
        seen = set()
        for e in entries:
            if not (e.end > e.start >= 0):
                raise ValidationError(f"slide {e.slide_index}: need 0 <= start < end")
            if e.slide_index in seen:
                raise ValidationError(f"slide {e.slide_index} timed twice")
            seen.add(e.slide_index)
        for a, b in zip(entries, entries[1:]):
            if b.start < a.end:
                raise ValidationError(
                    f"slides {a.slide_index} and {b.slide_index} overlap "
                    f"({a.start}-{a.end} vs {b.start}-{b.end})")
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class QuizResponse:
    question_id: str
    phase: str
    n_options: int
    key: tuple[bool, ...]
    marked: Optional[tuple[bool, ...]] = None

    def __post_init__(self):
        if self.phase not in ("pre", "post"):
            raise ValidationError(f"question {self.question_id}: phase must be pre or post")
        if self.n_options <= 0:
            raise ValidationError(f"question {self.question_id}: n_options must be positive")
        if len(self.key) != self.n_options:
            raise ValidationError(
                f"question {self.question_id}: key has {len(self.key)} bits, expected {self.n_options}")
        if self.marked is not None and len(self.marked) != self.n_options:
            raise ValidationError(
                f"question {self.question_id}: marked has {len(self.marked)} bits, expected {self.n_options}")

    @property
    def skipped(self) -> bool:
        return self.marked is None


@dataclass(frozen=True)
class StudyRecord:
    video_id: str
    participant_id: str
    ratings: dict = field(default_factory=dict)
    quiz: tuple[QuizResponse, ...] = ()


# ---------------------------------------------------------------------------
# WAV

_WAVE_PCM = 1
_WAVE_FLOAT = 3
_WAVE_EXTENSIBLE = 0xFFFE


def parse_wav(data: bytes) -> AudioTrack:
    """Decode a RIFF/WAVE byte string (PCM16 or float32, mono or stereo).

    Stereo is downmixed by averaging the channels.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE file")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        chunk_id, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if size < 16 or len(body) < size:
                raise FormatError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body)
            if fmt[0] == _WAVE_EXTENSIBLE:
                if size < 40:
                    raise FormatError("extensible fmt chunk too short")
                fmt = (struct.unpack_from("<H", body, 24)[0],) + fmt[1:]
        elif chunk_id == b"data":
            if len(body) < size:
                raise FormatError(f"data chunk truncated: {len(body)} of {size} bytes")
            payload = body
            if fmt is not None:
                break
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise FormatError("missing fmt chunk")
    if payload is None:
        raise FormatError("missing data chunk")

    tag, channels, rate, _, block_align, bits = fmt
    if tag == _WAVE_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 32768.0
    elif tag == _WAVE_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedError(f"unsupported WAV encoding: format tag {tag}, {bits} bits")
    if channels not in (1, 2):
        raise UnsupportedError(f"unsupported channel count {channels}")
    if rate <= 0 or block_align != channels * dtype.itemsize:
        raise FormatError("inconsistent fmt chunk")

    n_frames = len(payload) // block_align
    raw = np.frombuffer(payload[:n_frames * block_align], dtype=dtype)
    samples = raw.astype(np.float64).reshape(n_frames, channels) / scale
    if channels == 2:
        samples = samples.mean(axis=1)
    else:
        samples = samples[:, 0]
    if not np.all(np.isfinite(samples)):
        raise FormatError("non-finite float samples")
    return AudioTrack(np.clip(samples, -1.0, 1.0), rate)


# ---------------------------------------------------------------------------
# SRT

_SRT_TIME = re.compile(
    r"^\s*(\d+):(\d{1,2}):(\d{1,2})[,.](\d{1,3})\s*-->\s*(\d+):(\d{1,2}):(\d{1,2})[,.](\d{1,3})")
_TAG = re.compile(r"<[^>]*>")


def _stamp(h, m, s, ms):
    return int(h) * 3600 + int(m) * 60 + int(s) + int(ms.ljust(3, "0")) / 1000.0


def parse_srt(text: str) -> Transcript:
    """Parse SubRip text; tags are stripped, cues returned sorted by start."""
    text = text.lstrip("﻿")
    cues = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        block_start = i
        block = []
        while i < len(lines) and lines[i].strip():
            block.append(lines[i])
            i += 1
        # the index line is optional
        t_at = 1 if len(block) > 1 and "-->" not in block[0] else 0
        m = _SRT_TIME.match(block[t_at])
        if m is None:
            raise FormatError(f"unparseable timestamp {block[t_at].strip()!r}",
                              line=block_start + t_at + 1)
        start = _stamp(*m.group(1, 2, 3, 4))
        end = _stamp(*m.group(5, 6, 7, 8))
        body = " ".join(_TAG.sub("", ln).strip() for ln in block[t_at + 1:])
        body = " ".join(body.split())
        if body and end > start:
            cues.append(Cue(start, end, body))
    cues.sort(key=lambda c: (c.start, c.end))
    return Transcript(tuple(cues))


# ---------------------------------------------------------------------------
# layout XHTML / XML

def _local(tag):
    return tag.rsplit("}", 1)[-1]


def _parse_xml(text):
    try:
        return ET.fromstring(text.encode("utf-8") if isinstance(text, str) else text)
    except ET.ParseError as exc:
        raise FormatError(f"malformed markup: {exc}", line=exc.position[0]) from None


def _num(elem, name, where):
    raw = elem.get(name)
    if raw is None:
        raise FormatError(f"{where}: missing attribute {name!r}")
    try:
        value = float(raw)
    except ValueError:
        raise FormatError(f"{where}: attribute {name}={raw!r} is not a number") from None
    if not math.isfinite(value):
        raise FormatError(f"{where}: attribute {name} is not finite")
    return value


def _pages(root):
    return [el for el in root.iter() if _local(el.tag) == "page"]


def parse_layout_xhtml(text: str) -> list[SlideLayout]:
    """Text boxes from ``pdftotext -bbox`` / ``-bbox-layout`` output.

    With ``-bbox-layout`` the ``<line>`` elements are used, otherwise every
    ``<word>`` becomes a box.
    """
    root = _parse_xml(text)
    slides = []
    for number, page in enumerate(_pages(root), start=1):
        where = f"page {number}"
        width, height = _num(page, "width", where), _num(page, "height", where)
        if width <= 0 or height <= 0:
            raise FormatError(f"{where}: page dimensions must be positive")
        lines = [el for el in page.iter() if _local(el.tag) == "line"]
        boxes = []
        if lines:
            for ln in lines:
                words = [w for w in ln.iter() if _local(w.tag) == "word"]
                txt = " ".join((w.text or "").strip() for w in words).strip()
                boxes.append(_text_box(ln, txt, where))
        else:
            for w in page.iter():
                if _local(w.tag) == "word":
                    boxes.append(_text_box(w, (w.text or "").strip(), where))
        slides.append(SlideLayout(number, width, height, tuple(boxes)))
    return slides


def _text_box(elem, txt, where):
    x0, y0 = _num(elem, "xMin", where), _num(elem, "yMin", where)
    x1, y1 = _num(elem, "xMax", where), _num(elem, "yMax", where)
    if x1 < x0 or y1 < y0:
        raise FormatError(f"{where}: inverted bounding box")
    return TextBox(x0, y0, x1 - x0, y1 - y0, txt)


def parse_layout_xml(text: str) -> list[SlideLayout]:
    """Image boxes from ``pdftohtml -xml`` output."""
    root = _parse_xml(text)
    slides = []
    for order, page in enumerate(_pages(root), start=1):
        number = int(_num(page, "number", f"page {order}")) if page.get("number") else order
        where = f"page {number}"
        width, height = _num(page, "width", where), _num(page, "height", where)
        if width <= 0 or height <= 0:
            raise FormatError(f"{where}: page dimensions must be positive")
        images = []
        for im in page:
            if _local(im.tag) != "image":
                continue
            x, y = _num(im, "left", where), _num(im, "top", where)
            w, h = _num(im, "width", where), _num(im, "height", where)
            if w < 0 or h < 0:
                raise FormatError(f"{where}: image with negative size")
            images.append(ImageBox(x, y, w, h))
        slides.append(SlideLayout(number, width, height, (), tuple(images)))
    return slides


def merge_layouts(text_slides, image_slides) -> list[SlideLayout]:
    """Join text boxes and image boxes of the same slide index."""
    if len(text_slides) != len(image_slides):
        raise ValidationError(
            f"page count mismatch: {len(text_slides)} text pages vs {len(image_slides)} image pages")
    images = {s.slide_index: s for s in image_slides}
    merged = []
    for s in text_slides:
        other = images.get(s.slide_index)
        if other is None:
            raise ValidationError(f"slide {s.slide_index} missing from image layout")
        merged.append(SlideLayout(s.slide_index, s.width, s.height,
                                  s.text_boxes, other.image_boxes))
    return merged


# ---------------------------------------------------------------------------
# canonical JSON

def dump_canonical_json(layouts) -> str:
    doc = {"slides": [
        {
            "index": s.slide_index,
            "width": s.width,
            "height": s.height,
            "text": [{"x": b.x, "y": b.y, "w": b.w, "h": b.h, "s": b.text} for b in s.text_boxes],
            "images": [{"x": b.x, "y": b.y, "w": b.w, "h": b.h} for b in s.image_boxes],
        }
        for s in layouts
    ]}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _get(obj, key, path, kind):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError("missing field", path=f"{path}.{key}")
    value = obj[key]
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise FormatError("expected a finite number", path=f"{path}.{key}")
    elif kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise FormatError("expected an integer", path=f"{path}.{key}")
    elif kind == "str":
        if not isinstance(value, str):
            raise FormatError("expected a string", path=f"{path}.{key}")
    elif kind == "list":
        if not isinstance(value, list):
            raise FormatError("expected an array", path=f"{path}.{key}")
    return value


def load_canonical_json(text: str) -> list[SlideLayout]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    slides = _get(doc, "slides", "$", "list")
    out = []
    for i, s in enumerate(slides):
        p = f"$.slides[{i}]"
        index = _get(s, "index", p, "int")
        width = _get(s, "width", p, "number")
        height = _get(s, "height", p, "number")
        if width <= 0:
            raise FormatError("must be positive", path=f"{p}.width")
        if height <= 0:
            raise FormatError("must be positive", path=f"{p}.height")
        texts = []
        for j, b in enumerate(_get(s, "text", p, "list")):
            q = f"{p}.text[{j}]"
            box = TextBox(*(float(_get(b, k, q, "number")) for k in "xywh"), _get(b, "s", q, "str"))
            if box.w < 0 or box.h < 0:
                raise FormatError("negative box size", path=q)
            texts.append(box)
        images = []
        for j, b in enumerate(_get(s, "images", p, "list")):
            q = f"{p}.images[{j}]"
            box = ImageBox(*(float(_get(b, k, q, "number")) for k in "xywh"))
            if box.w < 0 or box.h < 0:
                raise FormatError("negative box size", path=q)
            images.append(box)
        out.append(SlideLayout(index, float(width), float(height), tuple(texts), tuple(images)))
    return out


# ---------------------------------------------------------------------------
# CSV inputs

def _rows(text):
    """Yield (line_number, fields) for non-blank CSV rows."""
    reader = csv.reader(io.StringIO(text.lstrip("﻿")))
    for row in reader:
        if row and any(f.strip() for f in row):
            yield reader.line_num, [f.strip() for f in row]


def parse_timing_csv(text: str) -> SlideTiming:
    """``slide_index,start_seconds,end_seconds`` rows; the header is optional."""
    entries = []
    for line, row in _rows(text):
        if not entries and not _is_number(row[0]):
            continue  # header
        if len(row) != 3:
            raise FormatError(f"expected 3 fields, got {len(row)}", line=line)
        try:
            entry = TimingEntry(int(row[0]), float(row[1]), float(row[2]))
        except ValueError:
            raise FormatError(f"bad timing row {row!r}", line=line) from None
        if not (math.isfinite(entry.start) and math.isfinite(entry.end)):
            raise FormatError("non-finite time", line=line)
        if not entry.end > entry.start >= 0:
            raise ValidationError(f"line {line}: slide {entry.slide_index} needs 0 <= start < end")
        entries.append(entry)
    return SlideTiming(tuple(entries))


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


_RATING_COLS = ("video_id", "participant_id", "aspect", "score")
_QUIZ_COLS = ("video_id", "participant_id", "question_id", "phase",
              "n_options", "key_bits", "marked_bits")


def _dict_rows(text, columns, what):
    reader = csv.DictReader(io.StringIO(text.lstrip("﻿")))
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in columns if c not in header]
    if missing:
        raise FormatError(f"{what} CSV lacks columns {missing}", line=1)
    reader.fieldnames = header
    for row in reader:
        if not any((v or "").strip() for v in row.values()):
            continue
        yield reader.line_num, {k: (row.get(k) or "").strip() for k in columns}


def _bits(s, line, name):
    if not s or set(s) - {"0", "1"}:
        raise ValidationError(f"line {line}: {name} must be a string of 0/1, got {s!r}")
    return tuple(c == "1" for c in s)


def parse_study_csvs(ratings_text: str, quiz_text: str) -> list[StudyRecord]:
    """Group rating and quiz rows into one record per (video, participant)."""
    ratings: dict = {}
    quizzes: dict = {}
    for line, row in _dict_rows(ratings_text, _RATING_COLS, "ratings"):
        aspect = aspect_key(row["aspect"])
        if aspect is None:
            raise ValidationError(f"line {line}: unknown aspect {row['aspect']!r}")
        try:
            score = int(row["score"])
        except ValueError:
            raise ValidationError(f"line {line}: score {row['score']!r} is not an integer") from None
        if not 1 <= score <= 5:
            raise ValidationError(f"line {line}: score {score} outside 1..5")
        key = (row["video_id"], row["participant_id"])
        per = ratings.setdefault(key, {})
        if aspect in per:
            raise ValidationError(f"line {line}: duplicate rating for {aspect}")
        per[aspect] = score
    for line, row in _dict_rows(quiz_text, _QUIZ_COLS, "quiz"):
        try:
            n_options = int(row["n_options"])
        except ValueError:
            raise ValidationError(f"line {line}: n_options {row['n_options']!r} is not an integer") from None
        key_bits = _bits(row["key_bits"], line, "key_bits")
        marked = _bits(row["marked_bits"], line, "marked_bits") if row["marked_bits"] else None
        try:
            resp = QuizResponse(row["question_id"], row["phase"].lower(), n_options, key_bits, marked)
        except ValidationError as exc:
            raise ValidationError(f"line {line}: {exc}") from None
        quizzes.setdefault((row["video_id"], row["participant_id"]), []).append(resp)
    keys = sorted(set(ratings) | set(quizzes))
    return [StudyRecord(v, p, dict(sorted(ratings.get((v, p), {}).items())),
                        tuple(quizzes.get((v, p), ())))
            for v, p in keys]
