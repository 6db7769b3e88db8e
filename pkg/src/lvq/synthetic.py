"""Deterministic synthetic fixtures: one lecture-video directory and one study data set.

The lecture is a 65 s "voice" built from harmonic syllables with a drifting
pitch, five timed slides and a matching SRT transcript. The study set has
22 videos rated by 5 participants, with ratings and quiz answers driven by
a hidden per-video quality so that some features correlate with them.
"""

from __future__ import annotations

import csv
import io
import wave
from pathlib import Path

import numpy as np

from .catalog import ASPECT_KEYS, FEATURE_KEYS
from .ingest import ImageBox, SlideLayout, TextBox, dump_canonical_json

SAMPLE_RATE = 16000
SLIDE_SECONDS = 13.0

SLIDES = (
    ("Global Teams", ["Distributed teams work across time zones",
                      "Meetings need a shared schedule"]),
    ("Project Deadlines", ["Every deadline carries a risk",
                           "Plan buffers for the critical tasks"]),
    ("Communication Tools", ["Chat and video calls connect the team",
                             "Documents keep decisions visible"]),
    ("Quality Reviews", ["Reviews find errors early",
                         "Feedback improves the next iteration"]),
    ("Summary", ["Teams, deadlines and tools",
                 "Questions and discussion"]),
)

SPOKEN = (
    "welcome to this lecture about global teams . distributed teams work across many "
    "time zones and every member has a different morning . meetings need a shared "
    "schedule so that the whole team can join",
    "the next topic is the project deadline . every deadline carries a risk and the "
    "manager should plan buffers for the critical tasks . a late task moves the "
    "deadline of the whole project",
    "communication tools matter . chat and video calls connect the team while "
    "documents keep every decision visible to the members who could not attend",
    "quality reviews find errors early . feedback from a review improves the next "
    "iteration and the team learns from each review",
    "to summarize we talked about teams deadlines and tools . now there is time "
    "for questions and an open discussion",
)


# ---------------------------------------------------------------------------
# audio

def synth_voice(duration: float, rng: np.random.Generator, sr: int = SAMPLE_RATE,
                syllable_rate: float = 4.0) -> np.ndarray:
    """Harmonic syllables with a drifting F0, short pauses and faint background noise."""
    n = int(round(duration * sr))
    t = np.arange(n) / sr
    base = 125 + 15 * np.sin(2 * np.pi * t / 9.0)
    envelope = np.zeros(n)
    accent = np.zeros(n)
    pos = 0.3
    while pos < duration - 0.4:
        length = rng.uniform(0.12, 0.22)
        gap = rng.uniform(0.05, 0.12)
        if rng.random() < 0.08:
            gap += rng.uniform(0.3, 0.6)  # phrase pause
        lo, hi = int(pos * sr), int(min(pos + length, duration) * sr)
        seg = np.sin(np.pi * np.linspace(0, 1, hi - lo)) ** 2
        loud = rng.uniform(0.5, 1.0)
        stressed = rng.random() < 0.15
        if stressed:
            loud = 1.0
            accent[lo:hi] = np.maximum(accent[lo:hi], seg)
        envelope[lo:hi] = np.maximum(envelope[lo:hi], loud * seg)
        pos += length + gap
    f0 = base * (1 + 0.25 * accent) * (1 + 0.004 * rng.standard_normal(n).cumsum() / np.sqrt(n))
    phase = 2 * np.pi * np.cumsum(f0) / sr
    voice = sum((0.7 ** k) * np.sin(k * phase) for k in range(1, 9))
    voice /= np.max(np.abs(voice))
    noise = 0.003 * rng.standard_normal(n)
    return 0.6 * envelope * voice + noise


def wav_bytes(samples: np.ndarray, sr: int = SAMPLE_RATE) -> bytes:
    pcm = np.clip(np.round(samples * 32767), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sr)
        w.writeframes(pcm.tobytes())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# transcript, timing, layout

def _stamp(seconds: float) -> str:
    ms = int(round(seconds * 1000))
    h, ms = divmod(ms, 3_600_000)
    m, ms = divmod(ms, 60_000)
    s, ms = divmod(ms, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"


def transcript_srt(slide_seconds: float = SLIDE_SECONDS) -> str:
    """Cues of at most 7 words, spread evenly over each slide's interval."""
    cues = []
    for k, text in enumerate(SPOKEN):
        words = [w for w in text.split() if w != "."]
        chunks = [words[i:i + 7] for i in range(0, len(words), 7)]
        start = k * slide_seconds + 0.2
        span = (slide_seconds - 0.4) / len(chunks)
        for j, chunk in enumerate(chunks):
            a = start + j * span
            cues.append((a, a + span * 0.95, " ".join(chunk)))
    out = []
    for i, (a, b, text) in enumerate(cues, start=1):
        out.append(f"{i}\n{_stamp(a)} --> {_stamp(b)}\n{text}\n")
    return "\n".join(out)


def timing_csv(slide_seconds: float = SLIDE_SECONDS) -> str:
    rows = ["slide_index,start_seconds,end_seconds"]
    for k in range(len(SLIDES)):
        rows.append(f"{k + 1},{k * slide_seconds:g},{(k + 1) * slide_seconds:g}")
    return "\n".join(rows) + "\n"


def layouts() -> list[SlideLayout]:
    out = []
    for k, (title, bullets) in enumerate(SLIDES):
        boxes = [TextBox(60, 40, 34 * len(title), 64, title)]
        for j, line in enumerate(bullets):
            boxes.append(TextBox(80, 160 + 60 * j, 15 * len(line), 30, line))
        images = (ImageBox(560, 300, 320, 180),) if k % 2 == 0 else ()
        out.append(SlideLayout(k + 1, 960, 540, tuple(boxes), images))
    return out


def write_extract_fixture(directory, seed: int = 7) -> Path:
    """Write audio.wav, transcript.srt, timing.csv and layout.json into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    duration = SLIDE_SECONDS * len(SLIDES)
    (directory / "audio.wav").write_bytes(wav_bytes(synth_voice(duration, rng)))
    (directory / "transcript.srt").write_text(transcript_srt(), encoding="utf-8")
    (directory / "timing.csv").write_text(timing_csv(), encoding="utf-8")
    (directory / "layout.json").write_text(dump_canonical_json(layouts()), encoding="utf-8")
    return directory


# ---------------------------------------------------------------------------
# study

N_VIDEOS = 22
N_RATERS = 5
N_QUESTIONS = 5
N_OPTIONS = 5
# features tied to the hidden quality; the rest are noise
LINKED_FEATURES = {"f0_avg": 1.0, "pvq_avg": 0.8, "coverage_avg": 0.9,
                   "speech_rate": -0.7, "text_ratio_avg": -0.6}


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(round(float(x), 6))


def study_tables(seed: int = 11):
    """(features_csv, ratings_csv, quiz_csv, quality) as text plus the hidden quality vector."""
    rng = np.random.default_rng(seed)
    videos = [f"v{i + 1:02d}" for i in range(N_VIDEOS)]
    quality = rng.standard_normal(N_VIDEOS)

    feat_rows = []
    for i, v in enumerate(videos):
        row = [v]
        for key in FEATURE_KEYS:
            w = LINKED_FEATURES.get(key, 0.0)
            row.append(_fmt(10 + w * quality[i] + 0.5 * rng.standard_normal()))
        feat_rows.append(row)
    features_csv = _csv_text(["video_id", *FEATURE_KEYS], feat_rows)

    rating_rows = []
    for i, v in enumerate(videos):
        for p in range(N_RATERS):
            for aspect in ASPECT_KEYS:
                score = int(np.clip(np.round(3 + quality[i] + 0.7 * rng.standard_normal()), 1, 5))
                rating_rows.append([v, f"p{p + 1}", aspect, score])
    ratings_csv = _csv_text(["video_id", "participant_id", "aspect", "score"], rating_rows)

    quiz_rows = []
    for i, v in enumerate(videos):
        p_pre = 0.55
        p_post = float(np.clip(0.7 + 0.1 * quality[i], 0.05, 0.95))
        for p in range(N_RATERS):
            for phase, prob in (("pre", p_pre), ("post", p_post)):
                for q in range(N_QUESTIONS):
                    key = rng.random(N_OPTIONS) < 0.4
                    if rng.random() < 0.1:
                        marked = ""
                    else:
                        right = rng.random(N_OPTIONS) < prob
                        marked = "".join("1" if (k if r else not k) else "0"
                                         for k, r in zip(key, right))
                    quiz_rows.append([v, f"p{p + 1}", f"q{q + 1}", phase, N_OPTIONS,
                                      "".join("1" if k else "0" for k in key), marked])
    quiz_csv = _csv_text(["video_id", "participant_id", "question_id", "phase",
                          "n_options", "key_bits", "marked_bits"], quiz_rows)
    return features_csv, ratings_csv, quiz_csv, quality


def write_study_fixture(directory, seed: int = 11) -> Path:
    """Write features.csv, ratings.csv and quiz.csv into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    features_csv, ratings_csv, quiz_csv, _ = study_tables(seed)
    (directory / "features.csv").write_text(features_csv, encoding="utf-8")
    (directory / "ratings.csv").write_text(ratings_csv, encoding="utf-8")
    (directory / "quiz.csv").write_text(quiz_csv, encoding="utf-8")
    return directory
