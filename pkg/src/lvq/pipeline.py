"""Per-video feature extraction: read a video directory, compute the 22 features."""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import audio_dsp, crossmodal, slide_layout, speech_timing, text_semantics
from .audio_dsp import FrameConfig
from .catalog import FEATURE_KEYS
from .errors import ConfigurationError, LVQError, ValidationError
from .ingest import (
    load_canonical_json, merge_layouts, parse_layout_xhtml, parse_layout_xml,
    parse_srt, parse_timing_csv, parse_wav,
)

AUDIO_FILE = "audio.wav"
TRANSCRIPT_FILE = "transcript.srt"
TIMING_FILE = "timing.csv"
LAYOUT_FILE = "layout.json"
XHTML_FILE = "slides.xhtml"
XML_FILE = "slides.xml"


@dataclass(frozen=True)
class PipelineConfig:
    frame_length: float = 0.025
    hop: float = 0.010
    f0_min: float = 50.0
    f0_max: float = 500.0
    voicing_threshold: float = 0.45
    pitch_window: float = 0.060
    silence_db: float = -40.0
    octave_cost: float = 0.01
    silence_offset_db: float = speech_timing.SILENCE_OFFSET_DB
    min_dip_db: float = speech_timing.MIN_DIP_DB
    cluster_threshold: float = slide_layout.DEFAULT_CLUSTER_THRESHOLD
    block_seconds: float = crossmodal.BLOCK_SECONDS
    emphasis_tolerance: float = crossmodal.EMPHASIS_TOLERANCE
    emphasis_smoothing: int = crossmodal.SMOOTH_FRAMES
    lexicon: str = ""

    def __post_init__(self):
        try:
            self.frame_config()
        except ValidationError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.silence_offset_db <= 0 or self.min_dip_db < 0:
            raise ConfigurationError("silence_offset_db must be > 0 and min_dip_db >= 0")
        if not 0 <= self.cluster_threshold < 1:
            raise ConfigurationError("cluster_threshold must lie in [0, 1)")
        if self.block_seconds <= 0:
            raise ConfigurationError("block_seconds must be positive")
        if self.emphasis_tolerance < 0:
            raise ConfigurationError("emphasis_tolerance must be >= 0")
        if self.emphasis_smoothing < 1:
            raise ConfigurationError("emphasis_smoothing must be >= 1")

    def frame_config(self) -> FrameConfig:
        names = {f.name for f in dataclasses.fields(FrameConfig)}
        return FrameConfig(**{k: v for k, v in self.as_dict().items() if k in names})

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        """Parse ``key = value`` lines; ``#`` comments, optional quotes, unknown keys rejected."""
        parser = configparser.ConfigParser(comment_prefixes=("#", ";"),
                                           inline_comment_prefixes=("#",))
        try:
            parser.read_string("[lvq]\n" + text)
        except configparser.Error as exc:
            raise ConfigurationError(f"bad config: {exc}") from None
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for section in parser.sections():
            for key, raw in parser.items(section):
                if key not in types:
                    raise ConfigurationError(f"unknown config key {key!r}")
                raw = raw.strip().strip('"').strip("'")
                kind = types[key]
                try:
                    if kind in ("float", float):
                        values[key] = float(raw)
                    elif kind in ("int", int):
                        values[key] = int(raw)
                    else:
                        values[key] = raw
                except ValueError:
                    raise ConfigurationError(f"config key {key!r}: bad value {raw!r}") from None
        return cls(**values)

    @classmethod
    def load(cls, path=None) -> "PipelineConfig":
        if path is None:
            return cls()
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text)


@dataclass
class ExtractResult:
    video_id: str
    features: dict
    absent: dict
    diagnostics: dict

    @property
    def partial(self) -> bool:
        return bool(self.absent)

    def to_json_doc(self, config: PipelineConfig) -> dict:
        return {
            "video_id": self.video_id,
            "features": self.features,
            "absent": self.absent,
            "config": config.as_dict(),
            "diagnostics": self.diagnostics,
        }


class MissingInput(LVQError):
    """A mandatory input file is missing from the video directory."""


def _read(path: Path, binary=False):
    if not path.is_file():
        raise MissingInput(f"missing input file: {path}")
    return path.read_bytes() if binary else path.read_text(encoding="utf-8")


def load_layouts(directory: Path, warnings: list):
    if (directory / LAYOUT_FILE).is_file():
        return load_canonical_json(_read(directory / LAYOUT_FILE))
    if not (directory / XHTML_FILE).is_file():
        raise MissingInput(f"missing input file: {directory / LAYOUT_FILE} "
                           f"(or {directory / XHTML_FILE})")
    text_slides = parse_layout_xhtml(_read(directory / XHTML_FILE))
    if (directory / XML_FILE).is_file():
        return merge_layouts(text_slides, parse_layout_xml(_read(directory / XML_FILE)))
    warnings.append(f"{XML_FILE} not found; image ratios are 0")
    return text_slides


def _finite(x):
    return x is not None and np.isfinite(x)


def extract_video(directory, config: PipelineConfig = PipelineConfig(),
                  lexicon: Optional[text_semantics.Lexicon] = None) -> ExtractResult:
    """Run the whole feature pipeline over one video directory.

    Input errors (missing files, malformed formats) raise; a feature that
    cannot be computed is recorded in ``absent`` with its reason instead.
    """
    directory = Path(directory)
    warnings: list = []
    track = parse_wav(_read(directory / AUDIO_FILE, binary=True))
    transcript = parse_srt(_read(directory / TRANSCRIPT_FILE))
    timing = parse_timing_csv(_read(directory / TIMING_FILE))
    layouts = load_layouts(directory, warnings)
    if lexicon is None:
        lexicon = text_semantics.load_lexicon(config.lexicon or None)
    cfg = config.frame_config()

    values: dict = {}
    absent: dict = {}

    pitch = audio_dsp.estimate_pitch(track, cfg)
    audio = audio_dsp.audio_feature_set(track, cfg, pitch)
    values.update(audio.as_dict())
    absent.update(audio.absent)

    syl = speech_timing.detect_syllable_nuclei(track, pitch, cfg, config.silence_offset_db,
                                               config.min_dip_db)
    ling = speech_timing.linguistic_features(syl)
    values["speech_rate"] = ling.speech_rate
    values["articulation_rate"] = ling.articulation_rate
    values["avg_syllable_duration"] = ling.asd
    if ling.articulation_rate is None:
        absent["articulation_rate"] = "NoPhonation: no frame above the silence threshold"
    if ling.asd is None:
        absent["avg_syllable_duration"] = "NoSyllables: zero syllable nuclei detected"

    if layouts:
        r = slide_layout.ratios(layouts)
        values.update(text_ratio_avg=r.text_ratio_mean, text_ratio_var=r.text_ratio_var,
                      image_ratio_avg=r.image_ratio_mean, image_ratio_var=r.image_ratio_var)
    else:
        for key in ("text_ratio_avg", "text_ratio_var", "image_ratio_avg", "image_ratio_var"):
            absent[key] = "NoSlides: layout has no slides"

    slide_diag = {s.slide_index: {"slide_index": s.slide_index} for s in layouts}
    if layouts:
        for s, t, i in zip(layouts, r.text_ratio, r.image_ratio):
            slide_diag[s.slide_index].update(text_ratio=t, image_ratio=i)

    # cross-modal
    if transcript.cues:
        blocks = crossmodal.block_transcript(transcript, config.block_seconds)
    else:
        blocks = []
        warnings.append("transcript has no cues")
    windows = crossmodal.words_said(blocks, timing)
    important = [slide_layout.important_text(s, config.cluster_threshold) for s in layouts]
    st = text_semantics.important_statement_terms(important, lexicon)

    loud = audio_dsp.loudness(track, cfg)
    energy = audio_dsp.rms_energy(track, cfg)
    events = []
    for w in windows:
        d = slide_diag.setdefault(w.slide_index, {"slide_index": w.slide_index})
        d.update(start=w.start, end=w.end, words_said=len(w.words_said),
                 blocks=[b.index for b, _ in w.blocks], flagged=w.flagged)
        if w.flagged:
            warnings.append(f"slide {w.slide_index}: no transcript block overlaps it")
        try:
            found = crossmodal.detect_emphasis(pitch, loud, energy, w, config.emphasis_tolerance,
                                               config.emphasis_smoothing)
        except ValidationError as exc:
            found = []
            warnings.append(str(exc))
        d["emphasis"] = [round(e.timestamp, 6) for e in found]
        events.extend(found)

    per_slide_st = {imp.slide_index: text_semantics.important_statement_terms(imp, lexicon)
                    for imp in important}
    for w in windows:
        terms = per_slide_st.get(w.slide_index, frozenset())
        slide_events = [e for e in events if w.start <= e.timestamp <= w.end]
        slide_diag[w.slide_index]["highlight"] = crossmodal.highlight_feature(
            terms, slide_events, lexicon)

    values["highlight"] = crossmodal.highlight_feature(st, events, lexicon)
    if values["highlight"] is None:
        absent["highlight"] = "NoImportantStatements: |St| = 0"

    laid_out = {s.slide_index for s in layouts}
    timed = [w for w in windows if w.slide_index in laid_out]
    if len(timed) < len(windows):
        warnings.append("timed slides without a layout are ignored: "
                        f"{[w.slide_index for w in windows if w.slide_index not in laid_out]}")
    try:
        det = crossmodal.detailing(timed, layouts)
        cov = crossmodal.coverage(timed, layouts, lexicon)
    except ValidationError as exc:
        det = cov = None
        for key in ("detailing_avg", "detailing_var", "coverage_avg", "coverage_var"):
            absent[key] = f"ValidationError: {exc}"
    if det is not None:
        for name, scores in (("detailing", det), ("coverage", cov)):
            values[f"{name}_avg"] = scores.mean
            values[f"{name}_var"] = scores.var
            for idx, v in scores.per_slide.items():
                slide_diag[idx][name] = v
            if scores.mean is None:
                reason = ("NoTimedSlides: no slide timed" if not scores.skipped
                          else f"NoSlideText: slides {list(scores.skipped)} skipped")
                absent[f"{name}_avg"] = absent[f"{name}_var"] = reason
            elif scores.skipped:
                warnings.append(f"{name}: slides {list(scores.skipped)} have no text; skipped")

    features = {}
    for key in FEATURE_KEYS:
        v = values.get(key)
        if _finite(v):
            features[key] = float(v)
        else:
            features[key] = None
            absent.setdefault(key, "NotComputed")
    diagnostics = {
        "duration_seconds": track.duration_seconds,
        "sample_rate": track.sample_rate,
        "voiced_frames": int(np.count_nonzero(pitch.voiced)),
        "syllable_nuclei": len(syl.nuclei),
        "phonation_time": syl.phonation_time,
        "important_terms": sorted(st),
        "slides": [slide_diag[k] for k in sorted(slide_diag)],
        "warnings": warnings,
    }
    return ExtractResult(directory.name, features, dict(sorted(absent.items())), diagnostics)


def atomic_write(path, data) -> None:
    """Write text or bytes to ``path`` via a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    mode = "wb" if isinstance(data, bytes) else "w"
    kwargs = {} if mode == "wb" else {"encoding": "utf-8", "newline": ""}
    with open(tmp, mode, **kwargs) as fh:
        fh.write(data)
    os.replace(tmp, path)
