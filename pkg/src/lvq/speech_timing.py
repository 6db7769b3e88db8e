"""Syllable nuclei from the intensity contour, and the rates derived from them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio_dsp import FrameConfig, PitchTrack, frame_signal
from .errors import ValidationError
from .ingest import AudioTrack

SILENCE_OFFSET_DB = 25.0
MIN_DIP_DB = 2.0


@dataclass(frozen=True)
class SyllableTrack:
    nuclei: tuple[float, ...]
    phonation_time: float
    total_time: float


@dataclass(frozen=True)
class LinguisticFeatures:
    speech_rate: float
    articulation_rate: Optional[float]
    asd: Optional[float]


def intensity_db(track: AudioTrack, cfg: FrameConfig = FrameConfig()) -> np.ndarray:
    """Frame mean power in dB; -inf for digitally silent frames."""
    frames = frame_signal(track, cfg)
    power = np.mean(np.square(frames), axis=1)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(power)


def detect_syllable_nuclei(track: AudioTrack, pitch: PitchTrack,
                           cfg: FrameConfig = FrameConfig(),
                           silence_offset_db: float = SILENCE_OFFSET_DB,
                           min_dip_db: float = MIN_DIP_DB) -> SyllableTrack:
    """Intensity peaks that are loud enough, stand out from the previous dip, and are voiced.

    Candidates are the local maxima above ``max_dB - silence_offset_db``.
    A candidate counts when the minimum intensity since the previous
    candidate (or the start of the track) lies at least ``min_dip_db``
    below it and its frame is voiced. Phonation time is the number of
    above-threshold frames times the hop.
    """
    db = intensity_db(track, cfg)
    total = track.duration_seconds
    if len(db) != len(pitch):
        raise ValidationError("pitch track does not match the frame grid")
    top = db.max()
    if not np.isfinite(top):
        return SyllableTrack((), 0.0, total)
    threshold = top - silence_offset_db
    above = db > threshold
    phonation = float(np.count_nonzero(above) * pitch.hop)

    inner = db[1:-1]
    is_peak = (inner > db[:-2]) & (inner >= db[2:]) & (inner > threshold)
    candidates = np.flatnonzero(is_peak) + 1
    voiced = pitch.voiced
    times = pitch.times
    nuclei = []
    prev = 0
    for c in candidates:
        dip = db[prev:c + 1].min()
        if db[c] - dip >= min_dip_db and voiced[c]:
            nuclei.append(float(times[c]))
        prev = c
    return SyllableTrack(tuple(nuclei), min(phonation, total), total)


def linguistic_features(syl: SyllableTrack) -> LinguisticFeatures:
    if not syl.total_time > 0:
        raise ValidationError("total_time must be positive")
    n = len(syl.nuclei)
    articulation = n / syl.phonation_time if syl.phonation_time > 0 else None
    asd = syl.phonation_time / n if n > 0 else None
    return LinguisticFeatures(n / syl.total_time, articulation, asd)
