"""Frame-based audio descriptors: pitch, energy, loudness and voice quality.

All contours share one frame grid: frame ``i`` covers samples
``[i*hop, i*hop + frame)`` and is stamped with its centre time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import uniform_filter1d
from scipy.signal import lfilter

from .errors import InsufficientDataError, UnsupportedError, ValidationError
from .ingest import AudioTrack

__all__ = [
    "FrameConfig", "PitchTrack", "Contour", "AudioFeatureSet",
    "frame_signal", "estimate_pitch", "rms_energy", "loudness", "modulated_loudness",
    "jitter", "shimmer", "log_hnr", "spectral_harmonicity", "pvq", "audio_feature_set",
    "mel_filterbank", "auditory_sum", "rasta_filter", "harmonicity_of_spectrum",
]

N_BANDS = 26
BAND_MAX_HZ = 8000.0
COMPRESSION = 0.33
RASTA_B = np.array([0.2, 0.1, 0.0, -0.1, -0.2])
RASTA_A = np.array([1.0, -0.98])
RASTA_WARMUP = 4
PVQ_WINDOW = 10.0
PVQ_MIN_VOICED = 10
HNR_RANGE = (-20.0, 60.0)
PEAK_MARGIN = 0.06
SUBMULTIPLE_TOL = 0.05


@dataclass(frozen=True)
class FrameConfig:
    frame_length: float = 0.025
    hop: float = 0.010
    f0_min: float = 50.0
    f0_max: float = 500.0
    voicing_threshold: float = 0.45
    # pitch is measured over a longer window centred on each frame
    pitch_window: float = 0.060
    # frames quieter than this (dB re. the loudest frame) are never voiced
    silence_db: float = -40.0
    octave_cost: float = 0.01

    def __post_init__(self):
        if not 0 < self.hop <= self.frame_length:
            raise ValidationError("need 0 < hop <= frame_length")
        if not 0 < self.f0_min < self.f0_max:
            raise ValidationError("need 0 < f0_min < f0_max")
        if self.pitch_window < self.frame_length:
            raise ValidationError("pitch_window must be at least frame_length")
        if not 0 < self.voicing_threshold < 1:
            raise ValidationError("voicing_threshold must lie in (0, 1)")

    def frame_samples(self, sample_rate):
        n = int(round(self.frame_length * sample_rate))
        if n < 64:
            raise ValidationError(f"frame of {n} samples is shorter than 64")
        return n

    def hop_samples(self, sample_rate):
        return max(1, int(round(self.hop * sample_rate)))


@dataclass(frozen=True, eq=False)
class PitchTrack:
    """Per-frame F0 in Hz, NaN where unvoiced."""

    f0: np.ndarray
    hop: float
    offset: float = 0.0
    # normalized autocorrelation at the chosen lag, NaN where unvoiced
    strength: Optional[np.ndarray] = None

    def __post_init__(self):
        f0 = np.array(self.f0, dtype=np.float64)
        f0.flags.writeable = False
        object.__setattr__(self, "f0", f0)
        if self.strength is not None:
            s = np.array(self.strength, dtype=np.float64)
            s.flags.writeable = False
            object.__setattr__(self, "strength", s)

    @property
    def voiced(self) -> np.ndarray:
        return ~np.isnan(self.f0)

    @property
    def times(self) -> np.ndarray:
        return self.offset + self.hop * np.arange(len(self.f0))

    def __len__(self):
        return len(self.f0)

    def __eq__(self, other):
        if not isinstance(other, PitchTrack):
            return NotImplemented
        same = (self.hop == other.hop and self.offset == other.offset
                and np.array_equal(self.f0, other.f0, equal_nan=True))
        if self.strength is None or other.strength is None:
            return same and self.strength is other.strength
        return same and np.array_equal(self.strength, other.strength, equal_nan=True)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Contour:
    values: np.ndarray
    hop: float
    kind: str
    offset: float = 0.0
    # leading frames excluded from averages (filter transients)
    warmup: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.offset + self.hop * np.arange(len(self.values))

    def mean(self) -> float:
        v = self.values[self.warmup:]
        if len(v) == 0:
            raise InsufficientDataError(f"no frames in {self.kind} contour after warm-up")
        return float(np.mean(v))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AudioFeatureSet:
    loudness_avg: Optional[float] = None
    mod_loudness_avg: Optional[float] = None
    rms_energy_avg: Optional[float] = None
    f0_avg: Optional[float] = None
    jitter_avg: Optional[float] = None
    delta_jitter_avg: Optional[float] = None
    shimmer_avg: Optional[float] = None
    harmonicity_avg: Optional[float] = None
    log_hnr_avg: Optional[float] = None
    pvq_avg: Optional[float] = None
    # field name -> reason, for every field left as None
    absent: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "absent"}


# ---------------------------------------------------------------------------
# framing

def frame_signal(track: AudioTrack, cfg: FrameConfig) -> np.ndarray:
    """(n_frames, frame_samples) read-only view of the signal."""
    n = cfg.frame_samples(track.sample_rate)
    hop = cfg.hop_samples(track.sample_rate)
    if len(track.samples) < 2 * n:
        raise InsufficientDataError(
            f"track of {track.duration_seconds:.3f} s is shorter than two frames")
    return sliding_window_view(track.samples, n)[::hop]


def _grid(track, cfg):
    n = cfg.frame_samples(track.sample_rate)
    return cfg.hop_samples(track.sample_rate) / track.sample_rate, n / 2 / track.sample_rate


def _frame_rms(frames):
    return np.sqrt(np.mean(np.square(frames), axis=1))


# ---------------------------------------------------------------------------
# pitch

def _autocorr(x, nfft):
    spec = np.fft.rfft(x, nfft, axis=-1)
    return np.fft.irfft(spec.real ** 2 + spec.imag ** 2, nfft, axis=-1)


def estimate_pitch(track: AudioTrack, cfg: FrameConfig = FrameConfig()) -> PitchTrack:
    """Autocorrelation pitch tracker.

    Each frame is analysed over ``cfg.pitch_window`` seconds centred on the
    frame centre, Hamming-tapered; the taper's own autocorrelation is divided
    out so a periodic signal scores close to 1 at its period. The best lag in
    ``[1/f0_max, 1/f0_min]`` (with a small octave cost, and a peak at an
    integer fraction of it preferred when nearly as strong) is refined by
    parabolic interpolation. A frame is
    voiced when that peak reaches ``voicing_threshold`` and the frame is no
    more than ``-silence_db`` below the loudest frame.
    """
    sr = track.sample_rate
    frames = frame_signal(track, cfg)
    n = frames.shape[1]
    hop_s, offset = _grid(track, cfg)
    hop = cfg.hop_samples(sr)
    n_frames = frames.shape[0]

    win_n = max(n, int(round(cfg.pitch_window * sr)))
    pad = (win_n - n) // 2
    padded = np.concatenate([np.zeros(pad), track.samples, np.zeros(win_n)])
    long_frames = sliding_window_view(padded, win_n)[::hop][:n_frames]

    lag_min = max(2, int(math.floor(sr / cfg.f0_max)))
    lag_max = min(int(math.ceil(sr / cfg.f0_min)), win_n // 2)
    if lag_max <= lag_min + 1:
        raise ValidationError("pitch window too short for the F0 range")

    window = np.hamming(win_n)
    nfft = 1 << int(math.ceil(math.log2(2 * win_n)))
    rw = _autocorr(window, nfft)[: lag_max + 2]
    rw = rw / rw[0]

    rms = _frame_rms(frames)
    loudest = rms.max()
    gate = loudest * 10 ** (cfg.silence_db / 20) if loudest > 0 else np.inf
    f0 = np.full(n_frames, np.nan)
    strength = np.full(n_frames, np.nan)
    candidates = np.flatnonzero((rms > gate) & (rms > 0))
    lags = np.arange(lag_min, lag_max + 1)
    # favour shorter lags slightly so period doublings lose ties
    bias = cfg.octave_cost * np.log2(lags / lag_min)
    chunk = 512
    for lo in range(0, len(candidates), chunk):
        idx = candidates[lo:lo + chunk]
        seg = long_frames[idx]
        seg = (seg - seg.mean(axis=1, keepdims=True)) * window
        ra = _autocorr(seg, nfft)[:, : lag_max + 2]
        energy = ra[:, :1]
        ok = energy[:, 0] > 0
        r = np.zeros_like(ra)
        r[ok] = ra[ok] / energy[ok] / rw
        band = r[:, lag_min:lag_max + 1]
        # only true local maxima qualify
        left = r[:, lag_min - 1:lag_max]
        right = r[:, lag_min + 1:lag_max + 2]
        is_peak = (band >= left) & (band > right)
        score = np.where(is_peak, band - bias, -np.inf)
        best = np.argmax(score, axis=1)
        # a peak at best/m (m = 2, 3, ...) scoring within PEAK_MARGIN wins:
        # sharp peaks lose height to interpolation and let multiples through
        top = score[np.arange(len(best)), best][:, None]
        ratio = (best[:, None] + lag_min) / lags[None, :]
        near = np.abs(ratio - np.round(ratio)) <= SUBMULTIPLE_TOL * np.round(ratio)
        sub = (score >= top - PEAK_MARGIN) & near & (ratio >= 1.5)
        has_sub = sub.any(axis=1)
        best = np.where(has_sub, np.argmax(sub, axis=1), best)
        for row, b in enumerate(best):
            if not np.isfinite(score[row, b]):
                continue
            k = b + lag_min
            y0, y1, y2 = r[row, k - 1], r[row, k], r[row, k + 1]
            denom = y0 - 2 * y1 + y2
            delta = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
            delta = min(max(delta, -0.5), 0.5)
            peak = y1 - 0.25 * (y0 - y2) * delta
            if peak < cfg.voicing_threshold:
                continue
            freq = sr / (k + delta)
            if not cfg.f0_min <= freq <= cfg.f0_max:
                continue
            f0[idx[row]] = freq
            strength[idx[row]] = min(peak, 1.0)
    return PitchTrack(f0, hop_s, offset, strength)


# ---------------------------------------------------------------------------
# energy and loudness

def rms_energy(track: AudioTrack, cfg: FrameConfig = FrameConfig()) -> Contour:
    frames = frame_signal(track, cfg)
    hop_s, offset = _grid(track, cfg)
    return Contour(_frame_rms(frames), hop_s, "rms-energy", offset)


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(nfft: int, sample_rate: int, n_bands: int = N_BANDS,
                   fmax: float = BAND_MAX_HZ) -> np.ndarray:
    """(n_bands, nfft//2 + 1) triangular weights, peak 1, Mel-spaced on [0, fmax]."""
    edges = _mel_to_hz(np.linspace(0.0, _hz_to_mel(fmax), n_bands + 2))
    freqs = np.arange(nfft // 2 + 1) * sample_rate / nfft
    bank = np.zeros((n_bands, len(freqs)))
    for b in range(n_bands):
        lo, mid, hi = edges[b], edges[b + 1], edges[b + 2]
        up = (freqs - lo) / (mid - lo)
        down = (hi - freqs) / (hi - mid)
        bank[b] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def auditory_sum(band_power: np.ndarray) -> np.ndarray:
    """Sum over bands of compressed band power, along the last axis."""
    return np.sum(np.power(np.clip(band_power, 0.0, None), COMPRESSION), axis=-1)


def _band_power(track, cfg):
    if track.sample_rate < 2 * BAND_MAX_HZ:
        raise UnsupportedError(
            f"loudness needs a sample rate of at least {2 * BAND_MAX_HZ:.0f} Hz")
    frames = frame_signal(track, cfg)
    n = frames.shape[1]
    nfft = 1 << int(math.ceil(math.log2(n)))
    spec = np.fft.rfft(frames * np.hamming(n), nfft, axis=1)
    power = (spec.real ** 2 + spec.imag ** 2) / nfft
    return power @ mel_filterbank(nfft, track.sample_rate).T


def loudness(track: AudioTrack, cfg: FrameConfig = FrameConfig()) -> Contour:
    hop_s, offset = _grid(track, cfg)
    return Contour(auditory_sum(_band_power(track, cfg)), hop_s, "loudness", offset)


def rasta_filter(trajectories: np.ndarray) -> np.ndarray:
    """RASTA band-pass along axis 0, started in steady state at the first value.

    Zero DC gain, so a constant trajectory maps to zero.
    """
    x = np.asarray(trajectories, dtype=np.float64)
    # with zero DC gain, removing the first value and starting at rest is the
    # same as a steady-state start, and keeps constant input exactly at 0
    return lfilter(RASTA_B, RASTA_A, x - x[:1], axis=0)


_LOG_FLOOR = 1e-10


def modulated_loudness(track: AudioTrack, cfg: FrameConfig = FrameConfig()) -> Contour:
    """Sum over bands of ``|exp(0.33 * rasta(log band power)) - 1|``.

    The filtered log trajectory is zero for a stationary band, so steady
    sounds and silence score 0. The first four frames are warm-up.
    """
    hop_s, offset = _grid(track, cfg)
    logs = np.log(_band_power(track, cfg) + _LOG_FLOOR)
    filtered = rasta_filter(logs)
    values = np.sum(np.abs(np.expm1(COMPRESSION * filtered)), axis=1)
    return Contour(values, hop_s, "modulated-loudness", offset, warmup=RASTA_WARMUP)


# ---------------------------------------------------------------------------
# voice quality

def _voiced_runs(voiced, min_len):
    """(start, stop) of maximal runs of True with length >= min_len."""
    padded = np.concatenate([[False], voiced, [False]]).astype(np.int8)
    d = np.diff(padded)
    starts, stops = np.flatnonzero(d == 1), np.flatnonzero(d == -1)
    return [(a, b) for a, b in zip(starts, stops) if b - a >= min_len]


def _weighted(values_and_weights):
    total = sum(w for _, w in values_and_weights)
    return sum(v * w for v, w in values_and_weights) / total


def jitter(pitch: PitchTrack) -> tuple[float, float]:
    """(local jitter, delta jitter) from frame-wise periods, run-length weighted."""
    runs = _voiced_runs(pitch.voiced, 3)
    if not runs:
        raise InsufficientDataError("no run of three voiced frames")
    local, delta = [], []
    for a, b in runs:
        periods = 1.0 / pitch.f0[a:b]
        mean_t = periods.mean()
        d1 = np.diff(periods)
        d2 = np.diff(periods, 2)
        local.append((np.mean(np.abs(d1)) / mean_t, b - a))
        delta.append((np.mean(np.abs(d2)) / mean_t, b - a))
    return _weighted(local), _weighted(delta)


def shimmer(track: AudioTrack, pitch: PitchTrack, cfg: FrameConfig = FrameConfig()) -> float:
    """Mean relative change of per-frame peak amplitude over voiced runs."""
    frames = frame_signal(track, cfg)
    peaks = np.max(np.abs(frames), axis=1)
    if len(peaks) != len(pitch):
        raise ValidationError("pitch track does not match the frame grid")
    return shimmer_of_peaks(peaks, pitch.voiced)


def shimmer_of_peaks(peaks, voiced) -> float:
    runs = _voiced_runs(np.asarray(voiced, dtype=bool), 3)
    if not runs:
        raise InsufficientDataError("no run of three voiced frames")
    parts = []
    for a, b in runs:
        amp = np.asarray(peaks[a:b], dtype=np.float64)
        parts.append((np.mean(np.abs(np.diff(amp))) / amp.mean(), b - a))
    return _weighted(parts)


def log_hnr(track: AudioTrack, pitch: PitchTrack, cfg: FrameConfig = FrameConfig()) -> float:
    """Mean over voiced frames of ``10 log10(r / (1 - r))`` dB, r the autocorrelation peak."""
    if pitch.strength is None:
        pitch = estimate_pitch(track, cfg)
    r = pitch.strength[pitch.voiced]
    if len(r) == 0:
        raise InsufficientDataError("no voiced frames")
    r = np.clip(r, 1e-12, 1.0)
    with np.errstate(divide="ignore"):
        hnr = 10.0 * np.log10(r / (1.0 - r))
    return float(np.mean(np.clip(hnr, *HNR_RANGE)))


def harmonicity_of_spectrum(mag: np.ndarray) -> float:
    """mean(local minima) / mean(local maxima) of one magnitude spectrum.

    Fewer than two maxima counts as flat and yields 1.
    """
    mag = np.asarray(mag, dtype=np.float64)
    inner = mag[1:-1]
    is_max = (inner > mag[:-2]) & (inner >= mag[2:])
    is_min = (inner < mag[:-2]) & (inner <= mag[2:])
    maxima, minima = inner[is_max], inner[is_min]
    if len(maxima) < 2 or maxima.mean() <= 0:
        return 1.0
    if len(minima) == 0:
        return 0.0
    return float(np.clip(minima.mean() / maxima.mean(), 0.0, 1.0))


SMOOTH_BINS = 7
SMOOTH_FRAMES = 3


def spectral_harmonicity(track: AudioTrack, cfg: FrameConfig = FrameConfig()) -> Contour:
    """Per-frame minima/maxima ratio of the smoothed power spectrum.

    The power spectrum is averaged over 3 neighbouring frames and 7 bins
    before extrema are located; noise then scores high, tonal frames near 0.
    """
    frames = frame_signal(track, cfg)
    hop_s, offset = _grid(track, cfg)
    n = frames.shape[1]
    nfft = 1 << int(math.ceil(math.log2(n)))
    power = np.abs(np.fft.rfft(frames * np.hamming(n), nfft, axis=1)) ** 2
    power = uniform_filter1d(power, SMOOTH_FRAMES, axis=0, mode="nearest")
    power = uniform_filter1d(power, SMOOTH_BINS, axis=1, mode="nearest")
    values = np.array([harmonicity_of_spectrum(p) for p in power])
    return Contour(values, hop_s, "harmonicity", offset)


def pvq(pitch: PitchTrack, window: float = PVQ_WINDOW) -> float:
    """Mean over 10 s windows of population stdev(F0) / mean(F0) on voiced frames."""
    times = pitch.times
    slot = np.floor(times / window).astype(int)
    values = []
    for w in np.unique(slot):
        f = pitch.f0[(slot == w) & pitch.voiced]
        if len(f) >= PVQ_MIN_VOICED:
            values.append(np.std(f) / np.mean(f))
    if not values:
        raise InsufficientDataError(f"no {window:g} s window with {PVQ_MIN_VOICED} voiced frames")
    return float(np.mean(values))


# ---------------------------------------------------------------------------

def audio_feature_set(track: AudioTrack, cfg: FrameConfig = FrameConfig(),
                      pitch: Optional[PitchTrack] = None) -> AudioFeatureSet:
    """Every audio descriptor averaged over the track; failures leave a field None."""
    if track.duration_seconds < 1.0:
        raise InsufficientDataError("audio features need at least 1 s of signal")
    values: dict = {}
    absent: dict = {}

    def attempt(names, fn):
        try:
            result = fn()
        except (InsufficientDataError, UnsupportedError) as exc:
            for name in names:
                absent[name] = f"{type(exc).__name__}: {exc}"
            return
        if len(names) == 1:
            result = (result,)
        for name, v in zip(names, result):
            values[name] = float(v)

    if pitch is None:
        pitch = estimate_pitch(track, cfg)
    attempt(["loudness_avg"], lambda: loudness(track, cfg).mean())
    attempt(["mod_loudness_avg"], lambda: modulated_loudness(track, cfg).mean())
    attempt(["rms_energy_avg"], lambda: rms_energy(track, cfg).mean())
    attempt(["f0_avg"], lambda: _voiced_mean(pitch))
    attempt(["jitter_avg", "delta_jitter_avg"], lambda: jitter(pitch))
    attempt(["shimmer_avg"], lambda: shimmer(track, pitch, cfg))
    attempt(["harmonicity_avg"], lambda: spectral_harmonicity(track, cfg).mean())
    attempt(["log_hnr_avg"], lambda: log_hnr(track, pitch, cfg))
    attempt(["pvq_avg"], lambda: pvq(pitch))
    return AudioFeatureSet(**values, absent=absent)


def _voiced_mean(pitch):
    f = pitch.f0[pitch.voiced]
    if len(f) == 0:
        raise InsufficientDataError("no voiced frames")
    return float(np.mean(f))
