import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.ndimage import uniform_filter1d

from conftest import SR
from lvq.audio_dsp import FrameConfig, estimate_pitch
from lvq.errors import ValidationError
from lvq.ingest import AudioTrack
from lvq.speech_timing import SyllableTrack, detect_syllable_nuclei, linguistic_features

CFG = FrameConfig()


def burst_train(dip_db, n_bursts=10, seconds=5.0, amp=0.3):
    """Harmonic tone gated into 150 ms bursts that sit dip_db above the floor."""
    t = np.arange(int(seconds * SR)) / SR
    tone = sum(np.sin(2 * np.pi * 150 * h * t) / h for h in (1, 2, 3))
    env = np.full(len(t), 10 ** (-dip_db / 20))
    centres = 0.25 + 0.5 * np.arange(n_bursts)
    for c in centres:
        env[(t >= c - 0.075) & (t < c + 0.075)] = 1.0
    env = uniform_filter1d(env, int(0.02 * SR))
    return AudioTrack(amp * tone * env / np.sqrt(np.mean(tone ** 2)), SR), centres


def nuclei_of(track):
    return detect_syllable_nuclei(track, estimate_pitch(track, CFG), CFG)


def test_burst_train_found():
    track, centres = burst_train(12.0)
    syl = nuclei_of(track)
    assert len(syl.nuclei) == 10
    assert np.allclose(syl.nuclei, centres, atol=0.08)
    assert list(syl.nuclei) == sorted(set(syl.nuclei))
    assert 0 < syl.phonation_time <= syl.total_time


def test_shallow_dips_merge():
    track, _ = burst_train(1.0)
    assert len(nuclei_of(track).nuclei) < 10


def test_silence():
    syl = nuclei_of(AudioTrack(np.zeros(2 * SR), SR))
    assert syl.nuclei == ()
    assert syl.phonation_time == 0.0


def test_amplitude_scaling_keeps_count():
    track, _ = burst_train(12.0)
    quiet = AudioTrack(track.samples * 0.1, SR)
    assert len(nuclei_of(quiet).nuclei) == len(nuclei_of(track).nuclei)


def test_inserted_silence():
    track, _ = burst_train(12.0)
    longer = AudioTrack(np.concatenate([track.samples, np.zeros(2 * SR)]), SR)
    a = linguistic_features(nuclei_of(track))
    b = linguistic_features(nuclei_of(longer))
    assert b.speech_rate < a.speech_rate
    assert b.asd == pytest.approx(a.asd, abs=CFG.hop)
    assert b.articulation_rate == pytest.approx(a.articulation_rate, rel=0.02)


def test_linguistic_formulas():
    f = linguistic_features(SyllableTrack(tuple(range(10)), 5.0, 5.0))
    assert (f.speech_rate, f.articulation_rate, f.asd) == (2.0, 2.0, 0.5)
    f = linguistic_features(SyllableTrack(tuple(range(10)), 4.0, 5.0))
    assert (f.articulation_rate, f.asd) == (2.5, 0.4)
    f = linguistic_features(SyllableTrack((), 0.0, 5.0))
    assert f.speech_rate == 0 and f.articulation_rate is None and f.asd is None
    with pytest.raises(ValidationError):
        linguistic_features(SyllableTrack((), 0.0, 0.0))


@settings(max_examples=200)
@given(st.integers(1, 500), st.floats(0.01, 100), st.floats(1, 10))
def test_rates_consistent(n, phonation, stretch):
    f = linguistic_features(SyllableTrack(tuple(range(n)), phonation, phonation * stretch))
    assert f.asd * f.articulation_rate == pytest.approx(1.0, rel=1e-12)
    assert f.articulation_rate >= f.speech_rate
