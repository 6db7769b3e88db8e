import io
import wave

import numpy as np
import pytest

from lvq.ingest import AudioTrack
from lvq.text_semantics import load_lexicon, parse_lexicon

SR = 16000


def sine(freq=200.0, seconds=1.0, amp=1.0, sr=SR):
    t = np.arange(int(seconds * sr)) / sr
    return AudioTrack(amp * np.sin(2 * np.pi * freq * t), sr)


def pcm16_wav(samples, sr=SR, channels=1):
    """Encode int16 samples (shape (n,) or (n, channels)) with the stdlib wave module."""
    data = np.asarray(samples, dtype="<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(sr)
        w.writeframes(data.tobytes())
    return buf.getvalue()


SMALL_LEXICON = """
[LEMMAS]
team    teams
deadline    deadlines
risk    risks
alpha   alphas
beta    betas
gamma
[NOUNS]
team
deadline
risk
alpha
beta
gamma
[SYNONYMS]
team    squad
"""


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


@pytest.fixture(scope="session")
def small_lexicon():
    return parse_lexicon(SMALL_LEXICON)


# acceptance verdicts, printed once at the end of the run
VERDICTS: dict = {}


def verdict(number, title, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}" + (f" ({detail})" if detail else "")
    VERDICTS[number] = line
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[number])
