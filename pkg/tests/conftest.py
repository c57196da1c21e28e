import time

import numpy as np
import pytest

from voicemark.audio_io import AudioBuffer, read_wav, write_wav
from voicemark.watermark import WatermarkConfig, prepare_streams

from synth import FS, synth_speech

CORPUS_SIZE = 20
CORPUS_SEED = 100


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """20 synthetic utterances of 5.0-6.5 s at 16 kHz, written as 16-bit WAVs."""
    directory = tmp_path_factory.mktemp("corpus")
    durations = np.random.default_rng(777).uniform(5.0, 6.5, CORPUS_SIZE)
    for i, duration in enumerate(durations):
        samples = synth_speech(np.random.default_rng(CORPUS_SEED + i), duration)
        write_wav(AudioBuffer(samples, FS), directory / f"utt{i:02d}.wav", 16)
    return directory


@pytest.fixture(scope="session")
def corpus(corpus_dir):
    """The corpus as read back from disk: list of (name, AudioBuffer)."""
    return [(p.name, read_wav(p)) for p in sorted(corpus_dir.glob("*.wav"))]


@pytest.fixture(scope="session")
def base_config():
    return WatermarkConfig(payload_bps=4)


@pytest.fixture(scope="session")
def corpus_streams(corpus, base_config):
    """Anonymized (bit-0, bit-1) stream pairs per utterance, plus the wall
    time the preparation took (the payload-independent part of embedding)."""
    start = time.perf_counter()
    streams = [prepare_streams(buf, base_config) for _, buf in corpus]
    return streams, time.perf_counter() - start


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    """4 short utterances for CLI-level runs."""
    directory = tmp_path_factory.mktemp("small_corpus")
    for i in range(4):
        samples = synth_speech(np.random.default_rng(3000 + i), 5.0)
        write_wav(AudioBuffer(samples, FS), directory / f"utt{i}.wav", 16)
    return directory
