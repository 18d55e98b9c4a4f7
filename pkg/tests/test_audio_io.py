import struct
import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padtex.audio_io import AudioClip, peak_normalize, read_wav, write_wav
from padtex.errors import AudioFormatError, DataError


def write_raw_wav(path, frames: bytes, n_channels=1, sample_width=2, rate=16000):
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(n_channels)
        wav.setsampwidth(sample_width)
        wav.setframerate(rate)
        wav.writeframes(frames)


def test_read_wav_header_echo(tmp_path):
    rng = np.random.default_rng(0)
    raw = rng.integers(-32768, 32768, size=16000).astype("<i2").tobytes()
    path = tmp_path / "clip.wav"
    write_raw_wav(path, raw)
    clip = read_wav(path)
    assert len(clip) == 16000
    assert clip.sample_rate == 16000


def test_read_wav_stereo_rejected(tmp_path):
    path = tmp_path / "stereo.wav"
    write_raw_wav(path, b"\x00\x00" * 64, n_channels=2)
    with pytest.raises(AudioFormatError, match="mono"):
        read_wav(path)


def test_read_wav_8bit_rejected(tmp_path):
    path = tmp_path / "w8.wav"
    write_raw_wav(path, b"\x00" * 64, sample_width=1)
    with pytest.raises(AudioFormatError, match="16-bit"):
        read_wav(path)


def test_read_wav_scaling_hand_value(tmp_path):
    path = tmp_path / "one.wav"
    write_raw_wav(path, struct.pack("<h", 32767))
    clip = read_wav(path)
    assert clip.samples[0] == 32767 / 32768  # 0.999969482421875 by hand


def test_read_wav_truncated_data_chunk(tmp_path):
    path = tmp_path / "trunc.wav"
    write_raw_wav(path, b"\x01\x00" * 100)
    data = path.read_bytes()
    path.write_bytes(data[:-30])  # chop samples; header still declares 100 frames
    with pytest.raises(AudioFormatError, match="truncated"):
        read_wav(path)


def test_read_wav_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_wav(tmp_path / "nope.wav")


def test_roundtrip_within_quantization(tmp_path):
    rng = np.random.default_rng(1)
    samples = rng.uniform(-0.99, 0.99, size=4000)
    clip = AudioClip(samples=samples, sample_rate=16000)
    path = tmp_path / "rt.wav"
    write_wav(path, clip)
    back = read_wav(path)
    assert back.sample_rate == 16000
    assert np.max(np.abs(back.samples - samples)) <= 2.0 ** -15


def test_peak_normalize_scales():
    clip = AudioClip(samples=np.array([0.5, -0.25]), sample_rate=8000)
    out = peak_normalize(clip)
    np.testing.assert_array_equal(out.samples, [1.0, -0.5])


def test_peak_normalize_zero_clip_unchanged():
    clip = AudioClip(samples=np.zeros(3), sample_rate=8000)
    out = peak_normalize(clip)
    np.testing.assert_array_equal(out.samples, np.zeros(3))


def test_peak_normalize_random_max_is_one():
    rng = np.random.default_rng(2)
    clip = AudioClip(samples=rng.normal(size=1000), sample_rate=16000)
    out = peak_normalize(clip)
    assert abs(np.max(np.abs(out.samples)) - 1.0) <= 1e-6


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-10, max_value=10,
                          allow_nan=False, allow_infinity=False),
                min_size=1, max_size=200))
def test_peak_normalize_idempotent(values):
    clip = AudioClip(samples=np.array(values), sample_rate=16000)
    once = peak_normalize(clip)
    twice = peak_normalize(once)
    np.testing.assert_array_equal(once.samples, twice.samples)


def test_non_finite_samples_rejected():
    with pytest.raises(DataError):
        AudioClip(samples=np.array([0.0, np.nan]), sample_rate=16000)
