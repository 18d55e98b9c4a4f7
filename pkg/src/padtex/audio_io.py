"""Reading and conditioning of mono 16-bit PCM WAV audio.

Only RIFF/WAVE with format code 1 (PCM), 16 bits per sample and a single
channel is accepted; anything else is rejected explicitly rather than
silently converted. ASVspoof-style FLAC corpora must be converted to WAV
externally (e.g. with ffmpeg or sox) before use.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AudioFormatError, DataError

__all__ = ["AudioClip", "read_wav", "write_wav", "peak_normalize"]


@dataclass(frozen=True)
class AudioClip:
    """Mono waveform with sample rate, amplitudes nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise DataError("clip must be a non-empty 1-D sample array")
        if not np.all(np.isfinite(samples)):
            raise DataError("clip contains non-finite samples")
        if self.sample_rate <= 0:
            raise DataError(f"sample rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def read_wav(path) -> AudioClip:
    """Decode a 16-bit PCM mono WAV file into an AudioClip.

    Integer samples are scaled by 1/32768, so values lie in [-1, 1).
    Raises AudioFormatError for non-PCM encodings, bit depths other than
    16, more than one channel, or a truncated data chunk.
    """
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wav:
            n_channels = wav.getnchannels()
            sample_width = wav.getsampwidth()
            comp_type = wav.getcomptype()
            sample_rate = wav.getframerate()
            n_frames = wav.getnframes()
            raw = wav.readframes(n_frames)
    except FileNotFoundError:
        raise
    except (wave.Error, EOFError) as exc:
        raise AudioFormatError(f"{path}: not a readable PCM WAV file ({exc})") from exc

    if comp_type != "NONE":
        raise AudioFormatError(f"{path}: compressed WAV ({comp_type}) is not supported")
    if sample_width != 2:
        raise AudioFormatError(
            f"{path}: only 16-bit samples are supported, got {8 * sample_width}-bit"
        )
    if n_channels != 1:
        raise AudioFormatError(
            f"{path}: expected mono audio, got {n_channels} channels (convert externally)"
        )
    if len(raw) < 2 * n_frames:
        raise AudioFormatError(
            f"{path}: truncated data chunk ({len(raw)} bytes for {n_frames} declared frames)"
        )
    if n_frames == 0:
        raise AudioFormatError(f"{path}: empty data chunk")

    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return AudioClip(samples=samples, sample_rate=sample_rate)


def write_wav(path, clip: AudioClip) -> None:
    """Write a clip as 16-bit PCM mono WAV (values clipped to [-1, 1))."""
    quantized = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(quantized.tobytes())


def peak_normalize(clip: AudioClip) -> AudioClip:
    """Scale so the maximum absolute amplitude is 1; all-zero input is returned unchanged."""
    peak = float(np.max(np.abs(clip.samples)))
    if peak == 0.0:
        return clip
    return AudioClip(samples=clip.samples / peak, sample_rate=clip.sample_rate)
