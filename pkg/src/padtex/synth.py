"""Synthetic mini-corpus: clean multi-tone "bona fide" clips vs. the same
material pushed through a simulated replay channel (low-pass filtering,
reverberation, 8-bit re-quantization, noise floor).

The corpus is small enough for smoke tests yet separable by spectro-
temporal texture, and fully deterministic for a given master seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.signal import butter, fftconvolve, lfilter

from .audio_io import AudioClip, write_wav
from .protocol import ProtocolEntry, write_protocol

__all__ = ["synth_bona_clip", "apply_replay_channel", "make_corpus",
           "REPLAY_VARIANTS"]

SAMPLE_RATE = 16000

# Two replay configurations (attack ids): low-pass cutoff Hz, reverb decay s.
REPLAY_VARIANTS = {"RA": (2400.0, 0.11), "RB": (3000.0, 0.08)}


def synth_bona_clip(rng: np.random.Generator, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Harmonic multi-tone with a slow amplitude envelope and mild noise."""
    duration = rng.uniform(1.5, 2.2)
    n = int(duration * sample_rate)
    t = np.arange(n) / sample_rate
    f0 = rng.uniform(130.0, 290.0)
    rolloff = rng.uniform(0.3, 0.7)
    signal = np.zeros(n)
    for k in range(1, 60):  # harmonics up to ~7 kHz, above the replay low-pass
        freq = f0 * k * (1.0 + rng.normal(0.0, 5e-4))
        if freq > 0.44 * sample_rate:
            break
        amp = rng.uniform(0.6, 1.0) / k ** rolloff
        signal += amp * np.sin(2.0 * np.pi * freq * t + rng.uniform(0.0, 2.0 * np.pi))
    envelope = 0.55 + 0.45 * np.sin(2.0 * np.pi * rng.uniform(0.4, 1.8) * t
                                    + rng.uniform(0.0, 2.0 * np.pi))
    signal *= envelope

    white = rng.standard_normal(n)
    colored = lfilter([1.0], [1.0, -0.95], white)  # AR(1), pink-ish
    colored *= np.sqrt(np.mean(signal ** 2)) / np.sqrt(np.mean(colored ** 2)) * 10 ** (-34 / 20)
    signal += colored
    return 0.9 * signal / np.max(np.abs(signal))


def apply_replay_channel(samples: np.ndarray, rng: np.random.Generator,
                         cutoff_hz: float, reverb_decay: float,
                         sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Simulate a loudspeaker-room-microphone chain plus cheap electronics."""
    b, a = butter(6, cutoff_hz / (sample_rate / 2.0), btype="low")
    y = lfilter(b, a, samples)

    ir_len = int(0.15 * sample_rate)
    ir_t = np.arange(ir_len) / sample_rate
    impulse = rng.standard_normal(ir_len) * np.exp(-ir_t / reverb_decay)
    impulse[0] = 1.0
    wet = fftconvolve(y, impulse)[: y.size]
    wet *= np.sqrt(np.mean(y ** 2) / max(np.mean(wet ** 2), 1e-20))
    y = 0.55 * y + 0.45 * wet

    y = y / np.max(np.abs(y))
    y = np.round(y * 31.0) / 31.0  # coarse 6-bit DAC/ADC pass
    y = y + rng.normal(0.0, 2.5e-3, size=y.size)
    return 0.9 * y / np.max(np.abs(y))


def make_corpus(out_dir, n_bona: int = 100, n_attack: int = 100, seed: int = 0,
                sample_rate: int = SAMPLE_RATE) -> dict:
    """Write WAVs plus native train/eval manifests (even/odd 50/50 split).

    Returns the paths of the audio directory and the two manifests.
    """
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)

    train: list[ProtocolEntry] = []
    evaluation: list[ProtocolEntry] = []
    variant_names = sorted(REPLAY_VARIANTS)

    for idx in range(n_bona):
        rng = np.random.default_rng([seed, 0, idx])
        samples = synth_bona_clip(rng, sample_rate)
        trial_id = f"B{idx:04d}"
        write_wav(audio_dir / f"{trial_id}.wav",
                  AudioClip(samples=samples, sample_rate=sample_rate))
        entry = ProtocolEntry(trial_id=trial_id, label="bonafide", attack_id="-",
                              split="train" if idx % 2 == 0 else "eval")
        (train if idx % 2 == 0 else evaluation).append(entry)

    for idx in range(n_attack):
        rng = np.random.default_rng([seed, 1, idx])
        clean = synth_bona_clip(rng, sample_rate)
        attack_id = variant_names[idx % len(variant_names)]
        cutoff, decay = REPLAY_VARIANTS[attack_id]
        samples = apply_replay_channel(clean, rng, cutoff, decay, sample_rate)
        trial_id = f"A{idx:04d}"
        write_wav(audio_dir / f"{trial_id}.wav",
                  AudioClip(samples=samples, sample_rate=sample_rate))
        entry = ProtocolEntry(trial_id=trial_id, label="spoof", attack_id=attack_id,
                              split="train" if idx % 2 == 0 else "eval")
        (train if idx % 2 == 0 else evaluation).append(entry)

    train_manifest = out_dir / "train_protocol.txt"
    eval_manifest = out_dir / "eval_protocol.txt"
    write_protocol(train_manifest, train)
    write_protocol(eval_manifest, evaluation)
    return {"audio_dir": str(audio_dir), "train_manifest": str(train_manifest),
            "eval_manifest": str(eval_manifest), "n_train": len(train),
            "n_eval": len(evaluation)}
