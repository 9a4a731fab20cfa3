"""Synthetic harmonic-plus-noise voices and a desk-scale corpus builder.

Each speaker is a fixed fundamental drawn from the speech pitch range
plus a random spectral envelope built from eight formant-like resonance
gains. Utterances alternate voiced spans (slowly jittered harmonics)
with near-silence, so both the periodicity detector and the spectral
speaker models have something real to work with. Everything is driven
by explicit seeds; the same seed reproduces the corpus byte for byte.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import CANONICAL_RATE, Waveform, save_wav

F0_RANGE_HZ = (85.0, 255.0)
# formant-like resonance ladder shared by all speakers; gains differ
RESONANCE_CENTERS_HZ = (250.0, 450.0, 800.0, 1400.0, 2200.0, 3200.0, 4400.0, 5800.0)
_HARMONIC_CEIL_HZ = 7000.0
_NOISE_LEVEL = 0.01  # relative to unit voiced amplitude
_SILENCE_LEVEL = 3e-4


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: str
    f0_hz: float
    resonance_gains: tuple  # one gain per entry of RESONANCE_CENTERS_HZ


def random_profile(speaker_id: str, rng: np.random.Generator) -> SpeakerProfile:
    f0 = float(rng.uniform(*F0_RANGE_HZ))
    gains = tuple(float(g) for g in rng.uniform(0.05, 1.0, size=len(RESONANCE_CENTERS_HZ)))
    return SpeakerProfile(speaker_id=speaker_id, f0_hz=f0, resonance_gains=gains)


def spectral_envelope(profile: SpeakerProfile, freqs_hz) -> np.ndarray:
    """Sum of Gaussian resonance bumps plus a small floor."""
    f = np.asarray(freqs_hz, dtype=np.float64)
    env = np.full_like(f, 0.02)
    for center, gain in zip(RESONANCE_CENTERS_HZ, profile.resonance_gains):
        width = 0.25 * center
        env += gain * np.exp(-0.5 * ((f - center) / width) ** 2)
    return env


def _render_voiced(
    profile: SpeakerProfile, n_samples: int, rate: int, rng: np.random.Generator
) -> np.ndarray:
    """Harmonic stack with slow +-2% pitch jitter and a touch of noise."""
    # smoothed random walk -> slowly varying relative pitch deviation
    steps = rng.standard_normal(max(n_samples // 160, 2))
    walk = np.cumsum(steps)
    walk = walk / (np.max(np.abs(walk)) + 1e-12)
    deviation = np.interp(np.arange(n_samples), np.linspace(0, n_samples - 1, len(walk)), walk)
    f0_track = profile.f0_hz * (1.0 + 0.02 * deviation)
    phase = 2.0 * np.pi * np.cumsum(f0_track) / rate

    n_harm = max(int(_HARMONIC_CEIL_HZ / profile.f0_hz), 1)
    harmonic_freqs = profile.f0_hz * np.arange(1, n_harm + 1)
    amps = spectral_envelope(profile, harmonic_freqs)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_harm)
    x = np.zeros(n_samples)
    for k in range(n_harm):
        x += amps[k] * np.sin((k + 1) * phase + phases[k])
    x /= np.max(np.abs(x)) + 1e-12
    x += _NOISE_LEVEL * rng.standard_normal(n_samples)

    fade = min(int(0.010 * rate), n_samples // 2)
    if fade > 0:
        ramp = np.linspace(0.0, 1.0, fade)
        x[:fade] *= ramp
        x[-fade:] *= ramp[::-1]
    return 0.5 * x


def render_utterance(
    profile: SpeakerProfile,
    duration_s: float,
    rng: np.random.Generator,
    rate: int = CANONICAL_RATE,
):
    """One utterance: alternating voiced spans and near-silence.

    Returns (waveform, voiced_spans) where voiced_spans is a list of
    (start_sample, end_sample) pairs, end exclusive.
    """
    total = int(round(duration_s * rate))
    x = _SILENCE_LEVEL * rng.standard_normal(total)
    spans = []
    cursor = int(rng.uniform(0.02, 0.08) * rate)
    voiced = True
    while cursor < total:
        if voiced:
            length = int(rng.uniform(0.25, 0.55) * rate)
            end = min(cursor + length, total)
            if end - cursor > int(0.05 * rate):
                x[cursor:end] += _render_voiced(profile, end - cursor, rate, rng)
                spans.append((cursor, end))
        else:
            length = int(rng.uniform(0.12, 0.30) * rate)
            end = min(cursor + length, total)
        cursor = end
        voiced = not voiced
    return Waveform(samples=x, sample_rate=rate), spans


def synth_corpus(
    root,
    seed: int,
    n_speakers: int = 10,
    files_per_speaker: int = 10,
    duration_s: float = 2.0,
    train_files: int = 5,
    rate: int = CANONICAL_RATE,
) -> Path:
    """Write a WAV corpus plus manifest.csv under `root`; returns the
    manifest path. Rows are (speaker_id, path, split)."""
    if n_speakers < 2:
        raise ValueError("need at least two speakers")
    if not 0 < train_files < files_per_speaker:
        raise ValueError("train_files must leave at least one test file")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    seeds = np.random.SeedSequence(seed).spawn(n_speakers)
    rows = []
    for s, speaker_seed in enumerate(seeds):
        speaker_id = f"spk{s:02d}"
        profile_rng, *file_seeds = speaker_seed.spawn(files_per_speaker + 1)
        profile = random_profile(speaker_id, np.random.default_rng(profile_rng))
        for u, file_seed in enumerate(file_seeds):
            wav, _ = render_utterance(
                profile, duration_s, np.random.default_rng(file_seed), rate
            )
            rel = f"{speaker_id}_u{u:02d}.wav"
            save_wav(wav, root / rel)
            split = "train" if u < train_files else "test"
            rows.append((speaker_id, rel, split))
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["speaker_id", "path", "split"])
        writer.writerows(rows)
    return manifest


def load_manifest(root) -> dict:
    """Read manifest.csv into {speaker_id: {"train": [...], "test": [...]}}
    with paths resolved against the corpus root."""
    root = Path(root)
    manifest = root / "manifest.csv"
    if not manifest.exists():
        raise FileNotFoundError(f"no manifest.csv under {root}")
    corpus: dict = {}
    with open(manifest, newline="") as fh:
        for row in csv.DictReader(fh):
            entry = corpus.setdefault(row["speaker_id"], {"train": [], "test": []})
            entry[row["split"]].append(root / row["path"])
    for speaker_id, entry in corpus.items():
        if not entry["train"] or not entry["test"]:
            raise ValueError(f"{speaker_id}: needs both train and test files")
    return corpus
