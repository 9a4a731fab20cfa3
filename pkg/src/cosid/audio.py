"""Mono PCM WAV loading/saving, framing and energy helpers.

All downstream analysis assumes 16 kHz mono float samples in [-1, 1].
Only 16-bit PCM RIFF/WAVE files are accepted; anything else is rejected
rather than silently converted.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

CANONICAL_RATE = 16000
_INT16_SCALE = 32768.0


class AudioFormatError(ValueError):
    """Raised for WAV files that are not 16-bit PCM mono."""


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray  # float64 mono, nominally in [-1, 1]
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if len(self.samples) == 0:
            raise ValueError("empty waveform")

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class Frame:
    samples: np.ndarray
    start: int  # sample index in the source waveform
    length: int
    hop: int


def load_wav(path, expect_rate: int | None = None) -> Waveform:
    """Read a 16-bit PCM mono WAV file into a float Waveform.

    Integer samples are divided by 32768, so the result lies in [-1, 1).
    `expect_rate` rejects files at any other sample rate (resampling is
    deliberately unsupported).
    """
    try:
        reader = wave.open(str(path), "rb")
    except wave.Error as exc:
        raise AudioFormatError(f"{path}: not a readable RIFF/WAVE file ({exc})") from exc
    with reader:
        if reader.getcomptype() != "NONE":
            raise AudioFormatError(f"{path}: compressed WAV not supported")
        if reader.getnchannels() != 1:
            raise AudioFormatError(
                f"{path}: expected mono, got {reader.getnchannels()} channels"
            )
        if reader.getsampwidth() != 2:
            raise AudioFormatError(
                f"{path}: expected 16-bit PCM, got {8 * reader.getsampwidth()}-bit"
            )
        rate = reader.getframerate()
        n = reader.getnframes()
        raw = reader.readframes(n)
    if n == 0 or len(raw) == 0:
        raise AudioFormatError(f"{path}: empty waveform")
    if expect_rate is not None and rate != expect_rate:
        raise AudioFormatError(
            f"{path}: sample rate {rate} Hz, expected {expect_rate} Hz "
            "(resampling not supported)"
        )
    ints = np.frombuffer(raw, dtype="<i2")
    return Waveform(samples=ints.astype(np.float64) / _INT16_SCALE, sample_rate=rate)


def save_wav(w: Waveform, path) -> int:
    """Write a Waveform as 16-bit PCM mono. Returns the clipped-sample count.

    Samples outside [-1, 1] are clipped to the valid int16 range and
    counted; in-range samples only suffer one quantization step.
    """
    x = np.asarray(w.samples, dtype=np.float64)
    n_clipped = int(np.count_nonzero((x < -1.0) | (x > 1.0)))
    scaled = np.round(x * _INT16_SCALE)
    ints = np.clip(scaled, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as writer:
        writer.setnchannels(1)
        writer.setsampwidth(2)
        writer.setframerate(w.sample_rate)
        writer.writeframes(ints.tobytes())
    return n_clipped


def frame_signal(w: Waveform, frame_len: int, hop: int) -> list[Frame]:
    """Cut a waveform into frames of `frame_len` samples every `hop` samples.

    The trailing remainder shorter than a full frame is dropped (zero
    padding would bias the autocorrelation downstream).
    """
    if frame_len <= 0 or hop <= 0:
        raise ValueError("frame_len and hop must be positive")
    n = len(w.samples)
    if frame_len > n:
        raise ValueError(f"frame_len {frame_len} exceeds signal length {n}")
    count = (n - frame_len) // hop + 1
    return [
        Frame(
            samples=w.samples[i * hop : i * hop + frame_len],
            start=i * hop,
            length=frame_len,
            hop=hop,
        )
        for i in range(count)
    ]


def signal_energy(x) -> float:
    """Sum of squared samples."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("signal_energy of empty input")
    return float(np.dot(x, x))
