"""16-coefficient MFCC front end.

Pipeline per frame: pre-emphasis, Hamming window, 512-point magnitude
spectrum, 26 unit-height triangular mel filters over 0-8000 Hz, floored
log, type-II DCT. c0 is discarded (it carries only overall gain), so
features are invariant to scaling the waveform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .audio import CANONICAL_RATE, Waveform
from .detection import UsableSegment

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class FeatureConfig:
    frame_len: int = 400  # 25 ms at 16 kHz
    hop: int = 160  # 10 ms
    n_fft: int = 512
    n_filters: int = 26
    n_coeffs: int = 16
    preemphasis: float = 0.97
    fmin_hz: float = 0.0
    fmax_hz: float = 8000.0


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(config: FeatureConfig, sample_rate: int) -> np.ndarray:
    """Unit-height triangular filters, rows indexed by filter, columns by
    rfft bin of an n_fft transform."""
    edges_mel = np.linspace(
        hz_to_mel(config.fmin_hz), hz_to_mel(config.fmax_hz), config.n_filters + 2
    )
    edges_hz = mel_to_hz(edges_mel)
    bin_freqs = np.arange(config.n_fft // 2 + 1) * (sample_rate / config.n_fft)
    bank = np.zeros((config.n_filters, len(bin_freqs)))
    for m in range(config.n_filters):
        lo, mid, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        rising = (bin_freqs - lo) / (mid - lo)
        falling = (hi - bin_freqs) / (hi - mid)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
    return bank


def mel_filter_energies(frame_samples, sample_rate: int, config: FeatureConfig):
    """Filterbank outputs for one frame; exposed for diagnostics/tests."""
    x = np.asarray(frame_samples, dtype=np.float64)
    if len(x) != config.frame_len:
        raise ValueError(f"expected {config.frame_len}-sample frame, got {len(x)}")
    if sample_rate != CANONICAL_RATE:
        raise ValueError(f"expected {CANONICAL_RATE} Hz input, got {sample_rate}")
    emphasized = np.append(x[0], x[1:] - config.preemphasis * x[:-1])
    windowed = emphasized * np.hamming(config.frame_len)
    magnitude = np.abs(np.fft.rfft(windowed, n=config.n_fft))
    return mel_filterbank(config, sample_rate) @ magnitude


def mfcc_frame(frame_samples, sample_rate: int, config: FeatureConfig = FeatureConfig()):
    """One 16-dim MFCC vector (c1..c16; c0 excluded) from one frame."""
    energies = mel_filter_energies(frame_samples, sample_rate, config)
    log_energies = np.log(np.maximum(energies, LOG_FLOOR))
    ceps = dct(log_energies, type=2, norm="ortho")
    return ceps[1 : config.n_coeffs + 1]


def span_features(
    w: Waveform, start: int, end: int, config: FeatureConfig = FeatureConfig()
) -> np.ndarray:
    """MFCC frames over samples [start, end) of a waveform, hopping by
    config.hop. Returns an (M, n_coeffs) observation matrix."""
    span = end - start
    if span < config.frame_len:
        raise ValueError(
            f"span of {span} samples shorter than one {config.frame_len}-sample frame"
        )
    count = (span - config.frame_len) // config.hop + 1
    out = np.empty((count, config.n_coeffs))
    for i in range(count):
        s = start + i * config.hop
        out[i] = mfcc_frame(w.samples[s : s + config.frame_len], w.sample_rate, config)
    return out


def segment_features(
    w: Waveform, seg: UsableSegment, config: FeatureConfig = FeatureConfig()
) -> np.ndarray:
    """Observation sequence for one usable segment's sample span."""
    start, end = seg.sample_span
    return span_features(w, start, min(end, len(w.samples)), config)


def waveform_features(w: Waveform, config: FeatureConfig = FeatureConfig()) -> np.ndarray:
    """Observation sequence over an entire waveform."""
    return span_features(w, 0, len(w.samples), config)
