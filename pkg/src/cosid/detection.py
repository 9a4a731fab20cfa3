"""Usable-frame detection by periodicity hunting across wavelet scales.

A frame is usable when, at some scale, the autocorrelation of the
approximation coefficients shows three strong maxima at (nearly) equal
lag spacing. Scales are tried shallow to deep and the first success
wins; frames where no scale shows periodicity are unusable. Consecutive
usable frames are merged into segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .audio import Frame, Waveform, frame_signal
from .wavelet import WaveletFilters, dwt_step


@dataclass(frozen=True)
class DetectionConfig:
    amp_threshold: float = 0.30  # fraction of acf[0] a peak must reach
    lag_threshold: int = 2  # max spacing mismatch, samples at the analyzed scale
    j_max: int = 4  # deepest scale tried (band 0..rate/2^(j_max+1))
    min_segment_frames: int = 3
    frame_len: int = 1024  # 64 ms at 16 kHz; must hold 3 periods of the lowest pitch
    hop: int = 160  # 10 ms at 16 kHz
    max_lag_fraction: float = 0.8  # cap on the peak-search lag range

    def __post_init__(self):
        if not 0.0 < self.amp_threshold < 1.0:
            raise ValueError("amp_threshold must be in (0, 1)")
        if self.lag_threshold < 0:
            raise ValueError("lag_threshold must be >= 0")
        if self.j_max < 1:
            raise ValueError("j_max must be >= 1")
        if self.min_segment_frames < 1:
            raise ValueError("min_segment_frames must be >= 1")
        if self.frame_len % (1 << self.j_max) != 0:
            raise ValueError("frame_len must be divisible by 2^j_max")
        if not 0.0 < self.max_lag_fraction <= 1.0:
            raise ValueError("max_lag_fraction must be in (0, 1]")


@dataclass(frozen=True)
class FrameVerdict:
    frame_index: int
    usable: bool
    detection_scale: Optional[int] = None  # scale where periodicity was found
    peak_lags: tuple = ()  # up to three lags, diagnostic only


@dataclass(frozen=True)
class UsableSegment:
    start_frame: int  # inclusive
    end_frame: int  # inclusive
    sample_span: tuple  # (start sample, end sample), end exclusive
    verdicts: tuple = ()
    truth_label: Optional[int] = None  # ground-truth origin, evaluation only

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame + 1


def autocorrelation(x) -> np.ndarray:
    """Biased autocorrelation r[tau] = sum_t x[t] x[t+tau], normalized so
    acf[0] = 1. All-zero input cannot be normalized and is rejected."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 4:
        raise ValueError("autocorrelation needs at least 4 samples")
    r = np.correlate(x, x, mode="full")[len(x) - 1 :]
    if r[0] == 0.0:
        raise ValueError("all-zero input")
    return r / r[0]


def find_three_maxima(acf, amp_threshold: float, max_lag_fraction: float = 0.8):
    """Pick up to three autocorrelation peaks, returned in ascending lag order.

    Candidates are strict local maxima at lags >= 2 (the zero-lag lobe is
    excluded) with amplitude >= amp_threshold, searched up to
    max_lag_fraction of the acf length; the three largest by amplitude
    are kept, ties going to the smaller lag.
    """
    acf = np.asarray(acf, dtype=np.float64)
    hi = min(int(len(acf) * max_lag_fraction), len(acf) - 2)
    if hi < 2:
        return []
    lags = np.arange(2, hi + 1)
    is_peak = (acf[lags] > acf[lags - 1]) & (acf[lags] > acf[lags + 1])
    strong = acf[lags] >= amp_threshold
    candidates = lags[is_peak & strong]
    if len(candidates) == 0:
        return []
    order = sorted(candidates, key=lambda t: (-acf[t], t))
    return sorted(int(t) for t in order[:3])


def periodicity_decision(lags, lag_threshold: int) -> bool:
    """True iff three lags are (nearly) equally spaced: the two successive
    lag differences agree within lag_threshold. Fewer than three lags is
    simply not periodic, not an error."""
    if len(lags) < 3:
        return False
    l1, l2, l3 = lags
    return abs((l2 - l1) - (l3 - l2)) <= lag_threshold


def classify_frame(
    frame: Frame, filters: WaveletFilters, config: DetectionConfig
) -> FrameVerdict:
    """Try scales 1..j_max on one frame; the first scale whose
    approximation shows periodicity makes the frame usable."""
    if len(frame.samples) % (1 << config.j_max) != 0:
        raise ValueError(
            f"frame length {len(frame.samples)} not divisible by 2^{config.j_max}"
        )
    index = frame.start // frame.hop
    last_lags: tuple = ()
    approx = frame.samples
    for j in range(1, config.j_max + 1):
        approx, _ = dwt_step(approx, filters)  # same floats as approximation_at_scale
        if not np.any(approx):
            # silent frame: nothing to normalize against at any scale
            return FrameVerdict(frame_index=index, usable=False)
        acf = autocorrelation(approx)
        lags = find_three_maxima(acf, config.amp_threshold, config.max_lag_fraction)
        last_lags = tuple(lags)
        if periodicity_decision(lags, config.lag_threshold):
            return FrameVerdict(
                frame_index=index, usable=True, detection_scale=j, peak_lags=last_lags
            )
    return FrameVerdict(frame_index=index, usable=False, peak_lags=last_lags)


def merge_usable_runs(
    verdicts, min_segment_frames: int, frame_len: int, hop: int
) -> list[UsableSegment]:
    """Maximal runs of consecutive usable verdicts, kept when at least
    min_segment_frames long."""
    segments = []
    run: list[FrameVerdict] = []

    def flush():
        if len(run) >= min_segment_frames:
            first, last = run[0], run[-1]
            segments.append(
                UsableSegment(
                    start_frame=first.frame_index,
                    end_frame=last.frame_index,
                    sample_span=(
                        first.frame_index * hop,
                        last.frame_index * hop + frame_len,
                    ),
                    verdicts=tuple(run),
                )
            )

    for v in verdicts:
        if v.usable:
            run.append(v)
        else:
            flush()
            run = []
    flush()
    return segments


def extract_usable_segments(
    w: Waveform, filters: WaveletFilters, config: DetectionConfig
) -> tuple[list[FrameVerdict], list[UsableSegment]]:
    """Classify every frame of a waveform and merge usable runs into
    segments. Returns (verdicts, segments); an empty segment list is a
    legal outcome."""
    frames = frame_signal(w, config.frame_len, config.hop)
    verdicts = [classify_frame(f, filters, config) for f in frames]
    segments = merge_usable_runs(
        verdicts, config.min_segment_frames, config.frame_len, config.hop
    )
    return verdicts, segments
