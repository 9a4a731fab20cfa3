"""Dyadic wavelet analysis: iterated two-channel filter bank with
periodic extension, halving bandwidth and length at every scale.

Only the analysis direction is implemented; reconstruction is never
needed. Daubechies-4 is the default family, Haar is kept around because
its closed-form outputs make tests easy to reason about.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SQRT2 = float(np.sqrt(2.0))

# Daubechies-4 scaling coefficients (8 taps), natural order.
_DB4_LOW = (
    0.23037781330885523,
    0.71484657055254153,
    0.63088076792959036,
    -0.027983769416983849,
    -0.18703481171888114,
    0.030841381835986965,
    0.032883011666982945,
    -0.010597401784997278,
)


@dataclass(frozen=True)
class WaveletFilters:
    """Orthonormal low/high analysis pair (high is the quadrature mirror)."""

    name: str
    low_pass: np.ndarray
    high_pass: np.ndarray

    @classmethod
    def from_low_pass(cls, name: str, low_pass) -> "WaveletFilters":
        low = np.asarray(low_pass, dtype=np.float64)
        if len(low) % 2 != 0:
            raise ValueError("filter length must be even")
        # alternating-flip completion: high[k] = (-1)^k * low[L-1-k]
        signs = np.where(np.arange(len(low)) % 2 == 0, 1.0, -1.0)
        high = signs * low[::-1]
        return cls(name=name, low_pass=low, high_pass=high)

    def __len__(self):
        return len(self.low_pass)


def haar() -> WaveletFilters:
    return WaveletFilters.from_low_pass("haar", [1.0 / _SQRT2, 1.0 / _SQRT2])


def daubechies4() -> WaveletFilters:
    return WaveletFilters.from_low_pass("db4", _DB4_LOW)


def dwt_step(x, filters: WaveletFilters):
    """One analysis level: circular correlation with each filter, then
    downsampling by 2. Returns (approximation, detail), each of length
    len(x)/2.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    taps = len(filters)
    if n % 2 != 0:
        raise ValueError(f"input length {n} must be even")
    if n < taps:
        raise ValueError(f"input length {n} shorter than filter ({taps} taps)")
    idx = (np.arange(0, n, 2)[:, None] + np.arange(taps)[None, :]) % n
    windows = x[idx]
    return windows @ filters.low_pass, windows @ filters.high_pass


@dataclass(frozen=True)
class ScaleDecomposition:
    scale: int
    approximation: np.ndarray
    detail: np.ndarray  # kept for diagnostics only


def decompose(x, j_max: int, filters: WaveletFilters) -> list[ScaleDecomposition]:
    """Iterate dwt_step on the approximation branch up to scale j_max."""
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    out = []
    approx = np.asarray(x, dtype=np.float64)
    for j in range(1, j_max + 1):
        approx, detail = dwt_step(approx, filters)
        out.append(ScaleDecomposition(scale=j, approximation=approx, detail=detail))
    return out


def approximation_at_scale(x, j: int, filters: WaveletFilters) -> np.ndarray:
    """Approximation coefficients after j analysis levels."""
    x = np.asarray(x, dtype=np.float64)
    if j < 1:
        raise ValueError("scale must be >= 1")
    if len(x) % (1 << j) != 0:
        raise ValueError(f"length {len(x)} not divisible by 2^{j}")
    approx = x
    for _ in range(j):
        approx, _ = dwt_step(approx, filters)
    return approx


def dump_filters() -> str:
    """Filter coefficients at full precision, for cross-checking other
    implementations of the same filter bank."""
    lines = []
    for filt in (daubechies4(), haar()):
        lines.append(f"[{filt.name}]")
        lines.append("low_pass  " + " ".join(f"{c:.17g}" for c in filt.low_pass))
        lines.append("high_pass " + " ".join(f"{c:.17g}" for c in filt.high_pass))
    return "\n".join(lines)
