"""Two-speaker mixture construction at a commanded target-to-interferer
energy ratio, keeping the aligned scaled components as ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform, signal_energy


@dataclass(frozen=True)
class MixtureSpec:
    target: Waveform
    interferer: Waveform
    tir_db: float
    seed: int = 0  # reserved for randomized alignment choices
    target_id: str = "target"
    interferer_id: str = "interferer"


@dataclass(frozen=True)
class MixtureTruth:
    mixture: Waveform
    scaled_target: Waveform
    scaled_interferer: Waveform
    gain_applied: float  # gain put on the interferer to hit the ratio
    joint_norm_factor: float  # common factor applied to keep |mixture| <= 1
    target_id: str
    interferer_id: str
    truncated_length: int


def truncate_align(a: Waveform, b: Waveform):
    """Trim both waveforms to the shorter length, from sample 0."""
    n = min(len(a.samples), len(b.samples))
    if n == 0:
        raise ValueError("cannot align an empty waveform")
    if len(a.samples) == n and len(b.samples) == n:
        return a, b
    return (
        Waveform(samples=a.samples[:n], sample_rate=a.sample_rate),
        Waveform(samples=b.samples[:n], sample_rate=b.sample_rate),
    )


def measured_tir_db(truth: MixtureTruth) -> float:
    return 10.0 * np.log10(
        signal_energy(truth.scaled_target.samples)
        / signal_energy(truth.scaled_interferer.samples)
    )


def mix_at_tir(spec: MixtureSpec) -> MixtureTruth:
    """Scale the interferer so target/interferer energy hits tir_db, then
    add. If the sum would clip, both components are jointly peak
    normalized (a common gain cancels in the ratio, so the TIR is
    untouched). The mixture is always the exact sample-wise sum of the
    returned components."""
    if spec.target.sample_rate != spec.interferer.sample_rate:
        raise ValueError("sample rates differ")
    target, interferer = truncate_align(spec.target, spec.interferer)
    e_t = signal_energy(target.samples)
    e_i = signal_energy(interferer.samples)
    if e_t == 0.0 or e_i == 0.0:
        raise ValueError("zero-energy input")
    gain = float(np.sqrt(e_t / (e_i * 10.0 ** (spec.tir_db / 10.0))))

    scaled_t = np.asarray(target.samples, dtype=np.float64)
    scaled_i = gain * np.asarray(interferer.samples, dtype=np.float64)
    peak = float(np.max(np.abs(scaled_t + scaled_i)))
    factor = 1.0
    if peak > 1.0:
        factor = 1.0 / peak
        scaled_t = factor * scaled_t
        scaled_i = factor * scaled_i
    mixture = scaled_t + scaled_i

    rate = target.sample_rate
    return MixtureTruth(
        mixture=Waveform(samples=mixture, sample_rate=rate),
        scaled_target=Waveform(samples=scaled_t, sample_rate=rate),
        scaled_interferer=Waveform(samples=scaled_i, sample_rate=rate),
        gain_applied=gain,
        joint_norm_factor=factor,
        target_id=spec.target_id,
        interferer_id=spec.interferer_id,
        truncated_length=len(target.samples),
    )


def write_sidecar(truth: MixtureTruth, tir_db: float, path) -> None:
    """key=value metadata next to a saved mixture WAV."""
    lines = [
        f"target_id={truth.target_id}",
        f"interferer_id={truth.interferer_id}",
        f"tir_db={tir_db:.17g}",
        f"gain_applied={truth.gain_applied:.17g}",
        f"joint_norm_factor={truth.joint_norm_factor:.17g}",
        f"truncated_length={truth.truncated_length}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
