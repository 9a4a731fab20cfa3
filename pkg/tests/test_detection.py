import dataclasses

import numpy as np
import pytest

from cosid.audio import Frame, Waveform
from cosid.detection import (
    DetectionConfig,
    FrameVerdict,
    autocorrelation,
    classify_frame,
    extract_usable_segments,
    find_three_maxima,
    merge_usable_runs,
    periodicity_decision,
)
from cosid.wavelet import daubechies4

FS = 16000
CFG = DetectionConfig()
FILTERS = daubechies4()


def harmonic_frame(f0, n=CFG.frame_len, n_harm=5, amp=1.0, rng=None):
    t = np.arange(n) / FS
    x = np.zeros(n)
    for k in range(1, n_harm + 1):
        phase = 0.0 if rng is None else rng.uniform(0, 2 * np.pi)
        x += np.sin(2 * np.pi * f0 * k * t + phase)
    return amp * x


def as_frame(x):
    return Frame(samples=np.asarray(x, dtype=float), start=0,
                 length=len(x), hop=CFG.hop)


class TestAutocorrelation:
    def test_constant_closed_form(self):
        np.testing.assert_allclose(
            autocorrelation([1.0, 1.0, 1.0, 1.0]), [1.0, 0.75, 0.5, 0.25], atol=1e-15
        )

    def test_zero_lag_normalized(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            assert autocorrelation(rng.standard_normal(64))[0] == 1.0

    def test_sine_peaks_near_period_multiples(self):
        period = 40
        t = np.arange(8 * period)
        acf = autocorrelation(np.sin(2 * np.pi * t / period))
        for m in (1, 2, 3):
            lag = m * period
            window = acf[lag - 2 : lag + 3]
            assert np.argmax(window) + lag - 2 in range(lag - 1, lag + 2)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError, match="all-zero"):
            autocorrelation(np.zeros(16))

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            autocorrelation([1.0, 2.0])


class TestFindThreeMaxima:
    def test_sine_period_20(self):
        t = np.arange(512)
        acf = autocorrelation(np.sin(2 * np.pi * t / 20))
        lags = find_three_maxima(acf, 0.3)
        assert len(lags) == 3
        for got, want in zip(lags, (20, 40, 60)):
            assert abs(got - want) <= 1

    def test_monotone_decreasing_has_no_peaks(self):
        acf = np.linspace(1.0, 0.0, 64)
        assert find_three_maxima(acf, 0.3) == []

    def test_white_noise_rarely_offers_three_peaks(self):
        rng = np.random.default_rng(99)
        hits = 0
        for _ in range(1000):
            acf = autocorrelation(rng.standard_normal(256))
            if len(find_three_maxima(acf, 0.3)) == 3:
                hits += 1
        assert hits <= 50  # < 5% of trials

    def test_threshold_filters_candidates(self):
        t = np.arange(512)
        acf = autocorrelation(np.sin(2 * np.pi * t / 20))
        # impossible threshold leaves nothing
        assert find_three_maxima(acf, 0.999) == []

    def test_ascending_order(self):
        t = np.arange(600)
        acf = autocorrelation(np.sin(2 * np.pi * t / 30))
        lags = find_three_maxima(acf, 0.2)
        assert lags == sorted(lags)


class TestPeriodicityDecision:
    def test_exact_harmonicity(self):
        assert periodicity_decision([20, 40, 60], 2) is True

    def test_large_mismatch(self):
        assert periodicity_decision([20, 40, 75], 2) is False

    def test_off_by_one(self):
        assert periodicity_decision([20, 41, 61], 2) is True

    def test_fewer_than_three_lags(self):
        assert periodicity_decision([20, 40], 2) is False
        assert periodicity_decision([], 2) is False


class TestClassifyFrame:
    def test_female_pitch_detected_shallow(self):
        v = classify_frame(as_frame(harmonic_frame(220.0)), FILTERS, CFG)
        assert v.usable and v.detection_scale <= 2

    def test_male_pitch_detected(self):
        v = classify_frame(as_frame(harmonic_frame(110.0)), FILTERS, CFG)
        assert v.usable and v.detection_scale <= 3

    def test_white_noise_mostly_unusable(self):
        rng = np.random.default_rng(7)
        usable = sum(
            classify_frame(as_frame(rng.standard_normal(CFG.frame_len)), FILTERS, CFG).usable
            for _ in range(300)
        )
        assert usable <= 15  # 5%

    def test_silence_is_unusable(self):
        v = classify_frame(as_frame(np.zeros(CFG.frame_len)), FILTERS, CFG)
        assert not v.usable and v.detection_scale is None

    def test_amplitude_invariance(self):
        rng = np.random.default_rng(21)
        for f0 in (95.0, 170.0, 260.0):
            x = harmonic_frame(f0, rng=rng)
            base = classify_frame(as_frame(x), FILTERS, CFG)
            for c in (0.25, 2.0, 3.7, 1e-3):
                v = classify_frame(as_frame(c * x), FILTERS, CFG)
                assert (v.usable, v.detection_scale) == (base.usable, base.detection_scale)

    def test_amp_threshold_monotonicity(self):
        rng = np.random.default_rng(33)
        frames = [harmonic_frame(rng.uniform(80, 300), rng=rng) for _ in range(10)]
        frames += [rng.standard_normal(CFG.frame_len) for _ in range(10)]
        for x in frames:
            lo = classify_frame(as_frame(x), FILTERS, dataclasses.replace(CFG, amp_threshold=0.2))
            hi = classify_frame(as_frame(x), FILTERS, dataclasses.replace(CFG, amp_threshold=0.5))
            if hi.usable:
                assert lo.usable

    def test_scale_ordering(self):
        x = harmonic_frame(110.0)
        v = classify_frame(as_frame(x), FILTERS, CFG)
        assert v.usable
        again = classify_frame(
            as_frame(x), FILTERS, dataclasses.replace(CFG, j_max=v.detection_scale)
        )
        assert (again.usable, again.detection_scale) == (True, v.detection_scale)

    def test_determinism(self):
        rng = np.random.default_rng(4)
        x = harmonic_frame(150.0, rng=rng)
        a = classify_frame(as_frame(x), FILTERS, CFG)
        b = classify_frame(as_frame(x), FILTERS, CFG)
        assert a == b

    def test_bad_length_rejected(self):
        with pytest.raises(ValueError, match="divisible"):
            classify_frame(as_frame(np.ones(1000)), FILTERS, CFG)


def _verdict(i, usable):
    return FrameVerdict(frame_index=i, usable=usable)


class TestMergeRuns:
    def test_short_trailing_run_discarded(self):
        pattern = [True, True, True, False, True, True]
        verdicts = [_verdict(i, u) for i, u in enumerate(pattern)]
        segs = merge_usable_runs(verdicts, 3, CFG.frame_len, CFG.hop)
        assert [(s.start_frame, s.end_frame) for s in segs] == [(0, 2)]

    def test_all_usable_single_segment(self):
        verdicts = [_verdict(i, True) for i in range(10)]
        segs = merge_usable_runs(verdicts, 3, CFG.frame_len, CFG.hop)
        assert [(s.start_frame, s.end_frame) for s in segs] == [(0, 9)]
        assert segs[0].sample_span == (0, 9 * CFG.hop + CFG.frame_len)

    def test_against_run_length_oracle(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            pattern = rng.random(int(rng.integers(1, 60))) < 0.6
            verdicts = [_verdict(i, bool(u)) for i, u in enumerate(pattern)]
            segs = merge_usable_runs(verdicts, 3, CFG.frame_len, CFG.hop)
            expected = []
            start = None
            for i, u in enumerate(pattern):
                if u and start is None:
                    start = i
                if not u and start is not None:
                    if i - start >= 3:
                        expected.append((start, i - 1))
                    start = None
            if start is not None and len(pattern) - start >= 3:
                expected.append((start, len(pattern) - 1))
            assert [(s.start_frame, s.end_frame) for s in segs] == expected

    def test_segment_invariants(self):
        verdicts = [_verdict(i, True) for i in range(5)]
        (seg,) = merge_usable_runs(verdicts, 3, CFG.frame_len, CFG.hop)
        assert seg.n_frames == 5
        assert all(v.usable for v in seg.verdicts)


class TestExtractUsableSegments:
    def test_voiced_and_silence_alternation(self):
        rng = np.random.default_rng(8)
        fs_len = 3 * FS
        x = 1e-4 * rng.standard_normal(fs_len)
        voiced = harmonic_frame(140.0, n=FS, rng=rng)  # 1 s voiced span
        x[8000 : 8000 + FS] += 0.4 * voiced
        w = Waveform(samples=x, sample_rate=FS)
        verdicts, segments = extract_usable_segments(w, FILTERS, CFG)
        assert len(segments) >= 1
        span = segments[0].sample_span
        assert span[0] >= 8000 - CFG.frame_len and span[1] <= 8000 + FS + CFG.frame_len
        assert verdicts == sorted(verdicts, key=lambda v: v.frame_index)

    def test_pure_noise_yields_no_segments(self):
        rng = np.random.default_rng(44)
        w = Waveform(samples=rng.standard_normal(FS), sample_rate=FS)
        _, segments = extract_usable_segments(w, FILTERS, CFG)
        assert segments == []

    def test_determinism(self):
        rng = np.random.default_rng(90)
        x = 0.3 * harmonic_frame(200.0, n=2 * FS, rng=rng) + 1e-3 * rng.standard_normal(2 * FS)
        w = Waveform(samples=x, sample_rate=FS)
        first = extract_usable_segments(w, FILTERS, CFG)
        second = extract_usable_segments(w, FILTERS, CFG)
        assert first == second


class TestDetectionConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            DetectionConfig(amp_threshold=0.0)
        with pytest.raises(ValueError):
            DetectionConfig(lag_threshold=-1)
        with pytest.raises(ValueError):
            DetectionConfig(j_max=0)
        with pytest.raises(ValueError):
            DetectionConfig(min_segment_frames=0)
        with pytest.raises(ValueError):
            DetectionConfig(frame_len=1000, j_max=4)
        with pytest.raises(ValueError):
            DetectionConfig(max_lag_fraction=0.0)
