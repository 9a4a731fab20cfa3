import numpy as np
import pytest

from cosid.audio import signal_energy
from cosid.wavelet import (
    WaveletFilters,
    approximation_at_scale,
    daubechies4,
    decompose,
    dump_filters,
    dwt_step,
    haar,
)

SQRT2 = np.sqrt(2.0)


@pytest.mark.parametrize("filters", [haar(), daubechies4()], ids=["haar", "db4"])
class TestFilterInvariants:
    def test_orthonormal_pair(self, filters):
        total = np.sum(filters.low_pass**2) + np.sum(filters.high_pass**2)
        assert total == pytest.approx(2.0, abs=1e-10)

    def test_quadrature_mirror(self, filters):
        low, high = filters.low_pass, filters.high_pass
        n = len(low)
        for k in range(n):
            assert high[k] == pytest.approx((-1) ** k * low[n - 1 - k], abs=0)

    def test_even_equal_lengths(self, filters):
        assert len(filters.low_pass) == len(filters.high_pass)
        assert len(filters.low_pass) % 2 == 0


class TestDwtStep:
    def test_haar_constant_signal(self):
        a, d = dwt_step(np.ones(4), haar())
        np.testing.assert_allclose(a, [SQRT2, SQRT2], atol=1e-15)
        np.testing.assert_allclose(d, [0.0, 0.0], atol=1e-15)

    def test_haar_nyquist_alternation(self):
        a, d = dwt_step(np.array([1.0, -1.0, 1.0, -1.0]), haar())
        np.testing.assert_allclose(a, [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(d, [SQRT2, SQRT2], atol=1e-15)

    @pytest.mark.parametrize("filters", [haar(), daubechies4()], ids=["haar", "db4"])
    def test_parseval_on_random_signals(self, filters):
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = rng.standard_normal(int(rng.choice([64, 128, 512])))
            a, d = dwt_step(x, filters)
            assert len(a) == len(d) == len(x) // 2
            assert signal_energy(a) + signal_energy(d) == pytest.approx(
                signal_energy(x), rel=1e-9
            )

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError, match="even"):
            dwt_step(np.zeros(7), haar())

    def test_too_short_rejected(self):
        with pytest.raises(ValueError, match="shorter"):
            dwt_step(np.zeros(4), daubechies4())

    def test_linearity(self):
        rng = np.random.default_rng(5)
        x, y = rng.standard_normal(64), rng.standard_normal(64)
        filters = daubechies4()
        ax, _ = dwt_step(x, filters)
        ay, _ = dwt_step(y, filters)
        a_mix, _ = dwt_step(2.5 * x - 0.75 * y, filters)
        np.testing.assert_allclose(a_mix, 2.5 * ax - 0.75 * ay, atol=1e-10)


class TestApproximationAtScale:
    def test_haar_dc_gain_per_level(self):
        c = 0.37
        for j in (1, 2, 3, 4):
            approx = approximation_at_scale(np.full(64, c), j, haar())
            np.testing.assert_allclose(approx, c * SQRT2**j, rtol=1e-12)

    def test_length_arithmetic(self):
        approx = approximation_at_scale(np.zeros(512), 4, daubechies4())
        assert len(approx) == 32

    def test_composition_matches_two_steps(self):
        rng = np.random.default_rng(13)
        x = rng.standard_normal(128)
        filters = daubechies4()
        a1, _ = dwt_step(x, filters)
        a2, _ = dwt_step(a1, filters)
        np.testing.assert_array_equal(approximation_at_scale(x, 2, filters), a2)

    def test_divisibility_enforced(self):
        with pytest.raises(ValueError, match="divisible"):
            approximation_at_scale(np.zeros(100), 3, haar())

    def test_low_frequency_energy_retention(self):
        # 200 Hz sine at 16 kHz, scale 3 keeps the 0-1000 Hz band
        t = np.arange(512) / 16000
        x = np.sin(2 * np.pi * 200 * t)
        a3 = approximation_at_scale(x, 3, daubechies4())
        assert signal_energy(a3) >= 0.9 * signal_energy(x)


class TestDecompose:
    def test_scales_and_lengths(self):
        rng = np.random.default_rng(17)
        x = rng.standard_normal(512)
        levels = decompose(x, 4, daubechies4())
        assert [lv.scale for lv in levels] == [1, 2, 3, 4]
        assert [len(lv.approximation) for lv in levels] == [256, 128, 64, 32]
        for lv in levels:
            assert len(lv.detail) == len(lv.approximation)

    def test_matches_approximation_at_scale(self):
        rng = np.random.default_rng(19)
        x = rng.standard_normal(256)
        filters = haar()
        levels = decompose(x, 3, filters)
        for lv in levels:
            np.testing.assert_array_equal(
                lv.approximation, approximation_at_scale(x, lv.scale, filters)
            )


def test_from_low_pass_rejects_odd_length():
    with pytest.raises(ValueError, match="even"):
        WaveletFilters.from_low_pass("bad", [1.0, 0.5, 0.25])


def test_dump_filters_precision():
    text = dump_filters()
    assert "[db4]" in text and "[haar]" in text
    assert "0.23037781330885523" in text
    assert "0.70710678118654746" in text
