import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from sqmetrics.errors import EmptyInputError, InvalidSpecError, SignalTooShortError
from sqmetrics.signal_io import BELOW_FLOOR, P_REF, AudioBuffer
from sqmetrics.signal_synth import ToneSpec, pure_tone
from sqmetrics.spectral import (
    LevelObservations,
    SplSeries,
    a_weighting,
    band_set,
    la_eq,
    la_eq_from_series,
    series_to_csv,
    spl_time_series,
    third_octave,
)

levels_st = st.lists(st.floats(0.0, 130.0), min_size=1, max_size=20)


def brute_la_eq(levels, alphas):
    return 10 * math.log10(sum(a * 10 ** (L / 10) for L, a in zip(levels, alphas)))


class TestAWeighting:
    def test_anchor_exact(self):
        assert a_weighting(1000.0) == 0.0

    @pytest.mark.parametrize("f,expected", [(100.0, -19.1), (4000.0, 1.0), (10**1.5, -39.4), (10000.0, -2.5)])
    def test_tabulated(self, f, expected):
        assert a_weighting(f) == pytest.approx(expected, abs=0.1)

    def test_vectorized(self):
        out = a_weighting(np.array([100.0, 1000.0]))
        assert out.shape == (2,) and out[1] == 0.0

    @pytest.mark.parametrize("f", [0.0, -5.0])
    def test_non_positive(self, f):
        with pytest.raises(InvalidSpecError):
            a_weighting(f)


class TestThirdOctave:
    def test_band_set_within_nyquist(self):
        exact, nominal, lo, hi = band_set(16000.0)
        assert nominal[0] == 25 and np.all(hi <= 8000.0)
        np.testing.assert_allclose(lo[1:], hi[:-1])  # contiguous edges

    def test_tone_band_and_leakage(self):
        spec = third_octave(pure_tone(ToneSpec(1000.0, 60.0)))
        i = list(spec.nominal_centers).index(1000.0)
        assert spec.levels[i] == pytest.approx(60.0, abs=0.1)
        side = np.nan_to_num(spec.levels[[i - 1, i + 1]], nan=-np.inf)  # NaN means below floor
        assert np.all(side <= 30.0)

    def test_silence_all_below_floor(self):
        spec = third_octave(AudioBuffer(np.zeros(48000), 48000.0))
        assert spec.below_floor.all()
        assert spec.total_level() is BELOW_FLOOR
        assert "below-floor" in spec.to_csv()

    def test_white_noise_energy(self, rng):
        fs = 48000.0
        x = 0.1 * rng.standard_normal(int(4 * fs))
        spec = third_octave(AudioBuffer(x, fs))
        _, _, lo, hi = band_set(fs)
        # independent oracle: Parseval sum over the covered range of the full-length FFT
        X = np.fft.rfft(x)
        f = np.fft.rfftfreq(x.size, 1 / fs)
        sel = (f >= lo[0]) & (f < hi[-1])
        direct = 2 * np.sum(np.abs(X[sel]) ** 2) / x.size**2
        assert 10 * np.log10(spec.powers.sum() / direct) == pytest.approx(0.0, abs=0.5)

    def test_a_weighting_applied(self):
        tone = pure_tone(ToneSpec(100.0, 70.0))
        z = third_octave(tone, "Z")
        a = third_octave(tone, "A")
        i = list(z.nominal_centers).index(100.0)
        assert z.levels[i] - a.levels[i] == pytest.approx(-a_weighting(z.centers[i]), abs=1e-9)

    def test_too_short(self):
        with pytest.raises(SignalTooShortError):
            third_octave(AudioBuffer(np.zeros(100), 48000.0))

    def test_bad_weighting(self):
        with pytest.raises(InvalidSpecError):
            third_octave(AudioBuffer(np.zeros(48000), 48000.0), "C")


class TestSplSeries:
    def test_count_is_floor(self):
        buf = AudioBuffer(np.zeros(int(48000 * 10.7)), 48000.0)
        assert spl_time_series(buf, 2.0).levels.size == 5

    def test_constant_tone(self):
        s = spl_time_series(pure_tone(ToneSpec(1000.0, 60.0, 4.0)), 1.0)
        finite = s.levels[1:-1]  # end intervals include fades
        assert np.ptp(finite) < 0.05

    def test_step_plateaus(self):
        a = pure_tone(ToneSpec(1000.0, 60.0, 2.0)).pressure[0]
        b = pure_tone(ToneSpec(1000.0, 70.0, 2.0)).pressure[0]
        s = spl_time_series(AudioBuffer(np.concatenate([a, b]), 48000.0), 1.0)
        assert s.levels[2] - s.levels[1] == pytest.approx(10.0, abs=0.2)

    def test_interval_too_long(self):
        with pytest.raises(SignalTooShortError):
            spl_time_series(AudioBuffer(np.zeros(48000), 48000.0), 2.0)

    def test_csv(self):
        text = series_to_csv(SplSeries(30.0, [70.0, np.nan]))
        assert text.splitlines() == ["time_s,level_dba", "0.0000,70.0000", "30.0000,below-floor"]


class TestLaEq:
    @pytest.mark.parametrize(
        "levels,alphas,expected",
        [([80.0], [1.0], 80.0), ([80.0, 70.0], [0.5, 0.5], 77.40), ([70.0] * 3, [0.3] * 3, 69.54)],
    )
    def test_examples(self, levels, alphas, expected):
        assert la_eq(LevelObservations(levels, alphas)) == pytest.approx(expected, abs=0.005)

    @pytest.mark.parametrize(
        "levels,alpha,expected", [([80.0], 1.0, 80.0), ([80.0, 80.0], 1.0, 80.0), ([80.0, 70.0], 0.9, 76.946)]
    )
    def test_from_series(self, levels, alpha, expected):
        out = la_eq_from_series(SplSeries(30.0, levels), alpha)
        assert out.value == pytest.approx(expected, abs=0.005)

    def test_label(self):
        assert la_eq_from_series(SplSeries(30.0, [80.0]), 0.9).label == "LA_eq(90)"

    def test_literal_mode_grows_with_n(self):
        one = la_eq_from_series(SplSeries(30.0, [70.0]), 1.0, "literal").value
        two = la_eq_from_series(SplSeries(30.0, [70.0, 70.0]), 1.0, "literal").value
        assert two - one == pytest.approx(10 * math.log10(2))

    def test_below_floor_readings(self):
        assert la_eq_from_series(SplSeries(30.0, [np.nan, np.nan])).value is BELOW_FLOOR
        half = la_eq_from_series(SplSeries(30.0, [70.0, np.nan]), 1.0).value
        assert half == pytest.approx(70.0 - 10 * math.log10(2))

    def test_invalid(self):
        with pytest.raises(EmptyInputError):
            LevelObservations([], [])
        with pytest.raises(InvalidSpecError):
            LevelObservations([70.0, 70.0], [0.6, 0.6])
        with pytest.raises(InvalidSpecError):
            la_eq_from_series(SplSeries(30.0, [70.0]), 0.0)

    @given(levels_st, st.floats(-50.0, 50.0))
    def test_gain_shift(self, levels, k):
        al = [1.0 / len(levels)] * len(levels)
        base = la_eq(LevelObservations(levels, al))
        assert la_eq(LevelObservations(np.add(levels, k), al)) == pytest.approx(base + k, abs=1e-9)

    @given(levels_st)
    def test_dominance(self, levels):
        al = [1.0 / len(levels)] * len(levels)
        out = la_eq(LevelObservations(levels, al))
        assert out <= max(levels) + 1e-9
        if np.ptp(levels) > 1e-6:
            assert out < max(levels)

    @given(levels_st, st.data())
    def test_monotone(self, levels, data):
        i = data.draw(st.integers(0, len(levels) - 1))
        al = [1.0 / len(levels)] * len(levels)
        bumped = list(levels)
        bumped[i] += 1.0
        assert la_eq(LevelObservations(bumped, al)) > la_eq(LevelObservations(levels, al))

    @given(levels_st)
    def test_matches_brute_force(self, levels):
        al = [0.9 / len(levels)] * len(levels)
        assert la_eq(LevelObservations(levels, al)) == pytest.approx(brute_la_eq(levels, al), abs=1e-9)
