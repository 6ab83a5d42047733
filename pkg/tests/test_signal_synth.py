import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqmetrics.errors import InvalidSpecError
from sqmetrics.signal_io import P_REF
from sqmetrics.signal_synth import (
    FADE_S,
    AmToneSpec,
    NarrowbandNoiseSpec,
    ToneSpec,
    acum_reference,
    am_tone,
    asper_reference,
    narrowband_noise,
    pure_tone,
    sone_reference,
    vacil_reference,
)


def _steady_level(buf):
    fs = buf.sample_rate
    n = int(round(FADE_S * fs))
    x = buf.pressure[0, n:-n]
    return 20 * math.log10(math.sqrt(np.mean(x * x)) / P_REF)


class TestLevels:
    @given(st.floats(0, 100), st.sampled_from([250.0, 1000.0, 4000.0]))
    def test_tone_level(self, level, fc):
        buf = pure_tone(ToneSpec(fc, level, 0.5))
        assert _steady_level(buf) == pytest.approx(level, abs=0.02)

    @pytest.mark.parametrize("depth", [0.0, 0.25, 0.5, 1.0])
    @pytest.mark.parametrize("fmod", [4.0, 70.0])
    def test_am_level(self, depth, fmod):
        buf = am_tone(AmToneSpec(1000.0, fmod, depth, 60.0, 2.0))
        assert _steady_level(buf) == pytest.approx(60.0, abs=0.05)

    def test_noise_level_and_band(self):
        buf = narrowband_noise(NarrowbandNoiseSpec(1000.0, 140.0, 60.0, 2.0))
        assert _steady_level(buf) == pytest.approx(60.0, abs=0.05)
        X = np.abs(np.fft.rfft(buf.pressure[0])) ** 2
        f = np.fft.rfftfreq(buf.n_frames, 1 / buf.sample_rate)
        inside = X[(f >= 930) & (f <= 1070)].sum()
        assert inside / X.sum() > 0.99


class TestShape:
    def test_depth_zero_am_equals_tone(self):
        a = am_tone(AmToneSpec(1000.0, 70.0, 0.0, 60.0))
        b = pure_tone(ToneSpec(1000.0, 60.0))
        np.testing.assert_array_equal(a.pressure, b.pressure)

    def test_fade_endpoints(self):
        x = sone_reference().pressure[0]
        assert x[0] == 0.0
        assert abs(x[-1]) < 1e-9

    def test_noise_seeded(self):
        a = narrowband_noise(NarrowbandNoiseSpec(1000.0, 140.0, 60.0, seed=3))
        b = narrowband_noise(NarrowbandNoiseSpec(1000.0, 140.0, 60.0, seed=3))
        c = narrowband_noise(NarrowbandNoiseSpec(1000.0, 140.0, 60.0, seed=4))
        np.testing.assert_array_equal(a.pressure, b.pressure)
        assert not np.array_equal(a.pressure, c.pressure)

    def test_references(self):
        for make in (sone_reference, acum_reference, asper_reference, vacil_reference):
            buf = make()
            assert buf.sample_rate == 48000.0 and buf.duration == pytest.approx(2.0)


class TestValidation:
    @pytest.mark.parametrize(
        "make",
        [
            lambda: ToneSpec(30000.0, 60.0),
            lambda: ToneSpec(1000.0, 60.0, duration=0.0),
            lambda: AmToneSpec(1000.0, 70.0, 1.5),
            lambda: AmToneSpec(1000.0, 2000.0),
            lambda: NarrowbandNoiseSpec(1000.0, 0.0, 60.0),
            lambda: NarrowbandNoiseSpec(100.0, 300.0, 60.0),
        ],
    )
    def test_invalid(self, make):
        with pytest.raises(InvalidSpecError):
            make()


class TestSpectralSignature:
    @pytest.mark.parametrize("depth", [0.25, 0.5, 1.0])
    def test_am_sidebands(self, depth):
        buf = am_tone(AmToneSpec(1000.0, 70.0, depth, 60.0, 2.0))
        mag = np.abs(np.fft.rfft(buf.pressure[0]))
        df = buf.sample_rate / buf.n_frames
        carrier = mag[int(round(1000 / df))]
        for f in (930.0, 1070.0):
            assert mag[int(round(f / df))] / carrier == pytest.approx(depth / 2, rel=0.05)
