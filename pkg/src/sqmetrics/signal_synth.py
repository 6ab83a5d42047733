"""Reference stimuli for the psychoacoustic units.

All generators return a single-channel :class:`AudioBuffer` in pascal with a
10 ms raised-cosine fade at both ends. Levels are set on the steady-state
part of the signal, so the fades lower the whole-file RMS by a few
hundredths of a dB.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError
from .signal_io import P_REF, AudioBuffer

DEFAULT_DURATION = 2.0
DEFAULT_SAMPLE_RATE = 48000.0
FADE_S = 0.010


def _check_common(duration, sample_rate):
    if not duration > 0:
        raise InvalidSpecError("duration must be positive")
    if not sample_rate > 0:
        raise InvalidSpecError("sample_rate must be positive")
    if int(round(duration * sample_rate)) < 2:
        raise InvalidSpecError("duration shorter than two samples")


@dataclass(frozen=True)
class ToneSpec:
    carrier_frequency: float
    level: float
    duration: float = DEFAULT_DURATION
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        _check_common(self.duration, self.sample_rate)
        if not 0 < self.carrier_frequency < self.sample_rate / 2:
            raise InvalidSpecError("carrier frequency must lie in (0, Nyquist)")


@dataclass(frozen=True)
class AmToneSpec:
    carrier_frequency: float
    modulation_frequency: float
    modulation_depth: float = 1.0
    level: float = 60.0
    duration: float = DEFAULT_DURATION
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        ToneSpec(self.carrier_frequency, self.level, self.duration, self.sample_rate)
        if not 0 < self.modulation_frequency < self.carrier_frequency:
            raise InvalidSpecError("modulation frequency must lie in (0, carrier)")
        if not 0.0 <= self.modulation_depth <= 1.0:
            raise InvalidSpecError("modulation depth must lie in [0, 1]")


@dataclass(frozen=True)
class NarrowbandNoiseSpec:
    center_frequency: float
    bandwidth: float
    level: float
    duration: float = DEFAULT_DURATION
    sample_rate: float = DEFAULT_SAMPLE_RATE
    seed: int = 0

    def __post_init__(self):
        _check_common(self.duration, self.sample_rate)
        if not self.bandwidth > 0:
            raise InvalidSpecError("bandwidth must be positive")
        lo = self.center_frequency - self.bandwidth / 2
        hi = self.center_frequency + self.bandwidth / 2
        if not (lo > 0 and hi < self.sample_rate / 2):
            raise InvalidSpecError("noise band must lie inside (0, Nyquist)")


def fade(x: np.ndarray, sample_rate: float, fade_s: float = FADE_S) -> np.ndarray:
    """Apply raised-cosine fade-in and fade-out in place and return ``x``."""
    n = min(int(round(fade_s * sample_rate)), x.size // 2)
    if n > 0:
        ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(n) / n)
        x[:n] *= ramp
        x[x.size - n :] *= ramp[::-1]
    return x


def _modulated(fc, fmod, depth, level, duration, fs):
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    p_rms = P_REF * 10 ** (level / 20)
    # RMS of A(1 + m sin)(sin) is A * sqrt((1 + m^2/2) / 2)
    amp = p_rms * np.sqrt(2.0 / (1.0 + depth * depth / 2.0))
    envelope = 1.0 + depth * np.sin(2 * np.pi * fmod * t)
    x = amp * envelope * np.sin(2 * np.pi * fc * t)
    return fade(x, fs)


def pure_tone(spec: ToneSpec) -> AudioBuffer:
    x = _modulated(spec.carrier_frequency, 0.0, 0.0, spec.level, spec.duration, spec.sample_rate)
    return AudioBuffer(x, spec.sample_rate)


def am_tone(spec: AmToneSpec) -> AudioBuffer:
    """``A (1 + m sin 2pi fmod t) sin 2pi fc t`` with A set from the target RMS."""
    x = _modulated(
        spec.carrier_frequency,
        spec.modulation_frequency,
        spec.modulation_depth,
        spec.level,
        spec.duration,
        spec.sample_rate,
    )
    return AudioBuffer(x, spec.sample_rate)


def narrowband_noise(spec: NarrowbandNoiseSpec) -> AudioBuffer:
    """Gaussian noise band-limited by zeroing FFT bins outside the band."""
    fs = spec.sample_rate
    n = int(round(spec.duration * fs))
    rng = np.random.default_rng(spec.seed)
    X = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / fs)
    lo = spec.center_frequency - spec.bandwidth / 2
    hi = spec.center_frequency + spec.bandwidth / 2
    X[(f < lo) | (f > hi)] = 0.0
    x = np.fft.irfft(X, n=n)
    rms = np.sqrt(np.mean(x * x))
    if not rms > 0:
        raise InvalidSpecError("noise band contains no FFT bins at this duration")
    x *= P_REF * 10 ** (spec.level / 20) / rms
    return AudioBuffer(fade(x, fs), fs)


# Unit-defining stimuli.
def sone_reference(**kw) -> AudioBuffer:
    return pure_tone(ToneSpec(1000.0, 40.0, **kw))


def acum_reference(**kw) -> AudioBuffer:
    return narrowband_noise(NarrowbandNoiseSpec(1000.0, 140.0, 60.0, **kw))


def asper_reference(**kw) -> AudioBuffer:
    return am_tone(AmToneSpec(1000.0, 70.0, 1.0, 60.0, **kw))


def vacil_reference(**kw) -> AudioBuffer:
    return am_tone(AmToneSpec(1000.0, 4.0, 1.0, 60.0, **kw))
