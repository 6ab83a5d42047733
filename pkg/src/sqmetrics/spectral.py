"""A-weighting, one-third-octave spectra, interval SPL series and LA_eq.

Spectra are Welch estimates (Hann, 0.5 s segments, 50 % overlap); band power
is the PSD integrated over the FFT bins falling in ``[fm 2**-1/6, fm 2**1/6)``.
Exact band centres are ``1000 * 2**(k/3)`` so the band edges tile without gaps;
nominal IEC labels are kept for display and export.
"""
from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import welch

from . import kernels
from .errors import EmptyInputError, InvalidSpecError, SignalTooShortError
from .signal_io import BELOW_FLOOR, P_REF, AudioBuffer, Floor

NOMINAL_CENTERS = (
    25, 31.5, 40, 50, 63, 80, 100, 125, 160, 200, 250, 315, 400, 500, 630, 800,
    1000, 1250, 1600, 2000, 2500, 3150, 4000, 5000, 6300, 8000, 10000, 12500,
)
_BAND_INDEX = tuple(range(-16, 12))  # k in 1000 * 2**(k/3)

WINDOW_S = 0.5
OVERLAP = 0.5


def _ra(f):
    f2 = np.square(f)
    return (12194.0**2 * f2 * f2) / (
        (f2 + 20.6**2) * np.sqrt((f2 + 107.7**2) * (f2 + 737.9**2)) * (f2 + 12194.0**2)
    )


def a_weighting(frequency):
    """A-weighting correction in dB, normalized to exactly 0 dB at 1 kHz."""
    f = np.asarray(frequency, dtype=np.float64)
    if np.any(~(f > 0)):
        raise InvalidSpecError("frequency must be positive")
    out = 20.0 * np.log10(_ra(f) / _ra(1000.0))
    out = np.where(f == 1000.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ThirdOctaveSpectrum:
    """Band levels in dB; NaN marks a band whose power is below (20 uPa)^2."""

    centers: np.ndarray
    nominal_centers: np.ndarray
    levels: np.ndarray
    weighting: str = "Z"

    def __post_init__(self):
        if self.weighting not in ("Z", "A"):
            raise InvalidSpecError("weighting must be 'Z' or 'A'")
        c = np.asarray(self.centers, dtype=np.float64)
        lv = np.asarray(self.levels, dtype=np.float64)
        if c.shape != lv.shape or np.any(np.diff(c) <= 0):
            raise InvalidSpecError("centers must be strictly increasing, one level each")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "nominal_centers", np.asarray(self.nominal_centers, dtype=np.float64))

    @property
    def below_floor(self) -> np.ndarray:
        return np.isnan(self.levels)

    @property
    def powers(self) -> np.ndarray:
        """Band mean-square pressure in Pa^2 (zero for below-floor bands)."""
        return np.where(self.below_floor, 0.0, P_REF**2 * 10 ** (np.nan_to_num(self.levels) / 10))

    def total_level(self) -> float | Floor:
        total = float(np.sum(self.powers))
        return 10 * math.log10(total / P_REF**2) if total >= P_REF**2 else BELOW_FLOOR

    def to_dict(self) -> dict:
        return {
            "weighting": self.weighting,
            "bands": [
                {"center_hz": float(c), "level_db": None if np.isnan(v) else round(float(v), 4)}
                for c, v in zip(self.nominal_centers, self.levels)
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("center_hz,level_db\n")
        for c, v in zip(self.nominal_centers, self.levels):
            buf.write(f"{c:g},{'below-floor' if np.isnan(v) else f'{v:.4f}'}\n")
        return buf.getvalue()


def band_set(sample_rate: float, fmin: float = 25.0, fmax: float = 10000.0):
    """Exact centres, nominal centres and edges of bands below Nyquist."""
    k = np.array(_BAND_INDEX)
    nominal = np.array(NOMINAL_CENTERS, dtype=np.float64)
    exact = 1000.0 * 2.0 ** (k / 3.0)
    upper = exact * 2 ** (1 / 6)
    keep = (nominal >= fmin) & (nominal <= fmax) & (upper <= sample_rate / 2)
    return exact[keep], nominal[keep], exact[keep] * 2 ** (-1 / 6), upper[keep]


@functools.lru_cache(maxsize=64)
def _bin_map(nperseg: int, sample_rate: float, fmin: float, fmax: float):
    exact, nominal, lo, hi = band_set(sample_rate, fmin, fmax)
    f = np.fft.rfftfreq(nperseg, 1.0 / sample_rate)
    idx = np.searchsorted(lo, f, side="right") - 1
    valid = (idx >= 0) & (f < hi[np.clip(idx, 0, None)])
    idx = np.where(valid, idx, -1).astype(np.int64)
    idx.setflags(write=False)
    return exact, nominal, idx


def third_octave(
    buffer: AudioBuffer,
    weighting: str = "Z",
    channel: int | str = 0,
    fmin: float = 25.0,
    fmax: float = 10000.0,
    window_s: float = WINDOW_S,
) -> ThirdOctaveSpectrum:
    """One-third-octave band levels of one channel."""
    if weighting not in ("Z", "A"):
        raise InvalidSpecError("weighting must be 'Z' or 'A'")
    x = buffer.channel(channel)
    fs = buffer.sample_rate
    nper = int(round(window_s * fs))
    if x.size < nper:
        raise SignalTooShortError(
            f"{x.size / fs:.3f} s is shorter than one {window_s} s analysis window"
        )
    f, psd = welch(
        x, fs=fs, window="hann", nperseg=nper, noverlap=int(nper * OVERLAP),
        detrend=False, scaling="density",
    )
    exact, nominal, idx = _bin_map(nper, float(fs), float(fmin), float(fmax))
    power = kernels.band_powers(psd * (f[1] - f[0]), idx, exact.size)
    if weighting == "A":
        power = power * 10 ** (a_weighting(exact) / 10)
    with np.errstate(divide="ignore"):
        levels = 10 * np.log10(power / P_REF**2)
    levels[power < P_REF**2] = np.nan
    return ThirdOctaveSpectrum(exact, nominal, levels, weighting)


@dataclass(frozen=True)
class SplSeries:
    """A-weighted level per consecutive interval; NaN marks below-floor intervals."""

    interval: float
    levels: np.ndarray
    start: float = 0.0

    def __post_init__(self):
        if not self.interval > 0:
            raise InvalidSpecError("interval must be positive")
        object.__setattr__(self, "levels", np.asarray(self.levels, dtype=np.float64))

    @property
    def times(self) -> np.ndarray:
        return self.start + self.interval * np.arange(self.levels.size)


def spl_time_series(buffer: AudioBuffer, interval: float, channel: int | str = 0) -> SplSeries:
    if not interval > 0:
        raise InvalidSpecError("interval must be positive")
    step = int(round(interval * buffer.sample_rate))
    count = buffer.n_frames // step if step > 0 else 0
    if count < 1:
        raise SignalTooShortError(
            f"interval {interval} s is longer than the {buffer.duration:.3f} s signal"
        )
    one = buffer.select(channel)
    levels = np.empty(count)
    for i in range(count):
        spec = third_octave(one.segment(i * step, (i + 1) * step), "A")
        total = spec.total_level()
        levels[i] = np.nan if total is BELOW_FLOOR else total
    return SplSeries(float(interval), levels)


@dataclass(frozen=True)
class LevelObservations:
    """Levels ``L_i`` in dB with time fractions ``alpha_i``."""

    levels: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        lv = np.atleast_1d(np.asarray(self.levels, dtype=np.float64))
        al = np.atleast_1d(np.asarray(self.alphas, dtype=np.float64))
        if lv.size == 0:
            raise EmptyInputError("at least one observation required")
        if lv.shape != al.shape:
            raise InvalidSpecError("one alpha per level required")
        if not np.all(np.isfinite(lv)):
            raise InvalidSpecError("levels must be finite")
        if np.any((al <= 0) | (al > 1)) or al.sum() > 1 + 1e-9:
            raise InvalidSpecError("alphas must lie in (0, 1] and sum to at most 1")
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "alphas", al)

    @property
    def count(self) -> int:
        return self.levels.size


def _energy_level(levels: np.ndarray, alphas: np.ndarray) -> float:
    # factor out the maximum so 10**(L/10) never overflows
    top = float(np.max(levels))
    return top + 10 * math.log10(float(np.sum(alphas * 10 ** ((levels - top) / 10))))


def la_eq(obs: LevelObservations) -> float:
    """``10 log10(sum alpha_i 10**(L_i/10))``."""
    return _energy_level(obs.levels, obs.alphas)


class LabeledLevel(NamedTuple):
    value: float | Floor
    label: str


def la_eq_label(alpha: float) -> str:
    return f"LA_eq({alpha * 100:g})"


def la_eq_from_series(series: SplSeries, alpha: float = 0.9, mode: str = "normalized") -> LabeledLevel:
    """Equivalent level over interval readings.

    ``mode="normalized"`` weights each of the ``n`` readings by ``alpha / n``;
    ``mode="literal"`` weights every reading by ``alpha`` (the sum then grows
    with ``n``). Below-floor readings count towards ``n`` but carry no energy.
    """
    if not 0 < alpha <= 1:
        raise InvalidSpecError("alpha must lie in (0, 1]")
    if mode not in ("normalized", "literal"):
        raise InvalidSpecError("mode must be 'normalized' or 'literal'")
    n = series.levels.size
    if n == 0:
        raise EmptyInputError("empty SPL series")
    label = la_eq_label(alpha)
    finite = series.levels[~np.isnan(series.levels)]
    if finite.size == 0:
        return LabeledLevel(BELOW_FLOOR, label)
    if mode == "literal":
        return LabeledLevel(_energy_level(finite, np.full(finite.size, alpha)), label)
    obs = LevelObservations(finite, np.full(finite.size, alpha / n))
    return LabeledLevel(la_eq(obs), label)


def series_to_csv(series: SplSeries) -> str:
    lines = ["time_s,level_dba"]
    for t, v in zip(series.times, series.levels):
        lines.append(f"{t:.4f},{'below-floor' if np.isnan(v) else f'{v:.4f}'}")
    return "\n".join(lines) + "\n"

