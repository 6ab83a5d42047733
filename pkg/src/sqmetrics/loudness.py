"""Zwicker loudness of stationary sounds from one-third-octave levels.

Implements the DIN 45631 / ISO 532 B procedure for free-field (or diffuse
field) stationary sounds: low-frequency equal-loudness correction of the
bands up to 250 Hz, grouping into 20 approximated critical bands, core
loudness per band, then upper-slope spreading over the critical-band rate.

Time-varying signals are handled by ``loudness_series``, which applies the
stationary procedure to consecutive 0.5 s windows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidSpecError, MissingBandError, SignalTooShortError
from .signal_io import AudioBuffer
from .spectral import NOMINAL_CENTERS, ThirdOctaveSpectrum, third_octave

Z_MAX = 24.0
DEFAULT_DZ = 0.1
WINDOW_S = 0.5

# Tables below follow DIN 45631:1991 / ISO 532-1:2017 Annex A (stationary
# loudness). Band order is the 28 nominal third-octave bands 25 Hz - 12.5 kHz.

# Level ranges for the low-frequency correction (Table A.3).
RAP = np.array([45.0, 55.0, 65.0, 71.0, 80.0, 90.0, 100.0, 120.0])

# Level reduction of the 11 bands 25-250 Hz within each RAP range (Table A.3).
DLL = np.array(
    [
        [-32, -24, -16, -10, -5, 0, -7, -3, 0, -2, 0],
        [-29, -22, -15, -10, -4, 0, -7, -2, 0, -2, 0],
        [-27, -19, -14, -9, -4, 0, -6, -2, 0, -2, 0],
        [-25, -17, -12, -9, -3, 0, -5, -2, 0, -2, 0],
        [-23, -16, -11, -7, -3, 0, -4, -1, 0, -1, 0],
        [-20, -14, -10, -6, -3, 0, -4, -1, 0, -1, 0],
        [-18, -12, -9, -6, -2, 0, -3, -1, 0, -1, 0],
        [-15, -10, -8, -4, -2, 0, -3, -1, 0, -1, 0],
    ],
    dtype=np.float64,
)

# Critical-band level at threshold in quiet (Table A.6).
LTQ = np.array([30, 18, 12, 8, 7, 6, 5, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3], dtype=np.float64)

# Transmission free field -> inner ear (Table A.4).
A0 = np.array(
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -0.5, -1.6, -3.2, -5.4, -5.6, -4.0, -1.5, 2.0, 5.0, 12.0]
)

# Level difference diffuse minus free field (Table A.5).
DDF = np.array(
    [0, 0, 0.5, 0.9, 1.2, 1.6, 2.3, 2.8, 3.0, 2.0, 0, -1.4, -2.0, -1.9, -1.0, 0.5, 3.0, 4.0, 4.3, 4.0]
)

# Third-octave level to critical-band level adaptation (Table A.7).
DCB = np.array(
    [-0.25, -0.6, -0.8, -0.8, -0.5, 0, 0.5, 1.1, 1.5, 1.7, 1.8, 1.8, 1.7, 1.6, 1.4, 1.2, 0.8, 0.5, 0, -0.5]
)

# Upper limits of the approximated critical bands, Bark (Table A.8).
ZUP = np.array(
    [0.9, 1.8, 2.8, 3.5, 4.4, 5.4, 6.6, 7.9, 9.2, 10.6, 12.3, 13.8, 15.2, 16.7, 18.1, 19.3, 20.6,
     21.8, 22.7, 23.6, 24.0]
)

# Specific-loudness ranges selecting the upper-slope steepness (Table A.9).
RNS = np.array(
    [21.5, 18.0, 15.1, 11.5, 9.0, 6.1, 4.4, 3.1, 2.13, 1.36, 0.82, 0.42, 0.30, 0.22, 0.15, 0.10,
     0.035, 0.0]
)

# Upper-slope steepness, sone/Bark per Bark, per range (rows) and critical
# band group (columns) (Table A.9).
USL = np.array(
    [
        [13.00, 8.20, 6.30, 5.50, 5.50, 5.50, 5.50, 5.50],
        [9.00, 7.50, 6.00, 5.10, 4.50, 4.50, 4.50, 4.50],
        [7.80, 6.70, 5.60, 4.90, 4.40, 3.90, 3.90, 3.90],
        [6.20, 5.40, 4.60, 4.00, 3.50, 3.20, 3.20, 3.20],
        [4.50, 3.80, 3.60, 3.20, 2.90, 2.70, 2.70, 2.70],
        [3.70, 3.00, 2.80, 2.35, 2.20, 2.20, 2.20, 2.20],
        [2.90, 2.30, 2.10, 1.90, 1.80, 1.70, 1.70, 1.70],
        [2.40, 1.70, 1.50, 1.35, 1.30, 1.30, 1.30, 1.30],
        [1.95, 1.45, 1.30, 1.15, 1.10, 1.10, 1.10, 1.10],
        [1.50, 1.20, 0.94, 0.86, 0.82, 0.82, 0.82, 0.82],
        [0.72, 0.67, 0.64, 0.63, 0.62, 0.62, 0.62, 0.62],
        [0.59, 0.53, 0.51, 0.50, 0.42, 0.42, 0.42, 0.42],
        [0.40, 0.33, 0.26, 0.24, 0.24, 0.22, 0.22, 0.22],
        [0.27, 0.21, 0.20, 0.18, 0.17, 0.17, 0.17, 0.17],
        [0.16, 0.15, 0.14, 0.12, 0.11, 0.11, 0.11, 0.11],
        [0.12, 0.11, 0.10, 0.08, 0.08, 0.08, 0.08, 0.08],
        [0.09, 0.08, 0.07, 0.06, 0.06, 0.06, 0.06, 0.05],
        [0.06, 0.05, 0.03, 0.02, 0.02, 0.02, 0.02, 0.02],
    ]
)

_REQUIRED = (50.0, 10000.0)  # nominal band range that must be present unless zero-filled


def hz_to_bark(frequency):
    """Critical-band rate (Zwicker & Terhardt approximation), clamped to [0, 24]."""
    f = np.asarray(frequency, dtype=np.float64)
    if np.any(~(f > 0)):
        raise InvalidSpecError("frequency must be positive")
    z = 13.0 * np.arctan(0.00076 * f) + 3.5 * np.arctan((f / 7500.0) ** 2)
    z = np.clip(z, 0.0, Z_MAX)
    return float(z) if z.ndim == 0 else z


def sone_from_phon(phon):
    return 2.0 ** ((np.asarray(phon, dtype=np.float64) - 40.0) / 10.0)


def phon_from_sone(sone):
    s = np.asarray(sone, dtype=np.float64)
    if np.any(~(s > 0)):
        raise InvalidSpecError("loudness must be positive to have a loudness level")
    return 40.0 + 10.0 * np.log2(s)


@dataclass(frozen=True)
class SpecificLoudnessPattern:
    """N'(z) in sone/Bark at the cell midpoints ``(k - 1/2) dz`` tiling [0, 24] Bark."""

    values: np.ndarray
    dz: float = DEFAULT_DZ

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not self.dz > 0:
            raise InvalidSpecError("dz must be positive")
        if v.ndim != 1 or v.size != int(round(Z_MAX / self.dz)):
            raise InvalidSpecError("pattern must have 24/dz samples")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InvalidSpecError("specific loudness must be finite and non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def z(self) -> np.ndarray:
        return bark_grid(self.dz)

    def to_csv(self) -> str:
        rows = ["z_bark,n_prime"]
        rows += [f"{z:.4f},{n:.4f}" for z, n in zip(self.z, self.values)]
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class LoudnessValue:
    sones: float

    def __post_init__(self):
        if not self.sones >= 0:
            raise InvalidSpecError("loudness must be non-negative")

    @property
    def phons(self) -> float | None:
        return float(phon_from_sone(self.sones)) if self.sones > 0 else None


def bark_grid(dz: float = DEFAULT_DZ) -> np.ndarray:
    n = int(round(Z_MAX / dz))
    return dz * (np.arange(n) + 0.5)


def _band_levels(spectrum: ThirdOctaveSpectrum, zero_fill: bool) -> np.ndarray:
    if spectrum.weighting != "Z":
        raise InvalidSpecError("loudness needs an unweighted (Z) spectrum")
    nominal = np.array(NOMINAL_CENTERS, dtype=np.float64)
    levels = np.full(nominal.size, -np.inf)
    have = {float(c): v for c, v in zip(spectrum.nominal_centers, spectrum.levels)}
    missing = []
    for i, c in enumerate(nominal):
        if c in have:
            v = have[c]
            levels[i] = -np.inf if np.isnan(v) else v
        elif _REQUIRED[0] <= c <= _REQUIRED[1]:
            missing.append(c)
    if missing and not zero_fill:
        raise MissingBandError(
            f"spectrum lacks bands {', '.join(f'{c:g}' for c in missing)} Hz; pass zero_fill=True"
        )
    return levels


def core_loudness(levels: np.ndarray, field: str = "free") -> np.ndarray:
    """Core loudness of the 20 approximated critical bands plus a closing zero."""
    if field not in ("free", "diffuse"):
        raise InvalidSpecError("field must be 'free' or 'diffuse'")
    lt = np.asarray(levels, dtype=np.float64)

    # equal-loudness correction of 25-250 Hz, row picked per band from its level
    low = lt[:11]
    rows = np.empty(11, dtype=np.int64)
    for i in range(11):
        j = 0
        while j < RAP.size - 1 and low[i] > RAP[j] - DLL[j, i]:
            j += 1
        rows[i] = j
    with np.errstate(divide="ignore"):
        ti = 10 ** ((low + DLL[rows, np.arange(11)]) / 10)
        lcb = 10 * np.log10([ti[0:6].sum(), ti[6:9].sum(), ti[9:11].sum()])

    le = np.concatenate([lcb, lt[11:28]]) - A0
    if field == "diffuse":
        le = le + DDF
    core = np.zeros(21)
    above = le > LTQ
    le_c = le[above] - DCB[above]
    ltq = LTQ[above]
    core[:20][above] = np.maximum(
        0.0635 * 10 ** (0.025 * ltq) * ((0.75 + 0.25 * 10 ** ((le_c - ltq) / 10)) ** 0.25 - 1.0),
        0.0,
    )
    # threshold dependence within the lowest critical band
    core[0] *= min(0.4 + 0.32 * core[0] ** 0.2, 1.0)
    return core


def pattern_from_core(core: np.ndarray, dz: float = DEFAULT_DZ) -> SpecificLoudnessPattern:
    z0, z1, n0, slope = kernels.loudness_segments(core, ZUP, RNS, USL)
    z = bark_grid(dz)
    k = np.clip(np.searchsorted(z1, z, side="right"), 0, z1.size - 1)
    values = np.maximum(n0[k] - slope[k] * (z - z0[k]), 0.0)
    return SpecificLoudnessPattern(values, dz)


def specific_loudness(
    spectrum: ThirdOctaveSpectrum,
    dz: float = DEFAULT_DZ,
    field: str = "free",
    zero_fill: bool = False,
) -> SpecificLoudnessPattern:
    """Specific loudness pattern of an unweighted third-octave spectrum.

    Bands 25-40 Hz and 12.5 kHz are treated as silent when absent. Any other
    missing band between 50 Hz and 10 kHz raises :class:`MissingBandError`
    unless ``zero_fill`` is set.
    """
    return pattern_from_core(core_loudness(_band_levels(spectrum, zero_fill), field), dz)


def total_loudness(pattern: SpecificLoudnessPattern) -> LoudnessValue:
    """Midpoint-rule integral of N' over the Bark grid."""
    return LoudnessValue(float(np.sum(pattern.values) * pattern.dz))


def stationary_loudness(
    buffer: AudioBuffer, channel: int | str = 0, dz: float = DEFAULT_DZ, field: str = "free"
) -> SpecificLoudnessPattern:
    spectrum = third_octave(buffer, "Z", channel, fmax=12500.0, window_s=WINDOW_S)
    return specific_loudness(spectrum, dz, field, zero_fill=True)


@dataclass(frozen=True)
class LoudnessSeries:
    times: np.ndarray  # window start, s
    patterns: np.ndarray  # (n_windows, 24/dz)
    dz: float = DEFAULT_DZ

    @property
    def sones(self) -> np.ndarray:
        return self.patterns.sum(axis=1) * self.dz

    def pattern(self, i: int) -> SpecificLoudnessPattern:
        return SpecificLoudnessPattern(self.patterns[i], self.dz)

    @property
    def max(self) -> float:
        return float(np.max(self.sones))

    @property
    def mean(self) -> float:
        return float(np.mean(self.sones))

    @property
    def n5(self) -> float:
        """Loudness exceeded in 5 % of the windows."""
        return float(np.percentile(self.sones, 95))


def window_starts(n_frames: int, window: int, hop: int) -> np.ndarray:
    if n_frames < window:
        return np.zeros(0, dtype=np.int64)
    return np.arange(0, n_frames - window + 1, hop, dtype=np.int64)


def loudness_series(
    buffer: AudioBuffer,
    hop: float = 0.5,
    channel: int | str = 0,
    dz: float = DEFAULT_DZ,
    field: str = "free",
) -> LoudnessSeries:
    """Stationary loudness of consecutive 0.5 s windows spaced ``hop`` seconds apart."""
    if not hop > 0:
        raise InvalidSpecError("hop must be positive")
    fs = buffer.sample_rate
    win = int(round(WINDOW_S * fs))
    starts = window_starts(buffer.n_frames, win, max(1, int(round(hop * fs))))
    if starts.size == 0:
        raise SignalTooShortError(f"signal shorter than one {WINDOW_S} s loudness window")
    one = buffer.select(channel)
    patterns = np.empty((starts.size, int(round(Z_MAX / dz))))
    for i, s in enumerate(starts):
        patterns[i] = stationary_loudness(one.segment(s, s + win), 0, dz, field).values
    return LoudnessSeries(starts / fs, patterns, dz)
