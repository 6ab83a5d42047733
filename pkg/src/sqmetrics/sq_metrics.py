"""Sharpness, roughness and fluctuation strength.

Roughness and fluctuation strength work on a :class:`ModulationPattern`: for
each of the 24 one-Bark critical bands the dominant envelope modulation
frequency ``f_mod`` and the envelope excursion ``delta_l`` (dB between the
95th and 5th envelope percentiles).

Band envelopes come from single-sided FFT masking of the whole signal, which
gives the analytic signal of the band directly; the band is shifted to
baseband and resynthesized at a reduced rate since only its magnitude is used.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len

from .errors import InvalidSpecError, SignalTooShortError, UndefinedSharpnessError
from .loudness import SpecificLoudnessPattern, hz_to_bark
from .signal_io import P_REF, AudioBuffer

# Zwicker critical-band edges, Hz (24 bands of 1 Bark).
CRITICAL_BAND_EDGES = np.array(
    [0, 100, 200, 300, 400, 510, 630, 770, 920, 1080, 1270, 1480, 1720, 2000, 2320, 2700,
     3150, 3700, 4400, 5300, 6400, 7700, 9500, 12000, 15500],
    dtype=np.float64,
)

ROUGHNESS_BAND = (20.0, 300.0)
FLUCTUATION_BAND = (0.5, 20.0)
ENVELOPE_RATE = 2000.0  # Hz, minimum rate of the resynthesized band envelope
SPECTRUM_RESOLUTION = 0.05  # Hz, zero-padded envelope spectrum
EDGE_TRIM_S = 0.05
LOWER_SLOPE_DB = 27.0  # excitation spreading towards lower bands, dB/Bark

# Calibration constants: each makes its unit-defining stimulus (1 kHz, 60 dB,
# 100 % AM at 70 Hz / 4 Hz, 2 s at 48 kHz) come out at exactly one unit.
# Reproduce with ``derive_calibration()``; the test suite checks they agree.
CAL_ROUGHNESS = 3.27628e-04
CAL_FLUCTUATION = 5.57283
CAL_FLUCTUATION_LITERAL = 1.39324


@functools.lru_cache(maxsize=None)
def sharpness_boundary(boundary_hz: float = 3000.0) -> float:
    return hz_to_bark(boundary_hz)


@dataclass(frozen=True)
class SharpnessConfig:
    scale: float = 0.11
    boundary_hz: float = 3000.0

    def weighting(self, z: np.ndarray) -> np.ndarray:
        """g(z): 1 below the boundary band rate, 4 above it."""
        return np.where(np.asarray(z) < sharpness_boundary(self.boundary_hz), 1.0, 4.0)


@dataclass(frozen=True)
class RoughnessConfig:
    cal: float = CAL_ROUGHNESS
    band: tuple[float, float] = ROUGHNESS_BAND

    def __post_init__(self):
        if not self.cal > 0:
            raise InvalidSpecError("roughness calibration factor must be positive")
        if not 0 < self.band[0] < self.band[1]:
            raise InvalidSpecError("modulation band limits must be positive and ordered")


@dataclass(frozen=True)
class FluctuationConfig:
    """``mode="standard"`` drops the f_mod factor from the numerator; ``"literal"`` keeps it."""

    mode: str = "standard"
    scale: float = 0.008
    cal: float | None = None
    band: tuple[float, float] = FLUCTUATION_BAND

    def __post_init__(self):
        if self.mode not in ("standard", "literal"):
            raise InvalidSpecError("fluctuation mode must be 'standard' or 'literal'")
        if self.cal is None:
            default = CAL_FLUCTUATION if self.mode == "standard" else CAL_FLUCTUATION_LITERAL
            object.__setattr__(self, "cal", default)
        if not self.cal > 0:
            raise InvalidSpecError("fluctuation calibration factor must be positive")
        if not 0 < self.band[0] < self.band[1]:
            raise InvalidSpecError("modulation band limits must be positive and ordered")


def sharpness(pattern: SpecificLoudnessPattern, cfg: SharpnessConfig = SharpnessConfig()) -> float:
    """Sharpness in acum: ``scale * sum(N' g z) / sum(N')`` over the Bark grid."""
    n = pattern.values
    total = float(np.sum(n))
    if not total > 0:
        raise UndefinedSharpnessError("sharpness is undefined for zero loudness")
    z = pattern.z
    return cfg.scale * float(np.sum(n * cfg.weighting(z) * z)) / total


@dataclass(frozen=True)
class ModulationPattern:
    """Per-band modulation frequency (Hz), masking depth (dB) and band power weight."""

    f_mod: np.ndarray
    delta_l: np.ndarray
    weight: np.ndarray = field(default=None)
    dz: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.f_mod, dtype=np.float64)
        d = np.asarray(self.delta_l, dtype=np.float64)
        w = np.ones_like(f) if self.weight is None else np.asarray(self.weight, dtype=np.float64)
        if f.shape != d.shape or f.shape != w.shape or f.ndim != 1:
            raise InvalidSpecError("f_mod, delta_l and weight must be equal-length vectors")
        if np.any(~np.isfinite(f)) or np.any(f < 0) or np.any(~np.isfinite(d)) or np.any(d < 0):
            raise InvalidSpecError("f_mod and delta_l must be finite and non-negative")
        object.__setattr__(self, "f_mod", f)
        object.__setattr__(self, "delta_l", d)
        object.__setattr__(self, "weight", w)

    @property
    def z(self) -> np.ndarray:
        return self.dz * (np.arange(self.f_mod.size) + 0.5)

    def to_csv(self) -> str:
        rows = ["z_bark,f_mod_hz,delta_l_db"]
        rows += [f"{z:.4f},{f:.4f},{d:.4f}" for z, f, d in zip(self.z, self.f_mod, self.delta_l)]
        return "\n".join(rows) + "\n"


def masking_depth(envelope: np.ndarray) -> float:
    """``20 log10(p95 / p5)`` of a band envelope, capped at 100 dB."""
    lo, hi = np.percentile(envelope, [5.0, 95.0])
    if not hi > 0:
        return 0.0
    return float(20.0 * np.log10(hi / max(lo, hi * 1e-5)))


def _dominant_frequency(envelope: np.ndarray, rate: float, lo: float, hi: float) -> float:
    e = (envelope - envelope.mean()) * np.hanning(envelope.size)
    n_fft = next_fast_len(max(envelope.size, int(np.ceil(rate / SPECTRUM_RESOLUTION))))
    mag = np.abs(np.fft.rfft(e, n_fft))
    f = np.fft.rfftfreq(n_fft, 1.0 / rate)
    sel = np.flatnonzero((f >= lo) & (f <= hi))
    if sel.size == 0:
        return 0.0
    k = sel[np.argmax(mag[sel])]
    if 0 < k < mag.size - 1:
        a, b, c = mag[k - 1], mag[k], mag[k + 1]
        den = a - 2 * b + c
        if den < 0:
            return float(f[k] + 0.5 * (a - c) / den * (f[1] - f[0]))
    return float(f[k])


def audible_bands(power: np.ndarray, sample_rate: float) -> np.ndarray:
    """Bands above 0 dB SPL and above the spread excitation of every other band.

    Spreading is 27 dB/Bark towards lower bands and ``24 + 0.23/f_kHz - 0.2 L``
    dB/Bark towards higher bands. A masked band has no perceivable envelope.
    """
    n = power.size
    edges = CRITICAL_BAND_EDGES[: n + 1].copy()
    edges[-1] = min(edges[-1], sample_rate / 2)
    centre_khz = np.sqrt(np.maximum(edges[:-1], 50.0) * edges[1:]) / 1000.0
    z = np.arange(n, dtype=np.float64)
    dz = z[:, None] - z[None, :]  # masked band (row) minus masker (column)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        level = 10 * np.log10(power / P_REF**2)
        upper = np.maximum(24.0 + 0.23 / centre_khz - 0.2 * level, 0.0)[None, :]
        spread = np.where(dz > 0, upper * dz, -LOWER_SLOPE_DB * dz)
        threshold = level[None, :] - spread
    np.fill_diagonal(threshold, -np.inf)
    threshold = np.where(np.isnan(threshold), -np.inf, threshold)
    return (level >= 0.0) & (level > threshold.max(axis=1))


def detectable_range(duration: float, fmod_range: tuple[float, float] | None = None):
    """Modulation band resolvable with at least two periods in ``duration``."""
    floor = 2.0 / duration
    if fmod_range is None:
        lo, hi = max(FLUCTUATION_BAND[0], floor), ROUGHNESS_BAND[1]
        if lo >= hi:
            raise SignalTooShortError(f"{duration:.3f} s cannot resolve any modulation")
        return lo, hi
    lo, hi = fmod_range
    if not 0 < lo < hi:
        raise InvalidSpecError("modulation range must be positive and ordered")
    if lo < floor:
        raise SignalTooShortError(
            f"{duration:.3f} s resolves modulation down to {floor:.3g} Hz, {lo:g} Hz requested"
        )
    return lo, hi


def extract_modulation(
    buffer: AudioBuffer,
    channel: int | str = 0,
    fmod_range: tuple[float, float] | None = None,
) -> ModulationPattern:
    """Per-critical-band modulation frequency and masking depth of one channel.

    With ``fmod_range=None`` the search band is [0.5, 300] Hz, raised at the
    low end to two periods per signal duration. An explicit range that the
    signal is too short to resolve raises :class:`SignalTooShortError`.
    """
    x = buffer.channel(channel)
    fs = buffer.sample_rate
    n = x.size
    duration = n / fs
    lo_mod, hi_mod = detectable_range(duration, fmod_range)

    X = np.fft.rfft(x)
    f = np.fft.rfftfreq(n, 1.0 / fs)
    n_bands = CRITICAL_BAND_EDGES.size - 1
    fmod = np.zeros(n_bands)
    depth = np.zeros(n_bands)
    power = np.zeros(n_bands)
    spans = []
    for b in range(n_bands):
        lo, hi = CRITICAL_BAND_EDGES[b], min(CRITICAL_BAND_EDGES[b + 1], fs / 2)
        sel = np.flatnonzero((f >= lo) & (f < hi) & (f > 0))
        spans.append(sel)
        if sel.size:
            power[b] = 2.0 * float(np.sum(np.abs(X[sel]) ** 2)) / n**2

    if not np.any(power > 0):
        return ModulationPattern(fmod, depth, power)
    top = power.max()
    active = audible_bands(power, fs)

    trim = int(round(EDGE_TRIM_S * fs)) if duration > 4 * EDGE_TRIM_S else 0
    for b in np.flatnonzero(active):
        sel = spans[b]
        m = next_fast_len(max(2 * sel.size + 1, int(np.ceil(ENVELOPE_RATE * duration))))
        z = np.zeros(m, dtype=np.complex128)
        z[: sel.size] = 2.0 * X[sel]
        env = np.abs(np.fft.ifft(z)) * (m / n)
        rate = m / duration
        k = int(round(trim * m / n))
        if k:
            env = env[k:-k]
        depth[b] = masking_depth(env)
        fmod[b] = _dominant_frequency(env, rate, lo_mod, hi_mod)
    return ModulationPattern(fmod, depth, power / top)


def _gate(pattern: ModulationPattern, band: tuple[float, float]) -> np.ndarray:
    return (pattern.f_mod >= band[0]) & (pattern.f_mod <= band[1])


def roughness(pattern: ModulationPattern, cfg: RoughnessConfig = RoughnessConfig()) -> float:
    """Roughness in asper: ``cal * sum(f_mod * delta_l * dz)`` over bands with f_mod in [20, 300] Hz."""
    g = _gate(pattern, cfg.band)
    return cfg.cal * float(np.sum(pattern.f_mod[g] * pattern.delta_l[g])) * pattern.dz


def fluctuation_strength(
    pattern: ModulationPattern, cfg: FluctuationConfig = FluctuationConfig()
) -> float:
    """Fluctuation strength in vacil over bands with f_mod in [0.5, 20] Hz.

    Each band is divided by ``f_mod/4 + 4/f_mod`` using its own f_mod.
    """
    g = _gate(pattern, cfg.band) & (pattern.f_mod > 0)
    fm = pattern.f_mod[g]
    num = pattern.delta_l[g] * (fm if cfg.mode == "literal" else 1.0)
    return cfg.cal * cfg.scale * float(np.sum(num / (fm / 4.0 + 4.0 / fm))) * pattern.dz


@dataclass(frozen=True)
class ModulationSeries:
    times: np.ndarray
    roughness: np.ndarray
    fluctuation: np.ndarray


MODULATION_WINDOW_S = 4.0


def modulation_series(
    buffer: AudioBuffer,
    channel: int | str = 0,
    window: float = MODULATION_WINDOW_S,
    hop: float | None = None,
    roughness_cfg: RoughnessConfig = RoughnessConfig(),
    fluctuation_cfg: FluctuationConfig = FluctuationConfig(),
) -> ModulationSeries:
    """Roughness and fluctuation strength over windows of ``window`` seconds.

    Signals shorter than one window are analysed as a single window.
    """
    fs = buffer.sample_rate
    one = buffer.select(channel)
    win = min(int(round(window * fs)), one.n_frames)
    step = max(1, int(round((hop if hop is not None else window / 2) * fs)))
    starts = np.arange(0, one.n_frames - win + 1, step)
    r = np.empty(starts.size)
    fl = np.empty(starts.size)
    for i, s in enumerate(starts):
        pat = extract_modulation(one.segment(s, s + win))
        r[i] = roughness(pat, roughness_cfg)
        fl[i] = fluctuation_strength(pat, fluctuation_cfg)
    return ModulationSeries(starts / fs, r, fl)


def derive_calibration(sample_rate: float = 48000.0, duration: float = 2.0) -> dict:
    """Run the asper and vacil reference stimuli through the pipeline with unit factors."""
    from .signal_synth import AmToneSpec, am_tone

    rough = extract_modulation(am_tone(AmToneSpec(1000.0, 70.0, 1.0, 60.0, duration, sample_rate)))
    fluct = extract_modulation(am_tone(AmToneSpec(1000.0, 4.0, 1.0, 60.0, duration, sample_rate)))
    return {
        "cal_roughness": 1.0 / roughness(rough, RoughnessConfig(cal=1.0)),
        "cal_fluctuation": 1.0 / fluctuation_strength(fluct, FluctuationConfig("standard", cal=1.0)),
        "cal_fluctuation_literal": 1.0
        / fluctuation_strength(fluct, FluctuationConfig("literal", cal=1.0)),
    }
