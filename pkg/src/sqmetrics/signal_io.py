"""WAV decoding, microphone calibration and recording metadata.

Integer PCM is normalized by ``2**(bits - 1)`` so that full scale is 1.0 for
every bit depth; a calibration sensitivity is therefore expressed in pascal
per unit of full scale regardless of how the file was stored.
"""
from __future__ import annotations

import enum
import io
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    CalibrationError,
    InvalidSpecError,
    MalformedHeaderError,
    TruncatedDataError,
    UnsupportedCodecError,
)

P_REF = 20e-6  # Pa

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE
MAX_CHANNELS = 12


class Floor(enum.Enum):
    """Marker returned instead of a level when there is no signal energy."""

    BELOW = "below-floor"

    def __repr__(self) -> str:
        return "BELOW_FLOOR"


BELOW_FLOOR = Floor.BELOW


class ChannelLabel(str, enum.Enum):
    C1 = "C1"  # centre microphone
    C2 = "C2"  # right-ear microphone
    C3 = "C3"  # left-ear microphone


class SpeedSetting(str, enum.Enum):
    S1 = "S1"  # minimum motor speed
    S2 = "S2"  # maximum motor speed


@dataclass(frozen=True)
class RawAudio:
    """Decoded digital samples, shape ``(channels, frames)``, full scale 1.0."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim == 1:
            s = s[np.newaxis, :]
        if s.ndim != 2:
            raise InvalidSpecError("samples must be (channels, frames)")
        if not self.sample_rate > 0:
            raise InvalidSpecError("sample_rate must be positive")
        if not np.all(np.isfinite(s)):
            raise InvalidSpecError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def channel_count(self) -> int:
        return self.samples.shape[0]

    @property
    def n_frames(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class ReferenceTone:
    frequency: float
    db_spl: float
    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.frequency > 0:
            raise InvalidSpecError("reference tone frequency must be positive")
        if not self.end_s > self.start_s >= 0:
            raise InvalidSpecError("reference tone segment must satisfy 0 <= start < end")


@dataclass(frozen=True)
class ChannelCalibration:
    label: str
    sensitivity: float | None = None
    reference_tone: ReferenceTone | None = None

    def __post_init__(self):
        if (self.sensitivity is None) == (self.reference_tone is None):
            raise InvalidSpecError(
                f"channel {self.label}: give exactly one of sensitivity or reference tone"
            )
        if self.sensitivity is not None and not self.sensitivity > 0:
            raise InvalidSpecError(f"channel {self.label}: sensitivity must be positive")


@dataclass(frozen=True)
class CalibrationSpec:
    """Per-channel sensitivity in Pa per unit full scale."""

    channels: tuple[ChannelCalibration, ...]

    @classmethod
    def unit(cls, labels: Sequence[str]) -> "CalibrationSpec":
        return cls(tuple(ChannelCalibration(str(lab), sensitivity=1.0) for lab in labels))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.channels)


@dataclass(frozen=True)
class AudioBuffer:
    """Calibrated sound pressure in pascal, shape ``(channels, frames)``."""

    pressure: np.ndarray
    sample_rate: float
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        p = np.asarray(self.pressure, dtype=np.float64)
        if p.ndim == 1:
            p = p[np.newaxis, :]
        if p.ndim != 2:
            raise InvalidSpecError("pressure must be (channels, frames)")
        if not self.sample_rate > 0:
            raise InvalidSpecError("sample_rate must be positive")
        if not np.all(np.isfinite(p)):
            raise InvalidSpecError("pressure samples must be finite")
        labels = tuple(self.labels) or tuple(f"ch{i + 1}" for i in range(p.shape[0]))
        if len(labels) != p.shape[0]:
            raise InvalidSpecError("one label per channel required")
        p.setflags(write=False)
        object.__setattr__(self, "pressure", p)
        object.__setattr__(self, "labels", labels)

    @property
    def channel_count(self) -> int:
        return self.pressure.shape[0]

    @property
    def n_frames(self) -> int:
        return self.pressure.shape[1]

    @property
    def duration(self) -> float:
        return self.n_frames / self.sample_rate

    def channel_index(self, channel: int | str) -> int:
        if isinstance(channel, str):
            try:
                return self.labels.index(channel)
            except ValueError:
                raise InvalidSpecError(f"no channel labelled {channel!r}") from None
        if not -self.channel_count <= channel < self.channel_count:
            raise InvalidSpecError(f"channel index {channel} out of range")
        return channel % self.channel_count

    def channel(self, channel: int | str) -> np.ndarray:
        return self.pressure[self.channel_index(channel)]

    def select(self, channel: int | str) -> "AudioBuffer":
        i = self.channel_index(channel)
        return AudioBuffer(self.pressure[i : i + 1], self.sample_rate, (self.labels[i],))

    def segment(self, start: int, stop: int) -> "AudioBuffer":
        return AudioBuffer(self.pressure[:, start:stop], self.sample_rate, self.labels)


@dataclass(frozen=True)
class DeviceSpec:
    name: str
    power_rating: float | None = None  # W
    suction_pressure: str | None = None
    motor_speed: float | None = None  # rpm
    weight: float | None = None  # kg

    def __post_init__(self):
        if self.power_rating is not None and not self.power_rating > 0:
            raise InvalidSpecError("power_rating must be positive")
        if self.weight is not None and not self.weight > 0:
            raise InvalidSpecError("weight must be positive")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "power_rating_w": self.power_rating,
            "suction_pressure": self.suction_pressure,
            "motor_speed_rpm": self.motor_speed,
            "weight_kg": self.weight,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceSpec":
        return cls(
            name=d["name"],
            power_rating=d.get("power_rating_w"),
            suction_pressure=d.get("suction_pressure"),
            motor_speed=d.get("motor_speed_rpm"),
            weight=d.get("weight_kg"),
        )


# Product sheet of the three dry-type cleaners used as model types 1-3.
MODEL_TYPES = {
    "model type 1": DeviceSpec("LG V-CP243NB", 1400.0, None, None, 3.5),
    "model type 2": DeviceSpec("Dyson Cyclone V10", 525.0, "151 air Watt", 125000.0, 2.5),
    "model type 3": DeviceSpec("Xiaomi Cleanfly Gen2", 120.0, "16.8 kPa", 100000.0, 0.56),
}


@dataclass(frozen=True)
class RecordingMeta:
    channel_label: ChannelLabel
    speed_setting: SpeedSetting
    device: DeviceSpec = field(default_factory=lambda: DeviceSpec("unknown"))

    def __post_init__(self):
        try:
            object.__setattr__(self, "channel_label", ChannelLabel(self.channel_label))
            object.__setattr__(self, "speed_setting", SpeedSetting(self.speed_setting))
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from None


# --------------------------------------------------------------------------- WAV


def _parse_chunks(data: bytes):
    if len(data) < 12:
        raise MalformedHeaderError("file shorter than a RIFF header")
    riff, _size, wave = struct.unpack("<4sI4s", data[:12])
    if riff != b"RIFF" or wave != b"WAVE":
        raise MalformedHeaderError("not a RIFF/WAVE stream")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        cid, csize = struct.unpack("<4sI", data[pos : pos + 8])
        body = data[pos + 8 : pos + 8 + csize]
        if cid == b"fmt ":
            if len(body) < 16:
                raise MalformedHeaderError("fmt chunk too short")
            fmt = body
        elif cid == b"data":
            if len(body) < csize:
                raise TruncatedDataError(
                    f"data chunk declares {csize} bytes, only {len(body)} present"
                )
            payload = body
            if fmt is not None:
                break
        pos += 8 + csize + (csize & 1)
    if fmt is None:
        raise MalformedHeaderError("missing fmt chunk")
    if payload is None:
        raise MalformedHeaderError("missing data chunk")
    return fmt, payload


def decode_wav(stream: bytes | bytearray | io.BufferedIOBase) -> RawAudio:
    """Decode a PCM 16/24/32-bit or IEEE float32 WAV byte stream.

    Raises
    ------
    MalformedHeaderError, UnsupportedCodecError, TruncatedDataError
    """
    data = bytes(stream) if isinstance(stream, (bytes, bytearray, memoryview)) else stream.read()
    fmt, payload = _parse_chunks(data)
    tag, channels, rate, _brate, block_align, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise MalformedHeaderError("extensible fmt chunk too short")
        tag = struct.unpack("<H", fmt[24:26])[0]
    if tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedCodecError(f"format tag 0x{tag:04x} is not PCM or float")
    if tag == WAVE_FORMAT_PCM and bits not in (16, 24, 32):
        raise UnsupportedCodecError(f"{bits}-bit PCM is not supported")
    if tag == WAVE_FORMAT_IEEE_FLOAT and bits != 32:
        raise UnsupportedCodecError(f"{bits}-bit float is not supported")
    if not 1 <= channels <= MAX_CHANNELS:
        raise UnsupportedCodecError(f"{channels} channels (1-{MAX_CHANNELS} supported)")
    if rate == 0:
        raise MalformedHeaderError("sample rate is zero")
    width = bits // 8
    if block_align != width * channels:
        raise MalformedHeaderError("block align inconsistent with channels and bit depth")
    if len(payload) % block_align:
        raise TruncatedDataError("data chunk ends inside a sample frame")

    if tag == WAVE_FORMAT_IEEE_FLOAT:
        x = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    elif bits == 24:
        b = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v >= 1 << 23, v - (1 << 24), v)
        x = v / float(1 << 23)
    else:
        x = np.frombuffer(payload, dtype=f"<i{width}").astype(np.float64) / float(1 << (bits - 1))
    if not np.all(np.isfinite(x)):
        raise UnsupportedCodecError("non-finite float samples")
    return RawAudio(x.reshape(-1, channels).T, float(rate))


def encode_wav(samples: np.ndarray, sample_rate: int, fmt: str = "float32") -> bytes:
    """Encode ``(channels, frames)`` samples. ``fmt`` is float32, pcm16, pcm24 or pcm32."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    channels = x.shape[0]
    inter = x.T.reshape(-1)
    if fmt == "float32":
        tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
        body = inter.astype("<f4").tobytes()
    elif fmt in ("pcm16", "pcm24", "pcm32"):
        tag, bits = WAVE_FORMAT_PCM, int(fmt[3:])
        full = float(1 << (bits - 1))
        q = np.clip(np.round(inter * full), -full, full - 1).astype(np.int64)
        if bits == 24:
            u = (q & 0xFFFFFF).astype(np.uint32)
            body = np.stack([u & 0xFF, (u >> 8) & 0xFF, (u >> 16) & 0xFF], axis=1)
            body = body.astype(np.uint8).tobytes()
        else:
            body = q.astype(f"<i{bits // 8}").tobytes()
    else:
        raise InvalidSpecError(f"unknown WAV sample format {fmt!r}")
    width = bits // 8
    fmt_chunk = struct.pack(
        "<HHIIHH", tag, channels, int(sample_rate), int(sample_rate) * width * channels,
        width * channels, bits,
    )
    chunks = b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk
    chunks += b"data" + struct.pack("<I", len(body)) + body
    if len(body) & 1:
        chunks += b"\x00"
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def read_wav(path: str | Path) -> RawAudio:
    return decode_wav(Path(path).read_bytes())


def write_wav(path: str | Path, buffer: AudioBuffer | RawAudio, fmt: str = "float32") -> None:
    samples = buffer.pressure if isinstance(buffer, AudioBuffer) else buffer.samples
    Path(path).write_bytes(encode_wav(samples, int(round(buffer.sample_rate)), fmt))


# ------------------------------------------------------------------- calibration


def _band_rms(x: np.ndarray, fs: float, f0: float) -> float:
    # RMS within one third-octave around the calibrator frequency
    X = np.fft.rfft(x)
    f = np.fft.rfftfreq(x.size, 1.0 / fs)
    mask = (f >= f0 * 2 ** (-1 / 6)) & (f <= f0 * 2 ** (1 / 6))
    y = np.fft.irfft(np.where(mask, X, 0.0), n=x.size)
    return float(np.sqrt(np.mean(y**2)))


def sensitivity_from_tone(raw: RawAudio, channel: int, tone: ReferenceTone) -> float:
    """Pa per full scale that maps the tone segment's RMS to ``tone.db_spl``."""
    start = int(round(tone.start_s * raw.sample_rate))
    stop = int(round(tone.end_s * raw.sample_rate))
    if stop > raw.n_frames or stop - start < 2:
        raise CalibrationError("reference tone segment lies outside the recording")
    rms = _band_rms(raw.samples[channel, start:stop], raw.sample_rate, tone.frequency)
    if not rms > 0:
        raise CalibrationError("reference tone segment is silent; sensitivity not positive")
    return P_REF * 10 ** (tone.db_spl / 20) / rms


def apply_calibration(
    raw: RawAudio, cal: CalibrationSpec, labels: Sequence[str] | None = None
) -> AudioBuffer:
    """Scale digital samples to pascal.

    Calibration entries are matched to channels by label when ``labels`` is
    given, otherwise by position.
    """
    if labels is None:
        if len(cal.channels) != raw.channel_count:
            raise CalibrationError(
                f"calibration has {len(cal.channels)} channels, audio has {raw.channel_count}"
            )
        entries = list(cal.channels)
        labels = cal.labels
    else:
        labels = tuple(str(lab) for lab in labels)
        if len(labels) != raw.channel_count:
            raise CalibrationError(
                f"{len(labels)} channel labels given for {raw.channel_count} channels"
            )
        by_label = {c.label: c for c in cal.channels}
        missing = [lab for lab in labels if lab not in by_label]
        if missing:
            raise CalibrationError(f"no calibration for channel(s) {', '.join(missing)}")
        entries = [by_label[lab] for lab in labels]

    out = np.empty_like(raw.samples)
    for i, entry in enumerate(entries):
        if entry.reference_tone is not None:
            s = sensitivity_from_tone(raw, i, entry.reference_tone)
        else:
            s = entry.sensitivity
        if not (s > 0 and math.isfinite(s)):
            raise CalibrationError(f"channel {entry.label}: derived sensitivity {s} not positive")
        out[i] = raw.samples[i] * s
    return AudioBuffer(out, raw.sample_rate, tuple(labels))


def parse_calibration(text: str) -> CalibrationSpec:
    """Parse ``key=value`` calibration lines; ``#`` starts a comment."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            kv = dict(tok.split("=", 1) for tok in line.split())
        except ValueError:
            raise CalibrationError(f"line {lineno}: expected key=value tokens") from None
        if "channel" not in kv:
            raise CalibrationError(f"line {lineno}: missing channel=")
        try:
            if "sensitivity_pa_per_fs" in kv:
                entry = ChannelCalibration(kv["channel"], sensitivity=float(kv["sensitivity_pa_per_fs"]))
            else:
                tone = ReferenceTone(
                    float(kv["ref_freq_hz"]),
                    float(kv["ref_db_spl"]),
                    float(kv["ref_start_s"]),
                    float(kv["ref_end_s"]),
                )
                entry = ChannelCalibration(kv["channel"], reference_tone=tone)
        except KeyError as exc:
            raise CalibrationError(f"line {lineno}: missing key {exc.args[0]}") from None
        except (ValueError, InvalidSpecError) as exc:
            raise CalibrationError(f"line {lineno}: {exc}") from None
        entries.append(entry)
    if not entries:
        raise CalibrationError("calibration file has no channel entries")
    return CalibrationSpec(tuple(entries))


def load_calibration(path: str | Path) -> CalibrationSpec:
    return parse_calibration(Path(path).read_text())


# ------------------------------------------------------------------------ levels


def db_spl(pressure_power: float) -> float | Floor:
    """Level of a mean-square pressure in dB re 20 uPa; zero power is below floor."""
    if not pressure_power > 0:
        return BELOW_FLOOR
    return 10.0 * math.log10(pressure_power / P_REF**2)


def rms_spl(buffer: AudioBuffer, channel: int | str = 0) -> float | Floor:
    x = buffer.channel(channel)
    if x.size == 0:
        raise InvalidSpecError("channel has no samples")
    return db_spl(float(np.mean(x * x)))
