"""Annoyance index and comparison reports across devices, microphones and settings."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateKeyError, EmptyInputError, InvalidSpecError
from .signal_io import BELOW_FLOOR, DeviceSpec, Floor, RecordingMeta

METRICS = ("loudness_sone", "sharpness_acum", "roughness_asper", "fluctuation_vacil")
STATS = ("mean", "max", "std")
MODEL_SCOPE = "dry-type vacuum cleaners"
SCHEMA_VERSION = 1


def fmt4(x: float) -> float:
    """Round to 4 decimals for stable serialization (and drop negative zero)."""
    return round(float(x), 4) + 0.0


@dataclass(frozen=True)
class MetricStats:
    mean: float
    max: float
    std: float  # population standard deviation

    def __post_init__(self):
        if not (self.mean >= 0 and self.max >= 0 and self.std >= 0):
            raise InvalidSpecError("metric statistics must be non-negative")

    @classmethod
    def of(cls, values: Iterable[float]) -> "MetricStats":
        v = np.asarray(list(values), dtype=np.float64)
        if v.size == 0:
            raise EmptyInputError("no values to summarize")
        return cls(float(np.mean(v)), float(np.max(v)), float(np.std(v)))

    def get(self, statistic: str) -> float:
        if statistic not in STATS:
            raise InvalidSpecError(f"statistic must be one of {STATS}")
        return getattr(self, statistic)

    def to_dict(self) -> dict:
        return {k: fmt4(getattr(self, k)) for k in STATS}


@dataclass(frozen=True)
class RunMetrics:
    """Metric values of one run (or one analysis window)."""

    loudness: float
    sharpness: float
    roughness: float
    fluctuation: float


@dataclass(frozen=True)
class PsychoMetricsSummary:
    loudness: MetricStats
    sharpness: MetricStats
    roughness: MetricStats
    fluctuation: MetricStats

    def values(self, statistic: str = "mean") -> tuple[float, float, float, float]:
        return (
            self.loudness.get(statistic),
            self.sharpness.get(statistic),
            self.roughness.get(statistic),
            self.fluctuation.get(statistic),
        )

    def to_dict(self) -> dict:
        stats = (self.loudness, self.sharpness, self.roughness, self.fluctuation)
        return {name: s.to_dict() for name, s in zip(METRICS, stats)}

    @classmethod
    def from_dict(cls, d: dict) -> "PsychoMetricsSummary":
        return cls(*(MetricStats(**{k: d[name][k] for k in STATS}) for name in METRICS))


@dataclass(frozen=True)
class AnnoyanceModel:
    """``AI = scale * (wL L + wSH SH + wR R + wF F)``."""

    scale: float = 0.1
    weights: tuple[float, float, float, float] = (1.0, 1.0, 15.0, 5.0)
    scope: str = MODEL_SCOPE


DEFAULT_MODEL = AnnoyanceModel()


def annoyance_index(
    m: PsychoMetricsSummary | RunMetrics | Sequence[float],
    model: AnnoyanceModel = DEFAULT_MODEL,
    statistic: str = "mean",
) -> float:
    if isinstance(m, PsychoMetricsSummary):
        values = m.values(statistic)
    elif isinstance(m, RunMetrics):
        values = (m.loudness, m.sharpness, m.roughness, m.fluctuation)
    else:
        values = tuple(m)
        if len(values) != 4:
            raise InvalidSpecError("need (L, SH, R, F)")
    return model.scale * sum(w * v for w, v in zip(model.weights, values))


def summarize_runs(runs: Sequence[RunMetrics]) -> PsychoMetricsSummary:
    if not runs:
        raise EmptyInputError("at least one run required")
    return PsychoMetricsSummary(
        MetricStats.of(r.loudness for r in runs),
        MetricStats.of(r.sharpness for r in runs),
        MetricStats.of(r.roughness for r in runs),
        MetricStats.of(r.fluctuation for r in runs),
    )


def summarize_series(loudness, sharpness, roughness, fluctuation) -> PsychoMetricsSummary:
    """Summary of per-window metric series, which may differ in length."""
    return PsychoMetricsSummary(
        MetricStats.of(loudness),
        MetricStats.of(sharpness),
        MetricStats.of(roughness),
        MetricStats.of(fluctuation),
    )


@dataclass(frozen=True)
class ReportRow:
    device: str
    channel: str
    setting: str
    la_eq_db: float | Floor
    metrics: PsychoMetricsSummary
    annoyance_index: float
    annoyance_index_max: float

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.device, self.channel, self.setting)

    def to_dict(self) -> dict:
        d = {
            "device": self.device,
            "channel": self.channel,
            "setting": self.setting,
            "la_eq_db": self.la_eq_db.value if self.la_eq_db is BELOW_FLOOR else fmt4(self.la_eq_db),
        }
        d.update(self.metrics.to_dict())
        d["annoyance_index"] = fmt4(self.annoyance_index)
        d["annoyance_index_max"] = fmt4(self.annoyance_index_max)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ReportRow":
        la = d["la_eq_db"]
        return cls(
            d["device"],
            d["channel"],
            d["setting"],
            BELOW_FLOOR if la == BELOW_FLOOR.value else float(la),
            PsychoMetricsSummary.from_dict(d),
            float(d["annoyance_index"]),
            float(d.get("annoyance_index_max", d["annoyance_index"])),
        )


CSV_COLUMNS = (
    ["device", "channel", "setting", "la_eq_db"]
    + [f"{m}_{s}" for m in METRICS for s in STATS]
    + ["annoyance_index", "annoyance_index_max"]
)


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ReportRow, ...]
    devices: dict = field(default_factory=dict)  # name -> DeviceSpec
    model: AnnoyanceModel = DEFAULT_MODEL

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "annoyance_model": {
                "formula": "AI = 0.1 (L + SH + 15 R + 5 F)",
                "scale": self.model.scale,
                "weights": list(self.model.weights),
                "scope": self.model.scope,
                "headline_statistic": "mean",
            },
            "std_kind": "population",
            "devices": [self.devices[k].to_dict() for k in sorted(self.devices)],
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            d = r.to_dict()
            flat = [d["device"], d["channel"], d["setting"], d["la_eq_db"]]
            flat += [f"{d[m][s]:.4f}" for m in METRICS for s in STATS]
            flat += [f"{d['annoyance_index']:.4f}", f"{d['annoyance_index_max']:.4f}"]
            w.writerow(flat if isinstance(flat[3], str) else flat[:3] + [f"{flat[3]:.4f}"] + flat[4:])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        devices = {x["name"]: DeviceSpec.from_dict(x) for x in d.get("devices", [])}
        return cls(tuple(ReportRow.from_dict(r) for r in d["rows"]), devices)


def _row_sort_key(row: ReportRow):
    return row.key


def make_row(
    meta: RecordingMeta,
    metrics: PsychoMetricsSummary,
    la_eq: float | Floor,
    model: AnnoyanceModel = DEFAULT_MODEL,
) -> ReportRow:
    if la_eq is not BELOW_FLOOR and not math.isfinite(la_eq):
        raise InvalidSpecError("LA_eq must be finite or below-floor")
    return ReportRow(
        meta.device.name,
        meta.channel_label.value,
        meta.speed_setting.value,
        la_eq,
        metrics,
        annoyance_index(metrics, model, "mean"),
        annoyance_index(metrics, model, "max"),
    )


def merge_rows(rows: Iterable[ReportRow], devices: dict | None = None,
               model: AnnoyanceModel = DEFAULT_MODEL) -> ComparisonReport:
    rows = list(rows)
    if not rows:
        raise EmptyInputError("comparison needs at least one entry")
    seen = set()
    for r in rows:
        if r.key in seen:
            raise DuplicateKeyError(f"duplicate entry for device/channel/setting {r.key}")
        seen.add(r.key)
    return ComparisonReport(tuple(sorted(rows, key=_row_sort_key)), dict(devices or {}), model)


def build_comparison(
    entries: Sequence[tuple[RecordingMeta, PsychoMetricsSummary, float | Floor]],
    model: AnnoyanceModel = DEFAULT_MODEL,
) -> ComparisonReport:
    """Rows sorted by device, channel, setting, each with its annoyance index."""
    rows = [make_row(meta, m, la, model) for meta, m, la in entries]
    devices = {meta.device.name: meta.device for meta, _, _ in entries}
    return merge_rows(rows, devices, model)
