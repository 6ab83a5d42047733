"""Command-line interface: ``sqmetrics {synth,analyze,compare,version}``.

Exit codes: 0 success, 1 data or processing error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .annoyance import (
    METRICS,
    ComparisonReport,
    ReportRow,
    build_comparison,
    fmt4,
    merge_rows,
    summarize_series,
    annoyance_index,
)
from .errors import InvalidSpecError, SqMetricsError, UndefinedSharpnessError
from .loudness import loudness_series
from .plots import bar_chart_svg, series_svg, spectrum_svg
from .signal_io import (
    BELOW_FLOOR,
    MODEL_TYPES,
    CalibrationSpec,
    RawAudio,
    ChannelLabel,
    DeviceSpec,
    RecordingMeta,
    SpeedSetting,
    apply_calibration,
    load_calibration,
    read_wav,
    write_wav,
)
from .signal_synth import (
    AmToneSpec,
    NarrowbandNoiseSpec,
    ToneSpec,
    am_tone,
    narrowband_noise,
    pure_tone,
)
from .spectral import la_eq_from_series, spl_time_series, third_octave
from .sq_metrics import FluctuationConfig, modulation_series, sharpness

CALIBRATION_ENV = "SQMETRICS_CALIBRATION"
EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    calibration: str | None = None
    interval: float = 30.0
    alpha: float = 0.9
    hop: float = 0.5
    fluctuation_mode: str = "standard"
    la_eq_mode: str = "normalized"
    output_format: str = "json"
    plot_dir: str | None = None

    def __post_init__(self):
        for name in ("interval", "hop"):
            if not getattr(self, name) > 0:
                raise InvalidSpecError(f"{name} must be positive")
        if not 0 < self.alpha <= 1:
            raise InvalidSpecError("alpha must lie in (0, 1]")
        if self.fluctuation_mode not in ("standard", "literal"):
            raise InvalidSpecError("fluctuation mode must be 'standard' or 'literal'")
        if self.la_eq_mode not in ("normalized", "literal"):
            raise InvalidSpecError("LA_eq mode must be 'normalized' or 'literal'")
        if self.output_format not in ("json", "csv"):
            raise InvalidSpecError("format must be json or csv")


# ------------------------------------------------------------------ helpers


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


SKIP = "-"


def _parse_labels(text: str | None, count: int) -> tuple[str, ...]:
    """Channel labels in file order; ``-`` marks a channel left out of the analysis."""
    if text is None:
        if count > len(ChannelLabel):
            raise UsageError(f"{count} channels in file; pass --channels to label them")
        return tuple(lab.value for lab in list(ChannelLabel)[:count])
    labels = tuple(s.strip() for s in text.split(",") if s.strip())
    valid = {lab.value for lab in ChannelLabel}
    bad = [lab for lab in labels if lab not in valid and lab != SKIP]
    if bad:
        raise UsageError(f"unknown channel label(s) {', '.join(bad)}; expected C1, C2, C3 or -")
    used = [lab for lab in labels if lab != SKIP]
    if not used:
        raise UsageError("--channels must label at least one channel")
    if len(set(used)) != len(used):
        raise UsageError("channel labels must be unique")
    if len(labels) != count:
        raise SqMetricsError(f"--channels lists {len(labels)} labels but the file has {count} channels")
    return labels


def _device(args) -> DeviceSpec:
    if args.device_spec:
        return DeviceSpec.from_dict(json.loads(Path(args.device_spec).read_text()))
    if args.device in MODEL_TYPES:
        return MODEL_TYPES[args.device]
    return DeviceSpec(args.device)


def _calibration(path: str | None, labels: Sequence[str]) -> CalibrationSpec:
    path = path or os.environ.get(CALIBRATION_ENV) or None
    if path is None:
        return CalibrationSpec.unit(labels)
    return load_calibration(path)


def _series_doc(times, values) -> dict:
    return {"times_s": [fmt4(t) for t in times], "values": [fmt4(v) for v in values]}


def _sharpness_series(ls) -> np.ndarray:
    out = np.empty(len(ls.times))
    for i in range(out.size):
        try:
            out[i] = sharpness(ls.pattern(i))
        except UndefinedSharpnessError:
            out[i] = 0.0  # silent window
    return out


def _safe_name(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in text)


# ----------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    try:
        if args.kind == "tone":
            spec = ToneSpec(args.fc, args.level, args.duration, args.sample_rate)
            buf = pure_tone(spec)
        elif args.kind == "am":
            spec = AmToneSpec(args.fc, args.fmod, args.depth, args.level, args.duration, args.sample_rate)
            buf = am_tone(spec)
        else:
            spec = NarrowbandNoiseSpec(
                args.fc, args.bandwidth, args.level, args.duration, args.sample_rate, args.seed
            )
            buf = narrowband_noise(spec)
    except InvalidSpecError as exc:
        raise UsageError(str(exc)) from None
    if not float(args.sample_rate).is_integer():
        raise UsageError("sample rate must be an integer for WAV output")
    out = args.output or f"{args.kind}.wav"
    write_wav(out, buf)
    print(json.dumps({"kind": args.kind, **asdict(spec), "output": out}))
    return EXIT_OK


def analyze_file(path: str, cfg: AnalysisConfig, labels_arg: str | None, setting: str,
                 device: DeviceSpec) -> tuple[dict, ComparisonReport]:
    raw = read_wav(path)
    labels = _parse_labels(labels_arg, raw.channel_count)
    keep = [i for i, lab in enumerate(labels) if lab != SKIP]
    if len(keep) < raw.channel_count:
        raw = RawAudio(raw.samples[keep], raw.sample_rate)
        labels = tuple(labels[i] for i in keep)
    cal = _calibration(cfg.calibration, labels)
    buf = apply_calibration(raw, cal, labels)
    interval = min(cfg.interval, buf.duration)
    fcfg = FluctuationConfig(cfg.fluctuation_mode)

    channels, entries = [], []
    for lab in labels:
        spec_a = third_octave(buf, "A", lab)
        spl = spl_time_series(buf, interval, lab)
        leq = la_eq_from_series(spl, cfg.alpha, cfg.la_eq_mode)
        ls = loudness_series(buf, cfg.hop, lab)
        sh = _sharpness_series(ls)
        ms = modulation_series(buf, lab, fluctuation_cfg=fcfg)
        summary = summarize_series(ls.sones, sh, ms.roughness, ms.fluctuation)
        meta = RecordingMeta(ChannelLabel(lab), SpeedSetting(setting), device)
        entries.append((meta, summary, leq.value))
        channels.append(
            {
                "label": lab,
                "la_eq": {
                    "label": leq.label,
                    "db": leq.value.value if leq.value is BELOW_FLOOR else fmt4(leq.value),
                },
                "spectrum_dba": spec_a.to_dict()["bands"],
                "spl_series": {
                    "interval_s": fmt4(spl.interval),
                    "levels_dba": [None if np.isnan(v) else fmt4(v) for v in spl.levels],
                },
                "series": {
                    "loudness_sone": _series_doc(ls.times, ls.sones),
                    "sharpness_acum": _series_doc(ls.times, sh),
                    "roughness_asper": _series_doc(ms.times, ms.roughness),
                    "fluctuation_vacil": _series_doc(ms.times, ms.fluctuation),
                },
                "loudness_stats_sone": {"max": fmt4(ls.max), "mean": fmt4(ls.mean), "n5": fmt4(ls.n5)},
                "summary": summary.to_dict(),
                "annoyance_index": fmt4(annoyance_index(summary)),
            }
        )
        if cfg.plot_dir:
            _plot_channel(Path(cfg.plot_dir), Path(path).stem, lab, spec_a, ls, sh, ms)

    report = build_comparison(entries)
    doc = {
        "kind": "analysis",
        "source": Path(path).name,
        "sample_rate_hz": fmt4(buf.sample_rate),
        "duration_s": fmt4(buf.duration),
        "config": {
            "interval_s": fmt4(interval),
            "alpha": cfg.alpha,
            "hop_s": cfg.hop,
            "fluctuation_mode": cfg.fluctuation_mode,
            "la_eq_mode": cfg.la_eq_mode,
            "calibration": "file" if (cfg.calibration or os.environ.get(CALIBRATION_ENV)) else "unit",
        },
        "setting": setting,
        "channels": channels,
        "report": report.to_dict(),
    }
    return doc, report


def _plot_channel(outdir: Path, stem: str, lab: str, spec_a, ls, sh, ms) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    base = _safe_name(f"{stem}_{lab}")
    (outdir / f"{base}_spectrum.svg").write_text(
        spectrum_svg(spec_a.centers, spec_a.levels, f"{stem} {lab} one-third-octave spectrum")
    )
    for name, t, v, unit in (
        ("loudness", ls.times, ls.sones, "sone"),
        ("sharpness", ls.times, sh, "acum"),
        ("roughness", ms.times, ms.roughness, "asper"),
        ("fluctuation", ms.times, ms.fluctuation, "vacil"),
    ):
        (outdir / f"{base}_{name}.svg").write_text(series_svg(t, v, f"{stem} {lab} {name}", unit))


def cmd_analyze(args) -> int:
    try:
        cfg = AnalysisConfig(
            args.calibration, args.interval, args.alpha, args.hop, args.fluctuation_mode,
            args.la_eq_mode, args.format, args.plot,
        )
        SpeedSetting(args.setting)
    except (InvalidSpecError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    doc, report = analyze_file(args.wav, cfg, args.channels, args.setting, _device(args))
    text = json.dumps(doc, indent=2) + "\n" if cfg.output_format == "json" else report.to_csv()
    _emit(text, args.output)
    return EXIT_OK


def _plot_comparison(outdir: Path, report: ComparisonReport) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    devices = sorted({r.device for r in report.rows})
    columns = sorted({(r.channel, r.setting) for r in report.rows})
    lookup = {r.key: r for r in report.rows}
    units = dict(zip(METRICS, ("sone", "acum", "asper", "vacil")))
    for metric in METRICS + ("annoyance_index",):
        series = {}
        for ch, st in columns:
            means, stds = [], []
            for dev in devices:
                row = lookup.get((dev, ch, st))
                if row is None:
                    means.append(float("nan"))
                    stds.append(0.0)
                elif metric == "annoyance_index":
                    means.append(row.annoyance_index)
                    stds.append(0.0)
                else:
                    stats = row.to_dict()[metric]
                    means.append(stats["mean"])
                    stds.append(stats["std"])
            series[f"{ch} {st}"] = (means, stds)
        (outdir / f"compare_{metric}.svg").write_text(
            bar_chart_svg(devices, series, metric.replace("_", " "), units.get(metric, "AI"))
        )


def cmd_compare(args) -> int:
    rows: list[ReportRow] = []
    devices: dict = {}
    for path in args.reports:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SqMetricsError(f"{path}: not a JSON report ({exc})") from None
        sub = doc.get("report", doc)
        if "rows" not in sub:
            raise SqMetricsError(f"{path}: no report rows found")
        part = ComparisonReport.from_dict(sub)
        rows.extend(part.rows)
        devices.update(part.devices)
    report = merge_rows(rows, devices)
    _emit(report.to_json() if args.format == "json" else report.to_csv(), args.output)
    if args.plot:
        _plot_comparison(Path(args.plot), report)
    return EXIT_OK


def cmd_version(args) -> int:
    print(f"sqmetrics {__version__}")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sqmetrics", description="Psychoacoustic sound-quality metrics.")
    sub = p.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="write a reference stimulus as float32 WAV")
    kinds = synth.add_subparsers(dest="kind", required=True)
    for kind in ("tone", "am", "narrowband"):
        k = kinds.add_parser(kind)
        k.add_argument("--fc", type=float, required=True, help="carrier / centre frequency, Hz")
        k.add_argument("--level", type=float, required=True, help="dB SPL")
        k.add_argument("--duration", type=float, default=2.0, help="seconds (default 2)")
        k.add_argument("--sample-rate", type=float, default=48000.0)
        k.add_argument("-o", "--output", help="output WAV path (default <kind>.wav)")
        if kind == "am":
            k.add_argument("--fmod", type=float, required=True, help="modulation frequency, Hz")
            k.add_argument("--depth", type=float, default=1.0, help="modulation depth in [0, 1]")
        if kind == "narrowband":
            k.add_argument("--bandwidth", type=float, required=True, help="Hz")
            k.add_argument("--seed", type=int, default=0)
    synth.set_defaults(func=cmd_synth)

    an = sub.add_parser("analyze", help="analyze a calibrated recording")
    an.add_argument("wav")
    an.add_argument("--channels", help="comma-separated labels in file order, e.g. C1,C2,C3; - skips a channel")
    an.add_argument("--calibration", help=f"calibration file (default ${CALIBRATION_ENV}, else unit)")
    an.add_argument("--interval", type=float, default=30.0, help="SPL interval, s (default 30)")
    an.add_argument("--alpha", type=float, default=0.9, help="LA_eq time fraction (default 0.9)")
    an.add_argument("--la-eq-mode", choices=("normalized", "literal"), default="normalized")
    an.add_argument("--hop", type=float, default=0.5, help="loudness series hop, s (default 0.5)")
    an.add_argument("--fluctuation-mode", choices=("standard", "literal"), default="standard")
    an.add_argument("--setting", default="S1", help="speed setting S1 or S2 (default S1)")
    an.add_argument("--device", default="unknown", help="device name or 'model type N'")
    an.add_argument("--device-spec", help="JSON file with device metadata")
    an.add_argument("--format", choices=("json", "csv"), default="json")
    an.add_argument("--plot", metavar="DIR", help="write SVG plots to DIR")
    an.add_argument("-o", "--output")
    an.set_defaults(func=cmd_analyze)

    cmp_ = sub.add_parser("compare", help="merge analysis reports into one comparison")
    cmp_.add_argument("reports", nargs="+")
    cmp_.add_argument("--format", choices=("json", "csv"), default="json")
    cmp_.add_argument("--plot", metavar="DIR", help="write per-metric SVG bar charts to DIR")
    cmp_.add_argument("-o", "--output")
    cmp_.set_defaults(func=cmd_compare)

    ver = sub.add_parser("version")
    ver.set_defaults(func=cmd_version)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sqmetrics: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SqMetricsError, OSError, ValueError, KeyError) as exc:
        print(f"sqmetrics: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
