"""Minimal hand-written SVG charts (bar charts with whiskers, spectra, series).

No plotting library is required; output is plain, diffable XML.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 360
MARGIN = dict(left=64, right=16, top=36, bottom=56)
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _nice_max(v: float) -> float:
    if not v > 0 or not math.isfinite(v):
        return 1.0
    exp = 10 ** math.floor(math.log10(v))
    for m in (1, 2, 2.5, 5, 10):
        if m * exp >= v:
            return m * exp
    return 10 * exp


def _frame(title: str, xlabel: str, ylabel: str, body: list[str]) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {HEIGHT / 2:.1f})">{escape(ylabel)}</text>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _plot_area():
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    return x0, x1, y0, y1


def _y_axis(lo: float, hi: float, ticks: int = 5) -> tuple[list[str], callable]:
    x0, x1, y0, y1 = _plot_area()
    span = hi - lo if hi > lo else 1.0

    def ymap(v):
        return y0 - (v - lo) / span * (y0 - y1)

    out = [f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
           f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>']
    for i in range(ticks + 1):
        v = lo + span * i / ticks
        y = ymap(v)
        out.append(f'<line x1="{x0 - 4}" y1="{y:.1f}" x2="{x1}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{x0 - 6}" y="{y + 4:.1f}" text-anchor="end">{v:g}</text>')
    return out, ymap


def bar_chart_svg(
    groups: Sequence[str],
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str,
    ylabel: str,
) -> str:
    """Grouped bars (one colour per series) with standard-deviation whiskers.

    ``series`` maps a legend label to ``(means, stds)``, both aligned with
    ``groups``.
    """
    names = list(series)
    top = max(
        (m + s for means, stds in series.values() for m, s in zip(means, stds) if math.isfinite(m + s)),
        default=1.0,
    )
    body, ymap = _y_axis(0.0, _nice_max(top))
    x0, x1, y0, _ = _plot_area()
    gw = (x1 - x0) / max(len(groups), 1)
    bw = 0.8 * gw / max(len(names), 1)
    for gi, g in enumerate(groups):
        gx = x0 + gi * gw + 0.1 * gw
        body.append(f'<text x="{x0 + (gi + 0.5) * gw:.1f}" y="{y0 + 16}" text-anchor="middle">{escape(g)}</text>')
        for si, name in enumerate(names):
            m, s = series[name][0][gi], series[name][1][gi]
            if not math.isfinite(m):
                continue
            bx = gx + si * bw
            by = ymap(m)
            body.append(
                f'<rect x="{bx:.1f}" y="{by:.1f}" width="{bw:.1f}" height="{y0 - by:.1f}" '
                f'fill="{PALETTE[si % len(PALETTE)]}"/>'
            )
            cx = bx + bw / 2
            lo_y, hi_y = ymap(max(m - s, 0.0)), ymap(m + s)
            body.append(f'<line x1="{cx:.1f}" y1="{lo_y:.1f}" x2="{cx:.1f}" y2="{hi_y:.1f}" stroke="black"/>')
            for wy in (lo_y, hi_y):
                body.append(
                    f'<line x1="{cx - bw / 4:.1f}" y1="{wy:.1f}" x2="{cx + bw / 4:.1f}" y2="{wy:.1f}" stroke="black"/>'
                )
    for si, name in enumerate(names):
        lx = x1 - 90
        ly = MARGIN["top"] + 4 + 14 * si
        body.append(f'<rect x="{lx}" y="{ly}" width="10" height="10" fill="{PALETTE[si % len(PALETTE)]}"/>')
        body.append(f'<text x="{lx + 14}" y="{ly + 9}">{escape(name)}</text>')
    return _frame(title, "", ylabel, body)


def spectrum_svg(centers: Sequence[float], levels: Sequence[float], title: str,
                 ylabel: str = "Level (dBA)") -> str:
    """Band levels against a log2 frequency axis; NaN levels are skipped."""
    c = np.asarray(centers, dtype=np.float64)
    lv = np.asarray(levels, dtype=np.float64)
    ok = np.isfinite(lv)
    lo = math.floor(np.min(lv[ok]) / 10) * 10 if ok.any() else 0.0
    hi = math.ceil(np.max(lv[ok]) / 10) * 10 if ok.any() else 10.0
    body, ymap = _y_axis(float(lo), float(max(hi, lo + 10)))
    x0, x1, y0, _ = _plot_area()
    l2 = np.log2(c)
    span = (l2[-1] - l2[0]) or 1.0

    def xmap(f):
        return x0 + (math.log2(f) - l2[0]) / span * (x1 - x0)

    for f in (31.5, 63, 125, 250, 500, 1000, 2000, 4000, 8000):
        if c[0] <= f <= c[-1]:
            x = xmap(f)
            body.append(f'<text x="{x:.1f}" y="{y0 + 16}" text-anchor="middle">{f:g}</text>')
    pts = " ".join(f"{xmap(f):.1f},{ymap(v):.1f}" for f, v in zip(c[ok], lv[ok]))
    if pts:
        body.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE[0]}" stroke-width="1.5"/>')
    return _frame(title, "Frequency (Hz, log2 axis)", ylabel, body)


def series_svg(times: Sequence[float], values: Sequence[float], title: str, ylabel: str) -> str:
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    ok = np.isfinite(v)
    body, ymap = _y_axis(0.0, _nice_max(float(np.max(v[ok])) if ok.any() else 1.0))
    x0, x1, y0, _ = _plot_area()
    tmax = float(t[-1]) if t.size and t[-1] > 0 else 1.0
    for i in range(5):
        tv = tmax * i / 4
        body.append(f'<text x="{x0 + (x1 - x0) * i / 4:.1f}" y="{y0 + 16}" text-anchor="middle">{tv:.3g}</text>')
    pts = " ".join(f"{x0 + (x1 - x0) * a / tmax:.1f},{ymap(b):.1f}" for a, b in zip(t[ok], v[ok]))
    if pts:
        body.append(f'<polyline points="{pts}" fill="none" stroke="{PALETTE[0]}" stroke-width="1.5"/>')
    return _frame(title, "Time (s)", ylabel, body)
