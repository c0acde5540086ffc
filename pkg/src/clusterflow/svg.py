"""Minimal native SVG line/step plots.

Every figure is written with a sidecar CSV (``panel, series, point, x, y``)
holding exactly the numbers that were drawn.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass
class Series:
    label: str
    x: list
    y: list
    kind: str = "line"  # line | step | segment
    color: str | None = None
    width: float = 1.5
    legend: bool = True


@dataclass
class Panel:
    title: str
    xlabel: str = ""
    ylabel: str = ""
    series: list = field(default_factory=list)
    xlim: tuple | None = None
    ylim: tuple | None = None

    def add(self, *args, **kwargs) -> Series:
        s = Series(*args, **kwargs)
        self.series.append(s)
        return s


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(hi):
        out.append(round(v, 12))
        v += step
    return out


def _fmt(v):
    return f"{v:.6g}"


def _limits(panel):
    xs = [v for s in panel.series for v in s.x]
    ys = [v for s in panel.series for v in s.y]
    xlim = panel.xlim or ((min(xs), max(xs)) if xs else (0.0, 1.0))
    ylim = panel.ylim or ((min(ys), max(ys)) if ys else (0.0, 1.0))
    if xlim[1] == xlim[0]:
        xlim = (xlim[0] - 0.5, xlim[1] + 0.5)
    if ylim[1] == ylim[0]:
        ylim = (ylim[0] - 0.5, ylim[1] + 0.5)
    return xlim, ylim


def render(panels, path, title: str = "", panel_width=440, panel_height=340,
           columns: int | None = None) -> Path:
    """Write ``path`` (SVG) and ``path.with_suffix('.csv')`` (plotted numbers).

    Panels fill a grid row by row, ``columns`` wide (default: one row).
    """
    path = Path(path)
    ml, mr, mt, mb = 62, 16, 34, 48
    top = 28 if title else 0
    columns = columns or len(panels)
    rows = -(-len(panels) // columns)
    W = panel_width * columns
    H = panel_height * rows + top
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>')

    for p_idx, panel in enumerate(panels):
        x0 = (p_idx % columns) * panel_width + ml
        y0 = top + (p_idx // columns) * panel_height + mt
        pw = panel_width - ml - mr
        ph = panel_height - mt - mb
        (xa, xb), (ya, yb) = _limits(panel)

        def sx(v):
            return x0 + (v - xa) / (xb - xa) * pw

        def sy(v):
            return y0 + ph - (v - ya) / (yb - ya) * ph

        out.append(f'<text x="{x0 + pw / 2}" y="{y0 - 10}" text-anchor="middle" font-size="12">'
                   f'{escape(panel.title)}</text>')
        out.append(f'<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>')
        for tx in _ticks(xa, xb):
            out.append(f'<line x1="{sx(tx):.2f}" y1="{y0 + ph}" x2="{sx(tx):.2f}" y2="{y0 + ph + 4}" stroke="#333"/>')
            out.append(f'<text x="{sx(tx):.2f}" y="{y0 + ph + 16}" text-anchor="middle">{_fmt(tx)}</text>')
        for ty in _ticks(ya, yb):
            out.append(f'<line x1="{x0 - 4}" y1="{sy(ty):.2f}" x2="{x0}" y2="{sy(ty):.2f}" stroke="#333"/>')
            out.append(f'<text x="{x0 - 6}" y="{sy(ty) + 4:.2f}" text-anchor="end">{_fmt(ty)}</text>')
        if panel.xlabel:
            out.append(f'<text x="{x0 + pw / 2}" y="{y0 + ph + 34}" text-anchor="middle">{escape(panel.xlabel)}</text>')
        if panel.ylabel:
            out.append(f'<text x="{x0 - 44}" y="{y0 + ph / 2}" text-anchor="middle" '
                       f'transform="rotate(-90 {x0 - 44} {y0 + ph / 2})">{escape(panel.ylabel)}</text>')

        out.append(f'<clipPath id="clip{p_idx}"><rect x="{x0}" y="{y0}" width="{pw}" height="{ph}"/></clipPath>')
        out.append(f'<g clip-path="url(#clip{p_idx})">')
        legend = []
        for s_idx, s in enumerate(panel.series):
            color = s.color or PALETTE[s_idx % len(PALETTE)]
            if s.kind == "segment":
                for i in range(0, len(s.x) - 1, 2):
                    out.append(f'<line x1="{sx(s.x[i]):.2f}" y1="{sy(s.y[i]):.2f}" x2="{sx(s.x[i + 1]):.2f}" '
                               f'y2="{sy(s.y[i + 1]):.2f}" stroke="{color}" stroke-width="{s.width}"/>')
            else:
                pts = []
                for i, (a, b) in enumerate(zip(s.x, s.y)):
                    if s.kind == "step" and i > 0:
                        pts.append(f"{sx(a):.2f},{sy(s.y[i - 1]):.2f}")
                    pts.append(f"{sx(a):.2f},{sy(b):.2f}")
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="{s.width}" points="{" ".join(pts)}"/>')
            if s.legend:
                legend.append((s.label, color))
        out.append("</g>")
        legend = legend[:12]
        for i, (label, color) in enumerate(legend):
            # lower right: empty for the CDF-shaped curves drawn here
            ly = y0 + ph - 8 - 14 * (len(legend) - 1 - i)
            out.append(f'<rect x="{x0 + pw - 124}" y="{ly - 11}" width="120" height="14" fill="white" '
                       f'fill-opacity="0.8"/>')
            out.append(f'<line x1="{x0 + pw - 120}" y1="{ly - 4}" x2="{x0 + pw - 104}" y2="{ly - 4}" '
                       f'stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{x0 + pw - 100}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")

    with open(path.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["panel", "series", "point", "x", "y"])
        for panel in panels:
            for s in panel.series:
                for i, (a, b) in enumerate(zip(s.x, s.y)):
                    w.writerow([panel.title, s.label, i, repr(float(a)), repr(float(b))])
    return path
