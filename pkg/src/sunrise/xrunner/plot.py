"""Deterministic SVG learning curves: mean line and population-std band across seeds."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .train import read_metrics

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
           "#e377c2")
WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 55


def curve_band(files: Sequence, column: str = "eval_return"):
    """Union step grid, mean and population std of ``column`` over every (file, seed) curve.

    Curves with differing step grids are linearly interpolated onto the union
    (held constant past their ends).
    """
    curves = []
    for f in files:
        for cols in read_metrics(f).values():
            if len(cols.get("step", [])):
                curves.append((cols["step"], cols[column]))
    if not curves:
        raise ValueError("no metric rows to plot")
    grid = np.unique(np.concatenate([s for s, _ in curves]))
    ys = np.stack([np.interp(grid, s, y) for s, y in curves])
    return grid, ys.mean(axis=0), ys.std(axis=0)


def _num(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float) -> str:
    return f"{v:.4g}"


def emit_plot(groups, out_path, title: str = "evaluation return",
              column: str = "eval_return") -> Path:
    """Write one band and line per configuration.

    ``groups`` maps a label to the metric files of that configuration; a plain
    sequence of files makes one group per file labelled by its stem.
    """
    if isinstance(groups, Mapping):
        items = [(str(k), list(v)) for k, v in groups.items()]
    else:
        items = [(Path(f).stem, [f]) for f in groups]
    if not items or not any(files for _, files in items):
        raise ValueError("emit_plot needs at least one metrics file")
    bands = [(label, *curve_band(files, column)) for label, files in items if files]

    x_max = max(float(g[-1]) for _, g, _, _ in bands)
    x_min = min(float(g[0]) for _, g, _, _ in bands)
    y_lo = min(float((m - s).min()) for _, _, m, s in bands)
    y_hi = max(float((m + s).max()) for _, _, m, s in bands)
    if x_max == x_min:
        x_min, x_max = x_min - 1.0, x_max + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x_min) / (x_max - x_min) * pw

    def py(y):
        return TOP + (y_hi - y) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
           f'<text x="{LEFT + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">'
           f'{escape(title)}</text>']
    # axes and ticks
    out.append(f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" '
               'stroke="#000000"/>')
    out.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="#000000"/>')
    for v in np.linspace(x_min, x_max, 5):
        x = px(v)
        out.append(f'<line x1="{_num(x)}" y1="{TOP + ph}" x2="{_num(x)}" y2="{TOP + ph + 5}" '
                   'stroke="#000000"/>')
        out.append(f'<text x="{_num(x)}" y="{TOP + ph + 18}" text-anchor="middle">'
                   f'{_tick(v)}</text>')
    for v in np.linspace(y_lo, y_hi, 5):
        y = py(v)
        out.append(f'<line x1="{LEFT - 5}" y1="{_num(y)}" x2="{LEFT}" y2="{_num(y)}" '
                   'stroke="#000000"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_num(y + 4)}" text-anchor="end">{_tick(v)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">'
               'environment steps</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.2f})">{escape(column)}</text>')
    # bands, lines, legend
    for k, (label, grid, mean, std) in enumerate(bands):
        color = PALETTE[k % len(PALETTE)]
        upper = [f"{_num(px(x))},{_num(py(y))}" for x, y in zip(grid, mean + std)]
        lower = [f"{_num(px(x))},{_num(py(y))}" for x, y in zip(grid[::-1], (mean - std)[::-1])]
        out.append(f'<polygon class="band" points="{" ".join(upper + lower)}" fill="{color}" '
                   'fill-opacity="0.2" stroke="none"/>')
        line = " ".join(f"{_num(px(x))},{_num(py(y))}" for x, y in zip(grid, mean))
        out.append(f'<polyline class="mean" points="{line}" fill="none" stroke="{color}" '
                   'stroke-width="2"/>')
        ly = TOP + 10 + 20 * k
        lx = LEFT + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" '
                   'stroke-width="3"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return out_path
