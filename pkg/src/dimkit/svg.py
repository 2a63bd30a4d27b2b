"""Minimal SVG line charts for theta curves.

Only polylines, axes, ticks and labels are emitted. Coordinates are printed
with fixed precision so identical inputs give byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 480, 360
MARGIN = dict(left=56, right=16, top=32, bottom=44)
PALETTE = {"value": "#1f4fb4", "bound": "#1f4fb4", "numeric": "#c0392b", "alt": "#2e8b57"}


@dataclass
class Series:
    """One polyline. ``style`` is ``solid``, ``dashed`` or ``points``."""

    label: str
    x: np.ndarray
    y: np.ndarray
    style: str = "solid"
    color: str = PALETTE["value"]

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape:
            raise ValueError("x and y differ in length")
        if self.style not in ("solid", "dashed", "points"):
            raise ValueError(f"unknown style {self.style!r}")


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    return np.arange(np.ceil(lo / step - 1e-9) * step, hi + step * 1e-9, step)


def _num(v: float) -> str:
    return f"{v:.2f}"


def line_chart(
    series: Sequence[Series],
    title: str = "",
    xlabel: str = "theta",
    ylabel: str = "dimension",
    markers: Sequence[float] = (),
    ylim: tuple[float, float] | None = None,
) -> str:
    """Render ``series`` over ``x`` in ``[0, 1]``; ``markers`` are vertical guide lines.

    NaN values split a polyline into separate pieces.
    """
    finite = np.concatenate([s.y[np.isfinite(s.y)] for s in series] or [np.zeros(0)])
    if ylim is None:
        lo = float(np.floor(finite.min() * 10) / 10) if finite.size else 0.0
        hi = float(np.ceil(finite.max() * 10) / 10) if finite.size else 1.0
        ylim = (lo, hi if hi > lo else lo + 1.0)
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def sx(v):
        return x0 + (x1 - x0) * v

    def sy(v):
        return y0 + (y1 - y0) * (v - ylim[0]) / (ylim[1] - ylim[0])

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')
    out.append(f'<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>'
               f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>')
    for t in _ticks(0.0, 1.0):
        out.append(f'<line x1="{_num(sx(t))}" y1="{y0}" x2="{_num(sx(t))}" y2="{y0 + 4}" stroke="black"/>'
                   f'<text x="{_num(sx(t))}" y="{y0 + 16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(*ylim):
        out.append(f'<line x1="{x0 - 4}" y1="{_num(sy(t))}" x2="{x0}" y2="{_num(sy(t))}" stroke="black"/>'
                   f'<text x="{x0 - 6}" y="{_num(sy(t) + 4)}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>')
    for m in markers:
        out.append(f'<line class="marker" x1="{_num(sx(m))}" y1="{y0}" x2="{_num(sx(m))}" y2="{y1}" '
                   f'stroke="gray" stroke-width="0.8" stroke-dasharray="2 3"/>')
    for s in series:
        ok = np.isfinite(s.y)
        if s.style == "points":
            dots = "".join(
                f'<circle cx="{_num(sx(a))}" cy="{_num(sy(b))}" r="2.2"/>' for a, b in zip(s.x[ok], s.y[ok])
            )
            out.append(f'<g fill="{s.color}"><title>{escape(s.label)}</title>{dots}</g>')
            continue
        dash = ' stroke-dasharray="6 4"' if s.style == "dashed" else ""
        # split at NaN so missing samples leave gaps
        breaks = np.flatnonzero(~ok)
        for piece in np.split(np.arange(s.x.size), breaks):
            piece = piece[ok[piece]]
            if piece.size == 0:
                continue
            pts = " ".join(f"{_num(sx(a))},{_num(sy(b))}" for a, b in zip(s.x[piece], s.y[piece]))
            out.append(f'<polyline fill="none" stroke="{s.color}" stroke-width="1.6"{dash} points="{pts}">'
                       f'<title>{escape(s.label)}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path: str | Path, series: Sequence[Series], **kwargs) -> Path:
    path = Path(path)
    path.write_text(line_chart(series, **kwargs))
    return path
