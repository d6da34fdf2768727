"""Minimal standalone SVG line charts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence
from xml.sax.saxutils import escape, quoteattr

DASH = {"solid": None, "dashed": "8 4", "dotted": "2 3"}
PALETTE = ("#2ca02c", "#1f77b4", "#8c564b", "#d62728", "#9467bd", "#ff7f0e", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2")

W, H = 720, 360
LEFT, RIGHT, TOP, BOTTOM = 70, 70, 30, 50


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    style: str = "solid"
    color: Optional[str] = None
    right_axis: bool = False


def _span(values):
    values = [float(v) for v in values]
    lo, hi = min(values), max(values)
    if hi == lo:
        pad = abs(hi) * 0.05 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _num(v):
    return f"{v:.4g}"


def line_chart(series: Sequence[Series], title: str, xlabel: str, ylabel: str, y2label: Optional[str] = None) -> str:
    if not series:
        raise ValueError("chart needs at least one series")
    for s in series:
        if len(s.x) != len(s.y) or not len(s.x):
            raise ValueError(f"series {s.label!r}: x and y must be non-empty and the same length")
        if s.style not in DASH:
            raise ValueError(f"series {s.label!r}: unknown style {s.style!r}")
    left = [s for s in series if not s.right_axis]
    right = [s for s in series if s.right_axis]
    xlo, xhi = _span([v for s in series for v in s.x])
    y1 = _span([v for s in left for v in s.y]) if left else (0.0, 1.0)
    y2 = _span([v for s in right for v in s.y]) if right else None
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(x):
        return LEFT + (float(x) - xlo) / (xhi - xlo) * pw

    def py(y, rng):
        return TOP + ph - (float(y) - rng[0]) / (rng[1] - rng[0]) * ph

    out: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for t in _ticks(xlo, xhi):
        out.append(f'<text x="{px(t):.1f}" y="{TOP + ph + 15}" text-anchor="middle">{_num(t)}</text>')
    for t in _ticks(*y1):
        out.append(f'<text x="{LEFT - 5}" y="{py(t, y1) + 4:.1f}" text-anchor="end">{_num(t)}</text>')
    if y2:
        for t in _ticks(*y2):
            out.append(f'<text x="{LEFT + pw + 5}" y="{py(t, y2) + 4:.1f}">{_num(t)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(16 {TOP + ph / 2:.1f}) rotate(-90)" text-anchor="middle">{escape(ylabel)}</text>')
    if y2 and y2label:
        out.append(f'<text transform="translate({W - 14} {TOP + ph / 2:.1f}) rotate(90)" text-anchor="middle">{escape(y2label)}</text>')

    for k, s in enumerate(series):
        color = s.color or PALETTE[k % len(PALETTE)]
        rng = y2 if s.right_axis else y1
        pts = " ".join(f"{px(x):.2f},{py(y, rng):.2f}" for x, y in zip(s.x, s.y))
        dash = DASH[s.style]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(
            f'<polyline data-series={quoteattr(s.label)} fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{pts}"/>'
        )
        ly = TOP + 12 + 14 * k
        lx = LEFT + 8
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{lx + 25}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, *args, **kwargs) -> None:
    with open(path, "w") as fh:
        fh.write(line_chart(*args, **kwargs))
