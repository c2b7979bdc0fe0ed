"""Static SVG charts: value-vs-width lines, RB decay curves and a correlation heatmap."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")
W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 55


def _svg(body: list[str], width: int = W, height: int = H) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    )
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>', *body, "</svg>"]) + "\n"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= n:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [round(start + i * step, 12) for i in range(int((hi - start) / step) + 1)]


def line_chart(
    series: Mapping[str, Sequence[tuple[float, float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
) -> str:
    """One polyline with markers per series; points with non-finite y are skipped."""
    pts = {k: [(float(x), float(y)) for x, y in v if y is not None and math.isfinite(y)] for k, v in series.items()}
    xs = [x for v in pts.values() for x, _ in v]
    ys = [y for v in pts.values() for _, y in v]
    if not xs:
        return _svg([f'<text x="{W / 2}" y="{H / 2}" text-anchor="middle">no data</text>'])
    fx = (lambda x: math.log10(x)) if logx else (lambda x: x)
    x0, x1 = fx(min(xs)), fx(max(xs))
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    y0, y1 = min(0.0, min(ys)), max(ys)
    if y1 == y0:
        y1 = y0 + 1
    y1 += 0.05 * (y1 - y0)
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(x):
        return LEFT + (fx(x) - x0) / (x1 - x0) * pw

    def py(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    body = [
        f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
        f'<text x="{LEFT + pw / 2}" y="{H - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="18" y="{TOP + ph / 2}" text-anchor="middle" transform="rotate(-90 18 {TOP + ph / 2})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(y0, y1):
        body.append(f'<line x1="{LEFT - 4}" y1="{py(t):.1f}" x2="{LEFT}" y2="{py(t):.1f}" stroke="black"/>')
        body.append(f'<text x="{LEFT - 7}" y="{py(t) + 4:.1f}" text-anchor="end">{t:g}</text>')
    xticks = sorted(set(xs)) if len(set(xs)) <= 12 else [10**t if logx else t for t in _ticks(x0, x1)]
    for t in xticks:
        body.append(f'<line x1="{px(t):.1f}" y1="{TOP + ph}" x2="{px(t):.1f}" y2="{TOP + ph + 4}" stroke="black"/>')
        body.append(f'<text x="{px(t):.1f}" y="{TOP + ph + 17}" text-anchor="middle">{t:g}</text>')
    for i, (name, v) in enumerate(pts.items()):
        color = PALETTE[i % len(PALETTE)]
        v = sorted(v)
        if len(v) > 1:
            path = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in v)
            body.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        body.extend(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="{color}"/>' for x, y in v)
        ly = TOP + 10 + 16 * i
        body.append(f'<rect x="{W - RIGHT + 12}" y="{ly - 8}" width="10" height="10" fill="{color}"/>')
        body.append(f'<text x="{W - RIGHT + 27}" y="{ly + 1}">{escape(str(name))[:22]}</text>')
    return _svg(body)


def heatmap(labels: Sequence[str], matrix, title: str = "", vmin: float = -1.0, vmax: float = 1.0) -> str:
    """Square matrix on a blue-white-red scale; NaN cells are grey."""
    m = np.asarray(matrix, dtype=float)
    n = len(labels)
    cell = 48
    left, top = 150, 50
    width, height = left + n * cell + 20, top + n * cell + 130

    def color(v):
        if not math.isfinite(v):
            return "#cccccc"
        t = min(max((v - vmin) / (vmax - vmin), 0.0), 1.0) * 2 - 1
        a = int(255 * (1 - abs(t)))
        return f"#ff{a:02x}{a:02x}" if t > 0 else f"#{a:02x}{a:02x}ff"

    body = [f'<text x="{width / 2}" y="25" text-anchor="middle" font-size="14">{escape(title)}</text>']
    for i in range(n):
        y = top + i * cell
        body.append(f'<text x="{left - 6}" y="{y + cell / 2 + 4}" text-anchor="end">{escape(labels[i])}</text>')
        x = left + i * cell + cell / 2
        yb = top + n * cell + 8
        body.append(f'<text x="{x}" y="{yb}" transform="rotate(45 {x} {yb})">{escape(labels[i])}</text>')
        for j in range(n):
            v = m[i, j]
            body.append(f'<rect x="{left + j * cell}" y="{y}" width="{cell}" height="{cell}" fill="{color(v)}" stroke="white"/>')
            if math.isfinite(v):
                body.append(f'<text x="{left + j * cell + cell / 2}" y="{y + cell / 2 + 4}" text-anchor="middle">{v:.2f}</text>')
    return _svg(body, width, height)


def decay_curves(results: Mapping, limit: int = 8) -> str:
    """Per-subsystem success probability against layer count from an EPLG result."""
    series = {}
    for sub in results.get("subsystems", [])[:limit]:
        label = "-".join(str(q) for q in sub["qubits"])
        series[label] = [(int(k), v) for k, v in sub["success"].items()]
    return line_chart(series, "Direct RB decay", "layers", "success probability")


def width_chart(points: Mapping[str, Mapping[int, float]], title: str = "Benchmark value vs width", ylabel: str = "value") -> str:
    """``points`` maps a series label to {width: value}."""
    return line_chart({k: sorted(v.items()) for k, v in points.items()}, title, "width (qubits)", ylabel)
