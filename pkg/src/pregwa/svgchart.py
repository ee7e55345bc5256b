"""Dependency-free SVG line charts with the plotted data embedded as a comment."""

from __future__ import annotations

from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
MARKERS = ["circle", "square", "diamond", "triangle"]


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / n
    return [lo + k * step for k in range(n + 1)]


def _marker(kind, x, y, color):
    if kind == "square":
        return f'<rect x="{x - 3:.2f}" y="{y - 3:.2f}" width="6" height="6" fill="{color}"/>'
    if kind == "diamond":
        return f'<polygon points="{x:.2f},{y - 4:.2f} {x + 4:.2f},{y:.2f} {x:.2f},{y + 4:.2f} {x - 4:.2f},{y:.2f}" fill="{color}"/>'
    if kind == "triangle":
        return f'<polygon points="{x:.2f},{y - 4:.2f} {x + 4:.2f},{y + 3:.2f} {x - 4:.2f},{y + 3:.2f}" fill="{color}"/>'
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>'


def line_chart(series: dict[str, list[tuple[float, float | None]]], xlabel: str, ylabel: str,
               title: str = "", width: int = 640, height: int = 420) -> str:
    """Render ``{label: [(x, y), ...]}``; ``None`` y values leave a gap."""
    left, right, top, bottom = 70, 170, 40, 55
    pw, ph = width - left - right, height - top - bottom
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts if y is not None]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    y0, y1 = 0.0, (max(ys) * 1.1 if ys and max(ys) > 0 else 1.0)

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    rows = ["label,x,y"] + [f"{lab},{x:g},{'' if y is None else f'{y:.10g}'}"
                            for lab, pts in series.items() for x, y in pts]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        "<!-- data\n" + "\n".join(rows).replace("--", "- -") + "\n-->",
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for v in _ticks(x0, x1):
        out.append(f'<line x1="{sx(v):.2f}" y1="{top + ph}" x2="{sx(v):.2f}" y2="{top + ph + 5}" stroke="#333"/>')
        out.append(f'<text x="{sx(v):.2f}" y="{top + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{v:.3g}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{sy(v):.2f}" x2="{left + pw}" y2="{sy(v):.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 8}" y="{sy(v) + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text transform="translate(18,{top + ph / 2:.1f}) rotate(-90)" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(ylabel)}</text>')
    for k, (label, pts) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        marker = MARKERS[k % len(MARKERS)]
        segment = []
        for x, y in pts + [(None, None)]:
            if y is None:
                if len(segment) > 1:
                    path = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in segment)
                    out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
                segment = []
                continue
            segment.append((x, y))
            out.append(_marker(marker, sx(x), sy(y), color))
        ly = top + 14 + 20 * k
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(_marker(marker, left + pw + 24, ly, color))
        out.append(f'<text x="{left + pw + 42}" y="{ly + 4}" font-family="sans-serif" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
