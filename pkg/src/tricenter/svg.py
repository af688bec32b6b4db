"""Minimal deterministic SVG line plots.

Output depends only on the data, so identical inputs give byte-identical
files.
"""

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 480
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, n=5):
    return np.linspace(lo, hi, n)


def line_plot(series, xlabel, ylabel, title="", equal_aspect=False):
    """Render ``series`` (a list of ``(label, x, y)``) as an SVG document."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    if equal_aspect:
        span = max((x1 - x0) / pw, (y1 - y0) / ph)
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        x0, x1 = cx - 0.5 * span * pw, cx + 0.5 * span * pw
        y0, y1 = cy - 0.5 * span * ph, cy + 0.5 * span * ph

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<text x="{_fmt(px(t))}" y="{HEIGHT - MARGIN + 18}" font-size="11" '
                   f'text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN - 6}" y="{_fmt(py(t) + 4)}" font-size="11" '
                   f'text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" font-size="13" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{HEIGHT / 2}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="30" font-size="15" '
                   f'text-anchor="middle">{escape(title)}</text>')
    for k, (label, x, y) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        if label:
            out.append(f'<text x="{WIDTH - MARGIN - 6}" y="{MARGIN + 16 + 16 * k}" font-size="12" '
                       f'text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
