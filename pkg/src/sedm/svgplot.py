"""Tiny dependency-free SVG emitters for the report plots.

Every data row becomes exactly one polyline point (or one bar), so the
plots stay auditable against the exported tables.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_W, _H = 860, 520
_MARGIN = 70


def _scale(vmin, vmax, lo, hi):
    span = vmax - vmin if vmax > vmin else 1.0
    return lambda v: lo + (v - vmin) / span * (hi - lo)


def _axes(title: str, xlabel: str, ylabel: str, xticks, yticks, sx, sy) -> list[str]:
    parts = [
        f'<text x="{_W / 2}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN / 2}" y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN / 2}" x2="{_MARGIN}" y2="{_H - _MARGIN}" stroke="black"/>',
        f'<text x="{_W / 2}" y="{_H - 18}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="20" y="{_H / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 20 {_H / 2})">{escape(ylabel)}</text>',
    ]
    for v in xticks:
        x = sx(v)
        parts.append(f'<line x1="{x:.2f}" y1="{_H - _MARGIN}" x2="{x:.2f}" y2="{_H - _MARGIN + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{x:.2f}" y="{_H - _MARGIN + 20}" text-anchor="middle" font-size="11">{v:g}</text>'
        )
    for v in yticks:
        y = sy(v)
        parts.append(f'<line x1="{_MARGIN - 5}" y1="{y:.2f}" x2="{_MARGIN}" y2="{y:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{_MARGIN - 8}" y="{y:.2f}" text-anchor="end" font-size="11" dy="4">{v:g}</text>'
        )
    return parts


def _ticks(vmin, vmax, count=6):
    if vmax <= vmin:
        return [vmin]
    step = (vmax - vmin) / (count - 1)
    return [vmin + i * step for i in range(count)]


def line_plot(series: dict[str, tuple[list, list]], path, title="", xlabel="",
              ylabel="", guides: dict[str, float] | None = None) -> None:
    """One polyline per named series; series values are (xs, ys). Guides are
    horizontal reference lines (drawn as <line>, not polylines)."""
    guides = guides or {}
    all_x = [x for xs, _ in series.values() for x in xs]
    all_y = [y for _, ys in series.values() for y in ys] + list(guides.values())
    sx = _scale(min(all_x), max(all_x), _MARGIN, _W - _MARGIN / 2)
    sy = _scale(min(all_y), max(all_y), _H - _MARGIN, _MARGIN / 2)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    parts += _axes(title, xlabel, ylabel, _ticks(min(all_x), max(all_x)),
                   _ticks(min(all_y), max(all_y)), sx, sy)
    for k, (label, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        points = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>')
        parts.append(
            f'<text x="{_W - _MARGIN / 2 - 120}" y="{_MARGIN / 2 + 18 * k}" font-size="13" '
            f'fill="{color}">{escape(label)}</text>'
        )
    for j, (label, yv) in enumerate(guides.items()):
        y = sy(yv)
        parts.append(
            f'<line x1="{_MARGIN}" y1="{y:.2f}" x2="{_W - _MARGIN / 2}" y2="{y:.2f}" '
            'stroke="#555" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
        parts.append(
            f'<text x="{_W - _MARGIN / 2 - 120}" y="{_MARGIN / 2 + 18 * (len(series) + j)}" '
            f'font-size="13" fill="#555">{escape(label)}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def bar_chart(labels: list[str], values: list[float], path, title="", ylabel="") -> None:
    """One rect per (label, value)."""
    vmax = max(values + [0.0])
    sy = _scale(0.0, vmax, _H - _MARGIN, _MARGIN / 2)
    n = len(labels)
    slot = (_W - 1.5 * _MARGIN) / max(n, 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    parts += _axes(title, "", ylabel, [], _ticks(0.0, vmax), None, sy)
    for k, (label, v) in enumerate(zip(labels, values)):
        x = _MARGIN + slot * (k + 0.2)
        y = sy(v)
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{slot * 0.6:.2f}" '
            f'height="{_H - _MARGIN - y:.2f}" fill="{PALETTE[k % len(PALETTE)]}"/>'
        )
        parts.append(
            f'<text x="{x + slot * 0.3:.2f}" y="{_H - _MARGIN + 20}" text-anchor="middle" '
            f'font-size="12">{escape(label)}</text>'
        )
        parts.append(
            f'<text x="{x + slot * 0.3:.2f}" y="{y - 6:.2f}" text-anchor="middle" '
            f'font-size="11">{v:.3f}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
