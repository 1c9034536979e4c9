"""Minimal native SVG polyline plots (no plotting dependency)."""

from __future__ import annotations

import numpy as np

__all__ = ["polyline_svg"]

_COLORS = ["#1f6fb4", "#d1495b", "#2e8b57", "#8c5e99", "#c88a1f"]


def polyline_svg(path, x, series: dict, title: str = "",
                 xlabel: str = "", ylabel: str = "",
                 width: int = 640, height: int = 420) -> None:
    """Write a polyline plot of the named series against x."""
    x = np.asarray(x, dtype=float)
    ml, mr, mt, mb = 62, 18, 34, 46
    pw, ph = width - ml - mr, height - mt - mb
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    ymin = min(v.min() for v in ys.values())
    ymax = max(v.max() for v in ys.values())
    if ymax - ymin < 1e-15:
        ymin, ymax = ymin - 0.5, ymax + 0.5
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad
    xmin, xmax = float(x.min()), float(x.max())

    def sx(v):
        return ml + (v - xmin) / (xmax - xmin) * pw

    def sy(v):
        return mt + (ymax - v) / (ymax - ymin) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#444" stroke-width="1"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = xmin + frac * (xmax - xmin)
        yv = ymin + frac * (ymax - ymin)
        parts.append(f'<line x1="{sx(xv):.1f}" y1="{mt + ph}" x2="{sx(xv):.1f}" '
                     f'y2="{mt + ph + 4}" stroke="#444"/>')
        parts.append(f'<text x="{sx(xv):.1f}" y="{mt + ph + 18}" font-size="11" '
                     f'text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<line x1="{ml - 4}" y1="{sy(yv):.1f}" x2="{ml}" '
                     f'y2="{sy(yv):.1f}" stroke="#444"/>')
        parts.append(f'<text x="{ml - 8}" y="{sy(yv) + 4:.1f}" font-size="11" '
                     f'text-anchor="end">{yv:.4g}</text>')
    for i, (name, y) in enumerate(ys.items()):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        color = _COLORS[i % len(_COLORS)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.6"/>')
        parts.append(f'<text x="{ml + 10 + 120 * i}" y="{mt - 10}" font-size="12" '
                     f'fill="{color}">{name}</text>')
    if title:
        parts.append(f'<text x="{width / 2:.0f}" y="18" font-size="14" '
                     f'text-anchor="middle">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{ml + pw / 2:.0f}" y="{height - 10}" font-size="12" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{mt + ph / 2:.0f}" font-size="12" '
                     f'text-anchor="middle" transform="rotate(-90 16 {mt + ph / 2:.0f})">'
                     f'{ylabel}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
