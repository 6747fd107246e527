"""Hand-rolled SVG line chart for growth scans (no plotting dependency)."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

__all__ = ["render_scan_svg", "emit_plot"]

WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 30, 50, 60


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_scan_svg(scan, title: str = "best D_N vs log2 N") -> str:
    """SVG text for a GrowthScan; byte-identical for identical input."""
    xs = [math.log2(n) for n in scan.N_grid]
    ys = [float(v) for v in scan.values]
    if not xs:
        raise ValueError("cannot plot an empty scan")
    fit_x = np.linspace(min(xs), max(xs), 64) if len(xs) > 1 else np.array(xs)
    fit_y = [float(v) for v in np.atleast_1d(scan.fit.predict(2.0**fit_x))]

    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    y_all = ys + fit_y
    y_lo, y_hi = min(0.0, min(y_all)), max(y_all)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    y_hi += 0.05 * (y_hi - y_lo)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="28" text-anchor="middle" font-family="sans-serif" font-size="16">{_esc(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for n, x in zip(scan.N_grid, xs):
        out.append(f'<line x1="{_fmt(px(x))}" y1="{TOP + ph}" x2="{_fmt(px(x))}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_fmt(px(x))}" y="{TOP + ph + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">{n}</text>'
        )
    for j in range(5):
        y = y_lo + j * (y_hi - y_lo) / 4
        out.append(
            f'<text x="{LEFT - 8}" y="{_fmt(py(y) + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">{y:.3g}</text>'
        )
        out.append(f'<line x1="{LEFT}" y1="{_fmt(py(y))}" x2="{LEFT + pw}" y2="{_fmt(py(y))}" stroke="#dddddd"/>')
    out.append(
        f'<text x="{LEFT + pw / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" font-size="12">N (log2 scale)</text>'
    )
    if len(fit_x) > 1:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(fit_x, fit_y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#d62728" stroke-dasharray="6,4"/>')
    if len(xs) > 1:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="2"/>')
    for x, y in zip(xs, ys):
        out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="4" fill="#1f77b4"/>')
    label = f"fit: {scan.fit.model} (R^2 = {scan.fit.r_squared:.4f})"
    out.append(
        f'<text x="{LEFT + pw - 4}" y="{TOP + 14}" text-anchor="end" font-family="sans-serif" font-size="12" fill="#d62728">{_esc(label)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(scan, path) -> Path:
    """Write the scan chart to ``path``; raises OSError if unwritable."""
    path = Path(path)
    path.write_text(render_scan_svg(scan), encoding="utf-8")
    return path
