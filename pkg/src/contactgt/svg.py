"""Dependency-free SVG charts for experiment results."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from .harness import ResultRow, best_over_tau

PLOT_KINDS = ("success_vs_m", "fnr_vs_fpr")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")

WIDTH, HEIGHT = 640, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 160, 30, 60


def _label(decoder, m, rho, multi_m, multi_rho):
    parts = [decoder]
    if multi_m:
        parts.append(f"M={m}")
    if multi_rho:
        parts.append(f"rho={rho:g}")
    return " ".join(parts)


def _series(rows: list[ResultRow], kind: str):
    """Ordered ``(label, [(x, y), ...])`` pairs for the requested chart."""
    ms = {r.m for r in rows}
    rhos = {r.rho for r in rows}
    out = []
    if kind == "success_vs_m":
        groups: dict[tuple, list] = {}
        for r in best_over_tau(rows, "success"):
            groups.setdefault((r.decoder, r.rho), []).append((r.m, r.success_rate))
        for (decoder, rho), pts in sorted(groups.items()):
            out.append((_label(decoder, None, rho, False, len(rhos) > 1), sorted(pts)))
    else:
        groups = {}
        for r in sorted(rows, key=lambda r: (r.decoder, r.m, r.rho, r.tau)):
            if math.isnan(r.avg_fnr) or math.isnan(r.avg_fpr):
                continue
            groups.setdefault((r.decoder, r.m, r.rho), []).append((r.avg_fpr, r.avg_fnr))
        for (decoder, m, rho), pts in groups.items():
            out.append((_label(decoder, m, rho, len(ms) > 1, len(rhos) > 1), pts))
    return out


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / n for k in range(n + 1)]


def render_svg(rows, kind: str) -> str:
    if kind not in PLOT_KINDS:
        raise ValueError(f"kind must be one of {PLOT_KINDS}")
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to plot")
    series = _series(rows, kind)
    if not any(pts for _, pts in series):
        raise ValueError("no plottable points")

    if kind == "success_vs_m":
        xs = [x for _, pts in series for x, _ in pts]
        x_lo, x_hi = min(xs), max(xs)
        if x_lo == x_hi:
            x_lo, x_hi = x_lo - 1, x_hi + 1
        y_lo, y_hi = 0.0, 1.0
        x_title, y_title, title = "number of tests M", "success probability", "Success probability vs. M"
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
        x_title, y_title, title = "FPR", "FNR", "FNR vs. FPR"

    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" data-kind="{kind}" '
        f'data-x-range="{x_lo:g} {x_hi:g}" data-y-range="{y_lo:g} {y_hi:g}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        x = sx(t)
        out.append(f'<line x1="{x:.1f}" y1="{TOP + ph}" x2="{x:.1f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{TOP + ph + 18}" text-anchor="middle" font-size="11">{t:g}</text>')
    for t in _ticks(y_lo, y_hi):
        y = sy(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{y:.1f}" x2="{LEFT}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.1f}" text-anchor="end" font-size="11">{t:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" font-size="12">{x_title}</text>')
    out.append(
        f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{y_title}</text>'
    )

    for k, (label, pts) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        lab = escape(label, {'"': "&quot;"})
        out.append(f'<g class="series" data-label="{lab}">')
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline class="curve" points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle class="marker" cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" fill="{color}"/>')
        out.append("</g>")
        ly = TOP + 10 + 18 * k
        lx = LEFT + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}" font-size="11">{lab}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(rows, kind: str, path) -> None:
    Path(path).write_text(render_svg(rows, kind), encoding="utf-8", newline="\n")
