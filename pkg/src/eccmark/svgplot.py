"""Tiny dependency-free SVG figures.

Curves are drawn against grid position (even spacing per grid point, tick
labels carry the epsilon values) so logarithmically stretched grids stay
readable.  Envelope tests use the report colors from the simulation plots:
dashed blue for the geometric null, solid red for random labeling.
"""
from __future__ import annotations

import numpy as np

STYLE = {
    "csr_intensity": ("#1f77b4", "6,4"),   # blue, dashed
    "random_labeling": ("#d62728", None),  # red, solid
}


class _Canvas:
    def __init__(self, width, height):
        self.width = width
        self.height = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
        ]

    def polyline(self, pts, color, width=1.5, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"{d}/>'
        )

    def polygon(self, pts, fill, opacity=0.25):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.parts.append(f'<polygon points="{coords}" fill="{fill}" fill-opacity="{opacity}"/>')

    def circle(self, x, y, r, fill, stroke="none"):
        self.parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="{fill}" stroke="{stroke}"/>'
        )

    def line(self, x1, y1, x2, y2, color="#444", width=1.0):
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{color}" stroke-width="{width}"/>'
        )

    def text(self, x, y, s, size=10, anchor="middle", color="#222"):
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}" '
            f'fill="{color}" font-family="sans-serif">{s}</text>'
        )

    def group(self, tx, ty):
        self.parts.append(f'<g transform="translate({tx:.2f},{ty:.2f})">')

    def end_group(self):
        self.parts.append("</g>")

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.parts) + "\n</svg>\n")


class _Axes:
    """Maps (grid index, value) to pixels inside a margin box."""

    def __init__(self, k, vmin, vmax, width, height, margin=45):
        self.k = max(k - 1, 1)
        pad = 0.05 * max(vmax - vmin, 1e-9)
        self.vmin, self.vmax = vmin - pad, vmax + pad
        self.m = margin
        self.w = width - 2 * margin
        self.h = height - 2 * margin

    def x(self, t):
        return self.m + self.w * (t / self.k)

    def y(self, v):
        return self.m + self.h * (1 - (v - self.vmin) / (self.vmax - self.vmin))


def _draw_envelope(cv, ax, report, color, dash):
    band = [(ax.x(t), ax.y(v)) for t, v in enumerate(report.upper)]
    band += [(ax.x(t), ax.y(v)) for t, v in reversed(list(enumerate(report.lower)))]
    cv.polygon(band, color)
    cv.polyline([(ax.x(t), ax.y(v)) for t, v in enumerate(report.observed)],
                color, 1.8, dash)


def _draw_axes(cv, ax, grid, ylabel="chi"):
    cv.line(ax.m, ax.m, ax.m, ax.m + ax.h)
    cv.line(ax.m, ax.m + ax.h, ax.m + ax.w, ax.m + ax.h)
    k = len(grid)
    for t in range(0, k, max(k // 5, 1)):
        cv.text(ax.x(t), ax.m + ax.h + 14, f"{grid[t]:.3g}", 9)
        cv.line(ax.x(t), ax.m + ax.h, ax.x(t), ax.m + ax.h + 3)
    for v in np.linspace(ax.vmin, ax.vmax, 5):
        cv.text(ax.m - 6, ax.y(v) + 3, f"{v:.3g}", 9, anchor="end")
    cv.text(ax.m + ax.w / 2, ax.m + ax.h + 30, "epsilon (grid points)", 10)
    cv.text(12, ax.m + ax.h / 2, ylabel, 10)


def envelope_figure(reports, path, width=640, height=420):
    """Observed curve(s) against their shaded global envelopes."""
    reports = list(reports)
    vals = np.concatenate([np.concatenate([r.observed, r.lower, r.upper]) for r in reports])
    grid = reports[0].grid
    cv = _Canvas(width, height)
    ax = _Axes(grid.size, float(vals.min()), float(vals.max()), width, height)
    for rep in reports:
        color, dash = STYLE.get(rep.null_kind, ("#333333", None))
        _draw_envelope(cv, ax, rep, color, dash)
    _draw_axes(cv, ax, grid)
    labels = ", ".join(f"{r.null_kind}: p={r.p_value:.4g}" for r in reports)
    cv.text(width / 2, 20, labels, 11)
    cv.write(path)


def _diverging_color(z, zmax):
    t = 0.0 if zmax == 0 else max(-1.0, min(1.0, z / zmax))
    if t >= 0:
        r, g, b = 214, int(180 - 140 * t), int(180 - 150 * t)
    else:
        r, g, b = int(180 + 140 * t), int(180 + 100 * t), 214
    return f"rgb({r},{g},{b})"


def zscore_figure(pattern, zmap, path, width=460, height=460):
    """Scatter of the pattern colored by Z (red positive, blue negative)."""
    cv = _Canvas(width, height)
    w = pattern.window
    m = 35
    sx = (width - 2 * m) / (w.x_max - w.x_min)
    sy = (height - 2 * m) / (w.y_max - w.y_min)
    zmax = float(np.max(np.abs(zmap.scores))) if pattern.n else 0.0
    cv.parts.append(
        f'<rect x="{m}" y="{m}" width="{width - 2 * m}" height="{height - 2 * m}" '
        f'fill="none" stroke="#444"/>'
    )
    for (x, y), z in zip(pattern.points, zmap.scores):
        px = m + (x - w.x_min) * sx
        py = height - m - (y - w.y_min) * sy
        cv.circle(px, py, 4, _diverging_color(float(z), zmax), stroke="#555")
    cv.text(width / 2, 18, f"Z at eps_crit={zmap.epsilon_crit:.4g}", 11)
    cv.write(path)


def pattern_figure(pattern, path, width=460, height=460):
    """Scatter with disc radius scaled by mark value."""
    cv = _Canvas(width, height)
    w = pattern.window
    m = 35
    sx = (width - 2 * m) / (w.x_max - w.x_min)
    sy = (height - 2 * m) / (w.y_max - w.y_min)
    marks = pattern.marks
    span = float(marks.max() - marks.min()) or 1.0
    cv.parts.append(
        f'<rect x="{m}" y="{m}" width="{width - 2 * m}" height="{height - 2 * m}" '
        f'fill="none" stroke="#444"/>'
    )
    for (x, y), mk in zip(pattern.points, marks):
        px = m + (x - w.x_min) * sx
        py = height - m - (y - w.y_min) * sy
        r = 2.0 + 5.0 * (mk - marks.min()) / span
        cv.circle(px, py, r, "rgba(60,100,170,0.55)", stroke="#333")
    cv.text(width / 2, 18, f"pattern (n={pattern.n})", 11)
    cv.write(path)


def bands_figure(summary, path, width=640, height=420):
    """Median curves with shaded quantile bands, plain (blue) vs marked (red)."""
    vals = np.concatenate([summary.lo_plain, summary.hi_plain,
                           summary.lo_marked, summary.hi_marked])
    cv = _Canvas(width, height)
    ax = _Axes(summary.grid.size, float(vals.min()), float(vals.max()), width, height)
    for lo, hi, med, (color, dash) in (
        (summary.lo_plain, summary.hi_plain, summary.median_plain, STYLE["csr_intensity"]),
        (summary.lo_marked, summary.hi_marked, summary.median_marked, STYLE["random_labeling"]),
    ):
        band = [(ax.x(t), ax.y(v)) for t, v in enumerate(hi)]
        band += [(ax.x(t), ax.y(v)) for t, v in reversed(list(enumerate(lo)))]
        cv.polygon(band, color)
        cv.polyline([(ax.x(t), ax.y(v)) for t, v in enumerate(med)], color, 1.8, dash)
    _draw_axes(cv, ax, summary.grid)
    cv.write(path)


def scenario_panel(pattern, reports, zmap, path, width=520, height=1260):
    """Three stacked rows: pattern, envelope tests, Z map."""
    import os
    import tempfile

    cv = _Canvas(width, height)
    row_h = height / 3

    def embed(draw, *args, h=row_h):
        fd, tmp = tempfile.mkstemp(suffix=".svg")
        os.close(fd)
        try:
            draw(*args, tmp, width=int(width), height=int(h))
            with open(tmp, "r", encoding="utf-8") as fh:
                body = fh.read().splitlines()[1:-1]  # strip svg open/close tags
        finally:
            os.unlink(tmp)
        cv.parts.extend(body)

    cv.group(0, 0)
    embed(pattern_figure, pattern)
    cv.end_group()
    cv.group(0, row_h)
    embed(envelope_figure, list(reports))
    cv.end_group()
    cv.group(0, 2 * row_h)
    if zmap is not None:
        embed(zscore_figure, pattern, zmap)
    cv.end_group()
    cv.write(path)
