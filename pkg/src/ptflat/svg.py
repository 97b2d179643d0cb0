"""Self-contained SVG output for the CLI commands.

Plain string assembly with inline styles; no external assets, no smoothing.
"""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

BRANCH_COLORS = ("#1f77b4", "#d62728", "#2ca02c")
REGION_COLORS = {
    "4": "#f2a65a",   # four EPs
    "3": "#7f3c8d",
    "2": "#3969ac",   # two EPs
    "1": "#11a579",
    "0_inside": "#e73f74",
    "0_outside": "#8b5fbf",
}


def _n(x) -> str:
    return format(float(x), ".6g")


class Canvas:
    def __init__(self, width, height):
        self.width, self.height = width, height
        self.parts = []

    def add(self, s):
        self.parts.append(s)

    def text(self, x, y, s, size=12, anchor="middle", rotate=None):
        tr = f' transform="rotate({rotate} {_n(x)} {_n(y)})"' if rotate else ""
        self.add(f'<text x="{_n(x)}" y="{_n(y)}" font-family="sans-serif" font-size="{size}" '
                 f'text-anchor="{anchor}"{tr}>{escape(s)}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        bg = f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>'
        return "\n".join([head, bg, *self.parts, "</svg>"]) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.render())
        return path


def _ticks(lo, hi, n=5):
    return np.linspace(lo, hi, n)


def _panel(cv, x0, y0, w, h, xs, series, xlim, ylim, xlabel, ylabel, title):
    (xa, xb), (ya, yb) = xlim, ylim
    if yb - ya < 1e-12:
        ya, yb = ya - 0.5, yb + 0.5

    def px(x):
        return x0 + (x - xa) / (xb - xa) * w

    def py(y):
        return y0 + h - (y - ya) / (yb - ya) * h

    cv.add(f'<rect x="{_n(x0)}" y="{_n(y0)}" width="{_n(w)}" height="{_n(h)}" '
           'fill="none" stroke="black" stroke-width="1"/>')
    for t in _ticks(xa, xb):
        cv.text(px(t), y0 + h + 14, _n(t), size=10)
    for t in _ticks(ya, yb):
        cv.text(x0 - 4, py(t) + 3, _n(t), size=10, anchor="end")
    cv.text(x0 + w / 2, y0 + h + 30, xlabel)
    cv.text(x0 - 40, y0 + h / 2, ylabel, rotate=-90)
    cv.text(x0 + w / 2, y0 - 6, title)
    for ys, color in series:
        pts = " ".join(f"{_n(px(x))},{_n(py(y))}" for x, y in zip(xs, ys))
        cv.add(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')


def bands_svg(bs, title="") -> Canvas:
    """Two panels, Re E and Im E versus k, one polyline per tracked branch."""
    cv = Canvas(760, 340)
    k = bs.k
    re, im = bs.energies.real, bs.energies.imag

    def lim(a):
        lo, hi = float(a.min()), float(a.max())
        pad = 0.05 * max(hi - lo, 1e-9)
        return lo - pad, hi + pad

    xlim = (-np.pi, np.pi)
    _panel(cv, 70, 40, 280, 240, k, [(re[:, b], BRANCH_COLORS[b]) for b in range(3)],
           xlim, lim(re), "k", "Re E", "Re E " + title)
    _panel(cv, 450, 40, 280, 240, k, [(im[:, b], BRANCH_COLORS[b]) for b in range(3)],
           xlim, lim(im), "k", "Im E", "Im E " + title)
    return cv


def phase_svg(xs, ys, codes, xlabel, ylabel, title="") -> Canvas:
    """Region map; ``codes[iy][ix]`` are keys of REGION_COLORS."""
    cv = Canvas(520, 480)
    x0, y0, w, h = 70, 30, 380, 380
    nx, ny = len(xs), len(ys)
    cw, ch = w / nx, h / ny
    for iy in range(ny):
        for ix in range(nx):
            color = REGION_COLORS.get(codes[iy][ix], "#cccccc")
            cv.add(f'<rect x="{_n(x0 + ix * cw)}" y="{_n(y0 + h - (iy + 1) * ch)}" '
                   f'width="{_n(cw + 0.05)}" height="{_n(ch + 0.05)}" fill="{color}"/>')
    cv.add(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>')
    for i, t in enumerate(_ticks(xs[0], xs[-1])):
        cv.text(x0 + i * w / 4, y0 + h + 14, _n(t), size=10)
        cv.text(x0 - 4, y0 + h - i * h / 4 + 3, _n(_ticks(ys[0], ys[-1])[i]), size=10, anchor="end")
    cv.text(x0 + w / 2, y0 + h + 32, xlabel)
    cv.text(x0 - 40, y0 + h / 2, ylabel, rotate=-90)
    cv.text(x0 + w / 2, y0 - 10, title)
    for j, (code, color) in enumerate(REGION_COLORS.items()):
        cv.add(f'<rect x="{x0 + w + 12}" y="{y0 + 20 * j}" width="12" height="12" fill="{color}"/>')
        cv.text(x0 + w + 28, y0 + 20 * j + 10, code.replace("_", " "), size=10, anchor="start")
    return cv


def heatmap_svg(times, intensities, title="", max_rows=400) -> Canvas:
    """Space-time map: sites on x, time increasing downwards, gray level = |psi|^2."""
    times = np.asarray(times)
    inten = np.asarray(intensities)
    if len(times) > max_rows:
        idx = np.unique(np.linspace(0, len(times) - 1, max_rows).round().astype(int))
        times, inten = times[idx], inten[idx]
    cv = Canvas(560, 520)
    x0, y0, w, h = 70, 30, 420, 420
    n_t, n_s = inten.shape
    peak = inten.max() if inten.size and inten.max() > 0 else 1.0
    cw, ch = w / n_s, h / n_t
    for it in range(n_t):
        for s in range(n_s):
            level = inten[it, s] / peak
            if level <= 1e-6:
                continue
            g = int(round(255 * (1.0 - level)))
            cv.add(f'<rect x="{_n(x0 + s * cw)}" y="{_n(y0 + it * ch)}" width="{_n(cw + 0.05)}" '
                   f'height="{_n(ch + 0.05)}" fill="rgb({g},{g},255)"/>')
    cv.add(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>')
    for i in range(0, n_s, 3):
        cv.text(x0 + (i + 1.5) * cw, y0 + h + 14, str(i // 3 + 1), size=10)
    cv.text(x0 + w / 2, y0 + h + 32, "unit cell")
    for i, t in enumerate(_ticks(times[0], times[-1])):
        cv.text(x0 - 4, y0 + i * h / 4 + 3, _n(t), size=10, anchor="end")
    cv.text(x0 - 44, y0 + h / 2, "t", rotate=-90)
    cv.text(x0 + w / 2, y0 - 10, title)
    return cv
