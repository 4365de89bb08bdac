"""Minimal deterministic SVG 1.1 writer for axis-aligned squares, polylines and heatmaps.

World coordinates (complex plane, y up) are mapped to SVG user units (y down)
by a fixed affine map, and every number is printed with ``%.6g`` so identical
inputs give byte-identical files.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["SvgCanvas", "coloring_svg", "heatmap_svg"]


def _n(v: float) -> str:
    s = "%.6g" % v
    return "0" if s == "-0" else s


@dataclass
class SvgCanvas:
    window: tuple                   # (x0, y0, x1, y1) in world units
    width: int = 800
    items: list = field(default_factory=list)

    @property
    def scale(self) -> float:
        x0, _, x1, _ = self.window
        return self.width / (x1 - x0)

    @property
    def height(self) -> int:
        _, y0, _, y1 = self.window
        return max(1, int(round((y1 - y0) * self.scale)))

    def _xy(self, x, y):
        x0, _, _, y1 = self.window
        return (x - x0) * self.scale, (y1 - y) * self.scale

    def rect(self, x, y, w, h, fill, opacity=1.0, stroke=None):
        px, py = self._xy(x, y + h)
        attrs = f'x="{_n(px)}" y="{_n(py)}" width="{_n(w * self.scale)}" height="{_n(h * self.scale)}" fill="{fill}"'
        if opacity != 1.0:
            attrs += f' fill-opacity="{_n(opacity)}"'
        if stroke:
            attrs += f' stroke="{stroke}" stroke-width="0.5"'
        self.items.append(f"<rect {attrs}/>")

    def polyline(self, pts, stroke="black", width=1.5, closed=True):
        pts = list(pts)
        if closed and pts:
            pts = pts + pts[:1]
        coords = " ".join(f"{_n(a)},{_n(b)}" for a, b in (self._xy(p.real, p.imag) for p in pts))
        self.items.append(f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{_n(width)}"/>')

    def circle(self, z, r_px, fill="black"):
        px, py = self._xy(z.real, z.imag)
        self.items.append(f'<circle cx="{_n(px)}" cy="{_n(py)}" r="{_n(r_px)}" fill="{fill}"/>')

    def text(self, x, y, s, size=12):
        px, py = self._xy(x, y)
        self.items.append(f'<text x="{_n(px)}" y="{_n(py)}" font-size="{size}" '
                          f'font-family="monospace">{escape(s)}</text>')

    def begin_group(self, ident):
        self.items.append(f'<g id="{escape(ident)}">')

    def end_group(self):
        self.items.append("</g>")

    def render(self) -> str:
        head = ('<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                f'width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        body = [f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>']
        return "\n".join([head, *body, *self.items, "</svg>"]) + "\n"


_COLORS = {"yellow": "#f2d024", "green": "#3aa655", "red": "#d7301f"}


def coloring_svg(state: list, window, seed: complex, width: int = 800) -> str:
    """Render a colored scheme state (see ``ColoredScheme.render_state``)."""
    cv = SvgCanvas(tuple(window), width)
    for entry in state:
        cv.begin_group(f"generation-{entry['generation']}")
        for name in ("yellow", "green", "red"):
            for x, y, h in entry[name]:
                cv.rect(x, y, h, h, _COLORS[name], 0.75, stroke="#444444")
        for loop in entry["barrier"]:
            cv.polyline(loop, stroke="black", width=1.5)
        cv.end_group()
    cv.circle(complex(seed), 3.0, "blue")
    return cv.render()


def _ramp(t: np.ndarray) -> list[str]:
    """Blue (0) to white (0.5) to red (1) color ramp."""
    t = np.clip(t, 0.0, 1.0)
    r = np.where(t < 0.5, 2 * t, 1.0)
    g = np.where(t < 0.5, 2 * t, 2 * (1 - t))
    b = np.where(t < 0.5, 1.0, 2 * (1 - t))
    return ["#%02x%02x%02x" % (int(round(255 * a)), int(round(255 * c)), int(round(255 * d)))
            for a, c, d in zip(r, g, b)]


def heatmap_svg(xs, ys, values, region=None, width: int = 800) -> str:
    """Heatmap of ``log10`` of grid values (cell-centered), with a region outline mask.

    Non-finite values are drawn black; cells of ``region`` get a dark frame.
    """
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    h = float(xs[1] - xs[0]) if len(xs) > 1 else (float(ys[1] - ys[0]) if len(ys) > 1 else 1.0)
    window = (xs[0] - h / 2, ys[0] - h / 2, xs[-1] + h / 2, ys[-1] + h / 2)
    cv = SvgCanvas(window, width)
    v = np.asarray(values, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lv = np.log10(v)
    finite = np.isfinite(lv)
    lo, hi = (float(lv[finite].min()), float(lv[finite].max())) if finite.any() else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    colors = np.array(_ramp(((np.where(finite, lv, hi) - lo) / span).ravel()),
                      dtype=object).reshape(v.shape)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            fill = colors[i, j] if finite[i, j] else "#000000"
            stroke = "#222222" if region is not None and region[i, j] else None
            cv.rect(x - h / 2, y - h / 2, h, h, fill, stroke=stroke)
    cv.text(window[0], window[3] - 0.04 * (window[3] - window[1]),
            f"log10 b_N in [{lo:.3g}, {hi:.3g}]")
    return cv.render()
