"""Static SVG phase portraits.

Hand-rolled SVG primitives — no plotting dependency.  The drawing is a
region-to-pixel affine map plus a handful of element emitters with pinned
float formatting, so a portrait is byte-identical across runs for identical
inputs.  Styling: unstable curves red, stable curves blue, fixed/periodic
points as black dot / ringed dot, sampled orbits as gray dots fading with
the iterate count.
"""

from __future__ import annotations

import numpy as np

from .manifolds import BranchLabel, ManifoldPolyline
from .planarmap import Region

__all__ = ["render_portrait"]

UNSTABLE_COLOR = "#b2182b"
STABLE_COLOR = "#2166ac"
ORBIT_COLOR = "#606060"
AXIS_COLOR = "#c8c8c8"
FRAME_COLOR = "#333333"

_STABLE = (BranchLabel.STABLE_PLUS, BranchLabel.STABLE_MINUS)


def _f(v: float) -> str:
    return format(float(v), ".2f")


class _Canvas:
    """Pixel mapping for a region plus a list of SVG elements."""

    def __init__(self, region: Region, width: int):
        self.region = region
        self.margin = 34.0
        plot_w = float(width) - 2.0 * self.margin
        xspan = region.x1 - region.x0
        yspan = region.y1 - region.y0
        plot_h = plot_w * yspan / xspan
        self.sx = plot_w / xspan
        self.sy = plot_h / yspan
        self.width = float(width)
        self.height = plot_h + 2.0 * self.margin + 18.0  # room for the title row
        self.top = self.margin + 18.0
        self.elements: list[str] = []

    def px(self, x: float, y: float) -> tuple[float, float]:
        return (
            self.margin + (x - self.region.x0) * self.sx,
            self.top + (self.region.y1 - y) * self.sy,
        )

    def polyline(self, pts: np.ndarray, color: str, width: float, opacity: float = 1.0):
        if len(pts) < 2:
            return
        coords = " ".join(
            "%s,%s" % (_f(X), _f(Y)) for X, Y in (self.px(x, y) for x, y in pts)
        )
        self.elements.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{_f(width)}" stroke-opacity="{_f(opacity)}" '
            'stroke-linejoin="round" stroke-linecap="round"/>'
        )

    def dot(self, x: float, y: float, r: float, color: str, opacity: float = 1.0):
        X, Y = self.px(x, y)
        self.elements.append(
            f'<circle cx="{_f(X)}" cy="{_f(Y)}" r="{_f(r)}" fill="{color}" '
            f'fill-opacity="{_f(opacity)}"/>'
        )

    def ring(self, x: float, y: float, r: float, color: str):
        X, Y = self.px(x, y)
        self.elements.append(
            f'<circle cx="{_f(X)}" cy="{_f(Y)}" r="{_f(r)}" fill="white" '
            f'stroke="{color}" stroke-width="1.8"/>'
        )

    def line(self, a, b, color: str, width: float = 1.0):
        (x1, y1), (x2, y2) = self.px(*a), self.px(*b)
        self.elements.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{color}" stroke-width="{_f(width)}"/>'
        )

    def text(self, X: float, Y: float, s: str, color: str = "#000000", size: int = 12):
        self.elements.append(
            f'<text x="{_f(X)}" y="{_f(Y)}" font-family="monospace" '
            f'font-size="{size}" fill="{color}">{_escape(s)}</text>'
        )

    def frame(self):
        x0, y0 = self.px(self.region.x0, self.region.y1)
        w = (self.region.x1 - self.region.x0) * self.sx
        h = (self.region.y1 - self.region.y0) * self.sy
        self.elements.append(
            f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(w)}" height="{_f(h)}" '
            f'fill="none" stroke="{FRAME_COLOR}" stroke-width="1"/>'
        )

    def document(self) -> str:
        head = (
            '<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{_f(self.width)}" height="{_f(self.height)}" '
            f'viewBox="0 0 {_f(self.width)} {_f(self.height)}">'
        )
        body = "\n".join(
            [head, f'<rect width="{_f(self.width)}" height="{_f(self.height)}" fill="white"/>']
            + self.elements
            + ["</svg>"]
        )
        return body + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _inside_runs(points: np.ndarray, region: Region, pad: float) -> list[np.ndarray]:
    """Split a polyline into runs of consecutive points inside the padded box."""
    P = np.asarray(points, float).reshape(-1, 2)
    keep = np.isfinite(P).all(axis=1)
    keep[keep] = region.contains(P[keep], pad=pad)
    runs: list[np.ndarray] = []
    start = None
    for i, k in enumerate(keep):
        if k and start is None:
            start = i
        elif not k and start is not None:
            runs.append(P[start:i])
            start = None
    if start is not None:
        runs.append(P[start:])
    return [r for r in runs if len(r) >= 2]


def render_portrait(
    title: str,
    region: Region,
    width: int,
    polylines: list[ManifoldPolyline],
    fixed_points: list[np.ndarray],
    periodic_points: list[np.ndarray],
    orbit_trails: list[np.ndarray],
) -> str:
    """Compose the portrait SVG; see the module docstring for the styling."""
    c = _Canvas(region, width)
    pad = 0.02 * region.scale

    if region.x0 < 0.0 < region.x1:
        c.line((0.0, region.y0), (0.0, region.y1), AXIS_COLOR)
    if region.y0 < 0.0 < region.y1:
        c.line((region.x0, 0.0), (region.x1, 0.0), AXIS_COLOR)

    for trail in orbit_trails:
        T = np.asarray(trail, float).reshape(-1, 2)
        n = max(len(T) - 1, 1)
        for k, (x, y) in enumerate(T):
            if not (np.isfinite(x) and np.isfinite(y)):
                break
            if not region.contains([[x, y]], pad=pad)[0]:
                continue
            opacity = 0.85 - 0.7 * (k / n)
            c.dot(x, y, 1.6, ORBIT_COLOR, opacity)

    for b in polylines:
        color = STABLE_COLOR if b.branch in _STABLE else UNSTABLE_COLOR
        for run in _inside_runs(b.points, region, pad):
            c.polyline(run, color, 1.8)

    for p in fixed_points:
        c.dot(float(p[0]), float(p[1]), 4.0, "#000000")
    for p in periodic_points:
        c.ring(float(p[0]), float(p[1]), 5.0, "#000000")

    c.frame()
    c.text(c.margin, 16.0, title)
    c.text(c.margin, c.height - 10.0, "unstable", UNSTABLE_COLOR)
    c.text(c.margin + 80.0, c.height - 10.0, "stable", STABLE_COLOR)
    c.text(
        c.margin + 150.0,
        c.height - 10.0,
        f"region [{region.x0:g}, {region.x1:g}] x [{region.y0:g}, {region.y1:g}]",
        "#606060",
    )
    return c.document()
