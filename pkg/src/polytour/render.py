"""SVG rendering of instances, routes, and per-cycle convergence trails."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ctsp import Instance, Tour

__all__ = ["RenderSpec", "render_svg"]


@dataclass
class RenderSpec:
    width: int = 800
    height: int = 800
    margin: float = 0.05
    polygon_fill: str = "#d9dee4"
    polygon_stroke: str = "#5a6570"
    route_stroke: str = "#0a3069"
    route_width: float = 1.6
    point_fill: str = "#cf222e"
    point_radius: float = 2.5
    trail_stroke: str = "#0a3069"
    trail_min_opacity: float = 0.15
    show_labels: bool = False

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("render size must be positive")


def _viewport(instance: Instance, extra_points, spec: RenderSpec):
    los = [poly.bbox[0] for poly in instance.polygons]
    his = [poly.bbox[1] for poly in instance.polygons]
    lo = np.min(np.array(los), axis=0)
    hi = np.max(np.array(his), axis=0)
    for pts in extra_points:
        for pt in pts:
            lo = np.minimum(lo, pt)
            hi = np.maximum(hi, pt)
    span = np.maximum(hi - lo, 1e-12)
    pad = spec.margin * span
    lo = lo - pad
    hi = hi + pad
    span = hi - lo
    scale = min(spec.width / span[0], spec.height / span[1])

    def to_px(pt):
        x = (pt[0] - lo[0]) * scale
        y = spec.height - (pt[1] - lo[1]) * scale
        return x, y

    return to_px


def _points_attr(pts, to_px) -> str:
    return " ".join(f"{x:.3f},{y:.3f}" for x, y in (to_px(pt) for pt in pts))


def render_svg(
    instance: Instance,
    tour: Tour | None = None,
    trail: Sequence[Sequence[np.ndarray]] | None = None,
    path=None,
    spec: RenderSpec | None = None,
) -> str:
    """Render polygons, an optional closed route, and an optional trail.

    The trail is a sequence of point configurations in route order (one per
    pass); earlier configurations are drawn more transparent.  Returns the
    SVG text, writing it to ``path`` when given.
    """
    if spec is None:
        spec = RenderSpec()
    extra = []
    if tour is not None:
        extra.append(tour.points_in_order())
    if trail:
        extra.extend(trail)
    to_px = _viewport(instance, extra, spec)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">'
    ]
    for poly in instance.polygons:
        parts.append(
            f'<polygon points="{_points_attr(poly.vertices, to_px)}" '
            f'fill="{spec.polygon_fill}" stroke="{spec.polygon_stroke}" stroke-width="1"/>'
        )
    if trail:
        n_t = len(trail)
        for idx, pts in enumerate(trail):
            opacity = spec.trail_min_opacity + (1.0 - spec.trail_min_opacity) * (
                idx / max(n_t - 1, 1)
            )
            closed = list(pts) + [pts[0]]
            parts.append(
                f'<polyline points="{_points_attr(closed, to_px)}" fill="none" '
                f'stroke="{spec.trail_stroke}" stroke-width="1" opacity="{opacity:.3f}"/>'
            )
    if tour is not None:
        pts = tour.points_in_order()
        closed = pts + [pts[0]]
        parts.append(
            f'<polyline points="{_points_attr(closed, to_px)}" fill="none" '
            f'stroke="{spec.route_stroke}" stroke-width="{spec.route_width}"/>'
        )
        for city, pt in enumerate(tour.points):
            x, y = to_px(pt)
            parts.append(
                f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{spec.point_radius}" '
                f'fill="{spec.point_fill}"/>'
            )
            if spec.show_labels:
                parts.append(
                    f'<text x="{x + 4:.3f}" y="{y - 4:.3f}" font-size="10">{city + 1}</text>'
                )
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
