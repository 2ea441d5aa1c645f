"""2D polygon primitives: containment, segment clipping, preprocessing transforms.

Polygons are simple counterclockwise rings stored as (n, 2) float arrays.
Predicates are epsilon-based: every polygon carries a default boundary band
``eps`` equal to ``1e-9`` times its bounding-box diagonal, overridable per
call.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels

__all__ = [
    "GeometryError",
    "Containment",
    "Segment",
    "Polygon",
    "as_point",
    "point_in_polygon",
    "winding_number",
    "clip_segment_to_polygon",
    "polygon_edges",
    "shrink_polygon",
    "subsample_polygon",
    "centroid",
    "bounding_box",
    "is_convex",
]

BOUNDARY_EPS_FACTOR = 1e-9


class GeometryError(ValueError):
    """Invalid geometric input (bad polygon, bad transform parameter...)."""


class Containment(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


_CODE_TO_CONTAINMENT = {
    kernels.OUTSIDE: Containment.OUTSIDE,
    kernels.ON_BOUNDARY: Containment.BOUNDARY,
    kernels.INSIDE: Containment.INSIDE,
}


def as_point(p) -> np.ndarray:
    """Coerce to a finite (2,) float array."""
    a = np.asarray(p, dtype=float)
    if a.shape != (2,):
        raise GeometryError(f"expected a 2D point, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise GeometryError(f"point has non-finite coordinates: {a}")
    return a


class Segment(NamedTuple):
    p: np.ndarray
    q: np.ndarray

    @property
    def is_degenerate(self) -> bool:
        return bool(np.all(self.p == self.q))

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.q - self.p)))

    def point_at(self, t: float) -> np.ndarray:
        return self.p + t * (self.q - self.p)


def segment(p, q) -> Segment:
    return Segment(as_point(p), as_point(q))


class Polygon:
    """Simple polygon with >= 3 vertices, positive area, counterclockwise.

    The ring is open (last vertex differs from the first).  Construction
    validates all invariants and raises :class:`GeometryError` on failure.
    """

    __slots__ = ("vertices", "_bbox", "_eps")

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError(f"vertices must be (n, 2), got {v.shape}")
        if v.shape[0] < 3:
            raise GeometryError(f"polygon needs >= 3 vertices, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon has non-finite vertices")
        if np.all(v[0] == v[-1]):
            raise GeometryError("polygon ring must be open (last vertex != first)")
        if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
            raise GeometryError("polygon has a zero-length edge")
        area = _signed_area(v)
        if area <= 0.0:
            raise GeometryError(
                f"polygon must be counterclockwise with positive area (signed area {area:g})"
            )
        bad = _first_self_intersection(v)
        if bad is not None:
            raise GeometryError(f"polygon is not simple: edges {bad[0]} and {bad[1]} intersect")
        v.setflags(write=False)
        self.vertices = v
        lo = v.min(axis=0)
        hi = v.max(axis=0)
        self._bbox = (lo, hi)
        self._eps = BOUNDARY_EPS_FACTOR * float(np.hypot(*(hi - lo)))

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self._bbox

    @property
    def boundary_eps(self) -> float:
        """Default boundary band: 1e-9 times the bounding-box diagonal."""
        return self._eps

    def __repr__(self):
        return f"Polygon({self.n_vertices} vertices, area {self.area:.6g})"


def _signed_area(v: np.ndarray) -> float:
    x = v[:, 0]
    y = v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _first_self_intersection(v: np.ndarray):
    """Index pair of the first intersecting non-adjacent edge pair, else None."""
    n = v.shape[0]
    a = v
    b = np.roll(v, -1, axis=0)
    for i in range(n - 2):
        # candidate partners: j > i + 1, excluding the wrap-adjacent pair (0, n-1)
        j0 = i + 2
        j1 = n - 1 if i == 0 else n
        if j0 >= j1:
            continue
        p, r = a[i], b[i] - a[i]
        aj = a[j0:j1]
        bj = b[j0:j1]
        sj = bj - aj
        d1 = sj[:, 0] * (p[1] - aj[:, 1]) - sj[:, 1] * (p[0] - aj[:, 0])
        d2 = sj[:, 0] * (p[1] + r[1] - aj[:, 1]) - sj[:, 1] * (p[0] + r[0] - aj[:, 0])
        d3 = r[0] * (aj[:, 1] - p[1]) - r[1] * (aj[:, 0] - p[0])
        d4 = r[0] * (bj[:, 1] - p[1]) - r[1] * (bj[:, 0] - p[0])
        lo1 = np.minimum(a[i], b[i])
        hi1 = np.maximum(a[i], b[i])
        lo2 = np.minimum(aj, bj)
        hi2 = np.maximum(aj, bj)
        overlap = np.all((lo1 <= hi2) & (lo2 <= hi1), axis=1)
        hit = (d1 * d2 <= 0.0) & (d3 * d4 <= 0.0) & overlap
        if np.any(hit):
            return i, j0 + int(np.argmax(hit))
    return None


def point_in_polygon(p, poly: Polygon, eps: float | None = None) -> Containment:
    """Even-odd containment with an explicit boundary band of width ``eps``."""
    p = as_point(p)
    if eps is None:
        eps = poly.boundary_eps
    code = kernels.point_in_polygon(p[0], p[1], poly.vertices, eps)
    return _CODE_TO_CONTAINMENT[code]


def winding_number(p, poly: Polygon) -> int:
    """Integer winding number of the ring around p (nonzero means inside).

    Independent of the even-odd kernel; used to cross-validate containment.
    """
    p = as_point(p)
    v = poly.vertices
    n = v.shape[0]
    wn = 0
    for i in range(n):
        x1, y1 = v[i]
        x2, y2 = v[(i + 1) % n]
        left = (x2 - x1) * (p[1] - y1) - (p[0] - x1) * (y2 - y1)
        if y1 <= p[1]:
            if y2 > p[1] and left > 0:
                wn += 1
        elif y2 <= p[1] and left < 0:
            wn -= 1
    return wn


def polygon_edges(poly: Polygon) -> list[Segment]:
    """The n boundary segments (v_k, v_{k+1 mod n})."""
    v = poly.vertices
    return [Segment(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


def clip_segment_to_polygon(seg: Segment, poly: Polygon, eps: float | None = None) -> list[Segment]:
    """Maximal sub-segments of ``seg`` inside the closed polygon region.

    Pieces are disjoint except possibly at endpoints and ordered by the
    parameter along ``seg``; isolated touch points come back as degenerate
    segments.  Empty list when the segment misses the region entirely.
    """
    if eps is None:
        eps = poly.boundary_eps
    p = as_point(seg.p)
    q = as_point(seg.q)
    if np.all(p == q):
        if point_in_polygon(p, poly, eps) is not Containment.OUTSIDE:
            return [Segment(p, q)]
        return []

    d = q - p
    params = [0.0, 1.0]
    v = poly.vertices
    n = v.shape[0]
    scale = max(float(np.hypot(*d)), 1.0)
    tiny = 1e-14 * scale * scale
    for i in range(n):
        a = v[i]
        b = v[(i + 1) % n]
        s = b - a
        denom = d[0] * s[1] - d[1] * s[0]
        w = a - p
        if abs(denom) > tiny:
            t = (w[0] * s[1] - w[1] * s[0]) / denom
            u = (w[0] * d[1] - w[1] * d[0]) / denom
            if -1e-12 <= t <= 1.0 + 1e-12 and -1e-12 <= u <= 1.0 + 1e-12:
                params.append(min(1.0, max(0.0, t)))
        else:
            cross = w[0] * d[1] - w[1] * d[0]
            if abs(cross) <= tiny:
                dd = float(d @ d)
                for end in (a, b):
                    t = float((end - p) @ d) / dd
                    if -1e-12 <= t <= 1.0 + 1e-12:
                        params.append(min(1.0, max(0.0, t)))

    params = sorted(set(params))
    merged = [params[0]]
    for t in params[1:]:
        if t - merged[-1] > 1e-12:
            merged.append(t)
    params = merged

    keep = []
    for t0, t1 in zip(params[:-1], params[1:]):
        mid = p + 0.5 * (t0 + t1) * d
        inside = kernels.point_in_polygon(mid[0], mid[1], v, eps) != kernels.OUTSIDE
        keep.append(inside)

    spans = _kept_spans(keep)
    pieces: list[Segment] = [Segment(p + params[i] * d, p + params[j] * d) for i, j in spans]

    # isolated touch points: feasible event params whose neighborhoods are outside
    covered = [(params[i], params[j]) for i, j in spans]
    for t in params:
        if any(t0 - 1e-12 <= t <= t1 + 1e-12 for t0, t1 in covered):
            continue
        pt = p + t * d
        if kernels.point_in_polygon(pt[0], pt[1], v, eps) != kernels.OUTSIDE:
            pieces.append(Segment(pt, pt.copy()))

    pieces.sort(key=lambda s: float((s.p - p) @ d))
    return pieces


def _kept_spans(keep):
    spans = []
    i = 0
    while i < len(keep):
        if keep[i]:
            j = i
            while j + 1 < len(keep) and keep[j + 1]:
                j += 1
            spans.append((i, j + 1))
            i = j + 1
        else:
            i += 1
    return spans


def shrink_polygon(poly: Polygon, factor: float) -> Polygon:
    """Scale every vertex about the bounding-box center: o + factor * (v - o)."""
    if not factor > 0.0:
        raise GeometryError(f"shrink factor must be positive, got {factor}")
    lo, hi = poly.bbox
    o = 0.5 * (lo + hi)
    return Polygon(o + factor * (poly.vertices - o))


def subsample_polygon(poly: Polygon, target: int) -> Polygon:
    """Keep every s-th vertex, s = max(1, n // target), starting at the first.

    Raises :class:`GeometryError` when the subsampled ring violates the
    polygon invariants (self-intersects, degenerates, flips orientation).
    """
    if target < 3:
        raise GeometryError(f"subsample target must be >= 3, got {target}")
    stride = max(1, poly.n_vertices // target)
    if stride == 1:
        return poly
    return Polygon(poly.vertices[::stride])


def centroid(poly: Polygon) -> np.ndarray:
    """Area-weighted centroid."""
    v = poly.vertices
    x = v[:, 0]
    y = v[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    w = x * yn - xn * y
    a = 0.5 * np.sum(w)
    cx = np.sum((x + xn) * w) / (6.0 * a)
    cy = np.sum((y + yn) * w) / (6.0 * a)
    return np.array([cx, cy])


def bounding_box(poly: Polygon) -> tuple[np.ndarray, np.ndarray]:
    """(lower-left, upper-right) of the axis-aligned bounding box."""
    lo, hi = poly.bbox
    return lo.copy(), hi.copy()


def is_convex(poly: Polygon, rel_tol: float = 1e-12) -> bool:
    v = poly.vertices
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    scale = np.max(np.abs(cross)) if len(cross) else 1.0
    return bool(np.all(cross >= -rel_tol * max(scale, 1.0)))


def distance_to_boundary(p, poly: Polygon) -> float:
    """Distance from p to the polygon's boundary (0 on the boundary)."""
    p = as_point(p)
    v = poly.vertices
    a = v
    b = np.roll(v, -1, axis=0)
    e = b - a
    w = p[None, :] - a
    l2 = np.einsum("ij,ij->i", e, e)
    t = np.clip(np.einsum("ij,ij->i", w, e) / np.where(l2 > 0, l2, 1.0), 0.0, 1.0)
    r = w - t[:, None] * e
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", r, r))))
