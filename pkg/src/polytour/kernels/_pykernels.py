"""Numpy implementations of the hot numeric kernels.

Semantics mirror the compiled backend in ``_ckernels`` operation for
operation: same sampling formula ``t = lo + j*h``, same tie handling
(smallest parameter wins among equal distances), same containment codes.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

OUTSIDE = 0
ON_BOUNDARY = 1
INSIDE = 2


def scan_segment_route(ax, ay, bx, by, px, py, qx, qy, lo, hi, n, cx, cy, tie_tol):
    """Minimize |a - x(t)| + |x(t) - b| over n samples of x(t) = p + t(q - p).

    ``t`` ranges over [lo, hi].  Among samples whose value is within
    ``tie_tol * (1 + |best|)`` of the best, the one closest to (cx, cy)
    is returned (ties broken toward smaller t).  Returns (t, value).
    """
    h = (hi - lo) / (n - 1)
    t = lo + np.arange(n) * h
    x = px + t * (qx - px)
    y = py + t * (qy - py)
    v = np.sqrt((x - ax) ** 2 + (y - ay) ** 2) + np.sqrt((x - bx) ** 2 + (y - by) ** 2)
    jmin = int(np.argmin(v))
    vmin = float(v[jmin])
    band = vmin + tie_tol * (1.0 + abs(vmin))
    tie = np.flatnonzero(v <= band)
    d2 = (x[tie] - cx) ** 2 + (y[tie] - cy) ** 2
    j = int(tie[int(np.argmin(d2))])
    return float(t[j]), float(v[j])


def scan_segment_model(px, py, qx, qy, lo, hi, n,
                       basex, basey, gx, gy, bxx, bxy, byy, sigma,
                       cx, cy, tie_tol):
    """Same scan as ``scan_segment_route`` for the regularized quadratic model.

    Model value at x: g.(x-base) + 0.5 (x-base).B(x-base) + 0.5 sigma |x-base|^2
    with symmetric B = [[bxx, bxy], [bxy, byy]].
    """
    h = (hi - lo) / (n - 1)
    t = lo + np.arange(n) * h
    x = px + t * (qx - px)
    y = py + t * (qy - py)
    dx = x - basex
    dy = y - basey
    v = (gx * dx + gy * dy
         + 0.5 * (bxx * dx * dx + 2.0 * bxy * dx * dy + byy * dy * dy)
         + 0.5 * sigma * (dx * dx + dy * dy))
    jmin = int(np.argmin(v))
    vmin = float(v[jmin])
    band = vmin + tie_tol * (1.0 + abs(vmin))
    tie = np.flatnonzero(v <= band)
    d2 = (x[tie] - cx) ** 2 + (y[tie] - cy) ** 2
    j = int(tie[int(np.argmin(d2))])
    return float(t[j]), float(v[j])


def point_in_polygon(x, y, verts, eps):
    """Classify (x, y) against the polygon ring ``verts`` (n, 2).

    Returns ON_BOUNDARY when within distance eps of any edge, otherwise
    INSIDE/OUTSIDE by even-odd ray crossing.
    """
    verts = np.asarray(verts, dtype=float)
    n = verts.shape[0]
    eps2 = eps * eps
    for i in range(n):
        x1 = verts[i, 0]
        y1 = verts[i, 1]
        j = i + 1 if i + 1 < n else 0
        x2 = verts[j, 0]
        y2 = verts[j, 1]
        ex = x2 - x1
        ey = y2 - y1
        wx = x - x1
        wy = y - y1
        l2 = ex * ex + ey * ey
        if l2 > 0.0:
            t = (wx * ex + wy * ey) / l2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            wx = wx - t * ex
            wy = wy - t * ey
        if wx * wx + wy * wy <= eps2:
            return ON_BOUNDARY
    inside = False
    for i in range(n):
        x1 = verts[i, 0]
        y1 = verts[i, 1]
        j = i + 1 if i + 1 < n else 0
        x2 = verts[j, 0]
        y2 = verts[j, 1]
        if (y1 > y) != (y2 > y):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xint:
                inside = not inside
    return INSIDE if inside else OUTSIDE


def points_in_polygon(xs, ys, verts, eps):
    """Vectorized ``point_in_polygon`` over arrays xs, ys.  Returns int64 codes."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    verts = np.asarray(verts, dtype=float)
    x1 = verts[:, 0]
    y1 = verts[:, 1]
    x2 = np.roll(verts[:, 0], -1)
    y2 = np.roll(verts[:, 1], -1)
    ex = x2 - x1
    ey = y2 - y1
    l2 = ex * ex + ey * ey
    l2safe = np.where(l2 > 0.0, l2, 1.0)

    wx = xs[:, None] - x1[None, :]
    wy = ys[:, None] - y1[None, :]
    t = np.clip((wx * ex + wy * ey) / l2safe, 0.0, 1.0)
    t = np.where(l2 > 0.0, t, 0.0)
    rx = wx - t * ex
    ry = wy - t * ey
    on_boundary = np.any(rx * rx + ry * ry <= eps * eps, axis=1)

    cond = (y1[None, :] > ys[:, None]) != (y2[None, :] > ys[:, None])
    denom = np.where(y2 - y1 != 0.0, y2 - y1, 1.0)
    xint = x1[None, :] + (ys[:, None] - y1[None, :]) * (x2 - x1)[None, :] / denom[None, :]
    crossings = np.sum(cond & (xs[:, None] < xint), axis=1)
    inside = (crossings % 2) == 1

    out = np.where(inside, INSIDE, OUTSIDE)
    out = np.where(on_boundary, ON_BOUNDARY, out)
    return out.astype(np.int64)
