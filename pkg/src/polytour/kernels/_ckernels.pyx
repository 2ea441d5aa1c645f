# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot numeric kernels.

Must stay operation-for-operation equivalent to ``_pykernels``; the test
suite cross-checks both backends on random inputs.
"""

from libc.math cimport sqrt, INFINITY

import numpy as np

BACKEND = "c"

OUTSIDE = 0
ON_BOUNDARY = 1
INSIDE = 2


def scan_segment_route(double ax, double ay, double bx, double by,
                       double px, double py, double qx, double qy,
                       double lo, double hi, int n,
                       double cx, double cy, double tie_tol):
    """Minimize |a - x(t)| + |x(t) - b| over n samples of x(t) = p + t(q - p).

    ``t`` ranges over [lo, hi].  Among samples whose value is within
    ``tie_tol * (1 + |best|)`` of the best, the one closest to (cx, cy)
    is returned (ties broken toward smaller t).  Returns (t, value).
    """
    cdef double h = (hi - lo) / (n - 1)
    cdef double vmin = INFINITY
    cdef double t, x, y, v, band, d2, best_d2, best_t, best_v
    cdef int j
    for j in range(n):
        t = lo + j * h
        x = px + t * (qx - px)
        y = py + t * (qy - py)
        v = sqrt((x - ax) * (x - ax) + (y - ay) * (y - ay)) + \
            sqrt((x - bx) * (x - bx) + (y - by) * (y - by))
        if v < vmin:
            vmin = v
    band = vmin + tie_tol * (1.0 + (vmin if vmin >= 0.0 else -vmin))
    best_d2 = INFINITY
    best_t = lo
    best_v = vmin
    for j in range(n):
        t = lo + j * h
        x = px + t * (qx - px)
        y = py + t * (qy - py)
        v = sqrt((x - ax) * (x - ax) + (y - ay) * (y - ay)) + \
            sqrt((x - bx) * (x - bx) + (y - by) * (y - by))
        if v <= band:
            d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy)
            if d2 < best_d2:
                best_d2 = d2
                best_t = t
                best_v = v
    return best_t, best_v


def scan_segment_model(double px, double py, double qx, double qy,
                       double lo, double hi, int n,
                       double basex, double basey, double gx, double gy,
                       double bxx, double bxy, double byy, double sigma,
                       double cx, double cy, double tie_tol):
    """Same scan as ``scan_segment_route`` for the regularized quadratic model.

    Model value at x: g.(x-base) + 0.5 (x-base).B(x-base) + 0.5 sigma |x-base|^2
    with symmetric B = [[bxx, bxy], [bxy, byy]].
    """
    cdef double h = (hi - lo) / (n - 1)
    cdef double vmin = INFINITY
    cdef double t, x, y, dx, dy, v, band, d2, best_d2, best_t, best_v
    cdef int j
    for j in range(n):
        t = lo + j * h
        x = px + t * (qx - px)
        y = py + t * (qy - py)
        dx = x - basex
        dy = y - basey
        v = (gx * dx + gy * dy
             + 0.5 * (bxx * dx * dx + 2.0 * bxy * dx * dy + byy * dy * dy)
             + 0.5 * sigma * (dx * dx + dy * dy))
        if v < vmin:
            vmin = v
    band = vmin + tie_tol * (1.0 + (vmin if vmin >= 0.0 else -vmin))
    best_d2 = INFINITY
    best_t = lo
    best_v = vmin
    for j in range(n):
        t = lo + j * h
        x = px + t * (qx - px)
        y = py + t * (qy - py)
        dx = x - basex
        dy = y - basey
        v = (gx * dx + gy * dy
             + 0.5 * (bxx * dx * dx + 2.0 * bxy * dx * dy + byy * dy * dy)
             + 0.5 * sigma * (dx * dx + dy * dy))
        if v <= band:
            d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy)
            if d2 < best_d2:
                best_d2 = d2
                best_t = t
                best_v = v
    return best_t, best_v


cdef int _classify(double x, double y, const double[:, ::1] verts, double eps) noexcept nogil:
    cdef int n = verts.shape[0]
    cdef double eps2 = eps * eps
    cdef double x1, y1, x2, y2, ex, ey, wx, wy, l2, t, xint
    cdef int i, j
    cdef bint inside = False
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


def point_in_polygon(double x, double y, verts, double eps):
    """Classify (x, y) against the polygon ring ``verts`` (n, 2).

    Returns ON_BOUNDARY when within distance eps of any edge, otherwise
    INSIDE/OUTSIDE by even-odd ray crossing.
    """
    cdef const double[:, ::1] v = np.ascontiguousarray(verts, dtype=np.float64)
    return _classify(x, y, v, eps)


def points_in_polygon(xs, ys, verts, double eps):
    """Vectorized ``point_in_polygon`` over arrays xs, ys.  Returns int64 codes."""
    cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    cdef const double[:, ::1] v = np.ascontiguousarray(verts, dtype=np.float64)
    out = np.empty(xv.shape[0], dtype=np.int64)
    cdef long long[::1] ov = out
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        ov[i] = _classify(xv[i], yv[i], v, eps)
    return out
