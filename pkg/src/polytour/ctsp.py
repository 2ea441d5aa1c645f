"""Continuous traveling salesman over polygons.

One point is placed inside each polygon; the objective is the closed tour
length through the points in a fixed visiting order.  The block subproblem
(move one point, neighbors fixed) is solved globally by brute force over a
finite family of candidate segments: the tour chord clipped to the polygon
plus the polygon's edges, each sampled densely with zoom refinement.  Among
equal-value minimizers the point closest to the current iterate is kept,
which also makes null steps exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .bcd import BcdConfig, BcdState, BlockSpec, Objective, Trial, run_bcd
from .covering import (
    MultiplierRecord,
    QuadraticModel,
    SmoothInequality,
    estimate_multipliers,
    model_value,
)
from .geometry import (
    Containment,
    Polygon,
    Segment,
    as_point,
    clip_segment_to_polygon,
    point_in_polygon,
    polygon_edges,
)

__all__ = [
    "CoincidentAnchors",
    "Instance",
    "Tour",
    "CtspConfig",
    "route_length",
    "block_gradient",
    "path_gradient",
    "solve_block_global",
    "solve_block_regularized",
    "minimize_model_over_polygon",
    "optimize_points",
    "optimize_tour",
]

log = logging.getLogger(__name__)


class CoincidentAnchors(ValueError):
    """The objective is not differentiable where a point meets an anchor."""


@dataclass(eq=False)
class Instance:
    """A set of polygon regions to visit."""

    polygons: list[Polygon]
    name: str = ""

    def __post_init__(self):
        if len(self.polygons) < 2:
            raise ValueError("an instance needs at least 2 polygons")

    @property
    def p(self) -> int:
        return len(self.polygons)

    def check_tour(self, tour: "Tour") -> None:
        """Raise ValueError when any tour point leaves its polygon."""
        if len(tour.points) != self.p:
            raise ValueError("tour has wrong number of points")
        for c, pt in enumerate(tour.points):
            if point_in_polygon(pt, self.polygons[c]) is Containment.OUTSIDE:
                raise ValueError(f"tour point {c + 1} lies outside its polygon")


@dataclass(eq=False)
class Tour:
    """A visiting order over all cities plus one representative point per city.

    ``perm`` is a permutation of range(p) in visiting order; ``points`` is
    indexed by city, not by position.
    """

    perm: list[int]
    points: list[np.ndarray]

    def __post_init__(self):
        self.perm = [int(c) for c in self.perm]
        if sorted(self.perm) != list(range(len(self.points))):
            raise ValueError("perm must be a permutation of range(len(points))")
        self.points = [as_point(pt) for pt in self.points]

    @property
    def p(self) -> int:
        return len(self.perm)

    def points_in_order(self) -> list[np.ndarray]:
        return [self.points[c] for c in self.perm]


def _closed_length(pts: Sequence[np.ndarray]) -> float:
    arr = np.asarray(pts, dtype=float)
    d = arr - np.roll(arr, -1, axis=0)
    return float(np.sqrt((d * d).sum(axis=1)).sum())


def route_length(tour: Tour) -> float:
    """Closed Euclidean tour length."""
    return _closed_length(tour.points_in_order())


def path_gradient(x, a, b, coincide_eps: float = 1e-12) -> np.ndarray:
    """Gradient of |x-a| + |x-b| at x: (x-a)/|x-a| + (x-b)/|x-b|."""
    x = as_point(x)
    da = x - as_point(a)
    db = x - as_point(b)
    na = float(np.hypot(*da))
    nb = float(np.hypot(*db))
    if na < coincide_eps or nb < coincide_eps:
        raise CoincidentAnchors(f"point {x} coincides with a tour neighbor")
    return da / na + db / nb


def block_gradient(tour: Tour, i: int) -> np.ndarray:
    """Gradient of the tour length with respect to city i's point."""
    pos = tour.perm.index(i)
    a = tour.points[tour.perm[pos - 1]]
    b = tour.points[tour.perm[(pos + 1) % tour.p]]
    return path_gradient(tour.points[i], a, b)


@dataclass
class CtspConfig:
    """Oracle resolution and engine parameters for the polygon-tour problem.

    ``grid_resolution`` samples per candidate segment, ``refinements`` zoom
    rounds (10x each), ``interior_resolution`` per axis for the fallback
    interior grid of the regularized oracle.
    """

    bcd: BcdConfig = field(default_factory=lambda: BcdConfig(max_cycles=500))
    grid_resolution: int = 1000
    refinements: int = 3
    interior_resolution: int = 64
    tie_tol: float = 1e-12
    coincide_eps: float = 1e-12


def _refined_scan(scan_at, point_at, current, refinements: int, tie_tol: float):
    """Zoom-refine a segment scan, chasing nearer-to-current among value ties."""
    t, v = scan_at(0.0, 1.0)
    pt = point_at(t)
    d2 = float((pt[0] - current[0]) ** 2 + (pt[1] - current[1]) ** 2)
    width = 1.0
    for _ in range(refinements):
        width /= 10.0
        lo = min(max(t - 0.5 * width, 0.0), 1.0 - width)
        t2, v2 = scan_at(lo, lo + width)
        band = tie_tol * (1.0 + abs(v))
        if v2 < v - band:
            accept = True
        elif v2 <= v + band:
            pt2 = point_at(t2)
            accept = (pt2[0] - current[0]) ** 2 + (pt2[1] - current[1]) ** 2 < d2
        else:
            accept = False
        if accept:
            t, v = t2, v2
            pt = point_at(t)
            d2 = float((pt[0] - current[0]) ** 2 + (pt[1] - current[1]) ** 2)
    return t, v


def _pick(candidates, current, tie_tol: float):
    """Least value, ties within tie_tol*(1+|best|) broken toward current."""
    best_val = min(val for val, _ in candidates)
    band = best_val + tie_tol * (1.0 + abs(best_val))
    chosen = None
    chosen_d2 = np.inf
    chosen_val = best_val
    for val, pt in candidates:
        if val <= band:
            d2 = float((pt[0] - current[0]) ** 2 + (pt[1] - current[1]) ** 2)
            if d2 < chosen_d2:
                chosen = pt
                chosen_d2 = d2
                chosen_val = val
    return chosen, chosen_val


def _route_value(pt, a, b) -> float:
    return float(np.hypot(*(pt - a)) + np.hypot(*(pt - b)))


def solve_block_global(
    a,
    b,
    poly: Polygon,
    current,
    grid_resolution: int = 1000,
    refinements: int = 3,
    tie_tol: float = 1e-12,
) -> np.ndarray:
    """Global minimizer of |a-x| + |x-b| over the closed polygon.

    Candidates: the chord [a, b] clipped to the polygon, every polygon edge
    (each brute-forced along its parameter), and ``current`` itself, which
    guarantees the result never beats the incumbent's objective from below
    spuriously and makes repeated calls idempotent at a fixed point.
    """
    a = as_point(a)
    b = as_point(b)
    current = as_point(current)
    segs = clip_segment_to_polygon(Segment(a, b), poly) + polygon_edges(poly)
    candidates = []
    for seg in segs:
        if seg.is_degenerate:
            candidates.append((_route_value(seg.p, a, b), seg.p))
            continue
        p, q = seg.p, seg.q

        def scan_at(lo, hi, p=p, q=q):
            return kernels.scan_segment_route(
                a[0], a[1], b[0], b[1], p[0], p[1], q[0], q[1],
                lo, hi, grid_resolution, current[0], current[1], tie_tol,
            )

        t, v = _refined_scan(scan_at, seg.point_at, current, refinements, tie_tol)
        candidates.append((v, seg.point_at(t)))
    if point_in_polygon(current, poly) is not Containment.OUTSIDE:
        candidates.append((_route_value(current, a, b), current.copy()))
    pt, _ = _pick(candidates, current, tie_tol)
    return pt


def minimize_model_over_polygon(
    model: QuadraticModel,
    poly: Polygon,
    current,
    *,
    extra_segments: Sequence[Segment] = (),
    grid_resolution: int = 1000,
    refinements: int = 3,
    interior_resolution: int = 64,
    tie_tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Global grid minimizer of a quadratic model over the closed polygon.

    Scans the polygon edges and any extra candidate segments, adds a coarse
    interior grid, the model's unconstrained stationary point when feasible,
    and ``current``.  Returns (point, model value).
    """
    current = as_point(current)
    g = model.g
    B = model.B
    candidates = []
    for seg in list(extra_segments) + polygon_edges(poly):
        if seg.is_degenerate:
            candidates.append((model_value(model, seg.p), seg.p))
            continue
        p, q = seg.p, seg.q

        def scan_at(lo, hi, p=p, q=q):
            return kernels.scan_segment_model(
                p[0], p[1], q[0], q[1], lo, hi, grid_resolution,
                model.base[0], model.base[1], g[0], g[1],
                B[0, 0], B[0, 1], B[1, 1], model.sigma,
                current[0], current[1], tie_tol,
            )

        t, v = _refined_scan(scan_at, seg.point_at, current, refinements, tie_tol)
        candidates.append((v, seg.point_at(t)))

    lo, hi = poly.bbox
    n = interior_resolution
    axes = [lo[i] + np.arange(n) * ((hi[i] - lo[i]) / (n - 1)) for i in range(2)]
    gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
    xs = gx.ravel()
    ys = gy.ravel()
    codes = kernels.points_in_polygon(xs, ys, poly.vertices, poly.boundary_eps)
    mask = codes != kernels.OUTSIDE
    if mask.any():
        pts = np.stack([xs[mask], ys[mask]], axis=1)
        d = pts - model.base
        vals = d @ g + 0.5 * np.einsum("ij,jk,ik->i", d, B, d) + 0.5 * model.sigma * (d * d).sum(1)
        j = int(np.argmin(vals))
        candidates.append((float(vals[j]), pts[j]))

    try:
        newton = model.base + np.linalg.solve(B + model.sigma * np.eye(2), -g)
        if np.all(np.isfinite(newton)) and point_in_polygon(newton, poly) is not Containment.OUTSIDE:
            candidates.append((model_value(model, newton), newton))
    except np.linalg.LinAlgError:
        pass

    if point_in_polygon(current, poly) is not Containment.OUTSIDE:
        candidates.append((model_value(model, current), current.copy()))

    return _pick(candidates, current, tie_tol)


def solve_block_regularized(
    a,
    b,
    poly: Polygon,
    x_k,
    model: QuadraticModel,
    grid_resolution: int = 1000,
    refinements: int = 3,
    interior_resolution: int = 64,
    tie_tol: float = 1e-12,
) -> np.ndarray:
    """Regularized-model block trial over the same candidate family as
    :func:`solve_block_global`, plus an interior grid (the model's minimizer
    need not lie on the chord-or-boundary family)."""
    a = as_point(a)
    b = as_point(b)
    extra = clip_segment_to_polygon(Segment(a, b), poly)
    pt, _ = minimize_model_over_polygon(
        model,
        poly,
        x_k,
        extra_segments=extra,
        grid_resolution=grid_resolution,
        refinements=refinements,
        interior_resolution=interior_resolution,
        tie_tol=tie_tol,
    )
    return pt


def edge_constraints_at(poly: Polygon, x, active_tol: float | None = None) -> tuple[SmoothInequality, ...]:
    """Half-plane constraints of the polygon edges passing within active_tol of x.

    Valid as a local description of the feasible set near x; used to back
    multiplier estimates for boundary trial points.
    """
    x = as_point(x)
    if active_tol is None:
        lo, hi = poly.bbox
        active_tol = 1e-7 * (1.0 + float(np.hypot(*(hi - lo))))
    out = []
    v = poly.vertices
    n = v.shape[0]
    for i in range(n):
        va = v[i]
        vb = v[(i + 1) % n]
        e = vb - va
        l2 = float(e @ e)
        t = min(1.0, max(0.0, float((x - va) @ e) / l2))
        r = x - va - t * e
        if float(r @ r) > active_tol * active_tol:
            continue
        nrm = np.array([e[1], -e[0]]) / np.sqrt(l2)

        def evaluate(z, nrm=nrm, va=va):
            return float(nrm @ (np.asarray(z, dtype=float) - va))

        def gradient(z, nrm=nrm):
            return nrm.copy()

        out.append(SmoothInequality(evaluate, gradient, label=f"edge {i}"))
    return tuple(out)


def _decollide(pt, a, b, eps):
    """Nudge a trial off a coinciding anchor along the a->b direction."""
    for attempt in range(3):
        da = float(np.hypot(*(pt - a)))
        db = float(np.hypot(*(pt - b)))
        if da >= eps and db >= eps:
            return pt
        d = b - a
        nd = float(np.hypot(*d))
        u = d / nd if nd >= eps else np.array([1.0, 0.0])
        pt = pt + (2.0**attempt) * eps * u
        log.warning("trial coincided with a tour neighbor; nudged by %g", (2.0**attempt) * eps)
    return pt


def optimize_points(
    instance: Instance,
    perm: Sequence[int],
    x0: Sequence[np.ndarray],
    config: CtspConfig | None = None,
    observer=None,
) -> tuple[list[np.ndarray], BcdState]:
    """Optimize the points of a (possibly partial) tour with fixed order.

    ``perm`` lists distinct city indices in visiting order (at least 2);
    ``x0`` is aligned with ``perm``.  Returns the optimized points (same
    alignment) and the solver state with its full trace.
    """
    if config is None:
        config = CtspConfig()
    cities = [int(c) for c in perm]
    if len(set(cities)) != len(cities) or len(cities) < 2:
        raise ValueError("perm must hold at least 2 distinct city indices")
    polys = [instance.polygons[c] for c in cities]
    k = len(cities)
    x_start = [as_point(pt) for pt in x0]
    if len(x_start) != k:
        raise ValueError("x0 must align with perm")
    for j, (pt, poly) in enumerate(zip(x_start, polys)):
        if point_in_polygon(pt, poly) is Containment.OUTSIDE:
            raise ValueError(f"start point for tour position {j} lies outside its polygon")

    def value(x):
        return _closed_length(x)

    def grad(x, j):
        a = x[(j - 1) % k]
        b = x[(j + 1) % k]
        return path_gradient(x[j], a, b, config.coincide_eps)

    objective = Objective(value=value, block_gradient=grad)

    def make_oracle(j):
        poly = polys[j]

        def oracle(ctx, want_global):
            a = ctx.x[(j - 1) % k]
            b = ctx.x[(j + 1) % k]
            if want_global:
                pt = solve_block_global(
                    a, b, poly, ctx.x_i,
                    config.grid_resolution, config.refinements, config.tie_tol,
                )
                pt = _decollide(pt, a, b, config.coincide_eps)
                constraints = edge_constraints_at(poly, pt)
                rec = estimate_multipliers(
                    pt,
                    path_gradient(pt, a, b, config.coincide_eps),
                    constraints,
                    config.bcd.delta,
                )
                return Trial(point=pt, alternative=2, record=rec, constraints=constraints)
            model = ctx.model()
            pt = solve_block_regularized(
                a, b, poly, ctx.x_i, model,
                config.grid_resolution, config.refinements,
                config.interior_resolution, config.tie_tol,
            )
            pt = _decollide(pt, a, b, config.coincide_eps)
            constraints = edge_constraints_at(poly, pt)
            rec = estimate_multipliers(
                pt, model.g + model.B @ (pt - model.base) + model.sigma * (pt - model.base),
                constraints, config.bcd.delta,
            )
            return Trial(point=pt, alternative=1, record=rec, constraints=constraints)

        return oracle

    blocks = [BlockSpec(dim=2, oracle=make_oracle(j), domain=polys[j]) for j in range(k)]
    state = run_bcd(x_start, config.bcd, objective, blocks, observer=observer)
    return list(state.x), state


def optimize_tour(
    instance: Instance, tour: Tour, config: CtspConfig | None = None, observer=None
) -> tuple[Tour, BcdState]:
    """Tour-level wrapper around :func:`optimize_points`."""
    x0 = tour.points_in_order()
    new_pts, state = optimize_points(instance, tour.perm, x0, config, observer=observer)
    points = list(tour.points)
    for pos, c in enumerate(tour.perm):
        points[c] = new_pts[pos]
    return Tour(list(tour.perm), points), state
