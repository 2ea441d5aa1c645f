"""Block feasible sets described by open coverings with constitutive constraints.

A block's feasible set is covered by open regions (balls, axis boxes, convex
polygons); inside each region the set is carved out by smooth inequality
constraints that are only valid locally.  This module owns the per-region
machinery: global minimization of the regularized quadratic model by grid
search with zoom refinement, trial selection across regions, nonnegative
least-squares multiplier estimation, and the stationarity certificate used
to accept model-based trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import nnls

__all__ = [
    "CoverViolation",
    "EmptyFeasibleSample",
    "SmoothInequality",
    "OpenBall",
    "OpenBox",
    "OpenConvexPolygon",
    "CoveringSet",
    "OpenCover",
    "QuadraticModel",
    "MultiplierRecord",
    "CertificateCheck",
    "model_value",
    "model_gradient",
    "solve_qprob_grid",
    "select_trial",
    "estimate_multipliers",
    "check_alternative1",
    "propose_trial",
    "block_oracle",
]


class CoverViolation(RuntimeError):
    """A probed point lies in no open covering region."""


class EmptyFeasibleSample(RuntimeError):
    """No grid point of a covering region satisfied its constraints."""


@dataclass(frozen=True, eq=False)
class SmoothInequality:
    """A smooth constraint g(x) <= 0 with an explicit gradient."""

    evaluate: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def __repr__(self):
        return f"SmoothInequality({self.label!r})"


@dataclass(frozen=True, eq=False)
class OpenBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def contains_open(self, x, margin: float = 0.0):
        d = np.linalg.norm(np.asarray(x, dtype=float) - self.center, axis=-1)
        return d < self.radius - margin

    def contains_closure(self, x, slack: float = 0.0):
        d = np.linalg.norm(np.asarray(x, dtype=float) - self.center, axis=-1)
        return d <= self.radius + slack

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True, eq=False)
class OpenBox:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if not np.all(self.lo < self.hi):
            raise ValueError("box must satisfy lo < hi componentwise")

    def contains_open(self, x, margin: float = 0.0):
        x = np.asarray(x, dtype=float)
        return np.all((x > self.lo + margin) & (x < self.hi - margin), axis=-1)

    def contains_closure(self, x, slack: float = 0.0):
        x = np.asarray(x, dtype=float)
        return np.all((x >= self.lo - slack) & (x <= self.hi + slack), axis=-1)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()


@dataclass(frozen=True, eq=False)
class OpenConvexPolygon:
    """Open convex region {x : normals @ x < offsets}."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "normals", np.asarray(self.normals, dtype=float))
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=float))

    def contains_open(self, x, margin: float = 0.0):
        x = np.asarray(x, dtype=float)
        vals = x @ self.normals.T
        return np.all(vals < self.offsets - margin, axis=-1)

    def contains_closure(self, x, slack: float = 0.0):
        x = np.asarray(x, dtype=float)
        vals = x @ self.normals.T
        return np.all(vals <= self.offsets + slack, axis=-1)

    def bounding_box(self):
        raise ValueError("half-plane regions need an explicit sample_box")


@dataclass(frozen=True, eq=False)
class CoveringSet:
    """One open covering region plus its constitutive constraints.

    ``sample_box`` bounds the grid search and must contain the region's
    closure; it is derived from the region when omitted.
    """

    region: OpenBall | OpenBox | OpenConvexPolygon
    constraints: tuple[SmoothInequality, ...] = ()
    sample_box: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.sample_box is None:
            object.__setattr__(self, "sample_box", self.region.bounding_box())
        else:
            lo = np.asarray(self.sample_box[0], dtype=float)
            hi = np.asarray(self.sample_box[1], dtype=float)
            object.__setattr__(self, "sample_box", (lo, hi))


@dataclass(eq=False)
class OpenCover:
    """A list of covering sets whose open regions jointly cover the block set.

    ``membership_witness`` maps a point to the index of an open region
    containing it (or None); the default scans the sets in order.
    """

    sets: list[CoveringSet]
    membership_witness: Callable[[np.ndarray], int | None] | None = None

    def witness(self, x, margin: float = 0.0) -> int | None:
        if self.membership_witness is not None:
            return self.membership_witness(x)
        for j, cs in enumerate(self.sets):
            if cs.region.contains_open(x, margin):
                return j
        return None

    def check_point(self, x, margin: float = 0.0) -> int:
        """Witness index for x, raising :class:`CoverViolation` when absent."""
        j = self.witness(x, margin)
        if j is None:
            raise CoverViolation(f"point {np.asarray(x)} lies in no open covering region")
        return j


@dataclass(eq=False)
class QuadraticModel:
    """Regularized quadratic model m(x) = g.d + 0.5 d.B d + 0.5 sigma |d|^2, d = x - base."""

    g: np.ndarray
    B: np.ndarray
    sigma: float
    base: np.ndarray

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        self.base = np.asarray(self.base, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        d = self.g.shape[0]
        if self.B.shape != (d, d):
            raise ValueError(f"B must be ({d}, {d}), got {self.B.shape}")
        if not np.all(np.isfinite(self.B)) or not np.all(np.isfinite(self.g)):
            raise ValueError("model has non-finite entries")
        if not np.allclose(self.B, self.B.T, atol=1e-12 * (1.0 + np.abs(self.B).max())):
            raise ValueError("B must be symmetric")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


def model_value(m: QuadraticModel, x) -> float:
    d = np.asarray(x, dtype=float) - m.base
    return float(m.g @ d + 0.5 * d @ m.B @ d + 0.5 * m.sigma * d @ d)


def model_gradient(m: QuadraticModel, x) -> np.ndarray:
    d = np.asarray(x, dtype=float) - m.base
    return m.g + m.B @ d + m.sigma * d


@dataclass(eq=False)
class MultiplierRecord:
    """Multiplier estimate at a trial point for one covering set.

    ``kkt_residual`` is the norm of gradient + sum(mu * constraint gradients);
    ``complementarity`` holds min(mu_l, -g_l(x)) per constraint.
    """

    set_index: int
    mu: np.ndarray
    kkt_residual: float
    complementarity: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.complementarity = np.asarray(self.complementarity, dtype=float)
        if np.any(self.mu < 0):
            raise ValueError("multipliers must be nonnegative")

    @property
    def max_complementarity(self) -> float:
        return float(self.complementarity.max()) if self.complementarity.size else 0.0


def _model_values_batch(m: QuadraticModel, pts: np.ndarray) -> np.ndarray:
    d = pts - m.base
    return d @ m.g + 0.5 * np.einsum("ij,jk,ik->i", d, m.B, d) + 0.5 * m.sigma * np.einsum(
        "ij,ij->i", d, d
    )


def _grid_points(lo: np.ndarray, hi: np.ndarray, resolution: int) -> np.ndarray:
    axes = [lo[i] + np.arange(resolution) * ((hi[i] - lo[i]) / (resolution - 1)) for i in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def solve_qprob_grid(
    cs: CoveringSet,
    m: QuadraticModel,
    resolution: int = 33,
    refinements: int = 3,
) -> tuple[np.ndarray, float]:
    """Global grid minimizer of the model over closure(region) with g <= 0.

    Dense grid over ``sample_box`` followed by ``refinements`` rounds of 10x
    zoom around the incumbent.  Raises :class:`EmptyFeasibleSample` when the
    initial grid contains no feasible point.  Dimension is limited to 3.
    """
    dim = m.base.shape[0]
    if dim > 3:
        raise ValueError("grid search supports dimension <= 3")
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    lo0, hi0 = cs.sample_box
    lo, hi = lo0.astype(float), hi0.astype(float)
    best_pt: np.ndarray | None = None
    best_val = np.inf
    for round_idx in range(refinements + 1):
        pts = _grid_points(lo, hi, resolution)
        mask = np.asarray(cs.region.contains_closure(pts))
        if mask.any():
            pts = pts[mask]
            if cs.constraints:
                feas = np.ones(len(pts), dtype=bool)
                for c in cs.constraints:
                    for i in np.flatnonzero(feas):
                        if c.evaluate(pts[i]) > 0.0:
                            feas[i] = False
                pts = pts[feas]
            if len(pts):
                vals = _model_values_batch(m, pts)
                j = int(np.argmin(vals))
                if vals[j] < best_val:
                    best_val = float(vals[j])
                    best_pt = pts[j].copy()
        if best_pt is None:
            raise EmptyFeasibleSample(
                f"no feasible grid point in sample box {lo0} .. {hi0} at resolution {resolution}"
            )
        width = (hi - lo) / 10.0
        lo = np.clip(best_pt - 0.5 * width, lo0, hi0)
        hi = np.clip(best_pt + 0.5 * width, lo0, hi0)
    return best_pt, best_val


def select_trial(
    cover: OpenCover,
    m: QuadraticModel,
    per_set_minima: Sequence[tuple[np.ndarray, float]],
    margin: float = 0.0,
) -> tuple[int, np.ndarray]:
    """Pick the covering-set index and trial point from per-set minimizers.

    First set whose minimizer has nonpositive model value and lies in its own
    open region wins; otherwise the globally best minimizer is paired with
    any open region containing it.  :class:`CoverViolation` when none does.
    """
    if len(per_set_minima) != len(cover.sets):
        raise ValueError("per_set_minima must align with cover.sets")
    for j, (z, val) in enumerate(per_set_minima):
        if val <= 0.0 and cover.sets[j].region.contains_open(z, margin):
            return j, np.asarray(z, dtype=float)
    jb = int(np.argmin([val for _, val in per_set_minima]))
    z = np.asarray(per_set_minima[jb][0], dtype=float)
    for ja, cs in enumerate(cover.sets):
        if cs.region.contains_open(z, margin):
            return ja, z
    raise CoverViolation(
        f"best minimizer {z} (model value {per_set_minima[jb][1]:g}) lies in no open covering region"
    )


def estimate_multipliers(
    x,
    grad,
    constraints: Sequence[SmoothInequality],
    delta: float,
    set_index: int = -1,
) -> MultiplierRecord:
    """Nonnegative least-squares multipliers for the constraints active at x.

    Constraints with g(x) < -delta are inactive and get mu = 0; the rest
    receive the mu >= 0 minimizing |grad + sum(mu * grad g)|.
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    g_vals = np.array([c.evaluate(x) for c in constraints], dtype=float)
    mu = np.zeros(len(constraints))
    residual_vec = grad.copy()
    active = np.flatnonzero(g_vals >= -delta)
    if active.size:
        G = np.column_stack([constraints[i].gradient(x) for i in active])
        sol, _ = nnls(G, -grad)
        mu[active] = sol
        residual_vec = grad + G @ sol
    comp = np.minimum(mu, -g_vals) if len(constraints) else np.zeros(0)
    return MultiplierRecord(
        set_index=set_index,
        mu=mu,
        kkt_residual=float(np.linalg.norm(residual_vec)),
        complementarity=comp,
    )


@dataclass(frozen=True)
class CertificateCheck:
    """Outcome of the model-trial certificate (all conditions inclusive)."""

    passed: bool
    model_value: float
    kkt_residual: float
    residual_bound: float
    max_complementarity: float
    failures: tuple[str, ...] = ()


def check_alternative1(
    m: QuadraticModel,
    x_trial,
    rec: MultiplierRecord,
    theta: float,
    delta: float,
    step_norm: float | None = None,
) -> CertificateCheck:
    """Model-based trial certificate: nonpositive model value, KKT residual
    within theta * step, complementarity within delta.  Failures list every
    violated condition."""
    x_trial = np.asarray(x_trial, dtype=float)
    if step_norm is None:
        step_norm = float(np.linalg.norm(x_trial - m.base))
    mv = model_value(m, x_trial)
    bound = theta * step_norm
    comp = rec.max_complementarity
    failures = []
    if not mv <= 0.0:
        failures.append(f"model value {mv:g} > 0")
    if not rec.kkt_residual <= bound:
        failures.append(f"KKT residual {rec.kkt_residual:g} > theta*step {bound:g}")
    if not comp <= delta:
        failures.append(f"complementarity {comp:g} > delta {delta:g}")
    return CertificateCheck(
        passed=not failures,
        model_value=mv,
        kkt_residual=rec.kkt_residual,
        residual_bound=bound,
        max_complementarity=comp,
        failures=tuple(failures),
    )


def propose_trial(
    cover: OpenCover,
    m: QuadraticModel,
    *,
    resolution: int = 33,
    refinements: int = 3,
    delta: float = 1e-6,
    margin: float = 0.0,
) -> tuple[int, np.ndarray, MultiplierRecord]:
    """Full per-iteration pipeline: per-set grid minima, selection, multipliers."""
    minima = [solve_qprob_grid(cs, m, resolution, refinements) for cs in cover.sets]
    j, z = select_trial(cover, m, minima, margin)
    rec = estimate_multipliers(
        z, model_gradient(m, z), cover.sets[j].constraints, delta, set_index=j
    )
    return j, z, rec


def block_oracle(
    cover: OpenCover,
    *,
    resolution: int = 33,
    refinements: int = 3,
    delta: float = 1e-6,
    margin: float = 0.0,
):
    """Model-based block oracle over a covered feasible set.

    Returns a callable suitable for :class:`polytour.bcd.BlockSpec`; it
    always produces model-certified trials (the covering route), ignoring
    requests for exact block minimization.
    """
    from .bcd import Trial

    def oracle(ctx, want_global: bool) -> Trial:
        m = ctx.model()
        j, z, rec = propose_trial(
            cover, m, resolution=resolution, refinements=refinements, delta=delta, margin=margin
        )
        return Trial(point=z, alternative=1, record=rec, constraints=cover.sets[j].constraints)

    return oracle
