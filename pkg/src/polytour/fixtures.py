"""Named covering-set constructions used by the test suite and examples.

Two constructions are exposed:

* an L-shaped block set whose reentrant corner is described, inside a ball
  around the corner, by a single C^1 "kink" constraint whose gradient
  vanishes on both walls;
* a pathological single-set cover whose constraint pair also admits points
  outside the intended set, so that closure membership plus constraint
  satisfaction does not imply feasibility.
"""

from __future__ import annotations

import numpy as np

from .covering import CoveringSet, OpenBall, OpenBox, OpenCover, SmoothInequality

__all__ = [
    "kink_constraint",
    "kink_cover",
    "kink_region_contains",
    "pathological_cover",
]


def kink_constraint() -> SmoothInequality:
    """C^1 constraint carving the complement of the open positive quadrant.

    phi(z) = (z1 z2)^2 on the closed positive quadrant and -(z1 z2)^2
    elsewhere; phi(z) <= 0 exactly off the open positive quadrant.  The
    gradient is continuous and vanishes on both coordinate axes.
    """

    def evaluate(z):
        z = np.asarray(z, dtype=float)
        s = (z[0] * z[1]) ** 2
        return float(s if (z[0] >= 0.0 and z[1] >= 0.0) else -s)

    def gradient(z):
        z = np.asarray(z, dtype=float)
        g = np.array([2.0 * z[0] * z[1] * z[1], 2.0 * z[0] * z[0] * z[1]])
        return g if (z[0] >= 0.0 and z[1] >= 0.0) else -g

    return SmoothInequality(evaluate, gradient, label="quadrant-kink")


def _linear(n, c, label):
    n = np.asarray(n, dtype=float)

    def evaluate(x, n=n, c=c):
        return float(n @ np.asarray(x, dtype=float) - c)

    def gradient(x, n=n):
        return n.copy()

    return SmoothInequality(evaluate, gradient, label=label)


def kink_region_contains(x, tol: float = 0.0) -> bool:
    """Membership in the L-shaped set [-1,1]^2 minus the open positive quadrant."""
    x = np.asarray(x, dtype=float)
    in_square = bool(np.all(np.abs(x) <= 1.0 + tol))
    return in_square and (x[0] <= tol or x[1] <= tol)


def kink_cover(ball_radius: float = 0.3) -> OpenCover:
    """Open cover of the L-shaped set with the kink ball around the corner.

    Four box regions with linear constitutive constraints cover everything
    away from the reentrant corner; the ball around the origin uses the
    kink constraint.  Closure membership plus constraints implies set
    membership for every region (no pathological overhang).
    """
    left = CoveringSet(
        region=OpenBox([-1.2, -1.2], [-0.05, 1.2]),
        constraints=(
            _linear([-1.0, 0.0], 1.0, "x >= -1"),
            _linear([0.0, -1.0], 1.0, "y >= -1"),
            _linear([0.0, 1.0], 1.0, "y <= 1"),
        ),
    )
    bottom = CoveringSet(
        region=OpenBox([-1.2, -1.2], [1.2, -0.05]),
        constraints=(
            _linear([0.0, -1.0], 1.0, "y >= -1"),
            _linear([-1.0, 0.0], 1.0, "x >= -1"),
            _linear([1.0, 0.0], 1.0, "x <= 1"),
        ),
    )
    wall_up = CoveringSet(
        region=OpenBox([-0.2, 0.1], [0.2, 1.2]),
        constraints=(
            _linear([1.0, 0.0], 0.0, "x <= 0"),
            _linear([0.0, 1.0], 1.0, "y <= 1"),
        ),
    )
    wall_right = CoveringSet(
        region=OpenBox([0.1, -0.2], [1.2, 0.2]),
        constraints=(
            _linear([0.0, 1.0], 0.0, "y <= 0"),
            _linear([1.0, 0.0], 1.0, "x <= 1"),
        ),
    )
    corner = CoveringSet(
        region=OpenBall([0.0, 0.0], ball_radius),
        constraints=(kink_constraint(),),
    )
    return OpenCover([left, bottom, wall_up, wall_right, corner])


def pathological_cover() -> OpenCover:
    """Single-set cover whose constraints admit a spurious feasible point.

    The intended set is the vertical segment {2} x [-1, 1].  Inside the open
    ball around (2, 0) of radius 1 it is described by the constraint pair
    (x-1)(x-2) <= 0 and -(x-1)(x-2) <= 0, i.e. (x-1)(x-2) = 0.  The point
    (1, 0) sits on the ball's sphere, satisfies both constraints, yet is not
    in the set: trial selection must flag it as uncovered since it belongs
    to no open region.
    """

    def g1(x):
        x = np.asarray(x, dtype=float)
        return float((x[0] - 1.0) * (x[0] - 2.0))

    def dg1(x):
        x = np.asarray(x, dtype=float)
        return np.array([2.0 * x[0] - 3.0, 0.0])

    c1 = SmoothInequality(g1, dg1, label="(x-1)(x-2) <= 0")
    c2 = SmoothInequality(
        lambda x: -g1(x), lambda x: -dg1(x), label="-(x-1)(x-2) <= 0"
    )
    the_set = CoveringSet(
        region=OpenBall([2.0, 0.0], 1.0),
        constraints=(c1, c2),
        sample_box=(np.array([1.0, -1.0]), np.array([3.0, 1.0])),
    )
    return OpenCover([the_set])
