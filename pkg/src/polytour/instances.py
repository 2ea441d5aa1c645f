"""Instance files, random instance generation, and the preprocessing pipeline.

The on-disk format is a single JSON document::

    {"name": "...", "polygons": [{"id": 1, "vertices": [[x, y], ...]}, ...]}

Ids are 1-based, unique and contiguous.  Coordinates are written with 17
significant digits so that save followed by load reproduces every float
bit-exactly.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .ctsp import Instance
from .geometry import GeometryError, Polygon, shrink_polygon, subsample_polygon

__all__ = [
    "InstanceError",
    "load_instance",
    "save_instance",
    "preprocess",
    "generate_instance",
    "star_polygon",
    "random_point",
]


class InstanceError(ValueError):
    """Malformed instance file or invariant violation, with the polygon id."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def load_instance(path) -> Instance:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read instance file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "polygons" not in doc:
        raise InstanceError("instance document must be an object with a 'polygons' list")
    raw = doc["polygons"]
    if not isinstance(raw, list) or len(raw) < 2:
        raise InstanceError("instance needs a list of at least 2 polygons")
    ids = [entry.get("id") for entry in raw]
    if sorted(ids) != list(range(1, len(raw) + 1)):
        raise InstanceError(f"polygon ids must be 1..{len(raw)} without gaps, got {ids}")
    polygons: list[Polygon | None] = [None] * len(raw)
    for entry in raw:
        pid = entry["id"]
        try:
            polygons[pid - 1] = Polygon(entry["vertices"])
        except (GeometryError, KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"polygon {pid}: {exc}") from exc
    return Instance(polygons=polygons, name=str(doc.get("name", "")))


def save_instance(instance: Instance, path) -> None:
    parts = ["{\n"]
    parts.append(f'  "name": {json.dumps(instance.name)},\n')
    parts.append('  "polygons": [\n')
    for i, poly in enumerate(instance.polygons):
        coords = ", ".join(f"[{_fmt(x)}, {_fmt(y)}]" for x, y in poly.vertices)
        comma = "," if i + 1 < len(instance.polygons) else ""
        parts.append(f'    {{"id": {i + 1}, "vertices": [{coords}]}}{comma}\n')
    parts.append("  ]\n}\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("".join(parts))


def preprocess(instance: Instance, target_vertices: int = 50, shrink: float = 0.8) -> Instance:
    """Subsample each polygon to about ``target_vertices`` and shrink it about
    its bounding-box center."""
    out = []
    for i, poly in enumerate(instance.polygons):
        try:
            poly = subsample_polygon(poly, target_vertices)
            poly = shrink_polygon(poly, shrink)
        except GeometryError as exc:
            raise InstanceError(f"polygon {i + 1}: {exc}") from exc
        out.append(poly)
    return Instance(polygons=out, name=instance.name)


def star_polygon(
    rng: np.random.Generator,
    center,
    n_vertices: int,
    base_radius: float,
    radial_jitter: float = 0.45,
    angle_jitter: float = 0.2,
) -> Polygon:
    """Random simple polygon, star-shaped about ``center``.

    Angles stay strictly increasing, so the ring cannot self-intersect;
    radial jitter above ~0.2 makes reflex vertices common.
    """
    center = np.asarray(center, dtype=float)
    k = int(n_vertices)
    angles = 2.0 * math.pi * (np.arange(k) + rng.uniform(-angle_jitter, angle_jitter, k)) / k
    radii = base_radius * rng.uniform(1.0 - radial_jitter, 1.0 + radial_jitter, k)
    verts = center + np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
    return Polygon(verts)


def generate_instance(
    p: int,
    seed: int,
    spread: float = 10.0,
    size_range: tuple[float, float] = (1.0, 2.5),
) -> Instance:
    """Deterministic random instance: p star polygons on a jittered grid with
    pairwise disjoint bounding boxes."""
    if p < 2:
        raise InstanceError("p must be >= 2")
    r_lo, r_hi = size_range
    if not 0 < r_lo <= r_hi:
        raise InstanceError("size_range must satisfy 0 < lo <= hi")
    jitter = 0.1 * spread
    if r_hi * 1.45 + jitter >= 0.5 * spread:
        raise InstanceError("size_range too large for the grid spread; polygons could collide")
    rng = np.random.default_rng(seed)
    cols = math.ceil(math.sqrt(p))
    polygons = []
    for idx in range(p):
        row, col = divmod(idx, cols)
        center = np.array(
            [
                col * spread + rng.uniform(-jitter, jitter),
                row * spread + rng.uniform(-jitter, jitter),
            ]
        )
        k = int(rng.integers(5, 13))
        base_r = rng.uniform(r_lo, r_hi)
        polygons.append(star_polygon(rng, center, k, base_r))
    boxes = [poly.bbox for poly in polygons]
    for i in range(p):
        for j in range(i + 1, p):
            lo1, hi1 = boxes[i]
            lo2, hi2 = boxes[j]
            if np.all(lo1 <= hi2) and np.all(lo2 <= hi1):
                raise InstanceError(f"generated polygons {i + 1} and {j + 1} overlap")
    return Instance(polygons=polygons, name=f"generated-p{p}-seed{seed}")


def random_point(poly: Polygon, rng: np.random.Generator, max_tries: int = 10000) -> np.ndarray:
    """Uniform-ish feasible point by rejection sampling from the bounding box."""
    from .geometry import Containment, point_in_polygon

    lo, hi = poly.bbox
    for _ in range(max_tries):
        pt = rng.uniform(lo, hi)
        if point_in_polygon(pt, poly) is not Containment.OUTSIDE:
            return pt
    raise RuntimeError("rejection sampling failed; polygon area is too small for its box")
