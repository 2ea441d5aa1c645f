"""Kernel backend dispatch.

The compiled extension is preferred when it importable; the numpy
fallback is otherwise used transparently.  Set ``POLYTOUR_PURE_PYTHON=1``
to force the fallback (useful for benchmarking and debugging).
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("POLYTOUR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
OUTSIDE = _impl.OUTSIDE
ON_BOUNDARY = _impl.ON_BOUNDARY
INSIDE = _impl.INSIDE

scan_segment_route = _impl.scan_segment_route
scan_segment_model = _impl.scan_segment_model
point_in_polygon = _impl.point_in_polygon
points_in_polygon = _impl.points_in_polygon


def available_backends():
    """Names of importable backends ('c' first when present)."""
    names = []
    try:
        from . import _ckernels  # noqa: F401

        names.append("c")
    except ImportError:
        pass
    names.append("python")
    return names
