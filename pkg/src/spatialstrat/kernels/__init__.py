"""Geometry kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imported successfully; set the
environment variable ``SPATIALSTRAT_PURE_PYTHON=1`` to force the fallback
(as the benchmark suite does when comparing the two).
"""

import os

from . import _ref

if os.environ.get("SPATIALSTRAT_PURE_PYTHON"):
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _fastgeom as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = _ref
        BACKEND = "python"

points_in_rings = _impl.points_in_rings
segment_lengths_in_rings = _impl.segment_lengths_in_rings

__all__ = ["points_in_rings", "segment_lengths_in_rings", "BACKEND"]
