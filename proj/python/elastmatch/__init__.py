"""Elastic 2D shape matching by symmetric-difference minimization."""

try:
    from ._core import (
        IoError,
        IterationRecord,
        MatchResult,
        MeshFailure,
        __version__,
        load_shape,
        match,
        nearest_point_match,
        save_shape,
        symdiff_area,
        triangulate,
    )
except ImportError:  # in-tree test runs load the extension from the build dir
    from _core import (
        IoError,
        IterationRecord,
        MatchResult,
        MeshFailure,
        __version__,
        load_shape,
        match,
        nearest_point_match,
        save_shape,
        symdiff_area,
        triangulate,
    )

__all__ = [
    "IoError",
    "IterationRecord",
    "MatchResult",
    "MeshFailure",
    "__version__",
    "load_shape",
    "match",
    "nearest_point_match",
    "save_shape",
    "symdiff_area",
    "triangulate",
]
