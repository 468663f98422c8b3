"""Geometry execution: CSG membership, boundary sampling, tessellation."""

from .mesh import TriMesh, tessellate
from .program import SolidProgram, bbox, bbox_diagonal, compile_model, contains, contains_point
from .sampling import (
    SurfacePointCloud,
    normalization_transform,
    normalize_for_eval,
    sample_surface,
)

__all__ = [
    "SolidProgram",
    "SurfacePointCloud",
    "TriMesh",
    "bbox",
    "bbox_diagonal",
    "compile_model",
    "contains",
    "contains_point",
    "normalization_transform",
    "normalize_for_eval",
    "sample_surface",
    "tessellate",
]
