"""cadseq: a sketch-extrude CAD sequence toolkit.

Core pieces: an immutable model IR with validation and canonicalization
(cadseq.model), four interchangeable text representations (cadseq.formats),
a CSG executor with surface sampling (cadseq.geom), point-cloud metrics
(cadseq.metrics), a composite RL reward (cadseq.reward), an edit/diff engine
(cadseq.edit), interaction-data generation (cadseq.datagen), an HTTP service
(cadseq.service) and a CLI (cadseq.cli).
"""

from .model import (
    Arc,
    BooleanKind,
    CadModel,
    Circle,
    CoordinateFrame,
    Line,
    Loop,
    Profile,
    SketchExtrude,
    canonicalize,
    validate,
)
from .formats import ReprKind, check_format, convert, parse, print_model

__all__ = [
    "Arc",
    "BooleanKind",
    "CadModel",
    "Circle",
    "CoordinateFrame",
    "Line",
    "Loop",
    "Profile",
    "SketchExtrude",
    "ReprKind",
    "canonicalize",
    "check_format",
    "convert",
    "parse",
    "print_model",
    "validate",
]

__version__ = "0.1.0"
