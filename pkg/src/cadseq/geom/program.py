"""Compiled CSG programs and point membership classification.

A model compiles into per-op data: frame rotation/origin, the sketch profile
flattened for crossing tests, the world-space height interval (extrude
distances scaled by the op's sketch scale) and the boolean kind. Membership
of a world point folds per-op membership through New/Join/Cut/Intersect;
per-op membership is "height inside the interval AND the in-plane point
inside the profile" with arcs intersected analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import sketch2d
from ..errors import DegenerateExtent
from ..model import BooleanKind, CadModel, require_valid


@dataclass
class CompiledOp:
    rotation: np.ndarray  # (3, 3), columns are the frame axes
    origin: np.ndarray  # (3,)
    scale: float
    loops: list[sketch2d.CompiledLoop]
    source_loops: tuple  # the model Loop objects, for sampling/tessellation
    z_lo: float  # world units: -extrude_opposite * scale
    z_hi: float  # world units: +extrude_toward * scale
    boolean: BooleanKind
    sketch_bbox: tuple[float, float, float, float]  # sketch units, outer loop

    def to_local(self, points: np.ndarray) -> np.ndarray:
        return (points - self.origin) @ self.rotation

    def to_world(self, local: np.ndarray) -> np.ndarray:
        return local @ self.rotation.T + self.origin

    def contains_local(self, local: np.ndarray) -> np.ndarray:
        in_height = (local[:, 2] >= self.z_lo) & (local[:, 2] <= self.z_hi)
        xs = local[:, 0] / self.scale
        ys = local[:, 1] / self.scale
        return in_height & sketch2d.points_in_loops(self.loops, xs, ys)

    def contains_world(self, points: np.ndarray) -> np.ndarray:
        return self.contains_local(self.to_local(points))

    def world_corners(self) -> np.ndarray:
        min_x, min_y, max_x, max_y = self.sketch_bbox
        s = self.scale
        xs = (min_x * s, max_x * s)
        ys = (min_y * s, max_y * s)
        zs = (self.z_lo, self.z_hi)
        corners = np.array([(x, y, z) for x in xs for y in ys for z in zs])
        return self.to_world(corners)


@dataclass
class SolidProgram:
    ops: list[CompiledOp]

    def __len__(self) -> int:
        return len(self.ops)


def compile_model(model: CadModel) -> SolidProgram:
    """Compile a valid model; op order is preserved."""
    require_valid(model)
    ops = []
    for op in model.ops:
        rotation = np.column_stack(
            [np.asarray(op.frame.axis_x), np.asarray(op.frame.axis_y), np.asarray(op.frame.axis_z)]
        ).astype(float)
        loops = [sketch2d.compile_loop(loop) for loop in op.profile.loops]
        ops.append(
            CompiledOp(
                rotation=rotation,
                origin=np.asarray(op.frame.origin, dtype=float),
                scale=op.scale,
                loops=loops,
                source_loops=op.profile.loops,
                z_lo=-op.extrude_opposite * op.scale,
                z_hi=op.extrude_toward * op.scale,
                boolean=op.boolean,
                sketch_bbox=sketch2d.loop_bbox(op.profile.loops[0]),
            )
        )
    return SolidProgram(ops=ops)


def contains(program: SolidProgram, points) -> np.ndarray:
    """Membership of world points in the folded solid.

    Total on any op sequence: Cut or Intersect before material exists yields
    empty, New replaces the running solid.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    state = np.zeros(len(points), dtype=bool)
    for op in program.ops:
        v = op.contains_world(points)
        if op.boolean is BooleanKind.NEW:
            state = v
        elif op.boolean is BooleanKind.JOIN:
            state = state | v
        elif op.boolean is BooleanKind.CUT:
            state = state & ~v
        else:
            state = state & v
    return state


def contains_point(program: SolidProgram, point) -> bool:
    return bool(contains(program, np.asarray(point, dtype=float).reshape(1, 3))[0])


def bbox(program: SolidProgram) -> tuple[np.ndarray, np.ndarray]:
    """Conservative world bounding box over every op's extruded slab."""
    if not program.ops:
        raise DegenerateExtent("empty program has no bounding box")
    corners = np.vstack([op.world_corners() for op in program.ops])
    return corners.min(axis=0), corners.max(axis=0)


def bbox_diagonal(program: SolidProgram) -> float:
    lo, hi = bbox(program)
    return float(np.linalg.norm(hi - lo))
