"""Uniform grid quantization of model coordinates.

Raw coordinates are the canonical form; this exists to demonstrate the
accuracy artifacts that snapping sketch-space values to a fixed grid
introduces, most visibly when ops with different sketch scales realize the
same world-space dimension. Positional and length fields are snapped; unit
axes, sweep angles and the op scale are structural and stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OutOfRange
from .model import (
    Arc,
    CadModel,
    Circle,
    CoordinateFrame,
    Curve,
    Line,
    Loop,
    Profile,
    SketchExtrude,
    require_valid,
)


@dataclass(frozen=True)
class QuantizationGrid:
    lo: float = 0.0
    hi: float = 1.0
    bits: int = 8

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("grid requires hi > lo")
        if not 2 <= self.bits <= 16:
            raise ValueError("bits must lie in [2, 16]")

    @property
    def levels(self) -> int:
        return (1 << self.bits) - 1

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.levels

    def index_of(self, x: float) -> int:
        if not self.lo <= x <= self.hi:
            raise OutOfRange(f"value {x!r} outside grid [{self.lo}, {self.hi}]")
        # round-half-even, matching numpy's convention
        scaled = (x - self.lo) / (self.hi - self.lo) * self.levels
        idx = round(scaled)
        return min(max(idx, 0), self.levels)

    def value_of(self, index: int) -> float:
        return self.lo + index / self.levels * (self.hi - self.lo)

    def snap(self, x: float) -> float:
        return self.value_of(self.index_of(x))


def _snap_vec(grid: QuantizationGrid, v):
    return tuple(grid.snap(x) for x in v)


def _snap_curve(grid: QuantizationGrid, c: Curve) -> Curve:
    if isinstance(c, Line):
        return Line(_snap_vec(grid, c.start), _snap_vec(grid, c.end))
    if isinstance(c, Arc):
        return Arc(_snap_vec(grid, c.start), _snap_vec(grid, c.end), c.sweep_angle, c.ccw)
    return Circle(_snap_vec(grid, c.center), grid.snap(c.radius))


def quantize(model: CadModel, grid: QuantizationGrid) -> CadModel:
    """Snap every positional/length parameter to the nearest grid level.

    Raises OutOfRange when any snapped coordinate lies outside [lo, hi].
    dequantize is the identity on the result: grid values are stored
    directly, so quantize(quantize(m)) == quantize(m) and the per-coordinate
    round-trip error is at most step / 2.
    """
    require_valid(model)
    ops = []
    for op in model.ops:
        profile = Profile(
            tuple(
                Loop(tuple(_snap_curve(grid, c) for c in loop.curves))
                for loop in op.profile.loops
            )
        )
        frame = CoordinateFrame(
            origin=_snap_vec(grid, op.frame.origin),
            axis_x=op.frame.axis_x,
            axis_y=op.frame.axis_y,
            axis_z=op.frame.axis_z,
        )
        ops.append(
            SketchExtrude(
                frame=frame,
                profile=profile,
                extrude_toward=grid.snap(op.extrude_toward),
                extrude_opposite=grid.snap(op.extrude_opposite),
                scale=op.scale,
                boolean=op.boolean,
            )
        )
    return CadModel(ops=tuple(ops), metadata=model.metadata)


def dequantize(model: CadModel, grid: QuantizationGrid) -> CadModel:
    """Inverse map on grid values. quantize stores real grid values rather
    than indices, so this is the identity; it exists to make the round-trip
    explicit at call sites."""
    return model
