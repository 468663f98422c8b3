"""Canonical in-memory representation of sketch-extrude CAD sequences.

A model is an ordered tuple of sketch-extrude ops. Each op places a 2D
profile (an outer loop plus optional hole loops) on an oriented plane,
extrudes it along the plane normal, and merges the result into the running
solid with a boolean kind. All values are immutable; every operation here is
a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

from . import sketch2d
from .errors import InvalidModel

CLOSURE_TOL = 1e-7
ORTHO_TOL = 1e-9
MIN_LOOP_AREA = 1e-12

Vec2 = tuple[float, float]
Vec3 = tuple[float, float, float]


class BooleanKind(str, Enum):
    NEW = "new"
    JOIN = "join"
    CUT = "cut"
    INTERSECT = "intersect"


def _vec(value, n: int) -> tuple[float, ...]:
    t = tuple(float(v) for v in value)
    if len(t) != n:
        raise ValueError(f"expected {n} components, got {len(t)}")
    return t


@dataclass(frozen=True)
class Line:
    start: Vec2
    end: Vec2

    def __post_init__(self):
        object.__setattr__(self, "start", _vec(self.start, 2))
        object.__setattr__(self, "end", _vec(self.end, 2))


@dataclass(frozen=True)
class Arc:
    """Arc stored by endpoints, sweep angle in (0, 2*pi) and direction flag;
    center and radius are derived on demand."""

    start: Vec2
    end: Vec2
    sweep_angle: float
    ccw: bool = True

    def __post_init__(self):
        object.__setattr__(self, "start", _vec(self.start, 2))
        object.__setattr__(self, "end", _vec(self.end, 2))
        object.__setattr__(self, "sweep_angle", float(self.sweep_angle))
        object.__setattr__(self, "ccw", bool(self.ccw))


@dataclass(frozen=True)
class Circle:
    center: Vec2
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, 2))
        object.__setattr__(self, "radius", float(self.radius))


Curve = Union[Line, Arc, Circle]


@dataclass(frozen=True)
class Loop:
    """A closed chain of lines/arcs, or a single full circle."""

    curves: tuple[Curve, ...]

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))


@dataclass(frozen=True)
class Profile:
    """loops[0] is the outer boundary; any further loops are holes."""

    loops: tuple[Loop, ...]

    def __post_init__(self):
        object.__setattr__(self, "loops", tuple(self.loops))


@dataclass(frozen=True)
class CoordinateFrame:
    origin: Vec3
    axis_x: Vec3
    axis_y: Vec3
    axis_z: Vec3

    def __post_init__(self):
        object.__setattr__(self, "origin", _vec(self.origin, 3))
        object.__setattr__(self, "axis_x", _vec(self.axis_x, 3))
        object.__setattr__(self, "axis_y", _vec(self.axis_y, 3))
        object.__setattr__(self, "axis_z", _vec(self.axis_z, 3))


WORLD_FRAME = CoordinateFrame(
    origin=(0.0, 0.0, 0.0),
    axis_x=(1.0, 0.0, 0.0),
    axis_y=(0.0, 1.0, 0.0),
    axis_z=(0.0, 0.0, 1.0),
)


@dataclass(frozen=True)
class SketchExtrude:
    frame: CoordinateFrame
    profile: Profile
    extrude_toward: float
    extrude_opposite: float = 0.0
    scale: float = 1.0
    boolean: BooleanKind = BooleanKind.NEW

    def __post_init__(self):
        object.__setattr__(self, "extrude_toward", float(self.extrude_toward))
        object.__setattr__(self, "extrude_opposite", float(self.extrude_opposite))
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "boolean", BooleanKind(self.boolean))


@dataclass(frozen=True)
class CadModel:
    """Ordered sketch-extrude sequence. Zero ops is the explicit empty model
    used as the starting state of refinement sessions."""

    ops: tuple[SketchExtrude, ...] = ()
    metadata: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:  # truthy when clean, mirroring "valid?"
        return self.ok


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _curve_finite(curve: Curve) -> bool:
    if isinstance(curve, Line):
        return _finite(*curve.start, *curve.end)
    if isinstance(curve, Arc):
        return _finite(*curve.start, *curve.end, curve.sweep_angle)
    return _finite(*curve.center, curve.radius)


def _validate_curve(curve: Curve, path: str, out: list[Violation]) -> bool:
    """Per-curve checks; returns False when later geometric checks on the
    containing loop would be meaningless."""
    if not _curve_finite(curve):
        out.append(Violation(path, "non-finite coordinate"))
        return False
    if isinstance(curve, Line):
        if curve.start == curve.end:
            out.append(Violation(path, "line start equals end"))
            return False
    elif isinstance(curve, Arc):
        if curve.start == curve.end:
            out.append(Violation(path, "arc start equals end"))
            return False
        if not (0.0 < curve.sweep_angle < sketch2d.TWO_PI):
            out.append(Violation(path, "arc sweep angle outside (0, 2*pi)"))
            return False
        _, radius = sketch2d.arc_center_radius(
            curve.start, curve.end, curve.sweep_angle, curve.ccw
        )
        if not math.isfinite(radius):
            out.append(Violation(path, "derived arc radius is not finite"))
            return False
    else:
        if not curve.radius > 0.0:
            out.append(Violation(path, "circle radius must be positive"))
            return False
    return True


def _curve_endpoints(curve: Curve) -> tuple[Vec2, Vec2]:
    return curve.start, curve.end


def _validate_loop(loop: Loop, path: str, out: list[Violation]) -> bool:
    if not loop.curves:
        out.append(Violation(path, "loop has no curves"))
        return False
    circles = [c for c in loop.curves if isinstance(c, Circle)]
    if circles:
        if len(loop.curves) != 1:
            out.append(Violation(path, "circle must be the only curve in its loop"))
            return False
        return _validate_curve(loop.curves[0], f"{path}.curves[0]", out)
    if len(loop.curves) < 2:
        out.append(Violation(path, "chain loop needs at least two curves"))
        return False
    clean = True
    for k, curve in enumerate(loop.curves):
        if not _validate_curve(curve, f"{path}.curves[{k}]", out):
            clean = False
    if not clean:
        return False
    n = len(loop.curves)
    for k, curve in enumerate(loop.curves):
        _, end = _curve_endpoints(curve)
        nxt, _ = _curve_endpoints(loop.curves[(k + 1) % n])
        gap = math.hypot(end[0] - nxt[0], end[1] - nxt[1])
        if gap > CLOSURE_TOL:
            out.append(
                Violation(f"{path}.curves[{k}]", f"loop not closed: gap {gap:.3e} to next curve")
            )
            return False
    area = sketch2d.loop_area(loop)
    if not abs(area) > MIN_LOOP_AREA:
        out.append(Violation(path, "loop encloses no area"))
        return False
    return True


def _loop_probe_points(loop: Loop) -> list[Vec2]:
    """Representative vertices used for hole-inside-outer checks."""
    if len(loop.curves) == 1 and isinstance(loop.curves[0], Circle):
        c = loop.curves[0]
        cx, cy = c.center
        r = c.radius
        return [(cx + r, cy), (cx - r, cy), (cx, cy + r), (cx, cy - r)]
    return [c.start for c in loop.curves]


def _validate_profile(profile: Profile, path: str, out: list[Violation]) -> None:
    if not profile.loops:
        out.append(Violation(path, "profile has no loops"))
        return
    clean_loops = []
    for j, loop in enumerate(profile.loops):
        clean_loops.append(_validate_loop(loop, f"{path}.loops[{j}]", out))
    if not clean_loops[0]:
        return
    outer = profile.loops[0]
    outer_area = abs(sketch2d.loop_area(outer))
    for j in range(1, len(profile.loops)):
        if not clean_loops[j]:
            continue
        hole = profile.loops[j]
        hole_path = f"{path}.loops[{j}]"
        if not abs(sketch2d.loop_area(hole)) < outer_area:
            out.append(Violation(hole_path, "hole area not smaller than outer loop area"))
            continue
        for x, y in _loop_probe_points(hole):
            if not sketch2d.point_in_loop(outer, x, y):
                out.append(Violation(hole_path, "hole vertex lies outside the outer loop"))
                break


def _validate_frame(frame: CoordinateFrame, path: str, out: list[Violation]) -> None:
    axes = (frame.axis_x, frame.axis_y, frame.axis_z)
    if not _finite(*frame.origin, *axes[0], *axes[1], *axes[2]):
        out.append(Violation(path, "non-finite frame component"))
        return
    names = ("axis_x", "axis_y", "axis_z")
    for name, ax in zip(names, axes):
        norm = math.sqrt(sum(v * v for v in ax))
        if abs(norm - 1.0) > ORTHO_TOL:
            out.append(Violation(f"{path}.{name}", f"axis not unit length (|v| = {norm!r})"))
            return
    pairs = ((0, 1), (0, 2), (1, 2))
    for i, j in pairs:
        dot = sum(a * b for a, b in zip(axes[i], axes[j]))
        if abs(dot) > ORTHO_TOL:
            out.append(Violation(path, f"{names[i]} and {names[j]} not orthogonal"))
            return
    ax, ay, az = axes
    cross = (
        ax[1] * ay[2] - ax[2] * ay[1],
        ax[2] * ay[0] - ax[0] * ay[2],
        ax[0] * ay[1] - ax[1] * ay[0],
    )
    handed = sum(c * z for c, z in zip(cross, az))
    if not handed > 0.0:
        out.append(Violation(path, "frame is not right-handed"))


def validate(model: CadModel) -> ValidationReport:
    """Structural validation. Total: never raises, reports non-finite values
    as violations; an empty report means every invariant holds."""
    out: list[Violation] = []
    if not isinstance(model, CadModel):
        return ValidationReport((Violation("", "not a CadModel"),))
    for i, op in enumerate(model.ops):
        path = f"ops[{i}]"
        _validate_frame(op.frame, f"{path}.frame", out)
        if not _finite(op.extrude_toward, op.extrude_opposite, op.scale):
            out.append(Violation(path, "non-finite extrude or scale value"))
        else:
            if op.extrude_toward < 0.0 or op.extrude_opposite < 0.0:
                out.append(Violation(path, "extrude distances must be non-negative"))
            if not op.extrude_toward + op.extrude_opposite > 0.0:
                out.append(Violation(path, "extrude distances sum to zero"))
            if not op.scale > 0.0:
                out.append(Violation(path, "sketch scale must be positive"))
        _validate_profile(op.profile, f"{path}.profile", out)
    return ValidationReport(tuple(out))


def _round_sig(x: float, digits: int = 12) -> float:
    if x == 0.0:
        return 0.0
    return float(f"{x:.{digits}g}")


def _round_vec(v: Iterable[float]) -> tuple[float, ...]:
    return tuple(_round_sig(x) for x in v)


def _round_curve(curve: Curve) -> Curve:
    if isinstance(curve, Line):
        return Line(_round_vec(curve.start), _round_vec(curve.end))
    if isinstance(curve, Arc):
        return Arc(
            _round_vec(curve.start), _round_vec(curve.end), _round_sig(curve.sweep_angle), curve.ccw
        )
    return Circle(_round_vec(curve.center), _round_sig(curve.radius))


def _loop_sort_key(loop: Loop) -> tuple[float, float]:
    min_x, min_y, _, _ = sketch2d.loop_bbox(loop)
    return (min_x, min_y)


def _rotate_loop_start(loop: Loop) -> Loop:
    """Rotate a chain loop so it begins at the lexicographically smallest
    start vertex; circles are already canonical."""
    if len(loop.curves) == 1 and isinstance(loop.curves[0], Circle):
        return loop
    starts = [c.start for c in loop.curves]
    best = min(range(len(starts)), key=lambda k: starts[k])
    return Loop(loop.curves[best:] + loop.curves[:best])


def canonicalize(model: CadModel) -> CadModel:
    """Deterministic normal form.

    Numbers rounded to 12 significant digits, chain loops rotated to start at
    their smallest vertex, hole loops ordered by (min-x, min-y), first op
    coerced to New. Idempotent, and geometry-preserving for models already in
    executable form.
    """
    report = validate(model)
    if not report.ok:
        raise InvalidModel(report.violations)
    new_ops = []
    for i, op in enumerate(model.ops):
        loops = []
        for loop in op.profile.loops:
            loops.append(_rotate_loop_start(Loop(tuple(_round_curve(c) for c in loop.curves))))
        outer, holes = loops[0], loops[1:]
        holes.sort(key=_loop_sort_key)
        frame = CoordinateFrame(
            origin=_round_vec(op.frame.origin),
            axis_x=_round_vec(op.frame.axis_x),
            axis_y=_round_vec(op.frame.axis_y),
            axis_z=_round_vec(op.frame.axis_z),
        )
        new_ops.append(
            SketchExtrude(
                frame=frame,
                profile=Profile(tuple([outer] + holes)),
                extrude_toward=_round_sig(op.extrude_toward),
                extrude_opposite=_round_sig(op.extrude_opposite),
                scale=_round_sig(op.scale),
                boolean=BooleanKind.NEW if i == 0 else op.boolean,
            )
        )
    return CadModel(ops=tuple(new_ops), metadata=model.metadata)


def require_valid(model: CadModel) -> CadModel:
    report = validate(model)
    if not report.ok:
        raise InvalidModel(report.violations)
    return model


def primitive_count(model: CadModel) -> int:
    """Ops plus curves; the default length unit for reward shaping."""
    return len(model.ops) + sum(
        len(loop.curves) for op in model.ops for loop in op.profile.loops
    )
