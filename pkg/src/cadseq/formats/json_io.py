"""DeepCAD-compatible JSON representation.

Reads the public dataset's entity/sequence layout (Sketch and ExtrudeFeature
entities, Line3D/Arc3D/Circle3D profile curves, one- and two-sided extents)
and prints the same layout back with two extensions: a top-level
"coordinates": "raw" flag marking unscaled values and a per-extrude
"sketch_scale" field.

Read tolerance: loops are reordered largest-area-first (outer first); an
extrude referencing several profiles is split into one op per profile (Join
for the trailing splits of a New/Join, Cut stays Cut; Intersect cannot be
split soundly and is rejected).
"""

from __future__ import annotations

import json
import math

from .. import sketch2d
from ..errors import ParseError
from ..model import (
    Arc,
    BooleanKind,
    CadModel,
    Circle,
    CoordinateFrame,
    Line,
    Loop,
    Profile,
    SketchExtrude,
)

_OPERATION_NAMES = {
    BooleanKind.NEW: "NewBodyFeatureOperation",
    BooleanKind.JOIN: "JoinFeatureOperation",
    BooleanKind.CUT: "CutFeatureOperation",
    BooleanKind.INTERSECT: "IntersectFeatureOperation",
}
_OPERATION_KINDS = {v: k for k, v in _OPERATION_NAMES.items()}


def _point3(v2, z: float = 0.0) -> dict:
    return {"x": float(v2[0]), "y": float(v2[1]), "z": z}


def _vec3(v3) -> dict:
    return {"x": float(v3[0]), "y": float(v3[1]), "z": float(v3[2])}


def _curve_json(c) -> dict:
    if isinstance(c, Line):
        return {
            "type": "Line3D",
            "start_point": _point3(c.start),
            "end_point": _point3(c.end),
        }
    if isinstance(c, Arc):
        center, radius = sketch2d.arc_center_radius(c.start, c.end, c.sweep_angle, c.ccw)
        norm = math.hypot(c.start[0] - center[0], c.start[1] - center[1])
        ref = ((c.start[0] - center[0]) / norm, (c.start[1] - center[1]) / norm)
        return {
            "type": "Arc3D",
            "start_point": _point3(c.start),
            "end_point": _point3(c.end),
            "center_point": _point3(center),
            "radius": float(radius),
            "normal": {"x": 0.0, "y": 0.0, "z": 1.0},
            "start_angle": 0.0,
            "end_angle": float(c.sweep_angle if c.ccw else -c.sweep_angle),
            "reference_vector": _point3(ref),
        }
    return {
        "type": "Circle3D",
        "center_point": _point3(c.center),
        "radius": float(c.radius),
        "normal": {"x": 0.0, "y": 0.0, "z": 1.0},
    }


def print_json(model: CadModel) -> str:
    entities: dict = {}
    sequence: list = []
    for i, op in enumerate(model.ops):
        sketch_id = f"sketch_{i:03d}"
        profile_id = f"profile_{i:03d}"
        extrude_id = f"extrude_{i:03d}"
        loops_json = []
        for j, loop in enumerate(op.profile.loops):
            loops_json.append(
                {
                    "is_outer": j == 0,
                    "profile_curves": [_curve_json(c) for c in loop.curves],
                }
            )
        entities[sketch_id] = {
            "name": f"Sketch {i + 1}",
            "type": "Sketch",
            "profiles": {profile_id: {"loops": loops_json}},
            "transform": {
                "origin": _vec3(op.frame.origin),
                "x_axis": _vec3(op.frame.axis_x),
                "y_axis": _vec3(op.frame.axis_y),
                "z_axis": _vec3(op.frame.axis_z),
            },
            "reference_plane": {},
        }
        if op.extrude_opposite == 0.0:
            extent_type = "OneSideFeatureExtentType"
            extent_one = {
                "distance": {
                    "type": "ModelParameter",
                    "value": float(op.extrude_toward),
                    "name": "none",
                    "role": "AlongDistance",
                },
                "taper_angle": {
                    "type": "ModelParameter",
                    "value": 0.0,
                    "name": "none",
                    "role": "TaperAngle",
                },
                "type": "DistanceExtentDefinition",
            }
            extent_two = None
        else:
            extent_type = "TwoSidesFeatureExtentType"
            extent_one = {
                "distance": {
                    "type": "ModelParameter",
                    "value": float(op.extrude_toward),
                    "name": "none",
                    "role": "AlongDistance",
                },
                "taper_angle": {
                    "type": "ModelParameter",
                    "value": 0.0,
                    "name": "none",
                    "role": "TaperAngle",
                },
                "type": "DistanceExtentDefinition",
            }
            extent_two = {
                "distance": {
                    "type": "ModelParameter",
                    "value": float(op.extrude_opposite),
                    "name": "none",
                    "role": "AgainstDistance",
                },
                "taper_angle": {
                    "type": "ModelParameter",
                    "value": 0.0,
                    "name": "none",
                    "role": "TaperAngle",
                },
                "type": "DistanceExtentDefinition",
            }
        extrude = {
            "name": f"Extrude {i + 1}",
            "type": "ExtrudeFeature",
            "profiles": [{"profile": profile_id, "sketch": sketch_id}],
            "operation": _OPERATION_NAMES[op.boolean],
            "start_extent": {"type": "ProfilePlaneStartDefinition"},
            "extent_type": extent_type,
            "extent_one": extent_one,
            "sketch_scale": float(op.scale),
        }
        if extent_two is not None:
            extrude["extent_two"] = extent_two
        entities[extrude_id] = extrude
        sequence.append({"index": 2 * i, "type": "Sketch", "entity": sketch_id})
        sequence.append({"index": 2 * i + 1, "type": "ExtrudeFeature", "entity": extrude_id})
    doc = {
        "coordinates": "raw",
        "entities": entities,
        "properties": {},
        "sequence": sequence,
    }
    if model.metadata:
        doc["name"] = model.metadata
    return json.dumps(doc, indent=2) + "\n"


def _semantic(message: str) -> ParseError:
    return ParseError(message, kind="semantic")


def _get(container, key, context: str):
    try:
        return container[key]
    except (KeyError, TypeError, IndexError):
        raise _semantic(f"{context}: missing {key!r}") from None


def _xy(point: dict, context: str) -> tuple[float, float]:
    x = _get(point, "x", context)
    y = _get(point, "y", context)
    z = point.get("z", 0.0) if isinstance(point, dict) else 0.0
    try:
        x, y, z = float(x), float(y), float(z)
    except (TypeError, ValueError):
        raise _semantic(f"{context}: non-numeric point") from None
    if z != 0.0:
        raise _semantic(f"{context}: sketch point has non-zero z")
    return (x, y)


def _xyz(point: dict, context: str) -> tuple[float, float, float]:
    try:
        return (
            float(_get(point, "x", context)),
            float(_get(point, "y", context)),
            float(_get(point, "z", context)),
        )
    except (TypeError, ValueError):
        raise _semantic(f"{context}: non-numeric vector") from None


def _parse_curve(curve: dict, context: str):
    ctype = _get(curve, "type", context)
    if ctype == "Line3D":
        return Line(
            _xy(_get(curve, "start_point", context), context),
            _xy(_get(curve, "end_point", context), context),
        )
    if ctype == "Arc3D":
        start = _xy(_get(curve, "start_point", context), context)
        end = _xy(_get(curve, "end_point", context), context)
        try:
            a0 = float(_get(curve, "start_angle", context))
            a1 = float(_get(curve, "end_angle", context))
        except (TypeError, ValueError):
            raise _semantic(f"{context}: non-numeric arc angles") from None
        delta = a1 - a0
        if delta == 0.0:
            raise _semantic(f"{context}: arc sweeps zero angle")
        ccw = delta > 0.0
        sweep = abs(delta)
        if sweep >= sketch2d.TWO_PI:
            sweep = sweep % sketch2d.TWO_PI
            if sweep == 0.0:
                raise _semantic(f"{context}: full-turn arc; use Circle3D")
        return Arc(start, end, sweep, ccw)
    if ctype == "Circle3D":
        try:
            radius = float(_get(curve, "radius", context))
        except (TypeError, ValueError):
            raise _semantic(f"{context}: non-numeric radius") from None
        return Circle(_xy(_get(curve, "center_point", context), context), radius)
    raise _semantic(f"{context}: unsupported curve type {ctype!r}")


def _parse_loops(profile: dict, context: str) -> list[Loop]:
    loops_json = _get(profile, "loops", context)
    if not isinstance(loops_json, list) or not loops_json:
        raise _semantic(f"{context}: profile has no loops")
    loops = []
    for j, loop_json in enumerate(loops_json):
        curves_json = _get(loop_json, "profile_curves", f"{context}.loops[{j}]")
        if not isinstance(curves_json, list) or not curves_json:
            raise _semantic(f"{context}.loops[{j}]: no curves")
        curves = [
            _parse_curve(c, f"{context}.loops[{j}].curves[{k}]")
            for k, c in enumerate(curves_json)
        ]
        loops.append(Loop(tuple(curves)))
    # Outer loop first: trust the declared flag when unique, else use area.
    flagged = [j for j, lj in enumerate(loops_json) if isinstance(lj, dict) and lj.get("is_outer")]
    if len(flagged) == 1:
        outer_idx = flagged[0]
    else:
        outer_idx = max(range(len(loops)), key=lambda j: abs(sketch2d.loop_area(loops[j])))
    ordered = [loops[outer_idx]] + [lp for j, lp in enumerate(loops) if j != outer_idx]
    return ordered


def _signed_extent(extrude: dict, context: str) -> tuple[float, float]:
    start = extrude.get("start_extent", {})
    if isinstance(start, dict) and start.get("type") == "OffsetStartDefinition":
        offset = start.get("offset", {}).get("value", 0.0)
        if offset != 0.0:
            raise _semantic(f"{context}: offset start extents are unsupported")

    def side(entry: dict, label: str) -> float:
        distance = _get(entry, "distance", f"{context}.{label}")
        try:
            value = float(_get(distance, "value", f"{context}.{label}"))
        except (TypeError, ValueError):
            raise _semantic(f"{context}.{label}: non-numeric distance") from None
        role = distance.get("role", "AlongDistance")
        taper = entry.get("taper_angle", {})
        if isinstance(taper, dict) and float(taper.get("value", 0.0) or 0.0) != 0.0:
            raise _semantic(f"{context}.{label}: tapered extrudes are unsupported")
        return value if role == "AlongDistance" else -value

    extent_type = _get(extrude, "extent_type", context)
    if extent_type == "OneSideFeatureExtentType":
        v = side(_get(extrude, "extent_one", context), "extent_one")
        lo, hi = min(v, 0.0), max(v, 0.0)
    elif extent_type == "TwoSidesFeatureExtentType":
        v1 = side(_get(extrude, "extent_one", context), "extent_one")
        v2 = side(_get(extrude, "extent_two", context), "extent_two")
        lo, hi = min(v1, v2), max(v1, v2)
    elif extent_type == "SymmetricFeatureExtentType":
        v = abs(side(_get(extrude, "extent_one", context), "extent_one"))
        lo, hi = -v, v
    else:
        raise _semantic(f"{context}: unsupported extent type {extent_type!r}")
    if lo > 0.0 or hi < 0.0:
        raise _semantic(f"{context}: extrusion does not touch the sketch plane")
    return hi, -lo


def parse_json(text: str) -> CadModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(doc, dict):
        raise _semantic("top level must be an object")
    entities = _get(doc, "entities", "document")
    sequence = _get(doc, "sequence", "document")
    if not isinstance(entities, dict) or not isinstance(sequence, list):
        raise _semantic("document needs 'entities' object and 'sequence' list")

    ops: list[SketchExtrude] = []
    for step, item in enumerate(sequence):
        if not isinstance(item, dict) or item.get("type") != "ExtrudeFeature":
            continue
        context = f"sequence[{step}]"
        extrude = _get(entities, _get(item, "entity", context), context)
        operation = _get(extrude, "operation", context)
        if operation not in _OPERATION_KINDS:
            raise _semantic(f"{context}: unknown operation {operation!r}")
        boolean = _OPERATION_KINDS[operation]
        profiles = _get(extrude, "profiles", context)
        if not isinstance(profiles, list) or not profiles:
            raise _semantic(f"{context}: extrude references no profiles")
        if len(profiles) > 1 and boolean is BooleanKind.INTERSECT:
            raise _semantic(f"{context}: multi-profile intersect cannot be split")
        toward, opposite = _signed_extent(extrude, context)
        try:
            scale = float(extrude.get("sketch_scale", 1.0))
        except (TypeError, ValueError):
            raise _semantic(f"{context}: non-numeric sketch_scale") from None
        for p_idx, ref in enumerate(profiles):
            sketch = _get(entities, _get(ref, "sketch", context), context)
            profile = _get(_get(sketch, "profiles", context), _get(ref, "profile", context), context)
            transform = _get(sketch, "transform", context)
            frame = CoordinateFrame(
                origin=_xyz(_get(transform, "origin", context), context),
                axis_x=_xyz(_get(transform, "x_axis", context), context),
                axis_y=_xyz(_get(transform, "y_axis", context), context),
                axis_z=_xyz(_get(transform, "z_axis", context), context),
            )
            loops = _parse_loops(profile, f"{context}.profiles[{p_idx}]")
            op_boolean = boolean
            if p_idx > 0 and boolean in (BooleanKind.NEW, BooleanKind.JOIN):
                op_boolean = BooleanKind.JOIN
            ops.append(
                SketchExtrude(
                    frame=frame,
                    profile=Profile(tuple(loops)),
                    extrude_toward=toward,
                    extrude_opposite=opposite,
                    scale=scale,
                    boolean=op_boolean,
                )
            )
    name = doc.get("name")
    return CadModel(ops=tuple(ops), metadata=name if isinstance(name, str) else None)
