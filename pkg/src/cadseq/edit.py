"""Edit scripts: add/delete/modify at op, loop and parameter granularity.

Scripts are ordered action lists applied sequentially; diff produces a
minimal script under the cost model (op insert/delete 1, loop 0.5, param
modify 0.1) via order-preserving alignment, tie-broken toward modification.
apply canonicalizes its result, so apply(a, diff(a, b)) == canonicalize(b)
exactly and scripts compose across refinement turns.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace
from typing import Union

from .errors import (
    IndexOutOfBounds,
    InvalidResult,
    NonInvertible,
    NothingRemovable,
    StaleOldValue,
)
from .model import (
    Arc,
    BooleanKind,
    CadModel,
    Circle,
    CoordinateFrame,
    Curve,
    Line,
    Loop,
    Profile,
    SketchExtrude,
    canonicalize,
    require_valid,
    validate,
)

OP_COST = 1.0
LOOP_COST = 0.5
PARAM_COST = 0.1


@dataclass(frozen=True)
class DeleteOp:
    op: int


@dataclass(frozen=True)
class InsertOp:
    op: int
    payload: SketchExtrude


@dataclass(frozen=True)
class DeleteLoop:
    op: int
    loop: int


@dataclass(frozen=True)
class InsertLoop:
    op: int
    loop: int
    payload: Loop


@dataclass(frozen=True)
class ModifyParam:
    path: str
    old_value: object
    new_value: object


EditAction = Union[DeleteOp, InsertOp, DeleteLoop, InsertLoop, ModifyParam]


@dataclass(frozen=True)
class EditScript:
    actions: tuple[EditAction, ...] = ()
    edited_ops_a: frozenset[int] = frozenset()  # deleted/modified ops, source side
    edited_ops_b: frozenset[int] = frozenset()  # inserted/modified ops, result side

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "edited_ops_a", frozenset(self.edited_ops_a))
        object.__setattr__(self, "edited_ops_b", frozenset(self.edited_ops_b))

    def __len__(self) -> int:
        return len(self.actions)


# --- parameter paths -------------------------------------------------------

_PATH_RE = re.compile(
    r"^ops\[(\d+)\]\."
    r"(?:"
    r"(extrude_toward|extrude_opposite|scale|boolean)"
    r"|frame\.(origin|axis_x|axis_y|axis_z)\[([012])\]"
    r"|profile\.loops\[(\d+)\]\.curves\[(\d+)\]\."
    r"(?:(sweep_angle|ccw|radius)|(start|end|center)\[([01])\])"
    r")$"
)


def parse_path(path: str):
    m = _PATH_RE.match(path)
    if m is None:
        raise IndexOutOfBounds(f"malformed parameter path {path!r}")
    return m


def get_param(model: CadModel, path: str):
    m = parse_path(path)
    op_idx = int(m.group(1))
    if op_idx >= len(model.ops):
        raise IndexOutOfBounds(f"{path}: op index out of range")
    op = model.ops[op_idx]
    if m.group(2):
        value = getattr(op, m.group(2))
        return value.value if isinstance(value, BooleanKind) else value
    if m.group(3):
        return getattr(op.frame, m.group(3))[int(m.group(4))]
    loop_idx, curve_idx = int(m.group(5)), int(m.group(6))
    if loop_idx >= len(op.profile.loops):
        raise IndexOutOfBounds(f"{path}: loop index out of range")
    loop = op.profile.loops[loop_idx]
    if curve_idx >= len(loop.curves):
        raise IndexOutOfBounds(f"{path}: curve index out of range")
    curve = loop.curves[curve_idx]
    if m.group(7):
        if not hasattr(curve, m.group(7)):
            raise IndexOutOfBounds(f"{path}: field not present on {type(curve).__name__}")
        return getattr(curve, m.group(7))
    if not hasattr(curve, m.group(8)):
        raise IndexOutOfBounds(f"{path}: field not present on {type(curve).__name__}")
    return getattr(curve, m.group(8))[int(m.group(9))]


def _set_vec(vec, k: int, value: float):
    out = list(vec)
    out[k] = float(value)
    return tuple(out)


def set_param(model: CadModel, path: str, value) -> CadModel:
    m = parse_path(path)
    op_idx = int(m.group(1))
    if op_idx >= len(model.ops):
        raise IndexOutOfBounds(f"{path}: op index out of range")
    op = model.ops[op_idx]
    if m.group(2):
        field_name = m.group(2)
        if field_name == "boolean":
            op = replace(op, boolean=BooleanKind(value))
        else:
            op = replace(op, **{field_name: float(value)})
    elif m.group(3):
        axis_name = m.group(3)
        frame = replace(
            op.frame, **{axis_name: _set_vec(getattr(op.frame, axis_name), int(m.group(4)), value)}
        )
        op = replace(op, frame=frame)
    else:
        loop_idx, curve_idx = int(m.group(5)), int(m.group(6))
        if loop_idx >= len(op.profile.loops):
            raise IndexOutOfBounds(f"{path}: loop index out of range")
        loop = op.profile.loops[loop_idx]
        if curve_idx >= len(loop.curves):
            raise IndexOutOfBounds(f"{path}: curve index out of range")
        curve = loop.curves[curve_idx]
        if m.group(7):
            field_name = m.group(7)
            if not hasattr(curve, field_name):
                raise IndexOutOfBounds(f"{path}: field not present on {type(curve).__name__}")
            if field_name == "ccw":
                curve = replace(curve, ccw=bool(value))
            else:
                curve = replace(curve, **{field_name: float(value)})
        else:
            field_name = m.group(8)
            if not hasattr(curve, field_name):
                raise IndexOutOfBounds(f"{path}: field not present on {type(curve).__name__}")
            curve = replace(
                curve, **{field_name: _set_vec(getattr(curve, field_name), int(m.group(9)), value)}
            )
        curves = list(loop.curves)
        curves[curve_idx] = curve
        loops = list(op.profile.loops)
        loops[loop_idx] = Loop(tuple(curves))
        op = replace(op, profile=Profile(tuple(loops)))
    ops = list(model.ops)
    ops[op_idx] = op
    return CadModel(ops=tuple(ops), metadata=model.metadata)


def _values_match(a, b) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return bool(a) == bool(b)
    if isinstance(a, str) or isinstance(b, str):
        return str(a) == str(b)
    return float(a) == float(b)


# --- apply / invert --------------------------------------------------------


def _apply_action(model: CadModel, action: EditAction) -> CadModel:
    if isinstance(action, DeleteOp):
        if not 0 <= action.op < len(model.ops):
            raise IndexOutOfBounds(f"DeleteOp: op {action.op} out of range")
        ops = list(model.ops)
        ops.pop(action.op)
        return CadModel(ops=tuple(ops), metadata=model.metadata)
    if isinstance(action, InsertOp):
        if not 0 <= action.op <= len(model.ops):
            raise IndexOutOfBounds(f"InsertOp: op {action.op} out of range")
        ops = list(model.ops)
        ops.insert(action.op, action.payload)
        return CadModel(ops=tuple(ops), metadata=model.metadata)
    if isinstance(action, DeleteLoop):
        if not 0 <= action.op < len(model.ops):
            raise IndexOutOfBounds(f"DeleteLoop: op {action.op} out of range")
        op = model.ops[action.op]
        if not 0 <= action.loop < len(op.profile.loops):
            raise IndexOutOfBounds(f"DeleteLoop: loop {action.loop} out of range")
        loops = list(op.profile.loops)
        loops.pop(action.loop)
        ops = list(model.ops)
        ops[action.op] = replace(op, profile=Profile(tuple(loops)))
        return CadModel(ops=tuple(ops), metadata=model.metadata)
    if isinstance(action, InsertLoop):
        if not 0 <= action.op < len(model.ops):
            raise IndexOutOfBounds(f"InsertLoop: op {action.op} out of range")
        op = model.ops[action.op]
        if not 0 <= action.loop <= len(op.profile.loops):
            raise IndexOutOfBounds(f"InsertLoop: loop {action.loop} out of range")
        loops = list(op.profile.loops)
        loops.insert(action.loop, action.payload)
        ops = list(model.ops)
        ops[action.op] = replace(op, profile=Profile(tuple(loops)))
        return CadModel(ops=tuple(ops), metadata=model.metadata)
    current = get_param(model, action.path)
    if not _values_match(current, action.old_value):
        raise StaleOldValue(
            f"{action.path}: expected {action.old_value!r}, found {current!r}"
        )
    return set_param(model, action.path, action.new_value)


def apply(model: CadModel, script: EditScript) -> CadModel:
    """Apply actions in order to the canonical form of the model.

    The result is validated (InvalidResult names the first violated
    invariant) and canonicalized.
    """
    state = canonicalize(model)
    for action in script.actions:
        state = _apply_action(state, action)
    report = validate(state)
    if not report.ok:
        raise InvalidResult(report.violations)
    return canonicalize(state)


def invert(script: EditScript, base: CadModel) -> EditScript:
    """Exact inverse of a script relative to the model it was applied to:
    apply(apply(m, s), invert(s, m)) == canonicalize(m).

    Structure-preserving when possible (InsertOp mirrors to DeleteOp at the
    same index, and so on). Scripts whose application triggers canonical
    adjustments the mirror cannot see (first-op boolean coercion, hole
    reordering) fall back to a diff-derived exact inverse.
    """
    canonical_base = canonicalize(base)
    try:
        result = apply(base, script)
    except (IndexOutOfBounds, StaleOldValue, InvalidResult) as exc:
        raise NonInvertible(f"script does not apply to the base model: {exc}") from exc

    state = canonical_base
    inverses: list[EditAction] = []
    mirror_ok = True
    try:
        for action in script.actions:
            if isinstance(action, DeleteOp):
                inverses.append(InsertOp(action.op, state.ops[action.op]))
            elif isinstance(action, InsertOp):
                inverses.append(DeleteOp(action.op))
            elif isinstance(action, DeleteLoop):
                payload = state.ops[action.op].profile.loops[action.loop]
                inverses.append(InsertLoop(action.op, action.loop, payload))
            elif isinstance(action, InsertLoop):
                inverses.append(DeleteLoop(action.op, action.loop))
            else:
                inverses.append(ModifyParam(action.path, action.new_value, action.old_value))
            state = _apply_action(state, action)
    except (IndexOutOfBounds, StaleOldValue):
        mirror_ok = False
    if mirror_ok:
        inverses.reverse()
        candidate = EditScript(
            actions=tuple(inverses),
            edited_ops_a=script.edited_ops_b,
            edited_ops_b=script.edited_ops_a,
        )
        try:
            if apply(result, candidate) == canonical_base:
                return candidate
        except (IndexOutOfBounds, StaleOldValue, InvalidResult):
            pass
    return diff(result, canonical_base)


# --- diff -------------------------------------------------------------------


def _op_fingerprint(op: SketchExtrude) -> str:
    return hashlib.sha1(repr(op).encode("utf-8")).hexdigest()


_CURVE_FIELDS = {
    Line: (("start", 2), ("end", 2)),
    Arc: (("start", 2), ("end", 2), ("sweep_angle", 0), ("ccw", 0)),
    Circle: (("center", 2), ("radius", 0)),
}


def _loop_param_paths(prefix: str, a: Loop, b: Loop):
    """Leaf diffs between two structurally identical loops, or None."""
    if len(a.curves) != len(b.curves):
        return None
    diffs = []
    for k, (ca, cb) in enumerate(zip(a.curves, b.curves)):
        if type(ca) is not type(cb):
            return None
        for field_name, width in _CURVE_FIELDS[type(ca)]:
            va, vb = getattr(ca, field_name), getattr(cb, field_name)
            if width == 0:
                if va != vb:
                    diffs.append((f"{prefix}.curves[{k}].{field_name}", va, vb))
            else:
                for d in range(width):
                    if va[d] != vb[d]:
                        diffs.append((f"{prefix}.curves[{k}].{field_name}[{d}]", va[d], vb[d]))
    return diffs


def _frame_param_paths(prefix: str, a: CoordinateFrame, b: CoordinateFrame):
    diffs = []
    for name in ("origin", "axis_x", "axis_y", "axis_z"):
        va, vb = getattr(a, name), getattr(b, name)
        for d in range(3):
            if va[d] != vb[d]:
                key = f"{prefix}.frame.{name}[{d}]" if name != "origin" else (
                    f"{prefix}.frame.origin[{d}]"
                )
                diffs.append((key, va[d], vb[d]))
    return diffs


def _align(items_a, items_b, sub_cost_fn, indel_cost: float):
    """Order-preserving alignment; returns (cost, trace) where trace entries
    are ('match'|'sub', i, j), ('del', i, None) or ('ins', None, j).
    Ties prefer substitution, then the lower index action."""
    la, lb = len(items_a), len(items_b)
    cost = [[0.0] * (lb + 1) for _ in range(la + 1)]
    move = [[""] * (lb + 1) for _ in range(la + 1)]
    for i in range(1, la + 1):
        cost[i][0] = i * indel_cost
        move[i][0] = "del"
    for j in range(1, lb + 1):
        cost[0][j] = j * indel_cost
        move[0][j] = "ins"
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            sub = sub_cost_fn(items_a[i - 1], items_b[j - 1])
            options = [
                (cost[i - 1][j - 1] + sub, "sub"),
                (cost[i - 1][j] + indel_cost, "del"),
                (cost[i][j - 1] + indel_cost, "ins"),
            ]
            best = min(options, key=lambda t: t[0])
            cost[i][j] = best[0]
            move[i][j] = best[1]
    trace = []
    i, j = la, lb
    while i > 0 or j > 0:
        m = move[i][j]
        if m == "sub":
            i, j = i - 1, j - 1
            sub = sub_cost_fn(items_a[i], items_b[j])
            trace.append(("match" if sub == 0.0 else "sub", i, j))
        elif m == "del":
            i -= 1
            trace.append(("del", i, None))
        else:
            j -= 1
            trace.append(("ins", None, j))
    trace.reverse()
    return cost[la][lb], trace


def _loop_sub_cost(a: Loop, b: Loop) -> float:
    if a == b:
        return 0.0
    diffs = _loop_param_paths("", a, b)
    if diffs is None:
        return 2 * LOOP_COST + 1e-9  # replace, slightly worse than del+ins
    return min(PARAM_COST * len(diffs), 2 * LOOP_COST + 1e-9)


def _op_sub_cost(a: SketchExtrude, b: SketchExtrude) -> float:
    if a == b:
        return 0.0
    total = 0.0
    total += PARAM_COST * len(_frame_param_paths("", a.frame, b.frame))
    for name in ("extrude_toward", "extrude_opposite", "scale"):
        if getattr(a, name) != getattr(b, name):
            total += PARAM_COST
    if a.boolean != b.boolean:
        total += PARAM_COST
    loop_cost, _ = _align(a.profile.loops, b.profile.loops, _loop_sub_cost, LOOP_COST)
    return total + loop_cost


def _emit_loop_actions(op_index: int, a: SketchExtrude, b: SketchExtrude) -> list[EditAction]:
    """Actions mutating op a (already at result position op_index) into b."""
    actions: list[EditAction] = []
    for path, old, new in _frame_param_paths(f"ops[{op_index}]", a.frame, b.frame):
        actions.append(ModifyParam(path, old, new))
    for name in ("extrude_toward", "extrude_opposite", "scale"):
        if getattr(a, name) != getattr(b, name):
            actions.append(
                ModifyParam(f"ops[{op_index}].{name}", getattr(a, name), getattr(b, name))
            )
    if a.boolean != b.boolean:
        actions.append(
            ModifyParam(f"ops[{op_index}].boolean", a.boolean.value, b.boolean.value)
        )
    _, trace = _align(a.profile.loops, b.profile.loops, _loop_sub_cost, LOOP_COST)
    # Structural loop changes first, tracked with a running index offset.
    cursor = 0
    pending_mods: list[EditAction] = []
    for kind, i, j in trace:
        if kind == "match":
            cursor += 1
        elif kind == "sub":
            la, lb = a.profile.loops[i], b.profile.loops[j]
            diffs = _loop_param_paths(f"ops[{op_index}].profile.loops[{cursor}]", la, lb)
            if diffs is None or PARAM_COST * len(diffs) > 2 * LOOP_COST:
                actions.append(DeleteLoop(op_index, cursor))
                actions.append(InsertLoop(op_index, cursor, lb))
            else:
                for path, old, new in diffs:
                    pending_mods.append(ModifyParam(path, old, new))
            cursor += 1
        elif kind == "del":
            actions.append(DeleteLoop(op_index, cursor))
        else:
            actions.append(InsertLoop(op_index, cursor, b.profile.loops[j]))
            cursor += 1
    actions.extend(pending_mods)
    return actions


def diff(a: CadModel, b: CadModel) -> EditScript:
    """Minimal edit script with apply(a, diff(a, b)) == canonicalize(b)."""
    ca, cb = canonicalize(a), canonicalize(b)
    _, trace = _align(list(ca.ops), list(cb.ops), _op_sub_cost, OP_COST)
    actions: list[EditAction] = []
    edited_a: set[int] = set()
    edited_b: set[int] = set()
    cursor = 0
    for kind, i, j in trace:
        if kind == "match":
            cursor += 1
        elif kind == "sub":
            edited_a.add(i)
            edited_b.add(j)
            actions.extend(_emit_loop_actions(cursor, ca.ops[i], cb.ops[j]))
            cursor += 1
        elif kind == "del":
            edited_a.add(i)
            actions.append(DeleteOp(cursor))
        else:
            edited_b.add(j)
            actions.append(InsertOp(cursor, cb.ops[j]))
            cursor += 1
    return EditScript(
        actions=tuple(actions),
        edited_ops_a=frozenset(edited_a),
        edited_ops_b=frozenset(edited_b),
    )


# --- pair generation ---------------------------------------------------------


def _executes_nonempty(model: CadModel) -> bool:
    from . import geom
    from .errors import CadError

    try:
        geom.sample_surface(geom.compile_model(model), 256, seed=0)
    except CadError:
        return False
    return True


def make_pairs(model: CadModel):
    """Deletion/addition pairs: one per removable op and removable hole loop.

    Returns a list of (reduced_model, deletion_script, removed_payload).
    A removal is excluded when it leaves an invalid model or when the raw
    remaining sequence executes to empty geometry (e.g. a removal that
    orphans a Cut) — the raw booleans are probed before canonical first-op
    coercion could paper over the emptiness. Raises NothingRemovable when no
    candidate survives.
    """
    base = canonicalize(require_valid(model))
    pairs = []
    if len(base.ops) >= 2:
        for i in range(len(base.ops)):
            raw = CadModel(ops=base.ops[:i] + base.ops[i + 1 :], metadata=base.metadata)
            if not validate(raw).ok or not _executes_nonempty(raw):
                continue
            try:
                reduced = apply(base, EditScript(actions=(DeleteOp(i),)))
            except InvalidResult:
                continue
            # diff also emits the boolean fix when removing the first op
            # promotes a Join/Cut op into the New slot.
            pairs.append((reduced, diff(base, reduced), base.ops[i]))
    for i, op in enumerate(base.ops):
        for j in range(1, len(op.profile.loops)):
            try:
                reduced = apply(base, EditScript(actions=(DeleteLoop(i, j),)))
            except InvalidResult:
                continue
            if not _executes_nonempty(reduced):
                continue
            pairs.append((reduced, diff(base, reduced), op.profile.loops[j]))
    if not pairs:
        raise NothingRemovable("no removable op or hole loop keeps the model valid")
    return pairs


# --- serialization -----------------------------------------------------------


def script_to_text(script: EditScript) -> str:
    """Line-oriented form: one action per line, payloads as inline JSON."""
    import json

    lines = []
    for a in script_to_record(script)["actions"]:
        t = a["type"]
        if t == "delete_op":
            lines.append(f"delete_op {a['op']}")
        elif t == "insert_op":
            lines.append(f"insert_op {a['op']} {json.dumps(a['payload'], sort_keys=True)}")
        elif t == "delete_loop":
            lines.append(f"delete_loop {a['op']} {a['loop']}")
        elif t == "insert_loop":
            lines.append(
                f"insert_loop {a['op']} {a['loop']} {json.dumps(a['payload'], sort_keys=True)}"
            )
        else:
            lines.append(
                "modify_param "
                + json.dumps(
                    {"path": a["path"], "old": a["old_value"], "new": a["new_value"]},
                    sort_keys=True,
                )
            )
    lines.append("edited_ops_a " + " ".join(str(i) for i in sorted(script.edited_ops_a)))
    lines.append("edited_ops_b " + " ".join(str(i) for i in sorted(script.edited_ops_b)))
    return "\n".join(lines) + "\n"


def script_from_text(text: str) -> EditScript:
    import json

    actions: list[dict] = []
    edited_a: list[int] = []
    edited_b: list[int] = []
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "delete_op":
                actions.append({"type": "delete_op", "op": int(rest)})
            elif head == "insert_op":
                idx, _, payload = rest.partition(" ")
                actions.append(
                    {"type": "insert_op", "op": int(idx), "payload": json.loads(payload)}
                )
            elif head == "delete_loop":
                op_idx, loop_idx = rest.split()
                actions.append({"type": "delete_loop", "op": int(op_idx), "loop": int(loop_idx)})
            elif head == "insert_loop":
                op_idx, _, tail = rest.partition(" ")
                loop_idx, _, payload = tail.partition(" ")
                actions.append(
                    {
                        "type": "insert_loop",
                        "op": int(op_idx),
                        "loop": int(loop_idx),
                        "payload": json.loads(payload),
                    }
                )
            elif head == "modify_param":
                body = json.loads(rest)
                actions.append(
                    {
                        "type": "modify_param",
                        "path": body["path"],
                        "old_value": body["old"],
                        "new_value": body["new"],
                    }
                )
            elif head == "edited_ops_a":
                edited_a = [int(t) for t in rest.split()] if rest.strip() else []
            elif head == "edited_ops_b":
                edited_b = [int(t) for t in rest.split()] if rest.strip() else []
            else:
                raise ValueError(f"unknown action {head!r}")
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise ValueError(f"bad script line {line_no}: {exc}") from exc
    return script_from_record(
        {"actions": actions, "edited_ops_a": edited_a, "edited_ops_b": edited_b}
    )


def script_to_record(script: EditScript) -> dict:
    """Structured form used by the service wire format and JSONL corpora."""
    actions = []
    for action in script.actions:
        if isinstance(action, DeleteOp):
            actions.append({"type": "delete_op", "op": action.op})
        elif isinstance(action, InsertOp):
            actions.append(
                {"type": "insert_op", "op": action.op, "payload": _op_record(action.payload)}
            )
        elif isinstance(action, DeleteLoop):
            actions.append({"type": "delete_loop", "op": action.op, "loop": action.loop})
        elif isinstance(action, InsertLoop):
            actions.append(
                {
                    "type": "insert_loop",
                    "op": action.op,
                    "loop": action.loop,
                    "payload": _loop_record(action.payload),
                }
            )
        else:
            actions.append(
                {
                    "type": "modify_param",
                    "path": action.path,
                    "old_value": action.old_value,
                    "new_value": action.new_value,
                }
            )
    return {
        "actions": actions,
        "edited_ops_a": sorted(script.edited_ops_a),
        "edited_ops_b": sorted(script.edited_ops_b),
    }


def _op_record(op: SketchExtrude) -> dict:
    return {
        "frame": {
            "origin": list(op.frame.origin),
            "axis_x": list(op.frame.axis_x),
            "axis_y": list(op.frame.axis_y),
            "axis_z": list(op.frame.axis_z),
        },
        "loops": [_loop_record(loop) for loop in op.profile.loops],
        "extrude_toward": op.extrude_toward,
        "extrude_opposite": op.extrude_opposite,
        "scale": op.scale,
        "boolean": op.boolean.value,
    }


def _loop_record(loop: Loop) -> dict:
    curves = []
    for c in loop.curves:
        if isinstance(c, Line):
            curves.append({"type": "line", "start": list(c.start), "end": list(c.end)})
        elif isinstance(c, Arc):
            curves.append(
                {
                    "type": "arc",
                    "start": list(c.start),
                    "end": list(c.end),
                    "sweep": c.sweep_angle,
                    "ccw": c.ccw,
                }
            )
        else:
            curves.append({"type": "circle", "center": list(c.center), "radius": c.radius})
    return {"curves": curves}


def _loop_from_record(rec: dict) -> Loop:
    curves: list[Curve] = []
    for c in rec["curves"]:
        if c["type"] == "line":
            curves.append(Line(tuple(c["start"]), tuple(c["end"])))
        elif c["type"] == "arc":
            curves.append(Arc(tuple(c["start"]), tuple(c["end"]), c["sweep"], c["ccw"]))
        elif c["type"] == "circle":
            curves.append(Circle(tuple(c["center"]), c["radius"]))
        else:
            raise ValueError(f"unknown curve type {c['type']!r}")
    return Loop(tuple(curves))


def _op_from_record(rec: dict) -> SketchExtrude:
    frame = rec["frame"]
    return SketchExtrude(
        frame=CoordinateFrame(
            origin=tuple(frame["origin"]),
            axis_x=tuple(frame["axis_x"]),
            axis_y=tuple(frame["axis_y"]),
            axis_z=tuple(frame["axis_z"]),
        ),
        profile=Profile(tuple(_loop_from_record(lr) for lr in rec["loops"])),
        extrude_toward=rec["extrude_toward"],
        extrude_opposite=rec["extrude_opposite"],
        scale=rec.get("scale", 1.0),
        boolean=BooleanKind(rec.get("boolean", "new")),
    )


def script_from_record(rec: dict) -> EditScript:
    actions: list[EditAction] = []
    for a in rec.get("actions", []):
        t = a.get("type")
        if t == "delete_op":
            actions.append(DeleteOp(int(a["op"])))
        elif t == "insert_op":
            actions.append(InsertOp(int(a["op"]), _op_from_record(a["payload"])))
        elif t == "delete_loop":
            actions.append(DeleteLoop(int(a["op"]), int(a["loop"])))
        elif t == "insert_loop":
            actions.append(InsertLoop(int(a["op"]), int(a["loop"]), _loop_from_record(a["payload"])))
        elif t == "modify_param":
            actions.append(ModifyParam(a["path"], a["old_value"], a["new_value"]))
        else:
            raise ValueError(f"unknown action type {t!r}")
    return EditScript(
        actions=tuple(actions),
        edited_ops_a=frozenset(int(i) for i in rec.get("edited_ops_a", [])),
        edited_ops_b=frozenset(int(i) for i in rec.get("edited_ops_b", [])),
    )
