"""Interaction-data generation: deterministic quantitative instruction
templates with a companion re-parser, a pluggable completion client for
qualitative text, editing-pair corpus construction with a controllable
add/delete/modify mix, structured reasoning-trace validation, and camera
metadata for multi-view rendering."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import edit as edit_mod
from . import formats, geom
from .errors import (
    CadError,
    ClientTimeout,
    ClientUnavailable,
    DegenerateExtent,
    IndexOutOfBounds,
    MalformedResponse,
    NothingRemovable,
)
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
    require_valid,
    validate,
)

logger = logging.getLogger(__name__)


class Modality(str, Enum):
    QUANTITATIVE = "quantitative"
    QUALITATIVE = "qualitative"


class Task(str, Enum):
    GENERATION = "generation"
    EDITING = "editing"


@dataclass(frozen=True)
class InstructionRecord:
    text: str
    modality: Modality
    task: Task
    target: CadModel
    current: CadModel | None = None
    script: edit_mod.EditScript | None = None
    edit_type: str | None = None  # addition / deletion / modification

    def __post_init__(self):
        if self.task is Task.EDITING:
            if self.current is None or self.script is None:
                raise ValueError("editing records carry current and script")
        else:
            if self.current is not None or self.script is not None:
                raise ValueError("generation records carry neither current nor script")


# --- quantitative templates ---------------------------------------------------

_BOOLEAN_VERB = {
    BooleanKind.NEW: "create a new solid",
    BooleanKind.JOIN: "join an extruded solid",
    BooleanKind.CUT: "cut away an extruded solid",
    BooleanKind.INTERSECT: "intersect with an extruded solid",
}
_VERB_BOOLEAN = {v: k for k, v in _BOOLEAN_VERB.items()}


def _num(x: float) -> str:
    return repr(float(x))


def _pt(v) -> str:
    return "(" + ", ".join(_num(x) for x in v) + ")"


def template_quantitative(model: CadModel) -> str:
    """Deterministic English description carrying every parameter exactly;
    one sentence per primitive, one sentence per line."""
    canon = canonicalize(require_valid(model))
    lines = []
    for i, op in enumerate(canon.ops):
        lines.append(
            f"Step {i + 1}: {_BOOLEAN_VERB[op.boolean]} with sketch scale {_num(op.scale)}."
        )
        f = op.frame
        lines.append(
            f"Place the sketch plane at origin {_pt(f.origin)} with x-axis {_pt(f.axis_x)}, "
            f"y-axis {_pt(f.axis_y)} and z-axis {_pt(f.axis_z)}."
        )
        for j, loop in enumerate(op.profile.loops):
            lines.append("Draw the outer boundary:" if j == 0 else f"Draw hole {j}:")
            for c in loop.curves:
                if isinstance(c, Line):
                    lines.append(f"- a line from {_pt(c.start)} to {_pt(c.end)}.")
                elif isinstance(c, Arc):
                    direction = "counterclockwise" if c.ccw else "clockwise"
                    lines.append(
                        f"- an arc from {_pt(c.start)} to {_pt(c.end)} sweeping "
                        f"{_num(c.sweep_angle)} radians {direction}."
                    )
                else:
                    lines.append(
                        f"- a circle centered at {_pt(c.center)} with radius {_num(c.radius)}."
                    )
        lines.append(
            f"Extrude {_num(op.extrude_toward)} toward the normal and "
            f"{_num(op.extrude_opposite)} opposite."
        )
    return "\n".join(lines) + "\n"


_F = r"(-?\d+(?:\.\d+)?(?:e-?\d+)?)"
_P = r"\(" + _F + r", " + _F + r"(?:, " + _F + r")?\)"
_STEP_RE = re.compile(r"^Step (\d+): (.+) with sketch scale " + _F + r"\.$")
_PLANE_RE = re.compile(
    r"^Place the sketch plane at origin " + _P + r" with x-axis " + _P
    + r", y-axis " + _P + r" and z-axis " + _P + r"\.$"
)
_LOOP_RE = re.compile(r"^Draw (the outer boundary|hole \d+):$")
_LINE_RE = re.compile(r"^- a line from " + _P + r" to " + _P + r"\.$")
_ARC_RE = re.compile(
    r"^- an arc from " + _P + r" to " + _P + r" sweeping " + _F
    + r" radians (counterclockwise|clockwise)\.$"
)
_CIRCLE_RE = re.compile(r"^- a circle centered at " + _P + r" with radius " + _F + r"\.$")
_EXTRUDE_RE = re.compile(r"^Extrude " + _F + r" toward the normal and " + _F + r" opposite\.$")


def parse_quantitative_template(text: str) -> CadModel:
    """Companion grammar for template_quantitative; recovers every numeric
    parameter exactly."""
    ops: list[SketchExtrude] = []
    boolean: BooleanKind | None = None
    scale = 1.0
    frame: CoordinateFrame | None = None
    loops: list[Loop] = []
    curves: list | None = None

    def flush_loop():
        nonlocal curves
        if curves is not None:
            loops.append(Loop(tuple(curves)))
            curves = None

    for raw in text.split("\n"):
        line = raw.strip()
        if not line:
            continue
        m = _STEP_RE.match(line)
        if m:
            if boolean is not None:
                raise ValueError("step before previous extrude sentence")
            verb = m.group(2)
            if verb not in _VERB_BOOLEAN:
                raise ValueError(f"unknown step verb {verb!r}")
            boolean = _VERB_BOOLEAN[verb]
            scale = float(m.group(3))
            continue
        m = _PLANE_RE.match(line)
        if m:
            g = [float(v) for v in m.groups() if v is not None]
            frame = CoordinateFrame(origin=g[0:3], axis_x=g[3:6], axis_y=g[6:9], axis_z=g[9:12])
            continue
        if _LOOP_RE.match(line):
            flush_loop()
            curves = []
            continue
        m = _LINE_RE.match(line)
        if m:
            g = [v for v in m.groups()]
            curves.append(Line((float(g[0]), float(g[1])), (float(g[3]), float(g[4]))))
            continue
        m = _ARC_RE.match(line)
        if m:
            g = m.groups()
            curves.append(
                Arc(
                    (float(g[0]), float(g[1])),
                    (float(g[3]), float(g[4])),
                    float(g[6]),
                    g[7] == "counterclockwise",
                )
            )
            continue
        m = _CIRCLE_RE.match(line)
        if m:
            g = m.groups()
            curves.append(Circle((float(g[0]), float(g[1])), float(g[3])))
            continue
        m = _EXTRUDE_RE.match(line)
        if m:
            flush_loop()
            if boolean is None or frame is None or not loops:
                raise ValueError("extrude sentence without a complete step")
            ops.append(
                SketchExtrude(
                    frame=frame,
                    profile=Profile(tuple(loops)),
                    extrude_toward=float(m.group(1)),
                    extrude_opposite=float(m.group(2)),
                    scale=scale,
                    boolean=boolean,
                )
            )
            boolean, frame, loops = None, None, []
            continue
        raise ValueError(f"unrecognized template sentence: {line!r}")
    if boolean is not None:
        raise ValueError("unterminated step at end of template")
    return CadModel(ops=tuple(ops))


# --- completion clients -------------------------------------------------------


@dataclass(frozen=True)
class CompletionRequest:
    instruction_type: str  # generation / editing
    payload: dict  # serialized inputs
    view_spec: dict | None = None


def model_fingerprint(model: CadModel) -> str:
    text = formats.print_model(model, formats.ReprKind.DSL)
    return hashlib.sha1(text.encode("utf-8")).hexdigest()


def scripted_key(target: CadModel, current: CadModel | None = None) -> str:
    key = model_fingerprint(target)
    if current is not None:
        key = hashlib.sha1((model_fingerprint(current) + key).encode("utf-8")).hexdigest()
    return key


class ScriptedClient:
    """Offline stand-in for a remote model: canned completions keyed by
    model hash."""

    def __init__(self, responses: dict[str, str] | None = None):
        self.responses = dict(responses or {})
        self.requests: list[CompletionRequest] = []

    def register(self, key: str, text: str):
        self.responses[key] = text

    def complete(self, request: CompletionRequest) -> str:
        self.requests.append(request)
        key = request.payload.get("key")
        if key not in self.responses:
            raise MalformedResponse(f"no scripted response for key {key!r}")
        return self.responses[key]


class HttpCompletionClient:
    """Single-endpoint completion contract over HTTP.

    Endpoint and key come from CADSEQ_MODEL_ENDPOINT / CADSEQ_MODEL_API_KEY;
    timeout and retries from the constructor (or a config file upstream).
    """

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 timeout: float = 30.0, retries: int = 2):
        self.endpoint = endpoint or os.environ.get("CADSEQ_MODEL_ENDPOINT")
        self.api_key = api_key or os.environ.get("CADSEQ_MODEL_API_KEY")
        self.timeout = timeout
        self.retries = retries

    def complete(self, request: CompletionRequest) -> str:
        import httpx

        if not self.endpoint:
            raise ClientUnavailable("CADSEQ_MODEL_ENDPOINT is not configured")
        body = {
            "instruction_type": request.instruction_type,
            "payload": request.payload,
            "view_spec": request.view_spec,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                logger.info("completion request attempt %d to %s", attempt + 1, self.endpoint)
                response = httpx.post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout
                )
            except httpx.TimeoutException as exc:
                last_exc = ClientTimeout(str(exc))
                continue
            except httpx.HTTPError as exc:
                last_exc = ClientUnavailable(str(exc))
                continue
            if response.status_code != 200:
                last_exc = ClientUnavailable(f"endpoint returned {response.status_code}")
                continue
            try:
                data = response.json()
                text = data["text"]
            except (ValueError, KeyError):
                raise MalformedResponse("endpoint response lacks a 'text' field") from None
            logger.info("completion response: %d chars", len(text))
            return text
        raise last_exc if last_exc else ClientUnavailable("no attempts made")


def request_qualitative(
    target: CadModel,
    client,
    current: CadModel | None = None,
    kind: formats.ReprKind = formats.ReprKind.DSL,
    with_views: bool = True,
) -> str:
    """Ask the configured client for a qualitative instruction; returns the
    remote completion verbatim."""
    payload = {
        "key": scripted_key(target, current),
        "target": formats.print_model(target, kind),
        "kind": kind.value,
    }
    if current is not None:
        payload["current"] = formats.print_model(current, kind)
    views = None
    if with_views:
        try:
            views = nine_views(target).to_record()
        except (CadError, ValueError):
            views = None
    request = CompletionRequest(
        instruction_type="editing" if current is not None else "generation",
        payload=payload,
        view_spec=views,
    )
    logger.debug("qualitative request key=%s", payload["key"])
    text = client.complete(request)
    logger.debug("qualitative response %r", text[:80])
    if not isinstance(text, str) or not text.strip():
        raise MalformedResponse("completion was empty")
    return text


# --- editing instruction templates ---------------------------------------------


def _op_summary(op: SketchExtrude) -> str:
    outer = op.profile.loops[0]
    if len(outer.curves) == 1 and isinstance(outer.curves[0], Circle):
        shape = f"a circle of radius {_num(outer.curves[0].radius)}"
    else:
        kinds = {type(c).__name__.lower() for c in outer.curves}
        shape = f"a {len(outer.curves)}-curve profile ({', '.join(sorted(kinds))})"
    holes = len(op.profile.loops) - 1
    hole_text = f" with {holes} hole{'s' if holes != 1 else ''}" if holes else ""
    return (
        f"{op.boolean.value} extrusion of {shape}{hole_text}, "
        f"{_num(op.extrude_toward)} toward and {_num(op.extrude_opposite)} opposite"
    )


def deletion_instruction(base: CadModel, script: edit_mod.EditScript) -> str:
    action = next(
        (a for a in script.actions if isinstance(a, (edit_mod.DeleteOp, edit_mod.DeleteLoop))),
        None,
    )
    if isinstance(action, edit_mod.DeleteOp):
        op = canonicalize(base).ops[action.op]
        return f"Delete step {action.op + 1} ({_op_summary(op)})."
    if isinstance(action, edit_mod.DeleteLoop):
        return f"Delete hole {action.loop} of step {action.op + 1}."
    return "Apply the following deletions:\n" + edit_mod.script_to_text(script)


def addition_instruction(script: edit_mod.EditScript) -> str:
    action = next(
        (a for a in script.actions if isinstance(a, (edit_mod.InsertOp, edit_mod.InsertLoop))),
        None,
    )
    if isinstance(action, edit_mod.InsertOp):
        body = template_quantitative(CadModel(ops=(action.payload,)))
        return f"Add a new step at position {action.op + 1}:\n{body}"
    if isinstance(action, edit_mod.InsertLoop):
        return (
            f"Add a hole to step {action.op + 1} at loop position {action.loop}:\n"
            + _loop_phrase(action.payload)
        )
    return "Apply the following additions:\n" + edit_mod.script_to_text(script)


def _loop_phrase(loop: Loop) -> str:
    c = loop.curves[0]
    if isinstance(c, Circle):
        return f"- a circle centered at {_pt(c.center)} with radius {_num(c.radius)}.\n"
    parts = [f"{len(loop.curves)} curves starting at {_pt(loop.curves[0].start)}"]
    return "- " + "; ".join(parts) + ".\n"


def modification_instruction(action: edit_mod.ModifyParam) -> str:
    return f"Change {action.path} from {action.old_value!r} to {action.new_value!r}."


# --- synthetic models -----------------------------------------------------------


def _grid(rng: np.random.Generator, lo: float, hi: float, step: float = 0.05) -> float:
    n = int(round((hi - lo) / step))
    return round(lo + step * int(rng.integers(0, n + 1)), 10)


def _rect_loop(cx: float, cy: float, w: float, h: float) -> Loop:
    x0, y0 = cx - w / 2, cy - h / 2
    x1, y1 = cx + w / 2, cy + h / 2
    return Loop(
        (
            Line((x0, y0), (x1, y0)),
            Line((x1, y0), (x1, y1)),
            Line((x1, y1), (x0, y1)),
            Line((x0, y1), (x0, y0)),
        )
    )


def _ngon_loop(cx: float, cy: float, r: float, n: int) -> Loop:
    pts = []
    for k in range(n):
        a = 2 * math.pi * k / n
        pts.append((round(cx + r * math.cos(a), 12), round(cy + r * math.sin(a), 12)))
    return Loop(tuple(Line(pts[k], pts[(k + 1) % n]) for k in range(n)))


def _rounded_rect_loop(cx: float, cy: float, w: float, h: float, r: float) -> Loop:
    x0, y0, x1, y1 = cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2
    q = math.pi / 2
    return Loop(
        (
            Line((x0 + r, y0), (x1 - r, y0)),
            Arc((x1 - r, y0), (x1, y0 + r), q, True),
            Line((x1, y0 + r), (x1, y1 - r)),
            Arc((x1, y1 - r), (x1 - r, y1), q, True),
            Line((x1 - r, y1), (x0 + r, y1)),
            Arc((x0 + r, y1), (x0, y1 - r), q, True),
            Line((x0, y1 - r), (x0, y0 + r)),
            Arc((x0, y0 + r), (x0 + r, y0), q, True),
        )
    )


_AXIS_FRAMES = [
    ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
    ((0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1.0, 0.0, 0.0)),
    ((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
    ((0.0, -1.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
]


def _random_frame(rng: np.random.Generator, rotated: bool) -> CoordinateFrame:
    origin = (_grid(rng, -0.5, 0.5), _grid(rng, -0.5, 0.5), _grid(rng, -0.5, 0.5))
    if rotated and rng.random() < 0.5:
        # Random rotation from a quaternion, orthonormalized.
        q = rng.normal(size=4)
        q = q / np.linalg.norm(q)
        w, x, y, z = q
        rot = np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
                [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
                [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
            ]
        )
        return CoordinateFrame(
            origin=origin, axis_x=tuple(rot[:, 0]), axis_y=tuple(rot[:, 1]),
            axis_z=tuple(rot[:, 2]),
        )
    ax, ay, az = _AXIS_FRAMES[int(rng.integers(0, len(_AXIS_FRAMES)))]
    return CoordinateFrame(origin=origin, axis_x=ax, axis_y=ay, axis_z=az)


def _random_profile(rng: np.random.Generator, holes: bool) -> Profile:
    cx, cy = _grid(rng, -0.4, 0.4), _grid(rng, -0.4, 0.4)
    size = _grid(rng, 0.3, 0.9)
    shape = int(rng.integers(0, 4))
    if shape == 0:
        h = _grid(rng, 0.3, 0.9)
        outer = _rect_loop(cx, cy, size, h)
        min_dim = min(size, h)
    elif shape == 1:
        outer = Loop((Circle((cx, cy), size / 2),))
        min_dim = size
    elif shape == 2:
        outer = _ngon_loop(cx, cy, size / 2, int(rng.integers(3, 7)))
        min_dim = size * 0.7
    else:
        h = _grid(rng, 0.4, 0.9)
        r = round(0.2 * min(size, h), 10)
        outer = _rounded_rect_loop(cx, cy, size, h, r)
        min_dim = min(size, h)
    loops = [outer]
    if holes and rng.random() < 0.45:
        loops.append(Loop((Circle((cx, cy), round(min_dim * 0.2, 10)),)))
    return Profile(tuple(loops))


def random_model(
    rng: np.random.Generator,
    n_ops: int | None = None,
    max_ops: int = 4,
    rotated_frames: bool = False,
    holes: bool = True,
    metadata: str | None = None,
) -> CadModel:
    """Random valid model for tests and corpus synthesis."""
    if n_ops is None:
        n_ops = int(rng.integers(1, max_ops + 1))
    ops = []
    for i in range(n_ops):
        if i == 0:
            boolean = BooleanKind.NEW
        else:
            roll = rng.random()
            boolean = (
                BooleanKind.JOIN if roll < 0.6 else
                BooleanKind.CUT if roll < 0.9 else BooleanKind.INTERSECT
            )
        scale_roll = rng.random()
        scale = 0.5 if scale_roll < 0.15 else (2.0 if scale_roll < 0.3 else 1.0)
        ops.append(
            SketchExtrude(
                frame=_random_frame(rng, rotated_frames),
                profile=_random_profile(rng, holes),
                extrude_toward=_grid(rng, 0.2, 1.0),
                extrude_opposite=_grid(rng, 0.0, 0.4),
                scale=scale,
                boolean=boolean,
            )
        )
    model = CadModel(ops=tuple(ops), metadata=metadata)
    report = validate(model)
    if not report.ok:  # regenerate rather than emit a broken sample
        return random_model(rng, n_ops, max_ops, rotated_frames, holes, metadata)
    return model


def _safe_param_mutations(model: CadModel, rng: np.random.Generator):
    """Candidate single-parameter edits that keep the model valid."""
    out = []
    for i, op in enumerate(model.ops):
        out.append((f"ops[{i}].extrude_toward", op.extrude_toward,
                    round(op.extrude_toward * 1.5 + 0.1, 10)))
        if op.extrude_opposite > 0:
            out.append((f"ops[{i}].extrude_opposite", op.extrude_opposite,
                        round(op.extrude_opposite * 0.5, 10)))
        for d in range(3):
            out.append((f"ops[{i}].frame.origin[{d}]", op.frame.origin[d],
                        round(op.frame.origin[d] + 0.25, 10)))
        if i > 0:
            other = BooleanKind.JOIN if op.boolean is not BooleanKind.JOIN else BooleanKind.CUT
            out.append((f"ops[{i}].boolean", op.boolean.value, other.value))
        for j, loop in enumerate(op.profile.loops):
            c = loop.curves[0]
            if len(loop.curves) == 1 and isinstance(c, Circle):
                new_r = round(c.radius * (0.6 if j > 0 else 1.2), 10)
                out.append(
                    (f"ops[{i}].profile.loops[{j}].curves[0].radius", c.radius, new_r)
                )
    order = rng.permutation(len(out))
    return [out[int(k)] for k in order]


def mutate_model(model: CadModel, rng: np.random.Generator, n_edits: int = 1) -> CadModel:
    """Apply 1..n random validity-preserving structural or parameter edits."""
    current = canonicalize(model)
    for _ in range(n_edits):
        choice = rng.random()
        if choice < 0.3:
            payload = random_model(rng, n_ops=1).ops[0]
            idx = int(rng.integers(0, len(current.ops) + 1))
            boolean = payload.boolean if idx > 0 else BooleanKind.NEW
            ops = list(current.ops)
            ops.insert(idx, SketchExtrude(
                frame=payload.frame, profile=payload.profile,
                extrude_toward=payload.extrude_toward,
                extrude_opposite=payload.extrude_opposite,
                scale=payload.scale, boolean=boolean,
            ))
            candidate = CadModel(ops=tuple(ops), metadata=current.metadata)
        elif choice < 0.5 and len(current.ops) >= 2:
            idx = int(rng.integers(0, len(current.ops)))
            ops = list(current.ops)
            ops.pop(idx)
            candidate = CadModel(ops=tuple(ops), metadata=current.metadata)
        else:
            mutations = _safe_param_mutations(current, rng)
            candidate = None
            for path, old, new in mutations:
                trial = edit_mod.set_param(current, path, new)
                if validate(trial).ok:
                    candidate = trial
                    break
            if candidate is None:
                continue
        if validate(candidate).ok:
            current = canonicalize(candidate)
    return current


# --- corpus construction --------------------------------------------------------


@dataclass
class CorpusStats:
    counts: dict = field(default_factory=dict)
    requested_mix: tuple = (0.4, 0.3, 0.3)
    n_models: int = 0
    n_failed_models: int = 0

    @property
    def realized_mix(self) -> dict:
        total = sum(self.counts.values())
        return {k: (v / total if total else 0.0) for k, v in self.counts.items()}


def _synth_modification(model: CadModel, rng: np.random.Generator):
    base = canonicalize(model)
    for path, old, new in _safe_param_mutations(base, rng):
        trial = edit_mod.set_param(base, path, new)
        if not validate(trial).ok:
            continue
        target = canonicalize(trial)
        action = edit_mod.ModifyParam(path, old, new)
        op_idx = int(path.split("]")[0].split("[")[1])
        script = edit_mod.EditScript(
            actions=(action,),
            edited_ops_a=frozenset([op_idx]),
            edited_ops_b=frozenset([op_idx]),
        )
        return base, target, script, action
    return None


def build_editing_corpus(
    models,
    client=None,
    mix: tuple[float, float, float] = (0.4, 0.3, 0.3),
    seed: int = 0,
    kind: formats.ReprKind = formats.ReprKind.DSL,
    modifications_per_model: int = 2,
) -> tuple[list[InstructionRecord], CorpusStats]:
    """Stage-one pair construction: deletion/addition pairs from removable
    pieces plus synthesized single-parameter modification pairs, sampled to
    the requested add/delete/modify mix. Per-model failures are logged and
    skipped; the build never aborts."""
    rng = np.random.default_rng(seed)
    additions: list[tuple] = []
    deletions: list[tuple] = []
    modifications: list[tuple] = []
    stats = CorpusStats(requested_mix=tuple(mix))
    for model in models:
        stats.n_models += 1
        try:
            base = canonicalize(require_valid(model))
            pairs = edit_mod.make_pairs(base)
        except (CadError, NothingRemovable) as exc:
            stats.n_failed_models += 1
            logger.warning("skipping model: %s", exc)
            pairs = []
            base = None
        if base is not None:
            for reduced, del_script, _payload in pairs:
                deletions.append((base, reduced, del_script))
                add_script = edit_mod.invert(del_script, base)
                additions.append((reduced, base, add_script))
            for _ in range(modifications_per_model):
                synth = _synth_modification(base, rng)
                if synth is not None:
                    current, target, script, action = synth
                    modifications.append((current, target, script, action))

    pools = {"addition": additions, "deletion": deletions, "modification": modifications}
    fractions = dict(zip(("addition", "deletion", "modification"), mix))
    limits = [
        len(pool) / fractions[name]
        for name, pool in pools.items()
        if fractions[name] > 0
    ]
    n_total = int(min(limits)) if limits else 0
    records: list[InstructionRecord] = []
    counts = {}
    for name, pool in pools.items():
        want = int(round(n_total * fractions[name]))
        want = min(want, len(pool))
        counts[name] = want
        order = rng.permutation(len(pool))[:want]
        for k in order:
            entry = pool[int(k)]
            if name == "modification":
                current, target, script, action = entry
                text = modification_instruction(action)
            elif name == "deletion":
                current, target, script = entry
                text = deletion_instruction(current, script)
            else:
                current, target, script = entry
                text = addition_instruction(script)
            assert edit_mod.apply(current, script) == target
            records.append(
                InstructionRecord(
                    text=text,
                    modality=Modality.QUANTITATIVE,
                    task=Task.EDITING,
                    target=target,
                    current=current,
                    script=script,
                    edit_type=name,
                )
            )
            if client is not None:
                try:
                    qual = request_qualitative(target, client, current=current, kind=kind)
                    records.append(
                        InstructionRecord(
                            text=qual,
                            modality=Modality.QUALITATIVE,
                            task=Task.EDITING,
                            target=target,
                            current=current,
                            script=script,
                            edit_type=name,
                        )
                    )
                except CadError as exc:
                    logger.warning("qualitative completion failed: %s", exc)
    stats.counts = counts
    return records, stats


def build_generation_records(
    models, client=None, kind: formats.ReprKind = formats.ReprKind.DSL
) -> list[InstructionRecord]:
    records = []
    for model in models:
        try:
            target = canonicalize(require_valid(model))
        except CadError as exc:
            logger.warning("skipping model: %s", exc)
            continue
        records.append(
            InstructionRecord(
                text=template_quantitative(target),
                modality=Modality.QUANTITATIVE,
                task=Task.GENERATION,
                target=target,
            )
        )
        if client is not None:
            try:
                text = request_qualitative(target, client, kind=kind)
                records.append(
                    InstructionRecord(
                        text=text, modality=Modality.QUALITATIVE,
                        task=Task.GENERATION, target=target,
                    )
                )
            except CadError as exc:
                logger.warning("qualitative completion failed: %s", exc)
    return records


def record_to_json(record: InstructionRecord, kind: formats.ReprKind) -> dict:
    doc = {
        "task": record.task.value,
        "modality": record.modality.value,
        "edit_type": record.edit_type,
        "text": record.text,
        "kind": kind.value,
        "target": formats.print_model(record.target, kind),
        "current": (
            formats.print_model(record.current, kind) if record.current is not None else None
        ),
        "script": (
            edit_mod.script_to_text(record.script) if record.script is not None else None
        ),
    }
    return doc


def record_from_json(doc: dict) -> InstructionRecord:
    kind = formats.ReprKind(doc["kind"])
    return InstructionRecord(
        text=doc["text"],
        modality=Modality(doc["modality"]),
        task=Task(doc["task"]),
        target=formats.parse(doc["target"], kind),
        current=formats.parse(doc["current"], kind) if doc.get("current") else None,
        script=edit_mod.script_from_text(doc["script"]) if doc.get("script") else None,
        edit_type=doc.get("edit_type"),
    )


def write_corpus(records, path: str, kind: formats.ReprKind):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_json(record, kind), sort_keys=True) + "\n")


def read_corpus(path: str) -> list[InstructionRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(record_from_json(json.loads(line)))
    return out


# --- structured reasoning traces -------------------------------------------------

SCOT_SECTIONS = (
    "intent_understanding",
    "modeling_analysis",
    "parameter_computation",
    "position_identification",
)


@dataclass(frozen=True)
class ScotTrace:
    intent_understanding: str
    modeling_analysis: str
    parameter_computation: str
    position_identification: str

    @property
    def script(self) -> edit_mod.EditScript:
        return edit_mod.script_from_text(self.position_identification)


_SECTION_RE = re.compile(r"<\s*(/?)([a-z_]+)\s*>")


def _markers_balanced(text: str) -> str | None:
    """Check angle-bracket marker balance; returns the offending tag or None."""
    stack: list[str] = []
    for m in re.finditer(r"<\s*(/?)([A-Za-z_][A-Za-z0-9_]*)((?:[^<>\"]|\"[^\"]*\")*?)(/?)\s*>", text):
        closing, name, _, selfclosed = m.group(1) == "/", m.group(2), m.group(3), m.group(4) == "/"
        if selfclosed:
            continue
        if closing:
            if not stack or stack[-1] != name:
                return name
            stack.pop()
        else:
            stack.append(name)
    return stack[-1] if stack else None


def _script_indices_valid(script: edit_mod.EditScript, current: CadModel) -> str | None:
    """Bounds-only simulation over op/loop counts; returns a message or None."""
    loop_counts = [len(op.profile.loops) for op in current.ops]
    for action in script.actions:
        if isinstance(action, edit_mod.DeleteOp):
            if not 0 <= action.op < len(loop_counts):
                return f"delete_op index {action.op} out of range"
            loop_counts.pop(action.op)
        elif isinstance(action, edit_mod.InsertOp):
            if not 0 <= action.op <= len(loop_counts):
                return f"insert_op index {action.op} out of range"
            loop_counts.insert(action.op, len(action.payload.profile.loops))
        elif isinstance(action, edit_mod.DeleteLoop):
            if not 0 <= action.op < len(loop_counts):
                return f"delete_loop op index {action.op} out of range"
            if not 0 <= action.loop < loop_counts[action.op]:
                return f"delete_loop loop index {action.loop} out of range"
            loop_counts[action.op] -= 1
        elif isinstance(action, edit_mod.InsertLoop):
            if not 0 <= action.op < len(loop_counts):
                return f"insert_loop op index {action.op} out of range"
            if not 0 <= action.loop <= loop_counts[action.op]:
                return f"insert_loop loop index {action.loop} out of range"
            loop_counts[action.op] += 1
        else:
            try:
                m = edit_mod.parse_path(action.path)
            except IndexOutOfBounds as exc:
                return str(exc)
            op_idx = int(m.group(1))
            if not 0 <= op_idx < len(loop_counts):
                return f"modify_param op index {op_idx} out of range"
            if m.group(5) is not None and not 0 <= int(m.group(5)) < loop_counts[op_idx]:
                return f"modify_param loop index {m.group(5)} out of range"
    return None


def validate_scot(text: str, current: CadModel):
    """Validate a structured reasoning trace against the current model.

    Returns (ScotTrace, []) on success or (None, violations). Never raises.
    """
    violations: list[str] = []
    sections: dict[str, str] = {}
    cursor = 0
    for name in SCOT_SECTIONS:
        open_tag = f"<{name}>"
        close_tag = f"</{name}>"
        start = text.find(open_tag, cursor)
        if start < 0:
            violations.append(f"missing section <{name}>")
            continue
        end = text.find(close_tag, start)
        if end < 0:
            violations.append(f"unclosed section <{name}>")
            continue
        sections[name] = text[start + len(open_tag) : end].strip("\n")
        cursor = end + len(close_tag)
    if violations:
        return None, violations
    order_positions = [text.find(f"<{name}>") for name in SCOT_SECTIONS]
    if order_positions != sorted(order_positions):
        violations.append("sections out of order")
    bad = _markers_balanced(sections["modeling_analysis"])
    if bad is not None:
        violations.append(f"modeling_analysis markers unbalanced at <{bad}>")
    try:
        script = edit_mod.script_from_text(sections["position_identification"])
    except ValueError as exc:
        violations.append(f"position_identification does not parse: {exc}")
        script = None
    if script is not None:
        problem = _script_indices_valid(script, current)
        if problem is not None:
            violations.append(f"position_identification: {problem}")
    if violations:
        return None, violations
    return ScotTrace(**sections), []


def build_scot_trace(record: InstructionRecord) -> str:
    """Deterministic golden trace for an editing record; always validates."""
    if record.task is not Task.EDITING:
        raise ValueError("traces are built for editing records")
    current = record.current
    analysis = formats.print_model(current, formats.ReprKind.ST)
    params = []
    for action in record.script.actions:
        if isinstance(action, edit_mod.ModifyParam):
            params.append(f"{action.path}: {action.old_value!r} -> {action.new_value!r}")
    if not params:
        params.append("no derived parameters; structural edit only")
    return (
        "<intent_understanding>\n"
        f"The request is: {record.text.splitlines()[0]}\n"
        f"The current model has {len(current.ops)} step(s).\n"
        "</intent_understanding>\n"
        "<modeling_analysis>\n"
        f"{analysis}"
        "</modeling_analysis>\n"
        "<parameter_computation>\n"
        + "\n".join(params)
        + "\n</parameter_computation>\n"
        "<position_identification>\n"
        f"{edit_mod.script_to_text(record.script)}"
        "</position_identification>\n"
    )


# --- camera metadata --------------------------------------------------------------


@dataclass(frozen=True)
class CameraPose:
    eye: tuple[float, float, float]
    look_at: tuple[float, float, float]
    up: tuple[float, float, float]


@dataclass(frozen=True)
class ViewSpec:
    poses: tuple[CameraPose, ...]

    def __post_init__(self):
        if len(self.poses) != 9:
            raise ValueError("a view spec holds exactly nine poses")

    def to_record(self) -> dict:
        return {
            "poses": [
                {"eye": list(p.eye), "look_at": list(p.look_at), "up": list(p.up)}
                for p in self.poses
            ]
        }


_VIEW_DIRECTIONS = [
    (1.0, 0.0, 0.0),
    (-1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, -1.0, 0.0),
    (0.0, 0.0, 1.0),
    (0.0, 0.0, -1.0),
    (1.0, 1.0, 1.0),
    (-1.0, 1.0, 1.0),
    (1.0, -1.0, 1.0),
]


def nine_views(model: CadModel, distance_factor: float = 2.5) -> ViewSpec:
    """Six axis-aligned plus three corner camera poses around the bbox."""
    program = geom.compile_model(model)
    lo, hi = geom.bbox(program)
    diag = float(np.linalg.norm(hi - lo))
    if diag <= 0.0:
        raise DegenerateExtent("model bounding box has zero diagonal")
    center = (lo + hi) / 2.0
    poses = []
    for direction in _VIEW_DIRECTIONS:
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        eye = center + d * distance_factor * diag
        up = (0.0, 1.0, 0.0) if abs(d[2]) > 0.99 else (0.0, 0.0, 1.0)
        poses.append(
            CameraPose(eye=tuple(float(v) for v in eye),
                       look_at=tuple(float(v) for v in center), up=up)
        )
    return ViewSpec(poses=tuple(poses))
