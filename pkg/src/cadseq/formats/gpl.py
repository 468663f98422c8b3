"""Builder-script representation: a fluent chain in Python surface syntax.

The text looks like a script written against a small builder API
(workplane/move_to/line_to/arc_to/circle/close/extrude), but it is a
restricted grammar: the text is parsed with the stdlib ast module and walked
against a whitelist of call forms. Nothing is ever evaluated.
"""

from __future__ import annotations

import ast
import warnings

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


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_tuple(v) -> str:
    return "(" + ", ".join(_fmt(x) for x in v) + ")"


def print_gpl(model: CadModel) -> str:
    lines = ["model = ("]
    head = "    cad.model("
    head += f'"{model.metadata}"' if model.metadata else ""
    head += ")"
    lines.append(head)
    for op in model.ops:
        f = op.frame
        lines.append(
            f"    .workplane(origin={_fmt_tuple(f.origin)}, x_dir={_fmt_tuple(f.axis_x)}, "
            f"y_dir={_fmt_tuple(f.axis_y)}, z_dir={_fmt_tuple(f.axis_z)}, scale={_fmt(op.scale)})"
        )
        for loop in op.profile.loops:
            first = loop.curves[0]
            if isinstance(first, Circle):
                lines.append(
                    f"    .circle({_fmt(first.center[0])}, {_fmt(first.center[1])}, "
                    f"{_fmt(first.radius)})"
                )
                continue
            lines.append(f"    .move_to({_fmt(first.start[0])}, {_fmt(first.start[1])})")
            for c in loop.curves:
                if isinstance(c, Line):
                    lines.append(f"    .line_to({_fmt(c.end[0])}, {_fmt(c.end[1])})")
                else:
                    lines.append(
                        f"    .arc_to({_fmt(c.end[0])}, {_fmt(c.end[1])}, "
                        f"sweep={_fmt(c.sweep_angle)}, ccw={c.ccw})"
                    )
            lines.append("    .close()")
        lines.append(
            f"    .extrude(toward={_fmt(op.extrude_toward)}, "
            f'opposite={_fmt(op.extrude_opposite)}, combine="{op.boolean.value}")'
        )
    lines.append(")")
    return "\n".join(lines) + "\n"


def _fail(node: ast.AST, message: str, kind: str = "syntactic"):
    raise ParseError(
        message, line=getattr(node, "lineno", 1), column=getattr(node, "col_offset", 0) + 1,
        kind=kind,
    )


def _literal_number(node: ast.AST) -> float:
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_literal_number(node.operand)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        if isinstance(node.value, bool):
            _fail(node, "expected a number, got a boolean")
        return float(node.value)
    _fail(node, "expected a numeric literal")


def _literal_vec(node: ast.AST, n: int) -> tuple[float, ...]:
    if not isinstance(node, ast.Tuple) or len(node.elts) != n:
        _fail(node, f"expected a {n}-tuple of numbers")
    return tuple(_literal_number(e) for e in node.elts)


def _literal_bool(node: ast.AST) -> bool:
    if isinstance(node, ast.Constant) and isinstance(node.value, bool):
        return node.value
    _fail(node, "expected True or False")


def _literal_str(node: ast.AST) -> str:
    if isinstance(node, ast.Constant) and isinstance(node.value, str):
        return node.value
    _fail(node, "expected a string literal")


def _call_args(call: ast.Call, positional: list[str], keyword_only: list[str]):
    """Bind a whitelisted call's arguments to names; rejects surprises."""
    names = {}
    if len(call.args) > len(positional):
        _fail(call, f"too many positional arguments ({len(call.args)})")
    for name, node in zip(positional, call.args):
        names[name] = node
    allowed = set(positional) | set(keyword_only)
    for kw in call.keywords:
        if kw.arg is None or kw.arg not in allowed:
            _fail(call, f"unexpected keyword {kw.arg!r}")
        if kw.arg in names:
            _fail(call, f"duplicate argument {kw.arg!r}")
        names[kw.arg] = kw.value
    return names


def _flatten_chain(node: ast.AST) -> list[ast.Call]:
    """Unwind x.a(...).b(...) into calls ordered first-to-last."""
    calls: list[ast.Call] = []
    while isinstance(node, ast.Call):
        calls.append(node)
        func = node.func
        if isinstance(func, ast.Attribute):
            node = func.value
        elif isinstance(func, ast.Name):
            node = func
            break
        else:
            _fail(func, "unsupported call target")
    calls.reverse()
    return calls


def _call_name(call: ast.Call) -> str:
    if isinstance(call.func, ast.Attribute):
        return call.func.attr
    if isinstance(call.func, ast.Name):
        return call.func.id
    _fail(call.func, "unsupported call target")


class _OpState:
    def __init__(self, frame: CoordinateFrame, scale: float):
        self.frame = frame
        self.scale = scale
        self.loops: list[Loop] = []
        self.curves: list | None = None
        self.position: tuple[float, float] | None = None


def parse_gpl(text: str) -> CadModel:
    if not text.strip():
        raise ParseError("empty input: expected a builder script", 1, 1)
    try:
        with warnings.catch_warnings():
            # Arbitrary input may contain deprecated escape sequences etc.;
            # parsing untrusted text must stay silent.
            warnings.simplefilter("ignore", SyntaxWarning)
            warnings.simplefilter("ignore", DeprecationWarning)
            module = ast.parse(text, mode="exec")
    except SyntaxError as exc:
        raise ParseError(
            exc.msg or "invalid syntax", line=exc.lineno or 1, column=(exc.offset or 1)
        ) from None
    if len(module.body) != 1 or not isinstance(module.body[0], ast.Assign):
        node = module.body[0] if module.body else module
        _fail(node, "expected a single 'model = (...)' assignment")
    chain = _flatten_chain(module.body[0].value)
    if not chain:
        _fail(module.body[0], "expected a builder chain")
    root = chain[0]
    if not (
        isinstance(root.func, ast.Attribute)
        and isinstance(root.func.value, ast.Name)
        and root.func.value.id == "cad"
        and root.func.attr == "model"
    ):
        _fail(root, "chain must start with cad.model(...)")
    metadata = None
    if root.args:
        metadata = _literal_str(root.args[0])
        if len(root.args) > 1 or root.keywords:
            _fail(root, "cad.model takes at most one name")

    ops: list[SketchExtrude] = []
    state: _OpState | None = None

    def close_loop(call: ast.Call):
        nonlocal state
        if state.curves is not None:
            if not state.curves:
                _fail(call, "loop has no curves")
            state.loops.append(Loop(tuple(state.curves)))
            state.curves = None
            state.position = None

    for call in chain[1:]:
        name = _call_name(call)
        if name == "workplane":
            if state is not None:
                _fail(call, "previous workplane not finished with .extrude(...)")
            args = _call_args(call, [], ["origin", "x_dir", "y_dir", "z_dir", "scale"])
            for req in ("origin", "x_dir", "y_dir", "z_dir"):
                if req not in args:
                    _fail(call, f"workplane missing {req!r}")
            frame = CoordinateFrame(
                origin=_literal_vec(args["origin"], 3),
                axis_x=_literal_vec(args["x_dir"], 3),
                axis_y=_literal_vec(args["y_dir"], 3),
                axis_z=_literal_vec(args["z_dir"], 3),
            )
            scale = _literal_number(args["scale"]) if "scale" in args else 1.0
            state = _OpState(frame, scale)
        elif state is None:
            _fail(call, f".{name}() before any .workplane(...)")
        elif name == "move_to":
            args = _call_args(call, ["x", "y"], [])
            close_loop(call)
            state.curves = []
            state.position = (_literal_number(args["x"]), _literal_number(args["y"]))
        elif name == "line_to":
            if state.curves is None or state.position is None:
                _fail(call, ".line_to() without a preceding .move_to()")
            args = _call_args(call, ["x", "y"], [])
            end = (_literal_number(args["x"]), _literal_number(args["y"]))
            state.curves.append(Line(state.position, end))
            state.position = end
        elif name == "arc_to":
            if state.curves is None or state.position is None:
                _fail(call, ".arc_to() without a preceding .move_to()")
            args = _call_args(call, ["x", "y"], ["sweep", "ccw"])
            if "sweep" not in args:
                _fail(call, "arc_to missing 'sweep'")
            end = (_literal_number(args["x"]), _literal_number(args["y"]))
            ccw = _literal_bool(args["ccw"]) if "ccw" in args else True
            state.curves.append(Arc(state.position, end, _literal_number(args["sweep"]), ccw))
            state.position = end
        elif name == "close":
            if call.args or call.keywords:
                _fail(call, ".close() takes no arguments")
            if state.curves is None:
                _fail(call, ".close() without an open loop")
            close_loop(call)
        elif name == "circle":
            close_loop(call)
            args = _call_args(call, ["x", "y", "r"], [])
            state.loops.append(
                Loop(
                    (
                        Circle(
                            (_literal_number(args["x"]), _literal_number(args["y"])),
                            _literal_number(args["r"]),
                        ),
                    )
                )
            )
        elif name == "extrude":
            args = _call_args(call, ["toward", "opposite"], ["combine"])
            if "toward" not in args or "opposite" not in args:
                _fail(call, "extrude needs 'toward' and 'opposite'")
            close_loop(call)
            if not state.loops:
                _fail(call, "extrude with no loops")
            combine = "new"
            if "combine" in args:
                combine = _literal_str(args["combine"])
            try:
                boolean = BooleanKind(combine)
            except ValueError:
                _fail(call, f"unknown combine mode {combine!r}")
            ops.append(
                SketchExtrude(
                    frame=state.frame,
                    profile=Profile(tuple(state.loops)),
                    extrude_toward=_literal_number(args["toward"]),
                    extrude_opposite=_literal_number(args["opposite"]),
                    scale=state.scale,
                    boolean=boolean,
                )
            )
            state = None
        else:
            _fail(call, f"unknown builder call .{name}()")
    if state is not None:
        raise ParseError("unterminated workplane at end of chain", line=1, column=1)
    return CadModel(ops=tuple(ops), metadata=metadata)
