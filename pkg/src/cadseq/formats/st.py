"""Structured text representation.

Paired angle-bracket markers carry the hierarchy (<model>, <op>, <sketch>,
<loop>), self-closing markers carry leaf elements, and parameters are
attribute lists. Unclosed or mismatched markers fail with an error naming
the tag.
"""

from __future__ import annotations

import re

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

_TAG_RE = re.compile(r"<\s*(/?)([A-Za-z_][A-Za-z0-9_]*)((?:[^<>\"]|\"[^\"]*\")*?)(/?)\s*>")
_ATTR_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*\"([^\"]*)\"")


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_vec(v) -> str:
    return " ".join(_fmt(x) for x in v)


def print_st(model: CadModel) -> str:
    out = []
    name = f' name="{model.metadata}"' if model.metadata else ""
    out.append(f"<model{name}>")
    for op in model.ops:
        out.append(f'  <op boolean="{op.boolean.value}" scale="{_fmt(op.scale)}">')
        f = op.frame
        out.append(
            f'    <frame origin="{_fmt_vec(f.origin)}" x_axis="{_fmt_vec(f.axis_x)}"'
            f' y_axis="{_fmt_vec(f.axis_y)}" z_axis="{_fmt_vec(f.axis_z)}"/>'
        )
        out.append("    <sketch>")
        for j, loop in enumerate(op.profile.loops):
            role = "outer" if j == 0 else "hole"
            out.append(f'      <loop role="{role}">')
            for c in loop.curves:
                if isinstance(c, Line):
                    out.append(
                        f'        <line start="{_fmt_vec(c.start)}" end="{_fmt_vec(c.end)}"/>'
                    )
                elif isinstance(c, Arc):
                    out.append(
                        f'        <arc start="{_fmt_vec(c.start)}" end="{_fmt_vec(c.end)}"'
                        f' sweep="{_fmt(c.sweep_angle)}" ccw="{"true" if c.ccw else "false"}"/>'
                    )
                else:
                    out.append(
                        f'        <circle center="{_fmt_vec(c.center)}" radius="{_fmt(c.radius)}"/>'
                    )
            out.append("      </loop>")
        out.append("    </sketch>")
        out.append(
            f'    <extrude toward="{_fmt(op.extrude_toward)}"'
            f' opposite="{_fmt(op.extrude_opposite)}"/>'
        )
        out.append("  </op>")
    out.append("</model>")
    return "\n".join(out) + "\n"


class _Tag:
    __slots__ = ("name", "closing", "selfclosed", "attrs", "line", "column")

    def __init__(self, name, closing, selfclosed, attrs, line, column):
        self.name = name
        self.closing = closing
        self.selfclosed = selfclosed
        self.attrs = attrs
        self.line = line
        self.column = column


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    last_nl = text.rfind("\n", 0, offset)
    return line, offset - last_nl


def _scan_tags(text: str) -> list[_Tag]:
    tags = []
    pos = 0
    while True:
        lt = text.find("<", pos)
        between = text[pos : lt if lt >= 0 else len(text)]
        if between.strip():
            line, col = _line_col(text, pos + len(between) - len(between.lstrip()))
            raise ParseError(f"unexpected text {between.strip()[:20]!r}", line, col)
        if lt < 0:
            break
        m = _TAG_RE.match(text, lt)
        if not m:
            line, col = _line_col(text, lt)
            raise ParseError("malformed tag", line, col, kind="lexical")
        line, col = _line_col(text, lt)
        attrs = dict(_ATTR_RE.findall(m.group(3)))
        tags.append(_Tag(m.group(2), m.group(1) == "/", m.group(4) == "/", attrs, line, col))
        pos = m.end()
    if not tags:
        raise ParseError("empty input: expected <model>", 1, 1)
    return tags


def _floats(tag: _Tag, attr: str, n: int) -> tuple[float, ...]:
    if attr not in tag.attrs:
        raise ParseError(f"<{tag.name}> missing attribute {attr!r}", tag.line, tag.column)
    parts = tag.attrs[attr].split()
    if len(parts) != n:
        raise ParseError(
            f"<{tag.name}> attribute {attr!r} needs {n} numbers", tag.line, tag.column
        )
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ParseError(
            f"<{tag.name}> attribute {attr!r} is not numeric", tag.line, tag.column, kind="lexical"
        ) from None


def _one(tag: _Tag, attr: str) -> float:
    return _floats(tag, attr, 1)[0]


class _Walker:
    def __init__(self, tags: list[_Tag]):
        self.tags = tags
        self.pos = 0

    def peek(self) -> _Tag | None:
        return self.tags[self.pos] if self.pos < len(self.tags) else None

    def next(self) -> _Tag:
        tag = self.peek()
        if tag is None:
            last = self.tags[-1]
            raise ParseError("unexpected end of input", last.line, last.column)
        self.pos += 1
        return tag

    def open(self, name: str) -> _Tag:
        tag = self.next()
        if tag.closing or tag.selfclosed or tag.name != name:
            raise ParseError(f"expected <{name}>, got <{'/' if tag.closing else ''}{tag.name}>",
                             tag.line, tag.column)
        return tag

    def close(self, name: str, opener: _Tag):
        tag = self.peek()
        if tag is None:
            raise ParseError(f"unclosed <{name}>", opener.line, opener.column)
        if not (tag.closing and tag.name == name):
            raise ParseError(
                f"unclosed <{name}>: expected </{name}>, got <{'/' if tag.closing else ''}{tag.name}>",
                tag.line,
                tag.column,
            )
        self.pos += 1

    def at_close(self, name: str) -> bool:
        tag = self.peek()
        return tag is not None and tag.closing and tag.name == name

    def at_open(self, name: str) -> bool:
        tag = self.peek()
        return tag is not None and not tag.closing and not tag.selfclosed and tag.name == name


def _parse_loop(w: _Walker) -> Loop:
    opener = w.open("loop")
    curves = []
    while True:
        nxt = w.peek()
        if nxt is None or nxt.closing or not nxt.selfclosed:
            break
        tag = w.next()
        if tag.name == "line":
            curves.append(Line(_floats(tag, "start", 2), _floats(tag, "end", 2)))
        elif tag.name == "arc":
            ccw_text = tag.attrs.get("ccw", "true")
            curves.append(
                Arc(
                    _floats(tag, "start", 2),
                    _floats(tag, "end", 2),
                    _one(tag, "sweep"),
                    ccw_text == "true",
                )
            )
        elif tag.name == "circle":
            curves.append(Circle(_floats(tag, "center", 2), _one(tag, "radius")))
        else:
            raise ParseError(f"unknown curve tag <{tag.name}>", tag.line, tag.column)
    w.close("loop", opener)
    if not curves:
        raise ParseError("loop has no curves", opener.line, opener.column, kind="semantic")
    return Loop(tuple(curves))


def _parse_op(w: _Walker) -> SketchExtrude:
    op_tag = w.open("op")
    boolean_text = op_tag.attrs.get("boolean", "new")
    try:
        boolean = BooleanKind(boolean_text)
    except ValueError:
        raise ParseError(f"unknown boolean kind {boolean_text!r}", op_tag.line, op_tag.column)
    scale = _one(op_tag, "scale") if "scale" in op_tag.attrs else 1.0

    frame_tag = w.next()
    if frame_tag.name != "frame" or not frame_tag.selfclosed:
        raise ParseError("expected <frame .../>", frame_tag.line, frame_tag.column)
    frame = CoordinateFrame(
        origin=_floats(frame_tag, "origin", 3),
        axis_x=_floats(frame_tag, "x_axis", 3),
        axis_y=_floats(frame_tag, "y_axis", 3),
        axis_z=_floats(frame_tag, "z_axis", 3),
    )

    sketch_tag = w.open("sketch")
    loops = []
    while w.at_open("loop"):
        loops.append(_parse_loop(w))
    w.close("sketch", sketch_tag)
    if not loops:
        raise ParseError("sketch has no loops", sketch_tag.line, sketch_tag.column, kind="semantic")

    ext_tag = w.next()
    if ext_tag.name != "extrude" or not ext_tag.selfclosed:
        raise ParseError("expected <extrude .../>", ext_tag.line, ext_tag.column)
    toward = _one(ext_tag, "toward")
    opposite = _one(ext_tag, "opposite")

    w.close("op", op_tag)
    return SketchExtrude(
        frame=frame,
        profile=Profile(tuple(loops)),
        extrude_toward=toward,
        extrude_opposite=opposite,
        scale=scale,
        boolean=boolean,
    )


def parse_st(text: str) -> CadModel:
    tags = _scan_tags(text)
    w = _Walker(tags)
    model_tag = w.open("model")
    ops = []
    while w.at_open("op"):
        ops.append(_parse_op(w))
    w.close("model", model_tag)
    extra = w.peek()
    if extra is not None:
        raise ParseError(f"unexpected <{extra.name}> after </model>", extra.line, extra.column)
    return CadModel(ops=tuple(ops), metadata=model_tag.attrs.get("name"))
