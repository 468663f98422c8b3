"""Line-oriented command DSL.

One statement per line, whitespace separated, `#` comments. The grammar
stays close to how a person would narrate the modeling steps:

    cad v1
    model "bracket"
    op new scale 1.0
    plane origin 0 0 0 x 1 0 0 y 0 1 0 z 0 0 1
    loop outer
    line 0.0 0.0 to 1.0 0.0
    arc 1.0 0.0 to 0.0 1.0 sweep 1.5707963267948966 ccw
    circle 0.5 0.5 radius 0.2
    extrude toward 1.0 opposite 0.0

See docs/grammars.md for the EBNF.
"""

from __future__ import annotations

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

HEADER = "cad v1"


def _fmt(x: float) -> str:
    return repr(float(x))


def print_dsl(model: CadModel) -> str:
    lines = [HEADER]
    if model.metadata:
        lines.append(f'model "{model.metadata}"')
    for op in model.ops:
        lines.append(f"op {op.boolean.value} scale {_fmt(op.scale)}")
        f = op.frame
        lines.append(
            "plane origin "
            + " ".join(_fmt(v) for v in f.origin)
            + " x "
            + " ".join(_fmt(v) for v in f.axis_x)
            + " y "
            + " ".join(_fmt(v) for v in f.axis_y)
            + " z "
            + " ".join(_fmt(v) for v in f.axis_z)
        )
        for j, loop in enumerate(op.profile.loops):
            lines.append("loop outer" if j == 0 else "loop hole")
            for c in loop.curves:
                if isinstance(c, Line):
                    lines.append(
                        f"line {_fmt(c.start[0])} {_fmt(c.start[1])} to "
                        f"{_fmt(c.end[0])} {_fmt(c.end[1])}"
                    )
                elif isinstance(c, Arc):
                    lines.append(
                        f"arc {_fmt(c.start[0])} {_fmt(c.start[1])} to "
                        f"{_fmt(c.end[0])} {_fmt(c.end[1])} sweep {_fmt(c.sweep_angle)} "
                        + ("ccw" if c.ccw else "cw")
                    )
                else:
                    lines.append(
                        f"circle {_fmt(c.center[0])} {_fmt(c.center[1])} radius {_fmt(c.radius)}"
                    )
        lines.append(
            f"extrude toward {_fmt(op.extrude_toward)} opposite {_fmt(op.extrude_opposite)}"
        )
    return "\n".join(lines) + "\n"


class _Cursor:
    """One statement's tokens with positional error reporting."""

    def __init__(self, tokens: list[tuple[str, int]], line_no: int):
        self.tokens = tokens
        self.line_no = line_no
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    def _fail(self, message: str, kind: str = "syntactic"):
        col = self.tokens[self.pos][1] if self.pos < len(self.tokens) else (
            self.tokens[-1][1] + len(self.tokens[-1][0]) if self.tokens else 1
        )
        raise ParseError(message, line=self.line_no, column=col, kind=kind)

    def word(self, *expected: str) -> str:
        if self.done():
            self._fail(f"expected {' or '.join(expected) if expected else 'token'}")
        tok, _ = self.tokens[self.pos]
        if expected and tok not in expected:
            self._fail(f"expected {' or '.join(expected)}, got {tok!r}")
        self.pos += 1
        return tok

    def number(self) -> float:
        if self.done():
            self._fail("expected a number")
        tok, _ = self.tokens[self.pos]
        try:
            value = float(tok)
        except ValueError:
            self._fail(f"expected a number, got {tok!r}", kind="lexical")
        self.pos += 1
        return value

    def numbers(self, n: int) -> tuple[float, ...]:
        return tuple(self.number() for _ in range(n))

    def end(self):
        if not self.done():
            self._fail("unexpected trailing tokens")


def _tokenize_line(raw: str) -> list[tuple[str, int]]:
    tokens = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "#":
            break
        if ch.isspace():
            i += 1
            continue
        if ch == '"':
            j = raw.find('"', i + 1)
            if j < 0:
                j = len(raw) - 1
            tokens.append((raw[i : j + 1], i + 1))
            i = j + 1
            continue
        j = i
        while j < len(raw) and not raw[j].isspace() and raw[j] != "#":
            j += 1
        tokens.append((raw[i:j], i + 1))
        i = j
    return tokens


class _Builder:
    """Accumulates statements into a CadModel, enforcing statement order."""

    def __init__(self):
        self.metadata: str | None = None
        self.ops: list[SketchExtrude] = []
        self.cur_frame: CoordinateFrame | None = None
        self.cur_boolean: BooleanKind | None = None
        self.cur_scale: float = 1.0
        self.cur_loops: list[Loop] = []
        self.cur_curves: list | None = None

    def start_op(self, boolean: BooleanKind, scale: float, cur: _Cursor):
        if self.cur_boolean is not None:
            cur._fail("previous op not finished with an extrude statement")
        self.cur_boolean = boolean
        self.cur_scale = scale
        self.cur_frame = None
        self.cur_loops = []
        self.cur_curves = None

    def close_loop(self, cur: _Cursor):
        if self.cur_curves is not None:
            if not self.cur_curves:
                cur._fail("loop has no curves")
            self.cur_loops.append(Loop(tuple(self.cur_curves)))
            self.cur_curves = None

    def finish_op(self, toward: float, opposite: float, cur: _Cursor):
        if self.cur_boolean is None:
            cur._fail("extrude before any op statement")
        self.close_loop(cur)
        if self.cur_frame is None:
            cur._fail("op has no plane statement")
        if not self.cur_loops:
            cur._fail("op has no loops")
        self.ops.append(
            SketchExtrude(
                frame=self.cur_frame,
                profile=Profile(tuple(self.cur_loops)),
                extrude_toward=toward,
                extrude_opposite=opposite,
                scale=self.cur_scale,
                boolean=self.cur_boolean,
            )
        )
        self.cur_boolean = None
        self.cur_frame = None
        self.cur_loops = []
        self.cur_curves = None


def parse_dsl(text: str) -> CadModel:
    lines = text.split("\n")
    b = _Builder()
    saw_header = False
    for idx, raw in enumerate(lines, start=1):
        tokens = _tokenize_line(raw)
        if not tokens:
            continue
        cur = _Cursor(tokens, idx)
        if not saw_header:
            cur.word("cad")
            cur.word("v1")
            cur.end()
            saw_header = True
            continue
        head = cur.word()
        if head == "model":
            name = cur.word()
            cur.end()
            b.metadata = name.strip('"')
        elif head == "op":
            kind_tok = cur.word("new", "join", "cut", "intersect")
            cur.word("scale")
            scale = cur.number()
            cur.end()
            b.start_op(BooleanKind(kind_tok), scale, cur)
        elif head == "plane":
            if b.cur_boolean is None:
                cur._fail("plane before any op statement")
            cur.word("origin")
            origin = cur.numbers(3)
            cur.word("x")
            ax = cur.numbers(3)
            cur.word("y")
            ay = cur.numbers(3)
            cur.word("z")
            az = cur.numbers(3)
            cur.end()
            b.cur_frame = CoordinateFrame(origin, ax, ay, az)
        elif head == "loop":
            if b.cur_boolean is None:
                cur._fail("loop before any op statement")
            cur.word("outer", "hole")
            cur.end()
            b.close_loop(cur)
            b.cur_curves = []
        elif head in ("line", "arc", "circle"):
            if b.cur_curves is None:
                cur._fail(f"{head} outside a loop")
            if head == "line":
                s = cur.numbers(2)
                cur.word("to")
                e = cur.numbers(2)
                cur.end()
                b.cur_curves.append(Line(s, e))
            elif head == "arc":
                s = cur.numbers(2)
                cur.word("to")
                e = cur.numbers(2)
                cur.word("sweep")
                sweep = cur.number()
                direction = cur.word("ccw", "cw")
                cur.end()
                b.cur_curves.append(Arc(s, e, sweep, direction == "ccw"))
            else:
                c = cur.numbers(2)
                cur.word("radius")
                r = cur.number()
                cur.end()
                b.cur_curves.append(Circle(c, r))
        elif head == "extrude":
            cur.word("toward")
            toward = cur.number()
            cur.word("opposite")
            opposite = cur.number()
            cur.end()
            b.finish_op(toward, opposite, cur)
        else:
            cur.pos = 0
            cur._fail(f"unknown statement {head!r}")
    if not saw_header:
        raise ParseError("missing 'cad v1' header", line=1, column=1)
    if b.cur_boolean is not None:
        raise ParseError("unterminated op at end of input", line=len(lines), column=1)
    return CadModel(ops=tuple(b.ops), metadata=b.metadata)
