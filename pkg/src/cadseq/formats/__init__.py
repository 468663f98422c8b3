"""Parsers and printers for the four CAD sequence serializations.

All printers canonicalize first and emit LF-terminated UTF-8 text, so output
is byte-deterministic and parse(print(m, k), k) == canonicalize(m) for every
kind. Parsers validate the model they build; a syntactically well-formed
text describing an invalid model fails with a semantic ParseError.
"""

from __future__ import annotations

from enum import Enum

from ..errors import ParseError
from ..model import CadModel, canonicalize, validate


class ReprKind(str, Enum):
    JSON = "json"
    DSL = "dsl"
    ST = "st"
    GPL = "gpl"


FILE_EXTENSIONS = {
    ReprKind.JSON: ".cad.json",
    ReprKind.DSL: ".cad.dsl",
    ReprKind.ST: ".cad.st",
    ReprKind.GPL: ".cad.gpl",
}


def kind_for_path(path: str) -> ReprKind:
    for kind, ext in FILE_EXTENSIONS.items():
        if path.endswith(ext):
            return kind
    raise ValueError(f"cannot infer representation kind from path {path!r}")


def _validated(model: CadModel) -> CadModel:
    report = validate(model)
    if not report.ok:
        v = report.violations[0]
        raise ParseError(f"model invalid at {v.path}: {v.message}", kind="semantic")
    return model


def parse(text: str, kind: ReprKind) -> CadModel:
    """Parse text into a validated CadModel or raise ParseError.

    Never crashes on arbitrary input; the error carries the first offending
    line/column and whether the failure was lexical, syntactic or semantic.
    """
    from . import dsl, gpl, json_io, st

    kind = ReprKind(kind)
    if not isinstance(text, str):
        raise ParseError("input is not text", kind="lexical")
    if kind is ReprKind.JSON:
        return _validated(json_io.parse_json(text))
    if kind is ReprKind.DSL:
        return _validated(dsl.parse_dsl(text))
    if kind is ReprKind.ST:
        return _validated(st.parse_st(text))
    return _validated(gpl.parse_gpl(text))


def print_model(model: CadModel, kind: ReprKind) -> str:
    """Render a valid model deterministically in the given kind."""
    from . import dsl, gpl, json_io, st

    kind = ReprKind(kind)
    canon = canonicalize(model)
    if kind is ReprKind.JSON:
        return json_io.print_json(canon)
    if kind is ReprKind.DSL:
        return dsl.print_dsl(canon)
    if kind is ReprKind.ST:
        return st.print_st(canon)
    return gpl.print_gpl(canon)


def convert(text: str, from_kind: ReprKind, to_kind: ReprKind) -> str:
    return print_model(parse(text, from_kind), to_kind)


def check_format(text: str, kind: ReprKind) -> bool:
    """True iff the text parses and the described model validates."""
    try:
        parse(text, kind)
    except ParseError:
        return False
    return True
