import json
import math

import pytest

from cadseq import datagen
from cadseq.errors import ParseError
from cadseq.formats import (
    FILE_EXTENSIONS,
    ReprKind,
    check_format,
    convert,
    kind_for_path,
    parse,
    print_model,
)
from cadseq.model import (
    Arc,
    CadModel,
    Circle,
    Line,
    Loop,
    Profile,
    SketchExtrude,
    WORLD_FRAME,
    canonicalize,
)

from conftest import square_loop, unit_cube_model

ALL_KINDS = list(ReprKind)


def rich_model():
    return CadModel(
        ops=(
            SketchExtrude(
                frame=WORLD_FRAME,
                profile=Profile((square_loop(), Loop((Circle((0.5, 0.5), 0.2),)))),
                extrude_toward=1.0,
            ),
            SketchExtrude(
                frame=WORLD_FRAME,
                profile=Profile(
                    (
                        Loop(
                            (
                                Line((0, 0), (1, 0)),
                                Arc((1, 0), (0, 1), math.pi / 2, True),
                                Line((0, 1), (0, 0)),
                            )
                        ),
                    )
                ),
                extrude_toward=0.5,
                extrude_opposite=0.25,
                scale=2.0,
                boolean="cut",
            ),
        ),
        metadata="fixture",
    )


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_roundtrip_identity(kind):
    model = rich_model()
    text = print_model(model, kind)
    assert parse(text, kind) == canonicalize(model)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_print_deterministic(kind):
    model = rich_model()
    assert print_model(model, kind) == print_model(model, kind)
    assert print_model(model, kind).endswith("\n")
    assert "\r" not in print_model(model, kind)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_empty_string_is_syntactic_error_at_line_1(kind):
    with pytest.raises(ParseError) as err:
        parse("", kind)
    assert err.value.kind == "syntactic"
    assert err.value.line == 1


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_empty_model_roundtrip(kind):
    empty = CadModel()
    assert parse(print_model(empty, kind), kind) == empty


def test_structured_text_uses_paired_markers(cube):
    text = print_model(cube, ReprKind.ST)
    assert text.count("<sketch>") == text.count("</sketch>") == 1
    assert text.count("<loop") == text.count("</loop>") == 1
    assert text.count("<model") == text.count("</model>") == 1


def test_gpl_is_a_fluent_builder_chain(cube):
    text = print_model(cube, ReprKind.GPL)
    assert ".workplane(" in text
    assert ".move_to(" in text and ".line_to(" in text
    assert ".extrude(" in text
    want = [".workplane(", ".move_to(", ".extrude("]
    positions = [text.find(w) for w in want]
    assert positions == sorted(positions)


def test_conversion_chain_agrees(cube):
    text = print_model(cube, ReprKind.JSON)
    chain = convert(text, ReprKind.JSON, ReprKind.DSL)
    chain = convert(chain, ReprKind.DSL, ReprKind.ST)
    chain = convert(chain, ReprKind.ST, ReprKind.GPL)
    chain = convert(chain, ReprKind.GPL, ReprKind.JSON)
    assert chain == print_model(canonicalize(cube), ReprKind.JSON)


def test_all_twelve_ordered_conversions_agree():
    model = rich_model()
    canon = canonicalize(model)
    texts = {kind: print_model(model, kind) for kind in ALL_KINDS}
    for src in ALL_KINDS:
        for dst in ALL_KINDS:
            converted = convert(texts[src], src, dst)
            assert parse(converted, dst) == canon, (src, dst)


def test_malformed_st_names_unclosed_tag(cube):
    text = print_model(cube, ReprKind.ST).replace("</sketch>", "")
    with pytest.raises(ParseError) as err:
        parse(text, ReprKind.ST)
    assert "sketch" in str(err.value)


def test_check_format_cases(cube):
    good = print_model(cube, ReprKind.DSL)
    assert check_format(good, ReprKind.DSL)
    assert not check_format(good[: len(good) // 2], ReprKind.DSL)
    # Syntactically fine, semantically broken: unclosed loop chain.
    bad = (
        "cad v1\n"
        "op new scale 1.0\n"
        "plane origin 0 0 0 x 1 0 0 y 0 1 0 z 0 0 1\n"
        "loop outer\n"
        "line 0 0 to 1 0\n"
        "line 1 0 to 1 1\n"
        "extrude toward 1.0 opposite 0.0\n"
    )
    assert not check_format(bad, ReprKind.DSL)


def test_parse_rejects_semantically_invalid_model():
    bad = (
        "cad v1\n"
        "op new scale 1.0\n"
        "plane origin 0 0 0 x 1 0 0 y 0 1 0 z 0 0 1\n"
        "loop outer\n"
        "circle 0.5 0.5 radius 0.2\n"
        "extrude toward 0.0 opposite 0.0\n"
    )
    with pytest.raises(ParseError) as err:
        parse(bad, ReprKind.DSL)
    assert err.value.kind == "semantic"


DEEPCAD_SAMPLE = {
    "entities": {
        "F5c1b": {
            "name": "Sketch 1",
            "type": "Sketch",
            "profiles": {
                "JGC": {
                    "loops": [
                        {
                            "is_outer": True,
                            "profile_curves": [
                                {
                                    "type": "Line3D",
                                    "start_point": {"x": 0.0, "y": 0.0, "z": 0.0},
                                    "end_point": {"x": 0.0254, "y": 0.0, "z": 0.0},
                                },
                                {
                                    "type": "Line3D",
                                    "start_point": {"x": 0.0254, "y": 0.0, "z": 0.0},
                                    "end_point": {"x": 0.0254, "y": 0.0254, "z": 0.0},
                                },
                                {
                                    "type": "Line3D",
                                    "start_point": {"x": 0.0254, "y": 0.0254, "z": 0.0},
                                    "end_point": {"x": 0.0, "y": 0.0254, "z": 0.0},
                                },
                                {
                                    "type": "Line3D",
                                    "start_point": {"x": 0.0, "y": 0.0254, "z": 0.0},
                                    "end_point": {"x": 0.0, "y": 0.0, "z": 0.0},
                                },
                            ],
                        }
                    ]
                }
            },
            "transform": {
                "origin": {"x": 0.0, "y": 0.0, "z": 0.0},
                "x_axis": {"x": 1.0, "y": 0.0, "z": 0.0},
                "y_axis": {"x": 0.0, "y": 1.0, "z": 0.0},
                "z_axis": {"x": 0.0, "y": 0.0, "z": 1.0},
            },
        },
        "F5c2a": {
            "name": "Extrude 1",
            "type": "ExtrudeFeature",
            "profiles": [{"profile": "JGC", "sketch": "F5c1b"}],
            "operation": "NewBodyFeatureOperation",
            "start_extent": {"type": "ProfilePlaneStartDefinition"},
            "extent_type": "OneSideFeatureExtentType",
            "extent_one": {
                "distance": {
                    "type": "ModelParameter",
                    "value": 0.0127,
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
            },
        },
    },
    "properties": {},
    "sequence": [
        {"index": 0, "type": "Sketch", "entity": "F5c1b"},
        {"index": 1, "type": "ExtrudeFeature", "entity": "F5c2a"},
    ],
}


def test_deepcad_square_extrusion_sample():
    model = parse(json.dumps(DEEPCAD_SAMPLE), ReprKind.JSON)
    assert len(model.ops) == 1
    op = model.ops[0]
    assert len(op.profile.loops) == 1
    curves = op.profile.loops[0].curves
    assert len(curves) == 4
    assert all(isinstance(c, Line) for c in curves)
    assert op.extrude_toward == 0.0127
    assert op.extrude_opposite == 0.0
    assert op.boolean.value == "new"
    assert op.scale == 1.0  # extension default


def test_deepcad_negative_one_side_extent_maps_to_opposite():
    doc = json.loads(json.dumps(DEEPCAD_SAMPLE))
    extent = doc["entities"]["F5c2a"]["extent_one"]["distance"]
    extent["role"] = "AgainstDistance"
    model = parse(json.dumps(doc), ReprKind.JSON)
    assert model.ops[0].extrude_toward == 0.0
    assert model.ops[0].extrude_opposite == 0.0127


def test_parse_totality_on_random_bytes(rng):
    for kind in ALL_KINDS:
        for _ in range(100):
            n = int(rng.integers(0, 400))
            junk = bytes(rng.integers(32, 127, n).tolist()).decode("ascii")
            try:
                parse(junk, kind)
            except ParseError:
                pass


def test_fuzzed_models_roundtrip_all_kinds(rng):
    for i in range(25):
        model = datagen.random_model(rng, rotated_frames=(i % 2 == 0))
        canon = canonicalize(model)
        for kind in ALL_KINDS:
            assert parse(print_model(model, kind), kind) == canon


def test_kind_for_path():
    for kind, ext in FILE_EXTENSIONS.items():
        assert kind_for_path(f"model{ext}") is kind
    with pytest.raises(ValueError):
        kind_for_path("model.step")


def test_golden_printer_output(cube):
    import pathlib

    golden_dir = pathlib.Path(__file__).parent / "data"
    for kind in ALL_KINDS:
        golden = (golden_dir / f"cube{FILE_EXTENSIONS[kind]}").read_text()
        assert print_model(cube, kind) == golden
