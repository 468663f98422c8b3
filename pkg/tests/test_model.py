import math

import numpy as np
import pytest

from cadseq import sketch2d
from cadseq.errors import InvalidModel
from cadseq.model import (
    Arc,
    CadModel,
    Circle,
    CoordinateFrame,
    Line,
    Loop,
    Profile,
    SketchExtrude,
    WORLD_FRAME,
    canonicalize,
    validate,
)

from conftest import square_loop


def test_minimal_valid_model_has_empty_report(cube):
    assert validate(cube).ok


def test_open_loop_reported():
    # Last segment's end displaced 1e-3 from the first start.
    loop = Loop(
        (
            Line((0, 0), (1, 0)),
            Line((1, 0), (1, 1)),
            Line((1, 1), (0, 1)),
            Line((0, 1), (0.001, 0.0)),
        )
    )
    model = CadModel(
        ops=(SketchExtrude(frame=WORLD_FRAME, profile=Profile((loop,)), extrude_toward=1.0),)
    )
    report = validate(model)
    assert not report.ok
    assert any("not closed" in v.message for v in report.violations)


def test_hole_larger_than_outer_reported():
    outer = square_loop(1.0)
    hole = Loop((Circle((0.5, 0.5), 0.8),))
    # Shoelace/area oracle: the hole's area really does exceed the outer's.
    assert abs(sketch2d.loop_area(hole)) > abs(sketch2d.loop_area(outer))
    model = CadModel(
        ops=(
            SketchExtrude(
                frame=WORLD_FRAME, profile=Profile((outer, hole)), extrude_toward=1.0
            ),
        )
    )
    report = validate(model)
    assert any("hole area" in v.message for v in report.violations)


def test_hole_outside_outer_reported():
    outer = square_loop(1.0)
    hole = Loop((Circle((5.0, 5.0), 0.1),))
    model = CadModel(
        ops=(
            SketchExtrude(
                frame=WORLD_FRAME, profile=Profile((outer, hole)), extrude_toward=1.0
            ),
        )
    )
    report = validate(model)
    assert any("outside the outer loop" in v.message for v in report.violations)


@pytest.mark.parametrize(
    "bad_value",
    [float("nan"), float("inf"), float("-inf")],
)
def test_validate_total_on_non_finite(bad_value):
    loop = Loop((Line((0, 0), (bad_value, 0)), Line((bad_value, 0), (0, 1)),
                 Line((0, 1), (0, 0))))
    model = CadModel(
        ops=(SketchExtrude(frame=WORLD_FRAME, profile=Profile((loop,)),
                           extrude_toward=bad_value),)
    )
    report = validate(model)  # must not raise
    assert not report.ok


def test_validate_frame_invariants():
    skew = CoordinateFrame(
        origin=(0, 0, 0), axis_x=(1, 0, 0), axis_y=(0.1, 1, 0), axis_z=(0, 0, 1)
    )
    model = CadModel(
        ops=(SketchExtrude(frame=skew, profile=Profile((square_loop(),)),
                           extrude_toward=1.0),)
    )
    assert not validate(model).ok
    left_handed = CoordinateFrame(
        origin=(0, 0, 0), axis_x=(1, 0, 0), axis_y=(0, 1, 0), axis_z=(0, 0, -1)
    )
    model = CadModel(
        ops=(SketchExtrude(frame=left_handed, profile=Profile((square_loop(),)),
                           extrude_toward=1.0),)
    )
    assert any("right-handed" in v.message for v in validate(model).violations)


def test_degenerate_extrude_rejected():
    model = CadModel(
        ops=(SketchExtrude(frame=WORLD_FRAME, profile=Profile((square_loop(),)),
                           extrude_toward=0.0, extrude_opposite=0.0),)
    )
    assert any("sum to zero" in v.message for v in validate(model).violations)


def test_canonicalize_rotates_loop_start():
    loop = Loop(
        (
            Line((1, 0), (1, 1)),
            Line((1, 1), (0, 1)),
            Line((0, 1), (0, 0)),
            Line((0, 0), (1, 0)),
        )
    )
    model = CadModel(
        ops=(SketchExtrude(frame=WORLD_FRAME, profile=Profile((loop,)), extrude_toward=1.0),)
    )
    canon = canonicalize(model)
    assert canon.ops[0].profile.loops[0].curves[0].start == (0.0, 0.0)


def test_canonicalize_idempotent(cube):
    canon = canonicalize(cube)
    assert canonicalize(canon) == canon


def test_all_rotations_share_canonical_form():
    base = square_loop()
    canon_forms = set()
    for shift in range(4):
        rotated = Loop(base.curves[shift:] + base.curves[:shift])
        model = CadModel(
            ops=(SketchExtrude(frame=WORLD_FRAME, profile=Profile((rotated,)),
                               extrude_toward=1.0),)
        )
        canon_forms.add(canonicalize(model))
    assert len(canon_forms) == 1


def test_canonicalize_coerces_first_op_to_new(cube):
    op = cube.ops[0]
    model = CadModel(ops=(SketchExtrude(
        frame=op.frame, profile=op.profile, extrude_toward=1.0, boolean="cut"),))
    canon = canonicalize(model)
    assert canon.ops[0].boolean.value == "new"


def test_canonicalize_rejects_invalid():
    model = CadModel(
        ops=(SketchExtrude(frame=WORLD_FRAME, profile=Profile((square_loop(),)),
                           extrude_toward=-1.0),)
    )
    with pytest.raises(InvalidModel):
        canonicalize(model)


def test_canonicalize_preserves_sampled_geometry(cube):
    # Same seed, identical clouds: canonical form must not move any surface.
    from cadseq import geom

    canon = canonicalize(cube)
    a = geom.sample_surface(geom.compile_model(cube), 512, seed=3)
    b = geom.sample_surface(geom.compile_model(canon), 512, seed=3)
    assert np.array_equal(a.points, b.points)


def test_arc_center_radius_quarter_circle():
    center, radius = sketch2d.arc_center_radius((1, 0), (0, 1), math.pi / 2, True)
    assert radius == pytest.approx(1.0, abs=1e-12)
    assert center == pytest.approx((0.0, 0.0), abs=1e-12)
    center, radius = sketch2d.arc_center_radius((1, 0), (0, 1), 3 * math.pi / 2, False)
    assert radius == pytest.approx(1.0, abs=1e-12)
    assert center == pytest.approx((0.0, 0.0), abs=1e-12)


def test_loop_area_with_arcs_matches_polygon_oracle():
    # Quarter-rounded square: compare analytic area against fine polygonization.
    loop = Loop(
        (
            Line((0.2, 0.0), (0.8, 0.0)),
            Arc((0.8, 0.0), (1.0, 0.2), math.pi / 2, True),
            Line((1.0, 0.2), (1.0, 0.8)),
            Arc((1.0, 0.8), (0.8, 1.0), math.pi / 2, True),
            Line((0.8, 1.0), (0.2, 1.0)),
            Arc((0.2, 1.0), (0.0, 0.8), math.pi / 2, True),
            Line((0.0, 0.8), (0.0, 0.2)),
            Arc((0.0, 0.2), (0.2, 0.0), math.pi / 2, True),
        )
    )
    ring = sketch2d.polygonize_loop(loop, 1e-5)
    x, y = ring[:, 0], ring[:, 1]
    poly_area = 0.5 * abs(
        float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
    )
    assert sketch2d.loop_area(loop) == pytest.approx(poly_area, abs=1e-4)
    # and against the closed form: 1 - (4 - pi) r^2 with r = 0.2
    assert sketch2d.loop_area(loop) == pytest.approx(1 - (4 - math.pi) * 0.04, abs=1e-12)


def test_empty_model_is_valid_and_canonical():
    empty = CadModel()
    assert validate(empty).ok
    assert canonicalize(empty) == empty
