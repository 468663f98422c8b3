import math

import numpy as np
import pytest

from cadseq import edit, metrics
from cadseq.errors import EmptyCloud, EmptyEditSet
from cadseq.formats import ReprKind, print_model
from cadseq.model import (
    CadModel,
    Circle,
    Loop,
    Profile,
    SketchExtrude,
    WORLD_FRAME,
    canonicalize,
)

from conftest import square_loop, unit_cube_model


def brute_force_cd(a: np.ndarray, b: np.ndarray) -> float:
    d_ab = np.min(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1), axis=1)
    d_ba = np.min(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1), axis=0)
    return float(d_ab.mean() + d_ba.mean())


def test_identical_clouds_give_zero(cube):
    cloud = metrics.sample_model(cube, 512, seed=1)
    assert metrics.chamfer_points(cloud.points, cloud.points) == 0.0


def test_single_point_clouds():
    a = np.array([[0.0, 0.0, 0.0]])
    b = np.array([[1.0, 0.0, 0.0]])
    assert metrics.chamfer_points(a, b) == 2.0


def test_matches_brute_force(rng):
    for _ in range(10):
        a = rng.random((100, 3))
        b = rng.random((120, 3))
        assert abs(metrics.chamfer_points(a, b) - brute_force_cd(a, b)) <= 1e-12


def test_symmetry_exact(rng):
    a = rng.random((64, 3))
    b = rng.random((80, 3))
    assert metrics.chamfer_points(a, b) == metrics.chamfer_points(b, a)


def test_rigid_invariance(rng):
    a = rng.random((128, 3))
    b = rng.random((128, 3))
    angle = 0.7
    rot = np.array(
        [
            [math.cos(angle), -math.sin(angle), 0],
            [math.sin(angle), math.cos(angle), 0],
            [0, 0, 1],
        ]
    )
    t = np.array([2.0, -1.0, 0.5])
    base = metrics.chamfer_points(a, b)
    moved = metrics.chamfer_points(a @ rot.T + t, b @ rot.T + t)
    assert abs(base - moved) <= 1e-9


def test_empty_cloud_rejected():
    with pytest.raises(EmptyCloud):
        metrics.chamfer_points(np.zeros((0, 3)), np.zeros((1, 3)))


def test_scaled_value():
    result = metrics.CdResult(0.00587)
    assert result.scaled == pytest.approx(5.87, abs=1e-12)


def test_evaluate_batch_counts(cube):
    text = print_model(cube, ReprKind.DSL)
    summary = metrics.evaluate_batch(
        [(text, cube), ("garbage", cube)], ReprKind.DSL, n=256, seed=0
    )
    assert summary.n_total == 2
    assert summary.n_invalid == 1
    assert summary.invalidity_ratio == 0.5
    assert summary.mean_cd == pytest.approx(0.0, abs=1e-15)


def test_evaluate_batch_matches_per_item(cube, holed_cube):
    pairs = [
        (print_model(cube, ReprKind.DSL), cube),
        (print_model(holed_cube, ReprKind.DSL), cube),
        ("nope", holed_cube),
    ]
    summary = metrics.evaluate_batch(pairs, ReprKind.DSL, n=256, seed=3)
    items = [
        metrics.evaluate_pair(text, target, ReprKind.DSL, n=256, seed=3)
        for text, target in pairs
    ]
    assert summary.items == items
    cds = [it["cd"] for it in items if it["valid"]]
    assert summary.mean_cd == sum(cds) / len(cds)


def test_execution_failure_counts_invalid(cube):
    # Valid parse, but cut-everything leaves empty geometry.
    base = cube.ops[0]
    cutter = SketchExtrude(
        frame=WORLD_FRAME,
        profile=Profile((square_loop(3.0, origin=(-1.0, -1.0)),)),
        extrude_toward=3.0,
        extrude_opposite=1.0,
        boolean="cut",
    )
    dead = CadModel(ops=(base, cutter))
    text = print_model(dead, ReprKind.DSL)
    summary = metrics.evaluate_batch([(text, cube)], ReprKind.DSL, n=128, seed=0)
    assert summary.n_invalid == 1


def two_box_model(second_origin):
    """Base block (op 0) plus a disjoint context block (op 1)."""
    ops = (
        SketchExtrude(
            frame=WORLD_FRAME, profile=Profile((square_loop(),)), extrude_toward=1.0
        ),
        SketchExtrude(
            frame=WORLD_FRAME,
            profile=Profile((square_loop(0.5, origin=second_origin),)),
            extrude_toward=0.5,
            boolean="join",
        ),
    )
    return CadModel(ops=ops)


def test_localized_cd_ignores_unedited_difference():
    # generated and target differ ONLY in op 1's position (unedited); the
    # script marks op 0 as the edited portion. The edited geometry and its
    # sampling are untouched by the translation, so localized CD is 0
    # exactly while the full CD sees the moved block.
    generated = two_box_model((2.0, 0.0))
    target = two_box_model((2.0, 0.4))
    script = edit.EditScript(
        actions=(edit.ModifyParam("ops[0].extrude_toward", 1.0, 1.0),),
        edited_ops_a=frozenset([0]),
        edited_ops_b=frozenset([0]),
    )
    localized = metrics.localized_chamfer(generated, target, script, n=1024, seed=2)
    assert localized.value == 0.0
    full = metrics.chamfer_normalized(
        metrics.sample_model(generated, 1024, 2), metrics.sample_model(target, 1024, 2)
    )
    assert full.value > 0.0


def test_localized_equals_full_for_single_op_models():
    # Same-bbox single-op pair: joint and independent normalization coincide,
    # so the localized CD must equal the full CD for the same seed.
    generated = unit_cube_model()
    target = CadModel(
        ops=(
            SketchExtrude(
                frame=WORLD_FRAME,
                profile=Profile((square_loop(), Loop((Circle((0.5, 0.5), 0.2),)))),
                extrude_toward=1.0,
            ),
        )
    )
    script = edit.diff(generated, target)
    assert script.edited_ops_b == frozenset([0])
    localized = metrics.localized_chamfer(generated, target, script, n=512, seed=7)
    full = metrics.chamfer_normalized(
        metrics.sample_model(generated, 512, 7), metrics.sample_model(target, 512, 7)
    )
    assert localized.value == pytest.approx(full.value, rel=1e-12)


def test_localized_exact_match_is_zero(cube):
    target = canonicalize(cube)
    script = edit.EditScript(
        actions=(edit.ModifyParam("ops[0].extrude_toward", 1.0, 1.0),),
        edited_ops_a=frozenset([0]),
        edited_ops_b=frozenset([0]),
    )
    result = metrics.localized_chamfer(target, target, script, n=256, seed=5)
    assert result.value == 0.0


def test_localized_rejects_empty_script(cube):
    with pytest.raises(EmptyEditSet):
        metrics.localized_chamfer(cube, cube, edit.EditScript(), n=64, seed=0)


def test_manifest_evaluation(tmp_path, cube):
    gen = tmp_path / "gen.txt"
    gen.write_text(print_model(cube, ReprKind.DSL))
    bad = tmp_path / "bad.txt"
    bad.write_text("broken")
    target = tmp_path / "target.cad.dsl"
    target.write_text(print_model(cube, ReprKind.DSL))
    manifest = tmp_path / "manifest.txt"
    manifest.write_text(f"{gen}\t{target}\n{bad}\t{target}\n")
    records = tmp_path / "records.jsonl"
    summary = metrics.evaluate_manifest(
        str(manifest), ReprKind.DSL, n=128, seed=1, records_path=str(records)
    )
    assert summary.invalidity_ratio == 0.5
    assert len(records.read_text().splitlines()) == 2
