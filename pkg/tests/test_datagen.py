import numpy as np
import pytest

from cadseq import datagen, edit
from cadseq.errors import MalformedResponse
from cadseq.formats import ReprKind
from cadseq.model import CadModel, canonicalize, validate

from conftest import holed_cube_model


def corpus_models(n, seed=0, min_ops=2):
    out = []
    for i in range(n):
        local = np.random.default_rng(seed * 1000 + i)
        out.append(datagen.random_model(local, n_ops=int(local.integers(min_ops, 5))))
    return out


def test_template_contains_every_parameter(cube):
    text = datagen.template_quantitative(cube)
    for token in ("(0.0, 0.0)", "(1.0, 0.0)", "(1.0, 1.0)", "(0.0, 1.0)", "Extrude 1.0"):
        assert token in text
    assert text.count("\n") == len(text.split("\n")) - 1


def test_template_byte_stable(cube):
    assert datagen.template_quantitative(cube) == datagen.template_quantitative(cube)


def test_template_reparse_recovers_model_exactly(rng):
    for i in range(20):
        local = np.random.default_rng(700 + i)
        model = datagen.random_model(local, rotated_frames=(i % 3 == 0))
        text = datagen.template_quantitative(model)
        assert datagen.parse_quantitative_template(text) == canonicalize(model)


def test_templates_differ_in_exactly_one_number(holed_cube):
    a = canonicalize(holed_cube)
    b = edit.set_param(a, "ops[1].profile.loops[0].curves[0].radius", 0.35)
    ta = datagen.template_quantitative(a).split("\n")
    tb = datagen.template_quantitative(b).split("\n")
    assert len(ta) == len(tb)
    diff_lines = [(x, y) for x, y in zip(ta, tb) if x != y]
    assert len(diff_lines) == 1
    assert "0.25" in diff_lines[0][0] and "0.35" in diff_lines[0][1]


def test_scripted_client_roundtrip(cube):
    canon = canonicalize(cube)
    client = datagen.ScriptedClient()
    client.register(datagen.scripted_key(canon), "a plain cube")
    assert datagen.request_qualitative(canon, client) == "a plain cube"
    with pytest.raises(MalformedResponse):
        datagen.request_qualitative(canonicalize(holed_cube_model()), client)


def test_http_client_unconfigured(monkeypatch):
    monkeypatch.delenv("CADSEQ_MODEL_ENDPOINT", raising=False)
    client = datagen.HttpCompletionClient()
    from cadseq.errors import ClientUnavailable

    with pytest.raises(ClientUnavailable):
        client.complete(datagen.CompletionRequest("generation", {}))


def test_corpus_records_apply_cleanly():
    models = corpus_models(12)
    records, stats = datagen.build_editing_corpus(models, seed=3)
    assert records
    for record in records:
        assert record.task is datagen.Task.EDITING
        assert edit.apply(record.current, record.script) == record.target
    counted = sum(stats.counts.values())
    assert counted == len(records)


def test_corpus_respects_requested_mix():
    models = corpus_models(25, seed=1)
    records, stats = datagen.build_editing_corpus(models, mix=(0.4, 0.3, 0.3), seed=9)
    realized = stats.realized_mix
    assert abs(realized["addition"] - 0.4) <= 0.02
    assert abs(realized["deletion"] - 0.3) <= 0.02
    assert abs(realized["modification"] - 0.3) <= 0.02


def test_corpus_deterministic():
    models = corpus_models(8, seed=2)
    a, _ = datagen.build_editing_corpus(models, seed=5)
    b, _ = datagen.build_editing_corpus(models, seed=5)
    assert a == b


def test_corpus_with_scripted_client_adds_qualitative():
    models = corpus_models(4, seed=3)
    quant_only, _ = datagen.build_editing_corpus(models, seed=7)
    client = datagen.ScriptedClient()
    for record in quant_only:
        client.register(
            datagen.scripted_key(record.target, record.current), "tweak it"
        )
    both, _ = datagen.build_editing_corpus(models, client=client, seed=7)
    qual = [r for r in both if r.modality is datagen.Modality.QUALITATIVE]
    assert len(both) == 2 * len(quant_only)
    assert all(r.text == "tweak it" for r in qual)


def test_corpus_io_roundtrip(tmp_path):
    models = corpus_models(6, seed=4)
    records, _ = datagen.build_editing_corpus(models, seed=11)
    path = tmp_path / "corpus.jsonl"
    datagen.write_corpus(records, str(path), ReprKind.DSL)
    loaded = datagen.read_corpus(str(path))
    assert len(loaded) == len(records)
    for a, b in zip(records, loaded):
        assert a.target == b.target
        assert a.current == b.current
        assert a.script == b.script
        assert a.text == b.text


def test_generation_records(cube):
    records = datagen.build_generation_records([cube])
    assert len(records) == 1
    assert records[0].task is datagen.Task.GENERATION
    assert records[0].current is None
    assert datagen.parse_quantitative_template(records[0].text) == canonicalize(cube)


def test_golden_scot_traces_validate():
    models = corpus_models(6, seed=5)
    records, _ = datagen.build_editing_corpus(models, seed=13)
    for record in records[:10]:
        trace_text = datagen.build_scot_trace(record)
        trace, violations = datagen.validate_scot(trace_text, record.current)
        assert trace is not None, violations
        assert trace.script == record.script


def test_scot_missing_section_named(cube):
    text = (
        "<intent_understanding>x</intent_understanding>"
        "<modeling_analysis></modeling_analysis>"
        "<position_identification>edited_ops_a\nedited_ops_b\n</position_identification>"
    )
    trace, violations = datagen.validate_scot(text, cube)
    assert trace is None
    assert any("parameter_computation" in v for v in violations)


def test_scot_unbalanced_markers(cube):
    text = (
        "<intent_understanding>x</intent_understanding>"
        "<modeling_analysis><sketch><loop></loop></modeling_analysis>"
        "<parameter_computation>y</parameter_computation>"
        "<position_identification>edited_ops_a\nedited_ops_b\n</position_identification>"
    )
    trace, violations = datagen.validate_scot(text, cube)
    assert trace is None
    assert any("sketch" in v for v in violations)


def test_scot_index_out_of_range(cube):
    text = (
        "<intent_understanding>x</intent_understanding>"
        "<modeling_analysis></modeling_analysis>"
        "<parameter_computation>y</parameter_computation>"
        "<position_identification>delete_op 2\nedited_ops_a 2\nedited_ops_b\n"
        "</position_identification>"
    )
    trace, violations = datagen.validate_scot(text, cube)
    assert trace is None
    assert any("out of range" in v for v in violations)


def test_scot_never_raises_on_garbage(cube):
    trace, violations = datagen.validate_scot("", cube)
    assert trace is None and violations
    trace, violations = datagen.validate_scot("<<<>>>" * 10, cube)
    assert trace is None and violations


def test_nine_views_axis_and_corner(cube):
    spec_views = datagen.nine_views(cube)
    assert len(spec_views.poses) == 9
    center = np.array([0.5, 0.5, 0.5])
    diag = np.sqrt(3.0)
    for pose in spec_views.poses:
        assert np.allclose(pose.look_at, center)
        eye = np.array(pose.eye)
        assert np.linalg.norm(eye - center) == pytest.approx(2.5 * diag, rel=1e-12)
        # eye strictly outside the bbox
        assert not ((eye >= 0) & (eye <= 1)).all()
    axis_count = sum(
        1
        for pose in spec_views.poses
        if (np.abs(np.array(pose.eye) - center) > 1e-9).sum() == 1
    )
    assert axis_count == 6


def test_nine_views_translate_with_model(cube):
    from cadseq.model import CoordinateFrame, SketchExtrude

    moved_ops = []
    for op in cube.ops:
        frame = CoordinateFrame(
            origin=(op.frame.origin[0] + 2.0, op.frame.origin[1] - 1.0,
                    op.frame.origin[2] + 0.5),
            axis_x=op.frame.axis_x,
            axis_y=op.frame.axis_y,
            axis_z=op.frame.axis_z,
        )
        moved_ops.append(
            SketchExtrude(frame=frame, profile=op.profile,
                          extrude_toward=op.extrude_toward,
                          extrude_opposite=op.extrude_opposite,
                          scale=op.scale, boolean=op.boolean)
        )
    moved = CadModel(ops=tuple(moved_ops))
    base_views = datagen.nine_views(cube)
    moved_views = datagen.nine_views(moved)
    shift = np.array([2.0, -1.0, 0.5])
    for a, b in zip(base_views.poses, moved_views.poses):
        assert np.allclose(np.array(b.eye) - np.array(a.eye), shift, atol=1e-12)


def test_nine_views_degenerate():
    with pytest.raises(Exception):
        datagen.nine_views(CadModel())


def test_random_models_are_valid(rng):
    for i in range(30):
        model = datagen.random_model(np.random.default_rng(i), rotated_frames=True)
        assert validate(model).ok


@pytest.mark.skipif(
    "CADSEQ_LIVE_CLIENT_TEST" not in __import__("os").environ,
    reason="live endpoint smoke test; opt in with CADSEQ_LIVE_CLIENT_TEST=1",
)
def test_live_endpoint_smoke(cube):
    client = datagen.HttpCompletionClient()
    text = datagen.request_qualitative(canonicalize(cube), client)
    assert text.strip()
