import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cadseq import reward
from cadseq.errors import InvalidTarget
from cadseq.formats import ReprKind, print_model
from cadseq.model import CadModel, Profile, SketchExtrude, WORLD_FRAME, canonicalize, primitive_count
from cadseq.reward import LengthUnit, RewardConfig, RewardItem, compose_breakdown

from conftest import square_loop, unit_cube_model


CFG = RewardConfig(kind=ReprKind.DSL, n_points=256)


def dead_model():
    base = unit_cube_model().ops[0]
    cutter = SketchExtrude(
        frame=WORLD_FRAME,
        profile=Profile((square_loop(3.0, origin=(-1.0, -1.0)),)),
        extrude_toward=3.0,
        extrude_opposite=1.0,
        boolean="cut",
    )
    return CadModel(ops=(base, cutter))


def test_exact_match_gives_full_chamfer_reward(cube):
    text = print_model(cube, ReprKind.DSL)
    breakdown = reward.score(text, cube, cfg=CFG)
    assert breakdown.r_chamfer == 1.0
    assert breakdown.d_cd == 0.0
    L = primitive_count(canonicalize(cube))
    assert breakdown.total == 1.0 + 0.0 + 0.0 + (-CFG.beta * L)


def test_exponential_decay_matches_high_precision_oracle():
    mpmath.mp.dps = 60
    for d_cd in (0.0, 0.05, 0.2, 1.0, 3.7):
        breakdown = compose_breakdown(d_cd, 0.0, True, True, CFG)
        oracle = float(mpmath.e ** (mpmath.mpf(-5.0) * mpmath.mpf(d_cd)))
        assert breakdown.r_chamfer == pytest.approx(oracle, abs=1e-12)
    # alpha = 5, d = 0.2 -> e^-1
    assert compose_breakdown(0.2, 0.0, True, True, CFG).r_chamfer == pytest.approx(
        math.exp(-1.0), abs=1e-15
    )


def test_unparsable_penalties(cube):
    cfg = RewardConfig(kind=ReprKind.DSL, length_unit=LengthUnit.CHARACTER_COUNT,
                       n_points=256)
    text = "x" * 100
    breakdown = reward.score(text, cube, cfg=cfg)
    assert breakdown.r_format == -0.2
    assert breakdown.r_exec == 0.0
    assert breakdown.r_chamfer == 0.0
    assert breakdown.r_length == -1.0
    assert breakdown.total == pytest.approx(-1.2, abs=1e-15)


def test_inexecutable_penalty(cube):
    text = print_model(dead_model(), ReprKind.DSL)
    breakdown = reward.score(text, cube, cfg=CFG)
    assert breakdown.r_format == 0.0
    assert breakdown.r_exec == -0.1
    assert breakdown.r_chamfer == 0.0
    assert breakdown.d_cd is None


def test_invalid_target_raises(cube):
    bad_target = CadModel(
        ops=(
            SketchExtrude(
                frame=WORLD_FRAME,
                profile=Profile((square_loop(),)),
                extrude_toward=-2.0,
            ),
        )
    )
    with pytest.raises(InvalidTarget):
        reward.score("anything", bad_target, cfg=CFG)


def test_editing_reward_uses_localized_cd(cube):
    target = canonicalize(cube)
    current = CadModel(ops=())
    text = print_model(target, ReprKind.DSL)
    breakdown = reward.score(text, target, current=current, cfg=CFG)
    assert breakdown.r_chamfer == 1.0  # exact result, localized over the insert


@given(
    d1=st.floats(min_value=0.0, max_value=5.0, allow_nan=False),
    d2=st.floats(min_value=0.0, max_value=5.0, allow_nan=False),
)
@settings(max_examples=200, deadline=None)
def test_chamfer_reward_strictly_monotone(d1, d2):
    # Strict in the reals; in floats strictness needs the separation to
    # exceed one ulp of exp (~2^-52 relative, i.e. delta ~4.4e-17 at alpha 5).
    r1 = compose_breakdown(d1, 0.0, True, True, CFG).r_chamfer
    r2 = compose_breakdown(d2, 0.0, True, True, CFG).r_chamfer
    if d1 == d2:
        assert r1 == r2
    elif d1 < d2:
        assert r1 >= r2
        if d2 - d1 > 1e-12:
            assert r1 > r2


@given(
    d_cd=st.one_of(st.none(), st.floats(min_value=0.0, max_value=10.0, allow_nan=False)),
    length=st.floats(min_value=0.0, max_value=1000.0, allow_nan=False),
    format_ok=st.booleans(),
    exec_ok=st.booleans(),
)
@settings(max_examples=500, deadline=None)
def test_additivity_bit_exact_and_bounds(d_cd, length, format_ok, exec_ok):
    breakdown = compose_breakdown(d_cd, length, format_ok, exec_ok, CFG)
    assert breakdown.total == (
        breakdown.r_chamfer + breakdown.r_format + breakdown.r_exec + breakdown.r_length
    )
    assert -0.3 - CFG.beta * length < breakdown.total <= 1.0
    assert breakdown.r_chamfer >= 0.0
    assert breakdown.r_format in (0.0, -0.2)
    assert breakdown.r_exec in (0.0, -0.1)


@given(
    d_cd=st.floats(min_value=0.0, max_value=50.0, allow_nan=False),
    length=st.floats(min_value=0.0, max_value=1000.0, allow_nan=False),
)
@settings(max_examples=300, deadline=None)
def test_executable_beats_unparsable_at_equal_length(d_cd, length):
    executable = compose_breakdown(d_cd, length, True, True, CFG)
    unparsable = compose_breakdown(None, length, False, False, CFG)
    assert executable.total > unparsable.total


def test_batch_matches_sequential(cube):
    text = print_model(cube, ReprKind.DSL)
    items = [
        RewardItem(generated=text, target=cube),
        RewardItem(generated="broken", target=cube),
        RewardItem(generated=text, target=cube, episode_id="ep-7"),
    ]
    batch = reward.score_batch(items, CFG)
    sequential = [
        reward.score(i.generated, i.target, current=i.current, script=i.script,
                     cfg=CFG, episode_id=i.episode_id)
        for i in items
    ]
    assert batch == sequential


def test_batch_of_one_equals_score(cube):
    text = print_model(cube, ReprKind.DSL)
    assert reward.score_batch([RewardItem(generated=text, target=cube)], CFG) == [
        reward.score(text, cube, cfg=CFG)
    ]


def test_batch_permutation(cube):
    text = print_model(cube, ReprKind.DSL)
    items = [
        RewardItem(generated=text, target=cube, episode_id=str(i)) for i in range(4)
    ] + [RewardItem(generated="junk", target=cube, episode_id="x")]
    forward = reward.score_batch(items, CFG)
    backward = reward.score_batch(items[::-1], CFG)
    assert forward == backward[::-1]


def test_batch_invalid_target_recorded_inline(cube):
    bad_target = CadModel(
        ops=(
            SketchExtrude(
                frame=WORLD_FRAME,
                profile=Profile((square_loop(),)),
                extrude_toward=-2.0,
            ),
        )
    )
    text = print_model(cube, ReprKind.DSL)
    results = reward.score_batch(
        [RewardItem(generated=text, target=bad_target),
         RewardItem(generated=text, target=cube)],
        CFG,
    )
    assert results[0].error is not None and "invalid target" in results[0].error
    assert results[1].r_chamfer == 1.0


def test_length_unit_switch(cube):
    text = print_model(cube, ReprKind.DSL)
    chars = reward.score(
        text, cube, cfg=RewardConfig(kind=ReprKind.DSL, n_points=256,
                                     length_unit="characters")
    )
    assert chars.r_length == -0.01 * len(text)
    prims = reward.score(text, cube, cfg=CFG)
    assert prims.r_length == -0.01 * primitive_count(canonicalize(cube))
