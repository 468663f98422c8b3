import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cadseq.errors import OutOfRange
from cadseq.model import CadModel, Circle, Loop, Profile, SketchExtrude, WORLD_FRAME
from cadseq.quantize import QuantizationGrid, dequantize, quantize

from conftest import square_loop


def test_zero_on_symmetric_grid_is_exact():
    grid = QuantizationGrid(lo=-1.0, hi=1.0, bits=8)
    # 255 levels over [-1, 1]: 0 is not a level; snapped value is the nearest.
    snapped = grid.snap(0.0)
    assert abs(snapped - 0.0) <= grid.step / 2
    # A grid whose levels include zero preserves it exactly: 0 = -0.4 + 102/255.
    grid_hit = QuantizationGrid(lo=-0.4, hi=0.6, bits=8)
    assert grid_hit.snap(0.0) == 0.0


def test_half_on_unit_grid_hits_index_128():
    grid = QuantizationGrid(lo=0.0, hi=1.0, bits=8)
    assert grid.index_of(0.5) == 128
    assert grid.value_of(128) == 128 / 255


def test_out_of_range_rejected(cube):
    grid = QuantizationGrid(lo=0.0, hi=0.5, bits=8)
    with pytest.raises(OutOfRange):
        quantize(cube, grid)


@given(value=st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
@settings(max_examples=300, deadline=None)
def test_roundtrip_error_within_half_step(value):
    grid = QuantizationGrid(lo=0.0, hi=1.0, bits=8)
    assert abs(grid.snap(value) - value) <= grid.step / 2 + 1e-15


@given(bits=st.integers(min_value=2, max_value=16),
       value=st.floats(min_value=-2.0, max_value=3.0, allow_nan=False))
@settings(max_examples=300, deadline=None)
def test_roundtrip_error_any_bits(bits, value):
    grid = QuantizationGrid(lo=-2.0, hi=3.0, bits=bits)
    assert abs(grid.snap(value) - value) <= grid.step / 2 + 1e-12


def test_model_quantization_snaps_and_stays_valid(cube):
    grid = QuantizationGrid(lo=0.0, hi=1.0, bits=8)
    snapped = quantize(cube, grid)
    assert dequantize(snapped, grid) == snapped
    again = quantize(snapped, grid)
    assert again == snapped  # idempotent: values already on grid levels


def test_equal_world_radii_diverge_under_different_scales():
    """Two through-holes with the same world radius, one sketched at scale 1
    (radius 0.2, an exact grid level) and one at scale 2 (sketch radius 0.1,
    exactly midway between levels 25 and 26): after snapping, the world
    radii differ."""
    plate = square_loop(0.8, origin=(0.0, 0.0))
    hole_a = SketchExtrude(
        frame=WORLD_FRAME,
        profile=Profile((Loop((Circle((0.2, 0.2), 0.2),)),)),
        extrude_toward=0.4,
        boolean="cut",
        scale=1.0,
    )
    hole_b = SketchExtrude(
        frame=WORLD_FRAME,
        profile=Profile((Loop((Circle((0.3, 0.3), 0.1),)),)),
        extrude_toward=0.2,
        boolean="cut",
        scale=2.0,
    )
    base = SketchExtrude(frame=WORLD_FRAME, profile=Profile((plate,)), extrude_toward=0.4)
    model = CadModel(ops=(base, hole_a, hole_b))
    grid = QuantizationGrid(lo=0.0, hi=1.0, bits=8)
    world_a = model.ops[1].profile.loops[0].curves[0].radius * model.ops[1].scale
    world_b = model.ops[2].profile.loops[0].curves[0].radius * model.ops[2].scale
    assert world_a == pytest.approx(world_b, abs=1e-15)
    snapped = quantize(model, grid)
    q_a = snapped.ops[1].profile.loops[0].curves[0].radius * snapped.ops[1].scale
    q_b = snapped.ops[2].profile.loops[0].curves[0].radius * snapped.ops[2].scale
    assert q_a != q_b
    assert q_a == pytest.approx(0.2, abs=1e-15)  # level 51/255 preserved exactly
