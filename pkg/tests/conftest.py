import numpy as np
import pytest

from cadseq.model import (
    CadModel,
    Circle,
    Line,
    Loop,
    Profile,
    SketchExtrude,
    WORLD_FRAME,
)


def square_loop(size=1.0, origin=(0.0, 0.0)):
    x0, y0 = origin
    x1, y1 = x0 + size, y0 + size
    return Loop(
        (
            Line((x0, y0), (x1, y0)),
            Line((x1, y0), (x1, y1)),
            Line((x1, y1), (x0, y1)),
            Line((x0, y1), (x0, y0)),
        )
    )


def unit_cube_model():
    return CadModel(
        ops=(
            SketchExtrude(
                frame=WORLD_FRAME,
                profile=Profile((square_loop(),)),
                extrude_toward=1.0,
            ),
        )
    )


def holed_cube_model(radius=0.25):
    return CadModel(
        ops=(
            SketchExtrude(
                frame=WORLD_FRAME,
                profile=Profile((square_loop(),)),
                extrude_toward=1.0,
            ),
            SketchExtrude(
                frame=WORLD_FRAME,
                profile=Profile((Loop((Circle((0.5, 0.5), radius),)),)),
                extrude_toward=1.0,
                boolean="cut",
            ),
        )
    )


@pytest.fixture
def cube():
    return unit_cube_model()


@pytest.fixture
def holed_cube():
    return holed_cube_model()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
