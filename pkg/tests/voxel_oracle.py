"""Independent voxel rasterization oracle for CSG membership tests.

Shares no 2D-containment code with the production path: profiles are finely
polygonized (arcs flattened) and tested with matplotlib's point-in-polygon,
then folded over the boolean sequence with plain numpy grid set operations.
"""

from __future__ import annotations

import numpy as np
from matplotlib.path import Path

from cadseq import geom, sketch2d
from cadseq.model import BooleanKind


def _ring_path(ring: np.ndarray) -> Path:
    # closed=True consumes the final vertex as the CLOSEPOLY placeholder, so
    # the first vertex must be repeated explicitly.
    return Path(np.vstack([ring, ring[:1]]), closed=True)


def _profile_mask(op, xy: np.ndarray) -> np.ndarray:
    """Points (sketch coords) inside outer loop and outside every hole."""
    rings = [sketch2d.polygonize_loop(loop, 1e-4) for loop in op.source_loops]
    inside = _ring_path(rings[0]).contains_points(xy)
    for ring in rings[1:]:
        inside &= ~_ring_path(ring).contains_points(xy)
    return inside


def voxel_grids(model, resolution: int = 64, pad: float = 0.02):
    """(ours, oracle, boundary_band) flat boolean arrays at voxel centers."""
    program = geom.compile_model(model)
    lo, hi = geom.bbox(program)
    span = hi - lo
    lo = lo - pad * span
    hi = hi + pad * span
    axes = [
        lo[d] + (np.arange(resolution) + 0.5) / resolution * (hi[d] - lo[d])
        for d in range(3)
    ]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)

    ours = geom.contains(program, grid)

    state = np.zeros(len(grid), dtype=bool)
    for op in program.ops:
        local = (grid - op.origin) @ op.rotation
        zmask = (local[:, 2] >= op.z_lo) & (local[:, 2] <= op.z_hi)
        xy = local[:, :2] / op.scale
        v = zmask & _profile_mask(op, xy)
        if op.boolean is BooleanKind.NEW:
            state = v
        elif op.boolean is BooleanKind.JOIN:
            state = state | v
        elif op.boolean is BooleanKind.CUT:
            state = state & ~v
        else:
            state = state & v
    oracle = state

    cube = oracle.reshape(resolution, resolution, resolution)
    boundary = np.zeros_like(cube)
    for axis in range(3):
        for shift in (1, -1):
            rolled = np.roll(cube, shift, axis=axis)
            edge = np.zeros_like(cube)
            idx = [slice(None)] * 3
            idx[axis] = 0 if shift == 1 else -1
            edge[tuple(idx)] = True
            boundary |= (cube != rolled) & ~edge
    # "Within one voxel": dilate the boundary band once.
    dilated = boundary.copy()
    for axis in range(3):
        for shift in (1, -1):
            dilated |= np.roll(boundary, shift, axis=axis)
    return ours, oracle, dilated.reshape(-1)
