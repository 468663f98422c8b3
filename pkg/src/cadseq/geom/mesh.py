"""Triangle mesh extraction for viewers and file export.

Each op contributes cap triangulations (ear clipping, holes bridged into the
outer ring) and wall quads; triangles are then trimmed against the final CSG
solid by a membership flip test at their centroids and oriented outward.
Arcs and circles are polygonized so the chord error stays within the given
tolerance.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .. import sketch2d
from ..errors import EmptyGeometry
from .program import SolidProgram, bbox, contains

MIN_TRIANGLE_AREA = 1e-12


@dataclass
class TriMesh:
    vertices: np.ndarray  # (v, 3)
    triangles: np.ndarray  # (t, 3) int indices
    triangle_op: np.ndarray  # (t,) source op per triangle

    def __len__(self) -> int:
        return len(self.triangles)

    def areas(self) -> np.ndarray:
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def to_payload(self) -> dict:
        """Compact JSON-ready mesh payload."""
        return {
            "vertices": [round(float(v), 9) for v in self.vertices.ravel()],
            "triangles": [int(i) for i in self.triangles.ravel()],
            "triangle_op": [int(i) for i in self.triangle_op],
        }

    def to_stl_bytes(self, name: bytes = b"cadseq") -> bytes:
        header = name[:80].ljust(80, b"\0")
        out = [header, struct.pack("<I", len(self.triangles))]
        for tri in self.triangles:
            a, b, c = (self.vertices[i] for i in tri)
            n = np.cross(b - a, c - a)
            norm = np.linalg.norm(n)
            n = n / norm if norm > 0 else n
            out.append(struct.pack("<3f", *n))
            for p in (a, b, c):
                out.append(struct.pack("<3f", *p))
            out.append(struct.pack("<H", 0))
        return b"".join(out)


def _ring_area(ring: np.ndarray) -> float:
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _ensure_orientation(ring: np.ndarray, ccw: bool) -> np.ndarray:
    area = _ring_area(ring)
    if (area > 0) != ccw:
        return ring[::-1].copy()
    return ring


def _bridge_hole(outer: list[np.ndarray], hole: np.ndarray) -> list[np.ndarray]:
    """Splice a hole ring into the outer ring via a mutually-visible bridge.

    Standard keyhole construction: take the hole's rightmost vertex, shoot a
    ray in +x, find the nearest outer edge it hits, bridge to that edge's
    rightmost endpoint.
    """
    h_idx = max(range(len(hole)), key=lambda k: (hole[k][0], hole[k][1]))
    hx, hy = hole[h_idx]
    best_t = math.inf
    best_edge = -1
    n = len(outer)
    for i in range(n):
        x1, y1 = outer[i]
        x2, y2 = outer[(i + 1) % n]
        if (y1 > hy) == (y2 > hy):
            continue
        xi = x1 + (hy - y1) * (x2 - x1) / (y2 - y1)
        if xi >= hx and xi - hx < best_t:
            best_t = xi - hx
            best_edge = i
    if best_edge < 0:
        # Hole not actually inside; drop it rather than corrupt the ring.
        return outer
    x1 = outer[best_edge]
    x2 = outer[(best_edge + 1) % n]
    o_idx = best_edge if x1[0] >= x2[0] else (best_edge + 1) % n
    rotated = [hole[(h_idx + k) % len(hole)] for k in range(len(hole))]
    merged = (
        outer[: o_idx + 1]
        + rotated
        + [hole[h_idx].copy(), outer[o_idx].copy()]
        + outer[o_idx + 1 :]
    )
    return merged


def _point_in_triangle(p, a, b, c) -> bool:
    d1 = (p[0] - b[0]) * (a[1] - b[1]) - (a[0] - b[0]) * (p[1] - b[1])
    d2 = (p[0] - c[0]) * (b[1] - c[1]) - (b[0] - c[0]) * (p[1] - c[1])
    d3 = (p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])
    has_neg = (d1 < 0) or (d2 < 0) or (d3 < 0)
    has_pos = (d1 > 0) or (d2 > 0) or (d3 > 0)
    return not (has_neg and has_pos)


def _ear_clip(ring: list[np.ndarray]) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Triangulate a simple CCW polygon by ear clipping (O(n^2))."""
    pts = [np.asarray(p, dtype=float) for p in ring]
    n = len(pts)
    if n < 3:
        return []
    idx = list(range(n))
    tris = []
    guard = 0
    while len(idx) > 3 and guard < 4 * n * n:
        guard += 1
        clipped = False
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            a, b, c = pts[i0], pts[i1], pts[i2]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= 1e-15 * (abs(b[0] - a[0]) + abs(c[1] - a[1]) + 1e-30):
                continue
            ok = True
            for other in idx:
                if other in (i0, i1, i2):
                    continue
                p = pts[other]
                if (p == a).all() or (p == b).all() or (p == c).all():
                    continue
                if _point_in_triangle(p, a, b, c):
                    ok = False
                    break
            if ok:
                tris.append((a, b, c))
                idx.pop(k)
                clipped = True
                break
        if not clipped:
            # Degenerate remainder: fall back to a fan to stay total.
            break
    if len(idx) >= 3:
        for k in range(1, len(idx) - 1):
            tris.append((pts[idx[0]], pts[idx[k]], pts[idx[k + 1]]))
    return tris


def _triangulate_profile(loops, tol: float):
    """Triangulate a profile (outer + holes) in sketch coordinates."""
    outer = _ensure_orientation(sketch2d.polygonize_loop(loops[0], tol), ccw=True)
    ring = [p for p in outer]
    for hole in loops[1:]:
        hole_ring = _ensure_orientation(sketch2d.polygonize_loop(hole, tol), ccw=False)
        ring = _bridge_hole(ring, hole_ring)
    return _ear_clip(ring), ring


def _subdivide_2d(tris, max_edge: float):
    """Midpoint-split 2D triangles until no edge exceeds max_edge.

    Needed when later ops cut through an op's face: centroid classification
    can only resolve features at the triangle scale.
    """
    out = []
    stack = list(tris)
    while stack:
        a, b, c = stack.pop()
        ab = math.hypot(b[0] - a[0], b[1] - a[1])
        bc = math.hypot(c[0] - b[0], c[1] - b[1])
        ca = math.hypot(a[0] - c[0], a[1] - c[1])
        longest = max(ab, bc, ca)
        if longest <= max_edge or longest < 1e-12:
            out.append((a, b, c))
            continue
        if ab == longest:
            m = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
            stack.append((a, m, c))
            stack.append((m, b, c))
        elif bc == longest:
            m = ((b[0] + c[0]) / 2, (b[1] + c[1]) / 2)
            stack.append((a, b, m))
            stack.append((a, m, c))
        else:
            m = ((c[0] + a[0]) / 2, (c[1] + a[1]) / 2)
            stack.append((a, b, m))
            stack.append((m, b, c))
    return out


def _split_spans(length: float, max_piece: float) -> int:
    if max_piece <= 0.0 or length <= max_piece:
        return 1
    return int(math.ceil(length / max_piece))


def tessellate(program: SolidProgram, tol: float = 0.01) -> TriMesh:
    """Extract a triangle mesh of the folded solid's boundary.

    tol is the chord tolerance for arc/circle polygonization, in sketch
    units. Triangles are kept when the membership flip test holds at their
    centroid and wound so normals point out of the solid.
    """
    if not program.ops:
        raise EmptyGeometry("model has no ops")
    lo, hi = bbox(program)
    diag = float(np.linalg.norm(hi - lo))
    if diag <= 0.0:
        raise EmptyGeometry("degenerate bounding box")
    max_scale = max(op.scale for op in program.ops)
    # The flip offset must dominate the polygonization chord error or every
    # curved-wall triangle would classify as interior.
    eps = max(1e-4 * diag, 2.5 * tol * max_scale)
    # Single-op solids keep exact coarse faces; with several ops a later op
    # can cut anywhere, so faces are refined before centroid classification.
    max_edge_world = diag / 12.0 if len(program.ops) > 1 else 0.0

    verts: list[np.ndarray] = []
    tris: list[tuple[int, int, int]] = []
    tri_op: list[int] = []

    def emit(op_idx: int, a, b, c):
        base = len(verts)
        verts.extend([a, b, c])
        tris.append((base, base + 1, base + 2))
        tri_op.append(op_idx)

    for i, op in enumerate(program.ops):
        cap_tris, _ = _triangulate_profile(op.source_loops, tol)
        s = op.scale
        if max_edge_world > 0.0:
            cap_tris = _subdivide_2d(cap_tris, max_edge_world / s)

        def lift(p2, z):
            return op.to_world(np.array([[p2[0] * s, p2[1] * s, z]]))[0]

        for a, b, c in cap_tris:
            emit(i, lift(a, op.z_hi), lift(b, op.z_hi), lift(c, op.z_hi))
            emit(i, lift(a, op.z_lo), lift(c, op.z_lo), lift(b, op.z_lo))
        # Walls from the original loop polylines (not the bridged ring).
        height = op.z_hi - op.z_lo
        bands = _split_spans(height, max_edge_world)
        z_cuts = [op.z_lo + height * k / bands for k in range(bands + 1)]
        for loop in op.source_loops:
            ring = sketch2d.polygonize_loop(loop, tol)
            m = len(ring)
            for k in range(m):
                p1, p2 = ring[k], ring[(k + 1) % m]
                seg_len = math.hypot(p2[0] - p1[0], p2[1] - p1[1]) * s
                pieces = _split_spans(seg_len, max_edge_world)
                for u in range(pieces):
                    q1 = (
                        p1[0] + (p2[0] - p1[0]) * u / pieces,
                        p1[1] + (p2[1] - p1[1]) * u / pieces,
                    )
                    q2 = (
                        p1[0] + (p2[0] - p1[0]) * (u + 1) / pieces,
                        p1[1] + (p2[1] - p1[1]) * (u + 1) / pieces,
                    )
                    for z0, z1 in zip(z_cuts[:-1], z_cuts[1:]):
                        a = lift(q1, z0)
                        b = lift(q2, z0)
                        c = lift(q2, z1)
                        d = lift(q1, z1)
                        emit(i, a, b, c)
                        emit(i, a, c, d)

    vertices = np.asarray(verts)
    triangles = np.asarray(tris, dtype=np.int64)
    triangle_op = np.asarray(tri_op, dtype=np.int64)

    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    normal = np.cross(b - a, c - a)
    norm = np.linalg.norm(normal, axis=1)
    ok = norm > MIN_TRIANGLE_AREA
    normal[ok] = normal[ok] / norm[ok, None]
    centroid = (a + b + c) / 3.0
    plus = contains(program, centroid + eps * normal)
    minus = contains(program, centroid - eps * normal)
    keep = ok & (plus != minus)
    if not keep.any():
        raise EmptyGeometry("no boundary triangles survive the CSG trim")

    triangles = triangles[keep]
    triangle_op = triangle_op[keep]
    flip = plus[keep]
    flipped = triangles.copy()
    flipped[:, [1, 2]] = flipped[:, [2, 1]]
    triangles = np.where(flip[:, None], flipped, triangles)

    used = np.unique(triangles)
    remap = np.zeros(len(vertices), dtype=np.int64)
    remap[used] = np.arange(len(used))
    return TriMesh(
        vertices=vertices[used],
        triangles=remap[triangles],
        triangle_op=triangle_op,
    )
