"""2D curve math for sketch profiles: arcs, areas, containment, polygonization.

Curves live in sketch coordinates. Arcs are stored as (start, end, sweep
angle, direction); center and radius are derived here. Containment uses an
even-odd crossing count with arcs intersected analytically (arcs are split
into y-monotone pieces so each piece crosses a horizontal ray at most once,
which keeps the parity rule consistent at shared endpoints).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def arc_center_radius(start, end, sweep_angle: float, ccw: bool):
    """Derive (center, radius) of an arc from its endpoints and sweep.

    The chord subtends the sweep angle at the center, so
    radius = chord / (2 sin(sweep/2)); the center sits on the chord's
    perpendicular bisector, on the side determined by the direction flag
    (and flips through the chord when sweep exceeds pi).
    """
    sx, sy = start
    ex, ey = end
    dx, dy = ex - sx, ey - sy
    chord = math.hypot(dx, dy)
    half = 0.5 * sweep_angle
    radius = chord / (2.0 * math.sin(half))
    # Perpendicular of the chord direction, rotated +90 degrees.
    ux, uy = dx / chord, dy / chord
    nx, ny = -uy, ux
    h = radius * math.cos(half)
    sign = 1.0 if ccw else -1.0
    mx, my = 0.5 * (sx + ex), 0.5 * (sy + ey)
    return (mx + sign * h * nx, my + sign * h * ny), radius


def arc_angles(start, end, sweep_angle: float, ccw: bool):
    """Return (center, radius, start_angle, signed_sweep)."""
    center, radius = arc_center_radius(start, end, sweep_angle, ccw)
    a0 = math.atan2(start[1] - center[1], start[0] - center[0])
    delta = sweep_angle if ccw else -sweep_angle
    return center, radius, a0, delta


def arc_point(center, radius: float, a0: float, delta: float, t: float):
    a = a0 + delta * t
    return (center[0] + radius * math.cos(a), center[1] + radius * math.sin(a))


def _monotone_breaks(a0: float, delta: float):
    """Angles splitting [a0, a0+delta] at extrema of sin (cos == 0)."""
    lo, hi = (a0, a0 + delta) if delta > 0 else (a0 + delta, a0)
    k = math.ceil((lo - math.pi / 2.0) / math.pi)
    breaks = []
    while True:
        a = math.pi / 2.0 + k * math.pi
        if a >= hi - 1e-15:
            break
        if a > lo + 1e-15:
            breaks.append(a)
        k += 1
    if delta < 0:
        breaks.reverse()
    return breaks


def arc_monotone_pieces(start, end, sweep_angle: float, ccw: bool):
    """Split an arc into y-monotone pieces.

    Returns (center, radius, [(a_begin, a_end), ...]) with angles ordered
    along the direction of travel.
    """
    center, radius, a0, delta = arc_angles(start, end, sweep_angle, ccw)
    angles = [a0] + _monotone_breaks(a0, delta) + [a0 + delta]
    pieces = [(angles[i], angles[i + 1]) for i in range(len(angles) - 1)]
    return center, radius, pieces


@dataclass
class CompiledLoop:
    """Loop flattened into crossing-test primitives.

    Either a full circle (is_circle) or a chain of segments plus y-monotone
    arc pieces. Arrays are laid out for vectorized point queries.
    """

    is_circle: bool
    # Circle form.
    cx: float = 0.0
    cy: float = 0.0
    r: float = 0.0
    # Chain form: segments (k, 2, 2) and arc pieces.
    seg_a: np.ndarray | None = None  # (k, 2) segment start points
    seg_b: np.ndarray | None = None  # (k, 2) segment end points
    arc_c: np.ndarray | None = None  # (m, 2) piece centers
    arc_r: np.ndarray | None = None  # (m,)
    arc_ya: np.ndarray | None = None  # (m,) y at piece begin
    arc_yb: np.ndarray | None = None  # (m,) y at piece end
    arc_xsign: np.ndarray | None = None  # (m,) sign of cos on the piece


def compile_loop(loop) -> CompiledLoop:
    """Flatten a model Loop (from cadseq.model) for containment queries."""
    curves = loop.curves
    if len(curves) == 1 and type(curves[0]).__name__ == "Circle":
        c = curves[0]
        return CompiledLoop(is_circle=True, cx=c.center[0], cy=c.center[1], r=c.radius)
    seg_a, seg_b = [], []
    arc_c, arc_r, arc_ya, arc_yb, arc_xs = [], [], [], [], []
    for c in curves:
        name = type(c).__name__
        if name == "Line":
            seg_a.append(c.start)
            seg_b.append(c.end)
        elif name == "Arc":
            center, radius, pieces = arc_monotone_pieces(c.start, c.end, c.sweep_angle, c.ccw)
            for a, b in pieces:
                arc_c.append(center)
                arc_r.append(radius)
                arc_ya.append(center[1] + radius * math.sin(a))
                arc_yb.append(center[1] + radius * math.sin(b))
                arc_xs.append(1.0 if math.cos(0.5 * (a + b)) >= 0.0 else -1.0)
        else:
            raise ValueError(f"unexpected curve in chain loop: {name}")
    out = CompiledLoop(is_circle=False)
    if seg_a:
        out.seg_a = np.asarray(seg_a, dtype=float)
        out.seg_b = np.asarray(seg_b, dtype=float)
    if arc_c:
        out.arc_c = np.asarray(arc_c, dtype=float)
        out.arc_r = np.asarray(arc_r, dtype=float)
        out.arc_ya = np.asarray(arc_ya, dtype=float)
        out.arc_yb = np.asarray(arc_yb, dtype=float)
        out.arc_xsign = np.asarray(arc_xs, dtype=float)
    return out


def _loop_crossings(cl: CompiledLoop, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Count crossings of rightward horizontal rays with one loop."""
    count = np.zeros(xs.shape, dtype=np.int64)
    if cl.is_circle:
        dy = ys - cl.cy
        disc = cl.r * cl.r - dy * dy
        hit = disc > 0.0
        root = np.sqrt(np.where(hit, disc, 0.0))
        for sgn in (-1.0, 1.0):
            xr = cl.cx + sgn * root
            count += (hit & (xr > xs)).astype(np.int64)
        return count
    if cl.seg_a is not None:
        for (x1, y1), (x2, y2) in zip(cl.seg_a, cl.seg_b):
            cond = (y1 > ys) != (y2 > ys)
            if not cond.any():
                continue
            xi = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
            count += (cond & (xi > xs)).astype(np.int64)
    if cl.arc_c is not None:
        for (cx, cy), r, ya, yb, xsgn in zip(
            cl.arc_c, cl.arc_r, cl.arc_ya, cl.arc_yb, cl.arc_xsign
        ):
            cond = (ya > ys) != (yb > ys)
            if not cond.any():
                continue
            dy = ys - cy
            disc = np.maximum(r * r - dy * dy, 0.0)
            xi = cx + xsgn * np.sqrt(disc)
            count += (cond & (xi > xs)).astype(np.int64)
    return count


def points_in_loops(loops: list[CompiledLoop], xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Even-odd containment of points against the union of loop boundaries.

    With holes nested inside the outer loop, odd total parity is exactly
    "inside outer and outside every hole".
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    total = np.zeros(xs.shape, dtype=np.int64)
    for cl in loops:
        total += _loop_crossings(cl, xs, ys)
    return (total % 2) == 1


def point_in_loop(loop, x: float, y: float) -> bool:
    """Scalar containment against a single model Loop."""
    cl = compile_loop(loop)
    return bool(points_in_loops([cl], np.array([x]), np.array([y]))[0])


def loop_area(loop) -> float:
    """Signed enclosed area; circles count as positive (CCW) disks."""
    curves = loop.curves
    if len(curves) == 1 and type(curves[0]).__name__ == "Circle":
        c = curves[0]
        return math.pi * c.radius * c.radius
    # Shoelace over the endpoint polygon plus circular-segment bulges.
    area2 = 0.0
    for c in curves:
        sx, sy = c.start
        ex, ey = c.end
        area2 += sx * ey - ex * sy
    area = 0.5 * area2
    for c in curves:
        if type(c).__name__ == "Arc":
            _, radius = arc_center_radius(c.start, c.end, c.sweep_angle, c.ccw)
            seg = 0.5 * radius * radius * (c.sweep_angle - math.sin(c.sweep_angle))
            area += seg if c.ccw else -seg
    return area


def profile_net_area(loops) -> float:
    """Outer loop area minus hole areas (all magnitudes)."""
    area = abs(loop_area(loops[0]))
    for hole in loops[1:]:
        area -= abs(loop_area(hole))
    return max(area, 0.0)


def curve_length(curve) -> float:
    name = type(curve).__name__
    if name == "Line":
        return math.hypot(curve.end[0] - curve.start[0], curve.end[1] - curve.start[1])
    if name == "Arc":
        _, radius = arc_center_radius(curve.start, curve.end, curve.sweep_angle, curve.ccw)
        return radius * curve.sweep_angle
    return TWO_PI * curve.radius


def curve_points_and_normals(curve, ts: np.ndarray):
    """Points and unit normals (perpendicular of travel direction) at
    fractional arclength positions ts in [0, 1). Normal side is arbitrary;
    callers orient it against the solid."""
    name = type(curve).__name__
    ts = np.asarray(ts, dtype=float)
    if name == "Line":
        sx, sy = curve.start
        ex, ey = curve.end
        px = sx + (ex - sx) * ts
        py = sy + (ey - sy) * ts
        length = math.hypot(ex - sx, ey - sy)
        nx = np.full_like(ts, (ey - sy) / length)
        ny = np.full_like(ts, -(ex - sx) / length)
        return px, py, nx, ny
    if name == "Arc":
        center, radius, a0, delta = arc_angles(
            curve.start, curve.end, curve.sweep_angle, curve.ccw
        )
        a = a0 + delta * ts
        px = center[0] + radius * np.cos(a)
        py = center[1] + radius * np.sin(a)
        return px, py, np.cos(a), np.sin(a)
    # Circle
    a = TWO_PI * ts
    px = curve.center[0] + curve.radius * np.cos(a)
    py = curve.center[1] + curve.radius * np.sin(a)
    return px, py, np.cos(a), np.sin(a)


def arc_segment_count(radius: float, sweep: float, tol: float, min_segments: int = 2) -> int:
    """Segments needed so the chord (sagitta) error stays within tol."""
    if tol >= radius:
        return max(min_segments, 1)
    max_step = 2.0 * math.acos(max(1.0 - tol / radius, -1.0))
    if max_step <= 0.0:
        return max(min_segments, 1)
    return max(min_segments, int(math.ceil(sweep / max_step)))


def polygonize_loop(loop, tol: float) -> np.ndarray:
    """Closed ring of vertices (first vertex not repeated) approximating a
    loop, arcs flattened so chord error <= tol."""
    curves = loop.curves
    if len(curves) == 1 and type(curves[0]).__name__ == "Circle":
        c = curves[0]
        n = arc_segment_count(c.radius, TWO_PI, tol, min_segments=8)
        a = TWO_PI * np.arange(n) / n
        return np.column_stack(
            [c.center[0] + c.radius * np.cos(a), c.center[1] + c.radius * np.sin(a)]
        )
    pts: list[tuple[float, float]] = []
    for c in curves:
        if type(c).__name__ == "Line":
            pts.append(tuple(c.start))
        else:
            center, radius, a0, delta = arc_angles(c.start, c.end, c.sweep_angle, c.ccw)
            n = arc_segment_count(radius, c.sweep_angle, tol, min_segments=4)
            for i in range(n):
                a = a0 + delta * (i / n)
                pts.append((center[0] + radius * math.cos(a), center[1] + radius * math.sin(a)))
    return np.asarray(pts, dtype=float)


def loop_bbox(loop) -> tuple[float, float, float, float]:
    """(min_x, min_y, max_x, max_y) over the loop, arcs bounded exactly."""
    curves = loop.curves
    if len(curves) == 1 and type(curves[0]).__name__ == "Circle":
        c = curves[0]
        return (
            c.center[0] - c.radius,
            c.center[1] - c.radius,
            c.center[0] + c.radius,
            c.center[1] + c.radius,
        )
    xs: list[float] = []
    ys: list[float] = []
    for c in curves:
        xs.extend((c.start[0], c.end[0]))
        ys.extend((c.start[1], c.end[1]))
        if type(c).__name__ == "Arc":
            center, radius, a0, delta = arc_angles(c.start, c.end, c.sweep_angle, c.ccw)
            lo, hi = (a0, a0 + delta) if delta > 0 else (a0 + delta, a0)
            for k in range(math.floor(lo / (0.5 * math.pi)), math.ceil(hi / (0.5 * math.pi)) + 1):
                a = 0.5 * math.pi * k
                if lo <= a <= hi:
                    xs.append(center[0] + radius * math.cos(a))
                    ys.append(center[1] + radius * math.sin(a))
    return min(xs), min(ys), max(xs), max(ys)
