"""Planar primitives: (rho, theta) lines, convex polygons, clipping, chords.

A line is the set of points whose foot of perpendicular from the origin is
(rho*cos(theta), rho*sin(theta)); rho >= 0 and theta in [0, 2*pi) so the
parameter pair lives in the standard representation space of line processes.
Polygons are convex, simple, counter-clockwise.  Lengths are in km.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "Point2",
    "Line",
    "ConvexPolygon",
    "clip_halfplane",
    "chord_length",
    "chord_lengths_batch",
    "chord_segment",
    "area",
    "perimeter",
]

# Bisector clipping of nearly cocircular points produces slivers; vertices
# closer than this are collapsed deterministically.
VERTEX_DEDUP_TOL = 1e-12
_TWO_PI = 2.0 * math.pi


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Line:
    """Line at signed distance ``rho`` from the origin, normal angle ``theta``.

    The constructor normalises to rho >= 0, theta in [0, 2*pi); rho = 0 (a
    line through the origin) is permitted.
    """

    rho: float
    theta: float

    def __post_init__(self) -> None:
        rho = float(self.rho)
        theta = float(self.theta)
        if not (math.isfinite(rho) and math.isfinite(theta)):
            raise ValueError("line parameters must be finite")
        if rho < 0.0:
            rho, theta = -rho, theta + math.pi
        theta = theta % _TWO_PI
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "theta", theta)

    @property
    def normal(self) -> Point2:
        return Point2(math.cos(self.theta), math.sin(self.theta))

    @property
    def foot(self) -> Point2:
        """Foot of the perpendicular from the origin."""
        return Point2(self.rho * math.cos(self.theta), self.rho * math.sin(self.theta))

    @property
    def direction(self) -> Point2:
        return Point2(-math.sin(self.theta), math.cos(self.theta))

    def point_at(self, t: float) -> Point2:
        """Point at arc-length parameter ``t`` along the line from the foot."""
        fx, fy = self.foot
        dx, dy = self.direction
        return Point2(fx + t * dx, fy + t * dy)

    def rotated(self, angle: float) -> "Line":
        return Line(self.rho, self.theta + angle)

    def translated(self, dx: float, dy: float) -> "Line":
        # Shifting moves the signed foot distance by the normal component.
        return Line(self.rho + dx * math.cos(self.theta) + dy * math.sin(self.theta),
                    self.theta)


class ConvexPolygon:
    """Convex, simple, counter-clockwise polygon backed by an (n, 2) array."""

    __slots__ = ("vertices",)

    def __init__(self, vertices: Iterable | np.ndarray, validate: bool = True):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array-like")
        if validate:
            verts = _dedup_ring(verts)
            if verts.shape[0] < 3:
                raise ValueError("polygon needs at least 3 distinct vertices")
            if not np.all(np.isfinite(verts)):
                raise ValueError("vertices must be finite")
            if _signed_area(verts) < 0.0:
                verts = verts[::-1].copy()
            if _signed_area(verts) <= VERTEX_DEDUP_TOL:
                raise ValueError("polygon is degenerate (zero area)")
            if not _is_convex_ccw(verts):
                raise ValueError("vertices do not describe a convex CCW polygon")
        self.vertices = verts

    @classmethod
    def unit_square(cls) -> "ConvexPolygon":
        return cls([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], validate=False)

    @classmethod
    def square(cls, half_width: float, center: tuple[float, float] = (0.0, 0.0)) -> "ConvexPolygon":
        cx, cy = center
        h = float(half_width)
        return cls(
            [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)],
            validate=False,
        )

    @classmethod
    def regular_ngon(cls, n: int, radius: float = 1.0,
                     center: tuple[float, float] = (0.0, 0.0),
                     phase: float = 0.0) -> "ConvexPolygon":
        ang = phase + _TWO_PI * np.arange(n) / n
        return cls(
            np.column_stack([center[0] + radius * np.cos(ang),
                             center[1] + radius * np.sin(ang)]),
            validate=False,
        )

    def area(self) -> float:
        return _signed_area(self.vertices)

    def perimeter(self) -> float:
        d = np.diff(np.vstack([self.vertices, self.vertices[:1]]), axis=0)
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    def contains(self, point: tuple[float, float], tol: float = 1e-9) -> bool:
        px, py = point
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        cross = (nxt[:, 0] - v[:, 0]) * (py - v[:, 1]) - (nxt[:, 1] - v[:, 1]) * (px - v[:, 0])
        return bool(np.all(cross >= -tol))

    def circumradius_about(self, point: tuple[float, float]) -> float:
        """Largest distance from ``point`` to a vertex."""
        d = self.vertices - np.asarray(point, dtype=float)
        return float(np.max(np.hypot(d[:, 0], d[:, 1])))

    def rotated(self, angle: float) -> "ConvexPolygon":
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return ConvexPolygon(self.vertices @ rot.T, validate=False)

    def translated(self, dx: float, dy: float) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.array([dx, dy]), validate=False)

    def __repr__(self) -> str:  # pragma: no cover
        return f"ConvexPolygon({self.vertices.shape[0]} vertices, area={self.area():.6g})"


def _dedup_ring(verts: np.ndarray) -> np.ndarray:
    keep = [0]
    for i in range(1, verts.shape[0]):
        if np.hypot(*(verts[i] - verts[keep[-1]])) > VERTEX_DEDUP_TOL:
            keep.append(i)
    while len(keep) > 1 and np.hypot(*(verts[keep[-1]] - verts[keep[0]])) <= VERTEX_DEDUP_TOL:
        keep.pop()
    return verts[keep]


def _signed_area(verts: np.ndarray) -> float:
    x = verts[:, 0]
    y = verts[:, 1]
    wrap = x[-1] * y[0] - x[0] * y[-1]
    return 0.5 * (float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1])) + wrap)


def _is_convex_ccw(verts: np.ndarray, tol: float = 1e-9) -> bool:
    a = verts
    b = np.roll(verts, -1, axis=0)
    c = np.roll(verts, -2, axis=0)
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - b[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - b[:, 0])
    scale = max(1.0, float(np.max(np.abs(verts))) ** 2)
    return bool(np.all(cross >= -tol * scale))


def clip_halfplane_coeffs(verts: np.ndarray, a: float, b: float, c: float) -> np.ndarray | None:
    """Clip a CCW vertex ring to the half-plane a*x + b*y <= c.

    Returns the clipped ring (possibly the input array itself when nothing is
    cut) or None when the intersection is empty or degenerate.
    """
    s = a * verts[:, 0] + b * verts[:, 1] - c
    inside = s <= 0.0
    n_in = int(np.count_nonzero(inside))
    n = verts.shape[0]
    if n_in == n:
        return verts
    if n_in == 0:
        return None
    flips = np.nonzero(inside[:-1] != inside[1:])[0]
    if flips.size == 2:
        i0, i1 = int(flips[0]), int(flips[1])
    elif flips.size == 1 and inside[-1] != inside[0]:
        i0, i1 = int(flips[0]), n - 1
    else:
        # tangency/degeneracy: fall back to the general scan
        return _clip_scan(verts, s, inside)
    # the ring alternates ...inside, exit crossing, outside..., enter crossing...
    if inside[i0]:
        i_exit, i_enter = i0, i1
    else:
        i_exit, i_enter = i1, i0
    jx = (i_exit + 1) % n
    je = (i_enter + 1) % n
    t_exit = s[i_exit] / (s[i_exit] - s[jx])
    t_enter = s[i_enter] / (s[i_enter] - s[je])
    p_exit = verts[i_exit] + t_exit * (verts[jx] - verts[i_exit])
    p_enter = verts[i_enter] + t_enter * (verts[je] - verts[i_enter])
    if je <= i_exit:
        chain = verts[je : i_exit + 1]
    else:
        chain = np.concatenate([verts[je:], verts[: i_exit + 1]])
    ring = np.empty((chain.shape[0] + 2, 2))
    ring[0] = p_enter
    ring[1:-1] = chain
    ring[-1] = p_exit
    d = ring - np.concatenate([ring[-1:], ring[:-1]])
    keep = (d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]) > VERTEX_DEDUP_TOL**2
    if not np.all(keep):
        ring = ring[keep]
    if ring.shape[0] < 3 or abs(_signed_area(ring)) <= VERTEX_DEDUP_TOL:
        return None
    return ring


def _clip_scan(verts: np.ndarray, s: np.ndarray, inside: np.ndarray) -> np.ndarray | None:
    n = verts.shape[0]
    out: list[np.ndarray] = []
    for i in range(n):
        j = (i + 1) % n
        if inside[i]:
            out.append(verts[i])
        if inside[i] != inside[j]:
            t = s[i] / (s[i] - s[j])
            out.append(verts[i] + t * (verts[j] - verts[i]))
    ring = _dedup_ring(np.array(out))
    if ring.shape[0] < 3 or abs(_signed_area(ring)) <= VERTEX_DEDUP_TOL:
        return None
    return ring


def clip_halfplane(poly: ConvexPolygon, boundary: Line,
                   keep_origin_side: bool = True) -> ConvexPolygon | None:
    """Intersect ``poly`` with a closed half-plane bounded by ``boundary``.

    The origin side of a line is where cos(theta)*x + sin(theta)*y <= rho;
    for rho = 0 the origin lies on the boundary and the kept side is still
    well defined by the normal direction.  Returns None when the intersection
    is empty or has zero area.
    """
    nx, ny = boundary.normal
    if keep_origin_side:
        ring = clip_halfplane_coeffs(poly.vertices, nx, ny, boundary.rho)
    else:
        ring = clip_halfplane_coeffs(poly.vertices, -nx, -ny, -boundary.rho)
    if ring is None:
        return None
    return ConvexPolygon(ring, validate=False) if ring is not poly.vertices else poly


def chord_segment(poly: ConvexPolygon, line: Line) -> tuple[float, float] | None:
    """Arc-length interval (t0, t1) of ``line`` inside ``poly``; None if disjoint.

    Parameters are relative to the line's foot point along its direction.
    """
    lo, hi = _chord_interval(poly.vertices, line.rho, line.theta)
    if hi <= lo:
        return None
    return lo, hi


def chord_length(poly: ConvexPolygon, line: Line) -> float:
    """1D measure of ``poly`` intersected with ``line`` (0 when disjoint/tangent)."""
    lo, hi = _chord_interval(poly.vertices, line.rho, line.theta)
    return max(0.0, hi - lo)


def _chord_interval(verts: np.ndarray, rho: float, theta: float) -> tuple[float, float]:
    ct, st = math.cos(theta), math.sin(theta)
    px, py = rho * ct, rho * st
    dx, dy = -st, ct
    lo, hi = -math.inf, math.inf
    n = verts.shape[0]
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        # inward edge normal for CCW ring: (ay-by, bx-ax)
        ex, ey = ay - by, bx - ax
        denom = ex * dx + ey * dy
        num = ex * (ax - px) + ey * (ay - py)
        if denom == 0.0:
            if num > 0.0:
                return 0.0, 0.0
            continue
        t = num / denom
        if denom > 0.0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
        if hi <= lo:
            return 0.0, 0.0
    return lo, hi


def chord_lengths_batch(poly: ConvexPolygon, rho: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Chord lengths of many (rho, theta) lines through one polygon.

    Vectorised equivalent of :func:`chord_length`; zero where a line misses
    the polygon.
    """
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    v = poly.vertices
    nxt = np.roll(v, -1, axis=0)
    ex = v[:, 1] - nxt[:, 1]
    ey = nxt[:, 0] - v[:, 0]
    ct, st = np.cos(theta), np.sin(theta)
    px, py = rho * ct, rho * st
    # (edges, lines) tensors
    denom = ex[:, None] * (-st)[None, :] + ey[:, None] * ct[None, :]
    num = ex[:, None] * (v[:, 0:1] - px[None, :]) + ey[:, None] * (v[:, 1:2] - py[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = num / denom
    pos = denom > 0.0
    neg = denom < 0.0
    lo = np.max(np.where(pos, t, -np.inf), axis=0)
    hi = np.min(np.where(neg, t, np.inf), axis=0)
    # a line parallel to an edge and outside it misses the polygon
    parallel_out = np.any((denom == 0.0) & (num > 0.0), axis=0)
    lengths = np.clip(hi - lo, 0.0, None)
    lengths[parallel_out] = 0.0
    lengths[~np.isfinite(lengths)] = 0.0
    return lengths


def area(poly: ConvexPolygon) -> float:
    """Shoelace area in km^2."""
    return poly.area()


def perimeter(poly: ConvexPolygon) -> float:
    """Sum of edge lengths in km."""
    return poly.perimeter()
