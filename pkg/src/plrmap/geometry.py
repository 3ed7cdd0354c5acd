"""2D polygonal environments and the exact collision / visibility predicates.

Everything downstream (oracles, PLR construction, planning) treats these
predicates as ground truth.  Obstacles are closed sets: a point on an
obstacle boundary is NOT free.  Visibility is permissive on grazing
contact: a segment may touch an obstacle vertex or slide along an edge
as long as it never enters the interior.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Fixed tolerance for classifying degenerate contact (on-boundary, collinear).
GEOM_TOL = 1e-12


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped < 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def angle_difference(a: float, b: float) -> float:
    """Shortest signed angular distance from b to a."""
    return wrap_angle(a - b)


def _as_point(p: Sequence[float]) -> tuple[float, float]:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"point has non-finite components: {p!r}")
    return (x, y)


def _segments_intersect_closed(p1, p2, q1, q2, tol: float = GEOM_TOL) -> bool:
    """Closed segment intersection test: touching endpoints count."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c):
        # c assumed collinear with a-b
        return (min(a[0], b[0]) - tol <= c[0] <= max(a[0], b[0]) + tol
                and min(a[1], b[1]) - tol <= c[1] <= max(a[1], b[1]) + tol)

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and \
       ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)):
        return True
    if abs(d1) <= tol and on_segment(q1, q2, p1):
        return True
    if abs(d2) <= tol and on_segment(q1, q2, p2):
        return True
    if abs(d3) <= tol and on_segment(p1, p2, q1):
        return True
    if abs(d4) <= tol and on_segment(p1, p2, q2):
        return True
    return False


class Polygon:
    """A simple polygon with counter-clockwise vertices.

    Validation rejects polygons with fewer than 3 vertices, repeated or
    self-intersecting edges, clockwise orientation, and (near-)zero area.
    """

    __slots__ = ("vertices", "_bbox")

    def __init__(self, vertices: Iterable[Sequence[float]]):
        pts = [_as_point(v) for v in vertices]
        if len(pts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        area2 = 0.0
        m = len(pts)
        for i in range(m):
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % m]
            area2 += x1 * y2 - x2 * y1
        if abs(area2) <= GEOM_TOL:
            raise ValueError("polygon has (near-)zero area")
        if area2 < 0.0:
            raise ValueError("polygon vertices must be counter-clockwise")
        for i in range(m):
            a, b = pts[i], pts[(i + 1) % m]
            if math.hypot(b[0] - a[0], b[1] - a[1]) <= GEOM_TOL:
                raise ValueError(f"degenerate zero-length edge at vertex {i}")
        # simplicity: no two non-adjacent edges may intersect
        for i in range(m):
            a1, a2 = pts[i], pts[(i + 1) % m]
            for j in range(i + 1, m):
                if j == i or (j + 1) % m == i or (i + 1) % m == j:
                    continue
                b1, b2 = pts[j], pts[(j + 1) % m]
                if _segments_intersect_closed(a1, a2, b1, b2):
                    raise ValueError(
                        f"polygon is self-intersecting (edges {i} and {j})")
        self.vertices: tuple[tuple[float, float], ...] = tuple(pts)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        self._bbox = (min(xs), min(ys), max(xs), max(ys))

    def __repr__(self) -> str:
        return f"Polygon({list(self.vertices)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Polygon) and self.vertices == other.vertices

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return self._bbox

    def _bbox_contains(self, x: float, y: float, pad: float = GEOM_TOL) -> bool:
        x0, y0, x1, y1 = self._bbox
        return x0 - pad <= x <= x1 + pad and y0 - pad <= y <= y1 + pad

    def on_boundary(self, p: Sequence[float], tol: float = GEOM_TOL) -> bool:
        x, y = p[0], p[1]
        if not self._bbox_contains(x, y, pad=tol):
            return False
        verts = self.vertices
        m = len(verts)
        for i in range(m):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % m]
            dx, dy = bx - ax, by - ay
            t = ((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)
            t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
            ex, ey = ax + t * dx - x, ay + t * dy - y
            if ex * ex + ey * ey <= tol * tol:
                return True
        return False

    def contains(self, p: Sequence[float]) -> bool:
        """Closed containment: boundary points count as inside."""
        x, y = p[0], p[1]
        if not self._bbox_contains(x, y):
            return False
        if self.on_boundary(p):
            return True
        return self._even_odd(x, y)

    def contains_interior(self, p: Sequence[float]) -> bool:
        """Strict containment: boundary points count as outside."""
        x, y = p[0], p[1]
        if not self._bbox_contains(x, y):
            return False
        if self.on_boundary(p):
            return False
        return self._even_odd(x, y)

    def _even_odd(self, x: float, y: float) -> bool:
        verts = self.vertices
        m = len(verts)
        inside = False
        j = m - 1
        for i in range(m):
            xi, yi = verts[i]
            xj, yj = verts[j]
            if (yi > y) != (yj > y):
                x_cross = (xj - xi) * (y - yi) / (yj - yi) + xi
                if x < x_cross:
                    inside = not inside
            j = i
        return inside

    def distance(self, p: Sequence[float]) -> float:
        """Distance from p to the closed polygon (0 if inside or on it)."""
        x, y = p[0], p[1]
        if self.on_boundary(p) or self._even_odd(x, y):
            return 0.0
        verts = self.vertices
        m = len(verts)
        best = math.inf
        for i in range(m):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % m]
            dx, dy = bx - ax, by - ay
            t = ((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)
            t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
            best = min(best, math.hypot(ax + t * dx - x, ay + t * dy - y))
        return best


@dataclass(frozen=True)
class Disc:
    """Disc robot shape; configuration is (x, y)."""
    radius: float

    def __post_init__(self):
        if not self.radius >= 0.0:
            raise ValueError("disc radius must be >= 0")

    @property
    def dof(self) -> int:
        return 2


@dataclass(frozen=True)
class Rectangle:
    """Rectangle robot shape; configuration is (x, y, theta) with theta in radians."""
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0.0 or self.height <= 0.0:
            raise ValueError("rectangle dimensions must be positive")

    @property
    def dof(self) -> int:
        return 3

    @property
    def effective_radius(self) -> float:
        """Half-diagonal; used to weight rotations in path cost."""
        return 0.5 * math.hypot(self.width, self.height)

    def corners(self, pose: Sequence[float]) -> list[tuple[float, float]]:
        x, y, theta = float(pose[0]), float(pose[1]), float(pose[2])
        c, s = math.cos(theta), math.sin(theta)
        hw, hh = 0.5 * self.width, 0.5 * self.height
        out = []
        for ux, uy in ((-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)):
            out.append((x + c * ux - s * uy, y + s * ux + c * uy))
        return out


RobotShape = Disc | Rectangle


class Environment:
    """Axis-aligned workspace box with simple polygonal obstacles."""

    def __init__(self, lo: Sequence[float], hi: Sequence[float],
                 obstacles: Iterable[Polygon] = ()):
        self.lo = _as_point(lo)
        self.hi = _as_point(hi)
        if not (self.lo[0] < self.hi[0] and self.lo[1] < self.hi[1]):
            raise ValueError("bounds must satisfy lo < hi componentwise")
        self.obstacles: tuple[Polygon, ...] = tuple(obstacles)
        for k, poly in enumerate(self.obstacles):
            for v in poly.vertices:
                if not self._in_bounds(v[0], v[1]):
                    raise ValueError(
                        f"obstacle {k} vertex {v} lies outside bounds")

    def __repr__(self) -> str:
        return (f"Environment(lo={self.lo}, hi={self.hi}, "
                f"obstacles={len(self.obstacles)})")

    @property
    def diameter(self) -> float:
        return math.hypot(self.hi[0] - self.lo[0], self.hi[1] - self.lo[1])

    def _in_bounds(self, x: float, y: float, tol: float = GEOM_TOL) -> bool:
        return (self.lo[0] - tol <= x <= self.hi[0] + tol
                and self.lo[1] - tol <= y <= self.hi[1] + tol)

    def in_bounds(self, p: Sequence[float]) -> bool:
        return self._in_bounds(p[0], p[1])

    # ---- JSON interchange -------------------------------------------------

    def to_json(self) -> dict:
        return {
            "bounds": [[self.lo[0], self.lo[1]], [self.hi[0], self.hi[1]]],
            "obstacles": [[[v[0], v[1]] for v in poly.vertices]
                          for poly in self.obstacles],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Environment":
        try:
            (lo, hi) = data["bounds"]
            obstacles = [Polygon(ring) for ring in data.get("obstacles", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"invalid environment description: {exc}") from exc
        return cls(lo, hi, obstacles)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Environment":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def point_in_free_space(env: Environment, p: Sequence[float]) -> bool:
    """True iff p is inside the bounds and strictly outside every obstacle.

    Obstacle boundaries are non-free (obstacles are closed sets).
    """
    x, y = p[0], p[1]
    if not env._in_bounds(x, y):
        return False
    for poly in env.obstacles:
        if poly._bbox_contains(x, y) and poly.contains((x, y)):
            return False
    return True


def free_mask(env: Environment, points: np.ndarray) -> np.ndarray:
    """Vectorized point_in_free_space over an (M, 2) array of points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (M, 2) array")
    x, y = pts[:, 0], pts[:, 1]
    tol = GEOM_TOL
    free = ((x >= env.lo[0] - tol) & (x <= env.hi[0] + tol)
            & (y >= env.lo[1] - tol) & (y <= env.hi[1] + tol))
    for poly in env.obstacles:
        if not free.any():
            break
        x0, y0, x1, y1 = poly.bbox
        cand = free & (x >= x0 - tol) & (x <= x1 + tol) \
                    & (y >= y0 - tol) & (y <= y1 + tol)
        if not cand.any():
            continue
        idx = np.nonzero(cand)[0]
        px, py = x[idx], y[idx]
        verts = np.asarray(poly.vertices)
        ax, ay = verts[:, 0], verts[:, 1]
        bx, by = np.roll(ax, -1), np.roll(ay, -1)
        # even-odd crossing count, points-by-edges
        yi = ay[None, :]
        yj = by[None, :]
        xi = ax[None, :]
        xj = bx[None, :]
        pyc = py[:, None]
        pxc = px[:, None]
        crossing = (yi > pyc) != (yj > pyc)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = (xj - xi) * (pyc - yi) / (yj - yi) + xi
        inside = (crossing & (pxc < x_cross)).sum(axis=1) % 2 == 1
        # closed obstacles: points on the boundary are blocked too
        ex, ey = bx - ax, by - ay
        L2 = ex * ex + ey * ey
        t = ((pxc - xi) * ex[None, :] + (pyc - yi) * ey[None, :]) / L2[None, :]
        t = np.clip(t, 0.0, 1.0)
        dx = xi + t * ex[None, :] - pxc
        dy = yi + t * ey[None, :] - pyc
        on_edge = ((dx * dx + dy * dy) <= tol * tol).any(axis=1)
        free[idx[inside | on_edge]] = False
    return free


def _segment_polygon_blocked(a, b, poly: Polygon) -> bool:
    """True iff the open segment (a, b) intersects the polygon interior."""
    ax, ay = a
    bx, by = b
    # bbox reject
    x0, y0, x1, y1 = poly.bbox
    if max(ax, bx) < x0 - GEOM_TOL or min(ax, bx) > x1 + GEOM_TOL \
            or max(ay, by) < y0 - GEOM_TOL or min(ay, by) > y1 + GEOM_TOL:
        return False
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    # parameters where the segment meets the polygon boundary
    ts = [0.0, 1.0]
    verts = poly.vertices
    m = len(verts)
    for i in range(m):
        ux, uy = verts[i]
        vx, vy = verts[(i + 1) % m]
        ex, ey = vx - ux, vy - uy
        denom = dx * ey - dy * ex
        if abs(denom) > GEOM_TOL:
            t = ((ux - ax) * ey - (uy - ay) * ex) / denom
            s = ((ux - ax) * dy - (uy - ay) * dx) / denom
            if -GEOM_TOL <= t <= 1.0 + GEOM_TOL and -GEOM_TOL <= s <= 1.0 + GEOM_TOL:
                ts.append(min(1.0, max(0.0, t)))
        else:
            # parallel: collinear only if u lies on the segment's line
            cross = dx * (uy - ay) - dy * (ux - ax)
            if cross * cross <= GEOM_TOL * GEOM_TOL * max(seg_len2, 1.0):
                for wx, wy in ((ux, uy), (vx, vy)):
                    t = ((wx - ax) * dx + (wy - ay) * dy) / seg_len2
                    if -GEOM_TOL <= t <= 1.0 + GEOM_TOL:
                        ts.append(min(1.0, max(0.0, t)))
    ts.sort()
    prev = ts[0]
    for t in ts[1:]:
        if t - prev > 1e-9:
            tm = 0.5 * (prev + t)
            if poly.contains_interior((ax + tm * dx, ay + tm * dy)):
                return True
        prev = max(prev, t)
    return False


def segment_visible(env: Environment, a: Sequence[float],
                    b: Sequence[float]) -> bool:
    """True iff the open segment (a, b) stays in bounds and crosses no
    obstacle interior.  Grazing contact along edges or vertices is visible.
    """
    pa = (float(a[0]), float(a[1]))
    pb = (float(b[0]), float(b[1]))
    if not (env._in_bounds(*pa) and env._in_bounds(*pb)):
        return False
    if math.hypot(pb[0] - pa[0], pb[1] - pa[1]) <= GEOM_TOL:
        return True
    for poly in env.obstacles:
        if _segment_polygon_blocked(pa, pb, poly):
            return False
    return True


def segment_collision_free(env: Environment, a: Sequence[float],
                           b: Sequence[float], resolution: float) -> bool:
    """Sampled segment check: every point at the given spacing must be free.

    Conservative complement to segment_visible for roadmap edges, where
    endpoints are true configurations (boundary contact must be rejected).
    """
    pa = np.asarray(a, dtype=float)
    pb = np.asarray(b, dtype=float)
    length = float(np.hypot(*(pb - pa)))
    n = max(1, int(math.ceil(length / max(resolution, 1e-9))))
    ts = np.linspace(0.0, 1.0, n + 1)
    pts = pa[None, :] + ts[:, None] * (pb - pa)[None, :]
    return bool(free_mask(env, pts).all())


def _disc_in_collision(env: Environment, disc: Disc, pose) -> bool:
    x, y = float(pose[0]), float(pose[1])
    r = disc.radius
    tol = GEOM_TOL
    if (x - r < env.lo[0] - tol or x + r > env.hi[0] + tol
            or y - r < env.lo[1] - tol or y + r > env.hi[1] + tol):
        return True
    for poly in env.obstacles:
        x0, y0, x1, y1 = poly.bbox
        if (x < x0 - r - tol or x > x1 + r + tol
                or y < y0 - r - tol or y > y1 + r + tol):
            continue
        if poly.distance((x, y)) <= r + tol:
            return True
    return False


def _point_in_rect(px, py, pose, hw, hh, tol=GEOM_TOL) -> bool:
    x, y, theta = pose
    c, s = math.cos(theta), math.sin(theta)
    rx, ry = px - x, py - y
    u = c * rx + s * ry
    v = -s * rx + c * ry
    return abs(u) <= hw + tol and abs(v) <= hh + tol


def _rect_in_collision(env: Environment, rect: Rectangle, pose) -> bool:
    x, y, theta = float(pose[0]), float(pose[1]), float(pose[2])
    corners = rect.corners((x, y, theta))
    for cx, cy in corners:
        if not env._in_bounds(cx, cy):
            return True
    hw, hh = 0.5 * rect.width, 0.5 * rect.height
    for poly in env.obstacles:
        hit = False
        for c in corners:
            if poly.contains(c):
                hit = True
                break
        if not hit:
            for v in poly.vertices:
                if _point_in_rect(v[0], v[1], (x, y, theta), hw, hh):
                    hit = True
                    break
        if not hit:
            verts = poly.vertices
            m = len(verts)
            for i in range(4):
                a, b = corners[i], corners[(i + 1) % 4]
                for j in range(m):
                    if _segments_intersect_closed(a, b, verts[j],
                                                  verts[(j + 1) % m]):
                        hit = True
                        break
                if hit:
                    break
        if hit:
            return True
    return False


def shape_in_collision(env: Environment, shape: RobotShape,
                       pose: Sequence[float]) -> bool:
    """True iff the placed shape overlaps any obstacle or exits the bounds.

    Disc poses are (x, y); rectangle poses are (x, y, theta).  Contact with
    an obstacle boundary counts as collision (closed obstacles).
    """
    if isinstance(shape, Disc):
        if len(pose) != 2:
            raise ValueError(f"disc pose must have 2 components, got {len(pose)}")
        return _disc_in_collision(env, shape, pose)
    if isinstance(shape, Rectangle):
        if len(pose) != 3:
            raise ValueError(
                f"rectangle pose must have 3 components, got {len(pose)}")
        return _rect_in_collision(env, shape, pose)
    raise TypeError(f"unsupported shape: {shape!r}")


def shapes_overlap(shape_a: RobotShape, pose_a: Sequence[float],
                   shape_b: RobotShape, pose_b: Sequence[float]) -> bool:
    """Closed overlap test between two placed robot shapes."""
    if isinstance(shape_a, Disc) and isinstance(shape_b, Disc):
        d = math.hypot(pose_a[0] - pose_b[0], pose_a[1] - pose_b[1])
        return d <= shape_a.radius + shape_b.radius + GEOM_TOL
    if isinstance(shape_a, Disc) and isinstance(shape_b, Rectangle):
        return _disc_rect_overlap(shape_a, pose_a, shape_b, pose_b)
    if isinstance(shape_a, Rectangle) and isinstance(shape_b, Disc):
        return _disc_rect_overlap(shape_b, pose_b, shape_a, pose_a)
    return _rect_rect_overlap(shape_a, pose_a, shape_b, pose_b)


def _disc_rect_overlap(disc: Disc, disc_pose, rect: Rectangle, rect_pose) -> bool:
    x, y, theta = float(rect_pose[0]), float(rect_pose[1]), float(rect_pose[2])
    c, s = math.cos(theta), math.sin(theta)
    rx, ry = disc_pose[0] - x, disc_pose[1] - y
    u = c * rx + s * ry
    v = -s * rx + c * ry
    du = max(abs(u) - 0.5 * rect.width, 0.0)
    dv = max(abs(v) - 0.5 * rect.height, 0.0)
    return math.hypot(du, dv) <= disc.radius + GEOM_TOL


def _rect_rect_overlap(ra: Rectangle, pa, rb: Rectangle, pb) -> bool:
    # separating-axis test over both rectangles' edge normals
    ca = ra.corners(pa)
    cb = rb.corners(pb)
    for theta in (pa[2], pa[2] + 0.5 * math.pi, pb[2], pb[2] + 0.5 * math.pi):
        axx, axy = math.cos(theta), math.sin(theta)
        pa_proj = [axx * px + axy * py for px, py in ca]
        pb_proj = [axx * px + axy * py for px, py in cb]
        if min(pa_proj) > max(pb_proj) + GEOM_TOL or \
           min(pb_proj) > max(pa_proj) + GEOM_TOL:
            return False
    return True
