"""Black-box cost-to-goal oracles that supervise PLR construction.

Two backends: an exact visibility-graph distance for 2D polygonal worlds,
and a near-optimal distance read off a PRM* roadmap.  Both expose the same
evaluate() contract: a finite value is the length of a feasible path to the
goal, +inf means the query is in collision or unreachable.
"""

from __future__ import annotations

import heapq
import math
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (Environment, free_mask, point_in_free_space,
                       segment_collision_free, segment_visible)

# Fraction of the workspace diameter used as the sampled edge-check spacing.
EDGE_CHECK_FRACTION = 1e-3


class DistanceOracle(ABC):
    """Evaluatable cost-to-goal d(x) >= 0, +inf on collision/unreachable."""

    goal: tuple[float, ...]
    dimension: int

    @abstractmethod
    def evaluate(self, x: Sequence[float]) -> float:
        raise NotImplementedError

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.array([self.evaluate(p) for p in pts], dtype=float)


class EuclideanOracle(DistanceOracle):
    """Exact straight-line distance to the goal (obstacle-free worlds)."""

    def __init__(self, goal: Sequence[float]):
        self.goal = tuple(float(v) for v in goal)
        self.dimension = len(self.goal)

    def evaluate(self, x: Sequence[float]) -> float:
        return math.dist(x, self.goal)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.linalg.norm(pts - np.asarray(self.goal), axis=-1)


class FunctionOracle(DistanceOracle):
    """Wrap an arbitrary callable as an oracle (used by tests and analysis)."""

    def __init__(self, fn, dimension: int, goal: Sequence[float] | None = None,
                 fn_many=None):
        self._fn = fn
        self._fn_many = fn_many
        self.dimension = dimension
        self.goal = tuple(goal) if goal is not None else (0.0,) * dimension

    def evaluate(self, x: Sequence[float]) -> float:
        return float(self._fn(x))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        if self._fn_many is not None:
            return np.asarray(self._fn_many(np.asarray(points, dtype=float)),
                              dtype=float)
        return super().evaluate_many(points)


def _dijkstra(n_vertices: int, adjacency: list[list[tuple[int, float]]],
              source: int) -> np.ndarray:
    """Single-source shortest path costs over an undirected adjacency list."""
    dist = np.full(n_vertices, math.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adjacency[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


class VisibilityGraph:
    """Graph over obstacle corners plus the goal, edges between mutually
    visible vertices, with precomputed shortest-path cost to the goal."""

    def __init__(self, vertices, adjacency, goal_index, cost_to_goal):
        self.vertices: list[tuple[float, float]] = vertices
        self.adjacency: list[list[tuple[int, float]]] = adjacency
        self.goal_index: int = goal_index
        self.cost_to_goal: np.ndarray = np.asarray(cost_to_goal, dtype=float)
        self._verts_arr = np.asarray(vertices, dtype=float)

    @property
    def goal(self) -> tuple[float, float]:
        return self.vertices[self.goal_index]


def build_visibility_graph(env: Environment,
                           goal: Sequence[float]) -> VisibilityGraph:
    """Corner graph with Euclidean edge weights and goal-rooted costs."""
    g = (float(goal[0]), float(goal[1]))
    if not point_in_free_space(env, g):
        raise ValueError(f"goal {g} is not in free space")
    vertices: list[tuple[float, float]] = []
    for poly in env.obstacles:
        vertices.extend(poly.vertices)
    vertices.append(g)
    goal_index = len(vertices) - 1
    n = len(vertices)
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if segment_visible(env, vertices[i], vertices[j]):
                w = math.dist(vertices[i], vertices[j])
                adjacency[i].append((j, w))
                adjacency[j].append((i, w))
    cost = _dijkstra(n, adjacency, goal_index)
    return VisibilityGraph(vertices, adjacency, goal_index, cost)


def vg_distance(vg: VisibilityGraph, env: Environment,
                x: Sequence[float]) -> float:
    """Exact shortest-path distance from x to the goal, +inf if unreachable.

    Candidate costs |x - v| + cost_to_goal[v] are scanned in increasing
    order; the first candidate whose connecting segment is visible is the
    optimum (visibility only removes candidates, never shortens them).
    """
    p = (float(x[0]), float(x[1]))
    if not point_in_free_space(env, p):
        return math.inf
    d = np.linalg.norm(vg._verts_arr - p, axis=1)
    keys = d + vg.cost_to_goal
    for idx in np.argsort(keys, kind="stable"):
        k = keys[idx]
        if not math.isfinite(k):
            return math.inf
        if segment_visible(env, p, vg.vertices[idx]):
            return float(k)
    return math.inf


class VisibilityGraphOracle(DistanceOracle):
    def __init__(self, env: Environment, vg: VisibilityGraph):
        self.env = env
        self.vg = vg
        self.goal = vg.goal
        self.dimension = 2

    def evaluate(self, x: Sequence[float]) -> float:
        return vg_distance(self.vg, self.env, x)


class Roadmap:
    """PRM* roadmap: free-space samples plus the goal, k-nearest edges,
    per-vertex cost to goal from one backward shortest-path pass."""

    def __init__(self, samples, adjacency, goal_index, cost_to_goal,
                 edge_resolution):
        self.samples: np.ndarray = np.asarray(samples, dtype=float)
        self.adjacency: list[list[tuple[int, float]]] = adjacency
        self.goal_index: int = goal_index
        self.cost_to_goal: np.ndarray = np.asarray(cost_to_goal, dtype=float)
        self.edge_resolution: float = edge_resolution

    @property
    def goal(self) -> tuple[float, ...]:
        return tuple(self.samples[self.goal_index])

    @property
    def n_vertices(self) -> int:
        return len(self.samples)

    @property
    def n_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2


def knn_count(n_vertices: int) -> int:
    """k-PRM* connection count: ceil(2e ln n)."""
    if n_vertices < 2:
        return 0
    return int(math.ceil(2.0 * math.e * math.log(n_vertices)))


def build_prm_star(env: Environment, goal: Sequence[float], n_samples: int,
                   seed: int) -> Roadmap:
    """Seeded PRM* construction: rejection-sampled free configurations,
    k(n)-nearest connections with sampled edge checks, backward Dijkstra."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    g = (float(goal[0]), float(goal[1]))
    if not point_in_free_space(env, g):
        raise ValueError(f"goal {g} is not in free space")
    rng = np.random.default_rng(seed)
    lo = np.asarray(env.lo)
    hi = np.asarray(env.hi)
    samples: list[np.ndarray] = []
    rejections = 0
    max_rejections = 1000 * n_samples
    while len(samples) < n_samples:
        batch = min(max(n_samples - len(samples), 64), 4096)
        pts = rng.uniform(lo, hi, size=(batch, 2))
        keep = free_mask(env, pts)
        rejections += int((~keep).sum())
        if rejections > max_rejections:
            raise RuntimeError(
                f"free-space sampling failed after {rejections} rejections")
        for p in pts[keep]:
            samples.append(p)
            if len(samples) == n_samples:
                break
    verts = np.vstack([np.asarray(samples), np.asarray([g])])
    n = len(verts)
    k = min(knn_count(n), n - 1)
    resolution = EDGE_CHECK_FRACTION * env.diameter
    tree = cKDTree(verts)
    _, nbrs = tree.query(verts, k=k + 1)
    nbrs = np.atleast_2d(nbrs)
    candidates = set()
    for i in range(n):
        for j in nbrs[i]:
            j = int(j)
            if j != i:
                candidates.add((min(i, j), max(i, j)))
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i, j in sorted(candidates):
        if segment_collision_free(env, verts[i], verts[j], resolution):
            w = float(np.hypot(*(verts[i] - verts[j])))
            adjacency[i].append((j, w))
            adjacency[j].append((i, w))
    cost = _dijkstra(n, adjacency, n - 1)
    return Roadmap(verts, adjacency, n - 1, cost, resolution)


def prm_distance(rm: Roadmap, env: Environment, x: Sequence[float]) -> float:
    """Roadmap estimate: attach x to the nearest visible vertex with a
    finite cost and add that vertex's cost to goal; +inf when x is in
    collision or no such vertex exists."""
    p = np.asarray([float(x[0]), float(x[1])])
    if not point_in_free_space(env, p):
        return math.inf
    d = np.linalg.norm(rm.samples - p, axis=1)
    for idx in np.argsort(d, kind="stable"):
        c = rm.cost_to_goal[idx]
        if not math.isfinite(c):
            continue
        if segment_collision_free(env, p, rm.samples[idx], rm.edge_resolution):
            return float(d[idx] + c)
    return math.inf


class RoadmapOracle(DistanceOracle):
    def __init__(self, env: Environment, roadmap: Roadmap):
        self.env = env
        self.roadmap = roadmap
        self.goal = roadmap.goal
        self.dimension = 2

    def evaluate(self, x: Sequence[float]) -> float:
        return prm_distance(self.roadmap, self.env, x)
