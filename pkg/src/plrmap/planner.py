"""Grid-based best-first planner for coupled multi-robot problems.

The search runs over the composite grid (all robots' configurations
concatenated), visits each grid cell at most once, and orders expansion by
f = g + h.  With h = 0 this is the uninformed baseline; with per-robot PLR
queries summed it becomes an informed search.  Moves change one robot along
one axis by one grid step (rectangles may also rotate by one bin).
"""

from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .geometry import (Disc, Environment, Rectangle, RobotShape,
                       shape_in_collision, shapes_overlap, wrap_angle)
from .plr import PlrTree

DEFAULT_ROTATION_BIN = math.pi / 16.0
STEP_TOL = 1e-9

CompositeState = tuple[float, ...]


@dataclass(frozen=True)
class PlanBudget:
    max_expansions: int = 1_000_000
    max_time: float | None = None


@dataclass
class PlanProblem:
    env: Environment
    robots: list[RobotShape]
    starts: list[tuple[float, ...]]
    goals: list[tuple[float, ...]]
    grid_resolution: float
    rotation_bin: float = DEFAULT_ROTATION_BIN

    def __post_init__(self):
        if not (len(self.robots) == len(self.starts) == len(self.goals)):
            raise ValueError("robots, starts and goals must have equal length")
        if not self.robots:
            raise ValueError("at least one robot is required")
        if self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be positive")
        for i, (shape, s, g) in enumerate(zip(self.robots, self.starts,
                                              self.goals)):
            if len(s) != shape.dof or len(g) != shape.dof:
                raise ValueError(
                    f"robot {i}: start/goal dimension must be {shape.dof}")
        self.starts = [tuple(float(v) for v in s) for s in self.starts]
        self.goals = [tuple(float(v) for v in g) for g in self.goals]


@dataclass
class PlanResult:
    status: str  # solved | exhausted | budget_exceeded
    path: list[CompositeState]
    cost: float
    samples_placed: int
    elapsed: float
    expansions: list | None = None


def composite_heuristic(trees: Sequence[PlrTree], state: CompositeState,
                        shapes: Sequence[RobotShape] | None = None) -> float:
    """Sum of per-robot PLR estimates, clamped at zero per robot.

    Rectangle robots are queried on their translation slice only.  A
    blocked-leaf contribution makes the whole sum +inf.
    """
    dims = ([s.dof for s in shapes] if shapes is not None
            else [t.dimension for t in trees])
    if len(dims) != len(trees):
        raise ValueError("one tree per robot is required")
    total = 0.0
    offset = 0
    for tree, dof in zip(trees, dims):
        piece = state[offset:offset + tree.dimension]
        value = tree.query(piece)
        if value == math.inf:
            return math.inf
        total += value if value > 0.0 else 0.0
        offset += dof
    return total


def make_plr_heuristic(trees: Sequence[PlrTree],
                       shapes: Sequence[RobotShape]) -> Callable[[CompositeState], float]:
    """Bind trees and robot shapes into a heuristic callable for bl_plan."""
    shapes = list(shapes)
    trees = list(trees)
    if len(trees) != len(shapes):
        raise ValueError("one tree per robot is required")

    def h(state: CompositeState) -> float:
        return composite_heuristic(trees, state, shapes)

    return h


class _Grid:
    """Index arithmetic between composite grid states and configurations."""

    def __init__(self, problem: PlanProblem):
        self.problem = problem
        env = problem.env
        self.res = problem.grid_resolution
        self.n_bins = max(1, round(2.0 * math.pi / problem.rotation_bin))
        self.bin = 2.0 * math.pi / self.n_bins
        self.lo = env.lo
        self.nx = int(math.floor((env.hi[0] - env.lo[0]) / self.res + STEP_TOL))
        self.ny = int(math.floor((env.hi[1] - env.lo[1]) / self.res + STEP_TOL))
        self.offsets: list[int] = []
        self.dofs: list[int] = []
        off = 0
        for shape in problem.robots:
            self.offsets.append(off)
            self.dofs.append(shape.dof)
            off += shape.dof
        self.total_dof = off
        self.rot_costs = [s.effective_radius * self.bin
                          if isinstance(s, Rectangle) else 0.0
                          for s in problem.robots]

    def snap(self, configs: Sequence[Sequence[float]]) -> tuple[int, ...]:
        out: list[int] = []
        for shape, cfg in zip(self.problem.robots, configs):
            out.append(round((cfg[0] - self.lo[0]) / self.res))
            out.append(round((cfg[1] - self.lo[1]) / self.res))
            if isinstance(shape, Rectangle):
                j = round((wrap_angle(cfg[2]) + math.pi) / self.bin)
                out.append(j % self.n_bins)
        return tuple(out)

    def robot_config(self, state: tuple[int, ...], r: int) -> tuple[float, ...]:
        off = self.offsets[r]
        x = self.lo[0] + state[off] * self.res
        y = self.lo[1] + state[off + 1] * self.res
        if self.dofs[r] == 3:
            return (x, y, -math.pi + state[off + 2] * self.bin)
        return (x, y)

    def config(self, state: tuple[int, ...]) -> CompositeState:
        out: list[float] = []
        for r in range(len(self.problem.robots)):
            out.extend(self.robot_config(state, r))
        return tuple(out)

    def moves(self, state: tuple[int, ...]):
        """Deterministically ordered (new_state, moved_robot, step_cost)."""
        out = []
        for r, off in enumerate(self.offsets):
            for local in range(self.dofs[r]):
                axis = off + local
                for delta in (-1, 1):
                    v = state[axis] + delta
                    if local == 2:
                        v %= self.n_bins
                        cost = self.rot_costs[r]
                    else:
                        limit = self.nx if local == 0 else self.ny
                        if v < 0 or v > limit:
                            continue
                        cost = self.res
                    ns = state[:axis] + (v,) + state[axis + 1:]
                    out.append((ns, r, cost))
        return out


def _validate_endpoints(problem: PlanProblem, grid: _Grid) -> tuple[tuple, tuple]:
    env = problem.env
    for label, configs in (("start", problem.starts), ("goal", problem.goals)):
        for i, (shape, cfg) in enumerate(zip(problem.robots, configs)):
            if shape_in_collision(env, shape, cfg):
                raise ValueError(f"{label} of robot {i} is in collision")
        for i in range(len(problem.robots)):
            for j in range(i + 1, len(problem.robots)):
                if shapes_overlap(problem.robots[i], configs[i],
                                  problem.robots[j], configs[j]):
                    raise ValueError(f"{label}s of robots {i} and {j} overlap")
    start_state = grid.snap(problem.starts)
    goal_state = grid.snap(problem.goals)
    for label, state in (("start", start_state), ("goal", goal_state)):
        for i, shape in enumerate(problem.robots):
            if shape_in_collision(env, shape, grid.robot_config(state, i)):
                raise ValueError(
                    f"snapped {label} of robot {i} is in collision; "
                    f"align {label}s with the grid or refine the resolution")
    return start_state, goal_state


def bl_plan(problem: PlanProblem,
            heuristic: Callable[[CompositeState], float] | None = None,
            budget: PlanBudget | None = None,
            track_expansions: bool = False) -> PlanResult:
    """Best-first search over the visited-once composite grid.

    Priority is f = g + h with deterministic tie-breaking (lower f, then
    lower g, then lexicographic grid state).  samples_placed counts the
    distinct grid cells expanded.
    """
    budget = budget or PlanBudget()
    grid = _Grid(problem)
    env = problem.env
    robots = problem.robots
    start_state, goal_state = _validate_endpoints(problem, grid)
    t0 = time.perf_counter()

    obstacle_memo: dict[tuple[int, tuple[int, ...]], bool] = {}

    def robot_blocked(r: int, state: tuple[int, ...]) -> bool:
        off = grid.offsets[r]
        key = (r, state[off:off + grid.dofs[r]])
        hit = obstacle_memo.get(key)
        if hit is None:
            hit = shape_in_collision(env, robots[r], grid.robot_config(state, r))
            obstacle_memo[key] = hit
        return hit

    h_fn = heuristic if heuristic is not None else (lambda _cfg: 0.0)
    h0 = h_fn(grid.config(start_state))
    # the counter breaks exact (f, g, state) ties by insertion order and
    # keeps parents out of the heap comparison
    pushes = 0
    heap = [(h0, 0.0, start_state, pushes, None)]
    visited: dict[tuple[int, ...], tuple[int, ...] | None] = {}
    expansions = 0
    expansion_log: list | None = [] if track_expansions else None
    status = "exhausted"
    final_state = None

    while heap:
        if expansions >= budget.max_expansions:
            status = "budget_exceeded"
            break
        if budget.max_time is not None and \
                time.perf_counter() - t0 > budget.max_time:
            status = "budget_exceeded"
            break
        f, g, state, _, parent = heapq.heappop(heap)
        if state in visited:
            continue
        visited[state] = parent
        expansions += 1
        if expansion_log is not None:
            expansion_log.append((expansions, f, g) + grid.config(state))
        if state == goal_state:
            status = "solved"
            final_state = state
            break
        for ns, moved, step_cost in grid.moves(state):
            if ns in visited:
                continue
            if robot_blocked(moved, ns):
                continue
            moved_cfg = grid.robot_config(ns, moved)
            clash = False
            for other in range(len(robots)):
                if other == moved:
                    continue
                if shapes_overlap(robots[moved], moved_cfg, robots[other],
                                  grid.robot_config(ns, other)):
                    clash = True
                    break
            if clash:
                continue
            ng = g + step_cost
            nh = h_fn(grid.config(ns))
            pushes += 1
            heapq.heappush(heap, (ng + nh, ng, ns, pushes, state))

    elapsed = time.perf_counter() - t0
    if status == "solved":
        states = []
        cursor = final_state
        while cursor is not None:
            states.append(cursor)
            cursor = visited[cursor]
        states.reverse()
        path = [grid.config(s) for s in states]
        return PlanResult("solved", path, path_cost(path, robots), expansions,
                          elapsed, expansion_log)
    return PlanResult(status, [], math.inf, expansions, elapsed, expansion_log)


def path_cost(path: Sequence[CompositeState],
              shapes: Sequence[RobotShape]) -> float:
    """Sum over robots of Euclidean arc length; rectangle rotation adds
    effective_radius * |wrapped angle step|."""
    if len(path) < 2:
        return 0.0
    offsets = []
    off = 0
    for s in shapes:
        offsets.append(off)
        off += s.dof
    total = 0.0
    for prev, cur in zip(path, path[1:]):
        for r, shape in enumerate(shapes):
            o = offsets[r]
            total += math.hypot(cur[o] - prev[o], cur[o + 1] - prev[o + 1])
            if isinstance(shape, Rectangle):
                dtheta = wrap_angle(cur[o + 2] - prev[o + 2])
                total += shape.effective_radius * abs(dtheta)
    return total


def validate_path(problem: PlanProblem,
                  path: Sequence[CompositeState]) -> tuple[bool, str | None]:
    """Independent re-check of a path: collisions at every state plus
    one-robot-one-axis grid-step adjacency between consecutive states."""
    if not path:
        return False, "empty path"
    grid = _Grid(problem)
    robots = problem.robots
    offsets = grid.offsets
    for k, state in enumerate(path):
        if len(state) != grid.total_dof:
            return False, f"state {k}: wrong dimension"
        for r, shape in enumerate(robots):
            cfg = state[offsets[r]:offsets[r] + shape.dof]
            if shape_in_collision(problem.env, shape, cfg):
                return False, f"state {k}: robot {r} collides with environment"
        for i in range(len(robots)):
            for j in range(i + 1, len(robots)):
                if shapes_overlap(robots[i],
                                  state[offsets[i]:offsets[i] + robots[i].dof],
                                  robots[j],
                                  state[offsets[j]:offsets[j] + robots[j].dof]):
                    return False, f"state {k}: robots {i} and {j} overlap"
    for k in range(1, len(path)):
        prev, cur = path[k - 1], path[k]
        changed = []
        for r, shape in enumerate(robots):
            o = offsets[r]
            for local in range(shape.dof):
                a, b = prev[o + local], cur[o + local]
                delta = wrap_angle(b - a) if local == 2 else b - a
                if abs(delta) > STEP_TOL:
                    step = grid.bin if local == 2 else grid.res
                    changed.append((r, local, abs(delta), step))
        if len(changed) != 1:
            return False, f"transition {k}: expected exactly one moved axis, " \
                          f"got {len(changed)}"
        _, _, magnitude, step = changed[0]
        if abs(magnitude - step) > STEP_TOL:
            return False, f"transition {k}: step size {magnitude} != {step}"
    return True, None


# ---- JSON interchange ------------------------------------------------------

def _shape_to_json(shape: RobotShape) -> dict:
    if isinstance(shape, Disc):
        return {"type": "disc", "radius": shape.radius}
    return {"type": "rectangle", "width": shape.width, "height": shape.height}


def _shape_from_json(data: dict) -> RobotShape:
    kind = data.get("type")
    if kind == "disc":
        return Disc(float(data["radius"]))
    if kind == "rectangle":
        return Rectangle(float(data["width"]), float(data["height"]))
    raise ValueError(f"unknown robot type {kind!r}")


def problem_to_json(problem: PlanProblem,
                    budget: PlanBudget | None = None) -> dict:
    out = {
        "env": problem.env.to_json(),
        "robots": [_shape_to_json(s) for s in problem.robots],
        "starts": [list(s) for s in problem.starts],
        "goals": [list(g) for g in problem.goals],
        "grid_resolution": problem.grid_resolution,
        "rotation_bin": problem.rotation_bin,
    }
    if budget is not None:
        out["budget"] = {"max_expansions": budget.max_expansions,
                         "max_time": budget.max_time}
    return out


def problem_from_json(data: dict) -> tuple[PlanProblem, PlanBudget]:
    try:
        env = Environment.from_json(data["env"])
        robots = [_shape_from_json(r) for r in data["robots"]]
        starts = [tuple(map(float, s)) for s in data["starts"]]
        goals = [tuple(map(float, g)) for g in data["goals"]]
        resolution = float(data["grid_resolution"])
        rotation_bin = float(data.get("rotation_bin", DEFAULT_ROTATION_BIN))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"invalid problem description: {exc}") from exc
    problem = PlanProblem(env, robots, starts, goals, resolution, rotation_bin)
    b = data.get("budget", {})
    budget = PlanBudget(int(b.get("max_expansions", PlanBudget.max_expansions)),
                        b.get("max_time"))
    return problem, budget


def load_problem(path) -> tuple[PlanProblem, PlanBudget]:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_json(json.load(fh))


def result_to_json(result: PlanResult) -> dict:
    """Result fields for export.  Wall-clock time is deliberately excluded
    so identical runs produce byte-identical files."""
    return {
        "status": result.status,
        "cost": result.cost if math.isfinite(result.cost) else None,
        "samples_placed": result.samples_placed,
        "path": [list(s) for s in result.path],
    }


def save_result(result: PlanResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result_to_json(result), fh, indent=2)
        fh.write("\n")


def write_expansions_csv(result: PlanResult, path,
                         shapes: Sequence[RobotShape]) -> None:
    if result.expansions is None:
        raise ValueError("planner was run without expansion tracking")
    headers = ["step", "f", "g"]
    for r, shape in enumerate(shapes):
        headers.extend([f"x{r}", f"y{r}"])
        if isinstance(shape, Rectangle):
            headers.append(f"theta{r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(headers) + "\n")
        for row in result.expansions:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")
