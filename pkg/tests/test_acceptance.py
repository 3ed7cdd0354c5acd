"""Acceptance suite: one test per exit criterion, each printing a
PASS/FAIL line with the measured numbers."""

import json
import math
import time

import numpy as np
import pytest

import plrmap
from plrmap import (BuildParams, Cell, Disc, FunctionOracle,
                    PlanBudget, PlanProblem, PlrTree, bl_plan, build_plr,
                    check_bounds, compute_coefficients, deserialize,
                    error_map, estimate_lipschitz, make_plr_heuristic,
                    memory_footprint, serialize, validate_path, vg_distance)
from plrmap.analysis import grid_points
from plrmap.cli import main
from plrmap.geometry import free_mask
from plrmap.plr import Leaf
from plrmap.planner import problem_to_json
from plrmap.envs import (CROSSING_GOALS, CROSSING_STARTS, FOUR_ROOMS_GOALS,
                         FOUR_ROOMS_STARTS, SINGLE_DOOR_GOAL,
                         SINGLE_DOOR_START, crossing_corridors, four_rooms,
                         single_door)
from test_plr import random_tree, trees_equal

UNIT = Cell.from_bounds((0.0, 0.0), (1.0, 1.0))


def record(criterion: str, ok: bool, detail: str):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_toy_plane_exactness():
    samples = [((0.0, 0.0), 0.0), ((1.0, 0.0), 1.0),
               ((1.0, 1.0), math.sqrt(2.0))]
    got = compute_coefficients(samples)
    # independent oracle: exact 3x3 solve
    a = np.array([[1, 0, 0], [1, 1, 0], [1, 1, 1]], dtype=float)
    want = np.linalg.solve(a, np.array([0.0, 1.0, math.sqrt(2.0)]))
    coeff_err = float(np.abs(got - np.array([0.0, 1.0, math.sqrt(2.0) - 1.0])).max())
    solver_err = float(np.abs(got - want).max())
    tree = PlrTree(2, UNIT, Leaf(got))
    query_err = abs(tree.query((1.0, 1.0)) - math.sqrt(2.0))
    ok = coeff_err <= 1e-12 and solver_err <= 1e-12 and query_err <= 1e-12
    record("1 toy-plane", ok,
           f"coeff err {coeff_err:.2e}, query err {query_err:.2e}")


def test_criterion_2_theorem2_bound_suite(euclid_tree_depth9):
    tree, oracle = euclid_tree_depth9
    bound = 2.5 * 1.0 * (2.0 ** -4) * math.sqrt(2.0)
    rep = error_map(tree, oracle, 256)
    kappa_hat = estimate_lipschitz(oracle, UNIT, 20000, seed=41)
    bc = check_bounds(tree, oracle, kappa=1.1 * kappa_hat,
                      samples_per_cell=150, seed=42)
    for w in bc.witnesses:
        print("violation witness cell:", w)
    ok = rep.max_error <= bound and bc.violations == 0
    record("2 theorem-2 bound", ok,
           f"max err {rep.max_error:.4f} <= {bound:.4f}, "
           f"violations {bc.violations}/{bc.cells_checked}")


def test_criterion_3_lemma1_suite(euclid_tree_depth9):
    tree, oracle = euclid_tree_depth9
    samples_per_cell = 142  # 142*141/2 = 10011 pairs per cell
    bc = check_bounds(tree, oracle, kappa=1.0,
                      samples_per_cell=samples_per_cell, seed=43)
    for w in bc.witnesses:
        print("violation witness cell:", w)
    pairs = samples_per_cell * (samples_per_cell - 1) // 2
    ok = bc.lemma_violations == 0 and pairs >= 10_000 and bc.cells_checked > 0
    record("3 lemma-1 spread", ok,
           f"{pairs} pairs/cell over {bc.cells_checked} cells, "
           f"lemma violations {bc.lemma_violations}, "
           f"worst spread ratio {bc.lemma_worst_ratio:.3f}")


def test_criterion_4_table_ordering(maze_env, maze_vg_oracle, maze_prm_10k):
    root = Cell.from_bounds(maze_env.lo, maze_env.hi)
    tree_vg = build_plr(maze_vg_oracle, root, BuildParams(max_depth=9))
    tree_prm = build_plr(maze_prm_10k, root, BuildParams(max_depth=9))
    rep_vg = error_map(tree_vg, maze_vg_oracle, 256)
    rep_prm = error_map(tree_prm, maze_vg_oracle, 256)
    rep_raw = error_map(maze_prm_10k, maze_vg_oracle, 256, region=root)
    ordering = rep_vg.max_error <= rep_prm.max_error <= rep_raw.max_error
    rm = maze_prm_10k.roadmap
    plr_bytes = memory_footprint(tree_vg)
    roadmap_bytes = rm.n_vertices * 16 + rm.n_edges * 24
    size_ok = plr_bytes <= 0.05 * roadmap_bytes
    record("4 table-ordering", ordering and size_ok,
           f"max errors {rep_vg.max_error:.4f} <= {rep_prm.max_error:.4f} "
           f"<= {rep_raw.max_error:.4f}; {plr_bytes} B vs "
           f"{roadmap_bytes} B roadmap "
           f"({100.0 * plr_bytes / roadmap_bytes:.2f}%)")


def test_criterion_5_linear_exactness_property():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(50):
        bias = float(rng.normal())
        slopes = rng.normal(size=2)
        oracle = FunctionOracle(
            lambda x, b=bias, s=slopes: b + s[0] * x[0] + s[1] * x[1], 2,
            fn_many=lambda p, b=bias, s=slopes: b + p @ s)
        depth = int(rng.integers(0, 11))
        z = float(rng.choice([0.0, 1e-8, 1e-3, 0.05]))
        tree = build_plr(oracle, UNIT,
                         BuildParams(max_depth=depth, error_threshold=z))
        pts, _ = grid_points(UNIT, 32)
        err = float(np.abs([tree.query(p) - oracle.evaluate(p)
                            for p in pts]).max())
        worst = max(worst, err)
    record("5 linear exactness", worst <= 1e-9,
           f"worst grid error {worst:.2e} over 50 random affine oracles")


def test_criterion_6_serialization():
    rng = np.random.default_rng(77)
    all_ok = True
    for i in range(100):
        tree = random_tree(rng, dimension=int(rng.integers(1, 4)))
        data = serialize(tree)
        back = deserialize(data)
        if not trees_equal(tree, back) or serialize(back) != data:
            all_ok = False
            break
    toy = PlrTree(2, UNIT, Leaf((0.0, 1.0, math.sqrt(2.0) - 1.0)))
    size = len(serialize(toy))
    record("6 serialization", all_ok and size == 70,
           f"100 round-trips bit-identical, single-leaf size {size} B")


def test_criterion_7_heuristic_speedup():
    env = single_door()
    robot = Disc(0.04)
    problem = PlanProblem(env, [robot], [SINGLE_DOOR_START],
                          [SINGLE_DOOR_GOAL], 0.02)
    plain = bl_plan(problem)
    vg = plrmap.build_visibility_graph(env, SINGLE_DOOR_GOAL)
    oracle = plrmap.VisibilityGraphOracle(env, vg)
    tree = build_plr(oracle, Cell.from_bounds(env.lo, env.hi),
                     BuildParams(max_depth=9))
    informed = bl_plan(problem, heuristic=make_plr_heuristic([tree], [robot]))
    ok_plain, why_plain = validate_path(problem, plain.path)
    ok_informed, why_informed = validate_path(problem, informed.path)
    ratio = informed.samples_placed / plain.samples_placed
    ok = (plain.status == informed.status == "solved"
          and ok_plain and ok_informed
          and informed.samples_placed * 3 <= plain.samples_placed
          and informed.cost <= 1.1 * plain.cost)
    record("7 heuristic speedup", ok,
           f"samples {informed.samples_placed} vs {plain.samples_placed} "
           f"(ratio {ratio:.3f}), costs {informed.cost:.3f} vs "
           f"{plain.cost:.3f}")


@pytest.mark.parametrize("name,envf,starts,goals", [
    ("four-rooms", four_rooms, FOUR_ROOMS_STARTS, FOUR_ROOMS_GOALS),
    ("crossing", crossing_corridors, CROSSING_STARTS, CROSSING_GOALS),
])
def test_criterion_8_multi_robot(name, envf, starts, goals):
    env = envf()
    robots = [Disc(0.04), Disc(0.04)]
    res_cell = 0.02
    problem = PlanProblem(env, robots, starts, goals, res_cell)
    trees = []
    vg_sum = 0.0
    for s, g in zip(starts, goals):
        vg = plrmap.build_visibility_graph(env, g)
        vg_sum += vg_distance(vg, env, s)
        oracle = plrmap.VisibilityGraphOracle(env, vg)
        trees.append(build_plr(oracle, Cell.from_bounds(env.lo, env.hi),
                               BuildParams(max_depth=9)))
    res = bl_plan(problem, heuristic=make_plr_heuristic(trees, robots),
                  budget=PlanBudget(max_expansions=1_000_000))
    ok_path, why = validate_path(problem, res.path)
    lower = vg_sum - len(robots) * res_cell * math.sqrt(2.0)
    ok = (res.status == "solved" and ok_path and res.cost >= lower)
    record(f"8 multi-robot {name}", ok,
           f"status {res.status}, samples {res.samples_placed}, "
           f"cost {res.cost:.3f} >= lower bound {lower:.3f}; {why or 'valid'}")


def test_criterion_9_query_latency(maze_env, maze_prm_10k):
    root = Cell.from_bounds(maze_env.lo, maze_env.hi)
    tree = build_plr(maze_prm_10k, root, BuildParams(max_depth=9))
    rng = np.random.default_rng(90)
    pts: list = []
    while len(pts) < 100_000:
        batch = rng.uniform(0, 1, size=(50_000, 2))
        keep = free_mask(maze_env, batch)
        pts.extend(map(tuple, batch[keep]))
    pts = pts[:100_000]

    q = tree.query
    clock = time.perf_counter_ns
    plr_times = np.empty(len(pts))
    for i, p in enumerate(pts):
        t0 = clock()
        q(p)
        plr_times[i] = clock() - t0
    rm, env = maze_prm_10k.roadmap, maze_env
    prm_times = np.empty(len(pts))
    for i, p in enumerate(pts):
        t0 = clock()
        plrmap.prm_distance(rm, env, p)
        prm_times[i] = clock() - t0
    plr_median = float(np.median(plr_times))
    prm_median = float(np.median(prm_times))
    speedup = prm_median / plr_median
    record("9 query latency", speedup >= 100.0,
           f"median PLR {plr_median / 1e3:.2f} us vs median roadmap "
           f"{prm_median / 1e3:.2f} us, speedup {speedup:.0f}x")


def test_criterion_10_determinism(tmp_path):
    env_path = str(tmp_path / "door.json")
    single_door().save(env_path)
    goal = f"{SINGLE_DOOR_GOAL[0]},{SINGLE_DOOR_GOAL[1]}"

    tree_files = []
    for name in ("a.plr", "b.plr"):
        out = str(tmp_path / name)
        assert main(["build", "--env", env_path, "--goal", goal,
                     "--oracle", "vg", "--max-depth", "9",
                     "--out", out]) == 0
        tree_files.append(out)
    vg_identical = open(tree_files[0], "rb").read() == \
        open(tree_files[1], "rb").read()

    prm_files = []
    for name in ("pa.plr", "pb.plr"):
        out = str(tmp_path / name)
        assert main(["build", "--env", env_path, "--goal", goal,
                     "--oracle", "prm", "--prm-samples", "500",
                     "--seed", "5", "--max-depth", "7", "--out", out]) == 0
        prm_files.append(out)
    prm_identical = open(prm_files[0], "rb").read() == \
        open(prm_files[1], "rb").read()

    problem = PlanProblem(single_door(), [Disc(0.04)], [SINGLE_DOOR_START],
                          [SINGLE_DOOR_GOAL], 0.02)
    problem_path = tmp_path / "problem.json"
    problem_path.write_text(json.dumps(problem_to_json(problem)))
    results = []
    for name in ("r1.json", "r2.json"):
        out = tmp_path / name
        assert main(["plan", "--problem", str(problem_path),
                     "--trees", tree_files[0], "--out", str(out)]) == 0
        results.append(out.read_bytes())
    plan_identical = results[0] == results[1]

    ok = vg_identical and prm_identical and plan_identical
    record("10 determinism", ok,
           f"vg build {vg_identical}, prm build {prm_identical}, "
           f"plan result {plan_identical}")
