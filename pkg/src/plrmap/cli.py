"""Command-line front end: build trees, query them, evaluate error maps,
and run the grid planner.  Every run is a pure function of its argument
vector and input files, so repeated runs write byte-identical outputs.

Exit codes: 0 success, 1 usage, 2 invalid input data, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, planner
from .geometry import Environment
from .oracles import (RoadmapOracle, VisibilityGraphOracle, build_prm_star,
                      build_visibility_graph)
from .plr import BuildParams, Cell, PlrTree, build_plr, deserialize, serialize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def _parse_point(text: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise _UsageError(f"invalid point {text!r}: {exc}") from exc
    if len(parts) < 2:
        raise _UsageError(f"point needs at least 2 components: {text!r}")
    return parts


def _load_tree(path: str) -> PlrTree:
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def _make_oracle(kind: str, env: Environment, goal, prm_samples: int,
                 seed: int):
    if kind == "vg":
        return VisibilityGraphOracle(env, build_visibility_graph(env, goal))
    return RoadmapOracle(env, build_prm_star(env, goal, prm_samples, seed))


def _cmd_build(args) -> int:
    env = Environment.load(args.env)
    goal = _parse_point(args.goal)
    oracle = _make_oracle(args.oracle, env, goal, args.prm_samples, args.seed)
    root = Cell.from_bounds(env.lo, env.hi)
    params = BuildParams(max_depth=args.max_depth,
                         error_threshold=args.threshold)
    tree = build_plr(oracle, root, params)
    data = serialize(tree)
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"leaves {tree.leaf_count}")
    hist = tree.depth_histogram()
    print("depth_histogram " + " ".join(f"{d}:{c}" for d, c in hist.items()))
    print(f"bytes {len(data)}")
    return EXIT_OK


def _cmd_query(args) -> int:
    tree = _load_tree(args.tree)
    point = _parse_point(args.point)
    value = tree.query(point)
    print("inf" if value == float("inf") else _fmt(value))
    return EXIT_OK


def _cmd_eval(args) -> int:
    tree = _load_tree(args.tree)
    env = Environment.load(args.env)
    goal = _parse_point(args.goal)
    reference = _make_oracle(args.reference, env, goal, args.prm_samples,
                             args.seed)
    if tree.dimension != reference.dimension:
        raise ValueError(f"tree dimension {tree.dimension} does not match "
                         f"reference dimension {reference.dimension}")
    report = analysis.error_map(tree, reference, args.grid)
    footprint = analysis.memory_footprint(tree)
    payload = report.to_dict()
    payload["tree_bytes"] = footprint
    print(f"max_error {_fmt(report.max_error)}")
    print(f"mean_error {_fmt(report.mean_error)}")
    print(f"bytes {footprint}")
    if args.compare_prm:
        raw = _make_oracle("prm", env, goal, args.prm_samples, args.seed)
        raw_report = analysis.error_map(raw, reference, args.grid,
                                        region=tree.root_cell)
        payload["compare_prm_max_error"] = raw_report.max_error
        payload["compare_prm_mean_error"] = raw_report.mean_error
        print(f"prm_max_error {_fmt(raw_report.max_error)}")
        print(f"prm_mean_error {_fmt(raw_report.mean_error)}")
    analysis.write_report_json(payload, args.out_prefix + ".json")
    analysis.write_heatmap_csv(report, args.out_prefix + ".csv")
    analysis.write_heatmap_pgm(report, args.out_prefix + ".pgm")
    return EXIT_OK


def _cmd_plan(args) -> int:
    problem, budget = planner.load_problem(args.problem)
    if args.max_expansions is not None or args.max_time is not None:
        budget = planner.PlanBudget(
            args.max_expansions if args.max_expansions is not None
            else budget.max_expansions,
            args.max_time if args.max_time is not None else budget.max_time)
    heuristic = None
    if args.trees != "none":
        paths = args.trees.split(",")
        if len(paths) != len(problem.robots):
            raise ValueError(f"{len(paths)} trees for {len(problem.robots)} "
                             f"robots")
        trees = [_load_tree(p) for p in paths]
        heuristic = planner.make_plr_heuristic(trees, problem.robots)
    result = planner.bl_plan(problem, heuristic, budget,
                             track_expansions=args.expansions_csv is not None)
    planner.save_result(result, args.out)
    if args.expansions_csv is not None:
        planner.write_expansions_csv(result, args.expansions_csv,
                                     problem.robots)
    print(f"status {result.status}")
    cost = "inf" if result.cost == float("inf") else _fmt(result.cost)
    print(f"cost {cost}")
    print(f"samples {result.samples_placed}")
    print(f"time {_fmt(result.elapsed)}")
    return EXIT_BUDGET if result.status == "budget_exceeded" else EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="plrmap",
                     description="Piecewise-linear distance trees: build, "
                                 "query, evaluate, plan.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a PLR file from an oracle")
    p.add_argument("--env", required=True)
    p.add_argument("--goal", required=True, help="goal as x,y")
    p.add_argument("--oracle", choices=["vg", "prm"], default="vg")
    p.add_argument("--prm-samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-depth", type=int, default=9)
    p.add_argument("--threshold", type=float, default=None,
                   help="center-error split threshold (default: 1%% of the "
                        "workspace diameter)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_build)

    p = sub.add_parser("query", help="evaluate a PLR file at a point")
    p.add_argument("--tree", required=True)
    p.add_argument("--point", required=True, help="query as x,y")
    p.set_defaults(fn=_cmd_query)

    p = sub.add_parser("eval", help="error map of a tree against a reference")
    p.add_argument("--tree", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--goal", required=True, help="goal as x,y")
    p.add_argument("--reference", choices=["vg", "prm"], default="vg")
    p.add_argument("--prm-samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--compare-prm", action="store_true",
                   help="also report the raw PRM oracle's error on the grid")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("plan", help="run the grid planner on a problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--trees", default="none",
                   help="comma-separated PLR files, one per robot, or 'none'")
    p.add_argument("--max-expansions", type=int, default=None)
    p.add_argument("--max-time", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--expansions-csv", default=None)
    p.set_defaults(fn=_cmd_plan)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
