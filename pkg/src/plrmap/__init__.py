"""plrmap: compress distance-to-goal fields into piecewise-linear BSP trees,
query them in microseconds, and use them as grid-planner heuristics."""

from .geometry import (Disc, Environment, Polygon, Rectangle, RobotShape,
                       point_in_free_space, segment_visible,
                       shape_in_collision, shapes_overlap)
from .oracles import (DistanceOracle, EuclideanOracle, FunctionOracle,
                      Roadmap, RoadmapOracle, VisibilityGraph,
                      VisibilityGraphOracle, build_prm_star,
                      build_visibility_graph, prm_distance, vg_distance)
from .plr import (BlockedLeaf, BuildParams, Cell, Internal, Leaf, PlrFormatError,
                  PlrTree, base_points, build_plr, compute_coefficients,
                  deserialize, fit_cell, locate, query, serialize,
                  should_split, split_cell)
from .analysis import (BoundCheck, ErrorReport, check_bounds, error_map,
                       estimate_lipschitz, memory_footprint)
from .planner import (CompositeState, PlanBudget, PlanProblem, PlanResult,
                      bl_plan, composite_heuristic, make_plr_heuristic,
                      path_cost, validate_path)

__version__ = "0.1.0"
