import pytest

import plrmap
from plrmap import BuildParams, Cell
from plrmap.envs import maze, MAZE_GOAL

MAZE_PRM_SEED = 123


@pytest.fixture(scope="session")
def maze_env():
    return maze()


@pytest.fixture(scope="session")
def maze_vg_oracle(maze_env):
    vg = plrmap.build_visibility_graph(maze_env, MAZE_GOAL)
    return plrmap.VisibilityGraphOracle(maze_env, vg)


@pytest.fixture(scope="session")
def maze_prm_10k(maze_env):
    """10k-sample roadmap shared by the Table-I and latency criteria."""
    rm = plrmap.build_prm_star(maze_env, MAZE_GOAL, 10000, seed=MAZE_PRM_SEED)
    return plrmap.RoadmapOracle(maze_env, rm)


@pytest.fixture(scope="session")
def euclid_tree_depth9():
    """Depth-9 PLR of the exact Euclidean toy on the unit box (z = 0)."""
    oracle = plrmap.EuclideanOracle((0.0, 0.0))
    root = Cell.from_bounds((0.0, 0.0), (1.0, 1.0))
    params = BuildParams(max_depth=9, error_threshold=0.0)
    return plrmap.build_plr(oracle, root, params), oracle
