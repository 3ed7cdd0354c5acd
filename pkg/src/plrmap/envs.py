"""Benchmark environment fixtures.

The planning literature describes these worlds only as figures, so the
concrete coordinates here are the recorded fixtures for every test and
benchmark in this repository.

Two conventions keep the fixtures well behaved:

* Every workspace carries a sealed ring frame of overlapping rectangles
  flush with the bounds.  Interior walls terminate INSIDE the frame (or
  inside each other), so the permissive grazing-visibility rule never
  finds a zero-width channel around a wall end.
* Maze walls are aligned with the depth-9 cell grid of the unit box
  (x multiples of 1/32, y multiples of 1/16), so wall cells split cleanly.
"""

from __future__ import annotations

from .geometry import Environment, Polygon

RING = 0.0625  # frame thickness, 1/16 of the unit box


def box_obstacle(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    """Axis-aligned rectangular obstacle (CCW)."""
    return Polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def ring_frame(thickness: float = RING) -> list[Polygon]:
    """Four overlapping rectangles sealing the unit box border."""
    return [
        box_obstacle(0.0, 0.0, 1.0, thickness),
        box_obstacle(0.0, 1.0 - thickness, 1.0, 1.0),
        box_obstacle(0.0, 0.0, thickness, 1.0),
        box_obstacle(1.0 - thickness, 0.0, 1.0, 1.0),
    ]


def empty_box(lo=(0.0, 0.0), hi=(1.0, 1.0)) -> Environment:
    """Obstacle-free workspace; the toy world for exact Euclidean costs."""
    return Environment(lo, hi)


MAZE_GOAL = (0.5, 0.15625)


def maze() -> Environment:
    """Serpentine maze: three walls with alternating door tunnels of
    width 1/16, depth 1/8.

    Optimal paths from the top region wind through all three doors, which
    is where sampled roadmaps lose accuracy.  Wall ends overlap the frame.

    Obstacle placement is tuned to the BSP split hierarchy: every face
    lies on the depth-9 cell grid and every wall is exactly two cell rows
    thick centered on y = 0.25, 0.5, 0.75.  A cell whose corners straddle
    a wall then has its center either inside the wall or exactly on a
    closed face (both evaluate to +inf), which forces the split rule to
    keep refining; one-sided boundary fits can only freeze at depth >= 8
    where their extrapolation error is small.
    """
    walls = []
    for c, door_left in ((0.25, False), (0.5, True), (0.75, False)):
        y0, y1 = c - 0.0625, c + 0.0625
        if door_left:
            walls.append(box_obstacle(0.0, y0, 0.15625, y1))
            walls.append(box_obstacle(0.21875, y0, 1.0, y1))
        else:
            walls.append(box_obstacle(0.0, y0, 0.78125, y1))
            walls.append(box_obstacle(0.84375, y0, 1.0, y1))
    return Environment((0.0, 0.0), (1.0, 1.0), ring_frame(0.125) + walls)


SINGLE_DOOR_START = (0.2, 0.5)
SINGLE_DOOR_GOAL = (0.8, 0.5)


def single_door() -> Environment:
    """Two large rooms joined by a narrow door in a thin dividing wall."""
    return Environment((0.0, 0.0), (1.0, 1.0), ring_frame() + [
        box_obstacle(0.48, 0.0, 0.52, 0.44),
        box_obstacle(0.48, 0.56, 0.52, 1.0),
    ])


FOUR_ROOMS_STARTS = [(0.24, 0.24), (0.76, 0.76)]
FOUR_ROOMS_GOALS = [(0.76, 0.76), (0.24, 0.24)]


def four_rooms() -> Environment:
    """Four rooms around an open central region; both robots cross it."""
    return Environment((0.0, 0.0), (1.0, 1.0), ring_frame() + [
        box_obstacle(0.48, 0.0, 0.52, 0.40),
        box_obstacle(0.48, 0.60, 0.52, 1.0),
        box_obstacle(0.0, 0.48, 0.40, 0.52),
        box_obstacle(0.60, 0.48, 1.0, 0.52),
    ])


CROSSING_STARTS = [(0.12, 0.5), (0.5, 0.12)]
CROSSING_GOALS = [(0.88, 0.5), (0.5, 0.88)]


def crossing_corridors() -> Environment:
    """Free space is the union of two orthogonal corridors; the robots
    must negotiate the shared crossing."""
    return Environment((0.0, 0.0), (1.0, 1.0), ring_frame() + [
        box_obstacle(0.0, 0.0, 0.4, 0.4),
        box_obstacle(0.6, 0.0, 1.0, 0.4),
        box_obstacle(0.0, 0.6, 0.4, 1.0),
        box_obstacle(0.6, 0.6, 1.0, 1.0),
    ])
