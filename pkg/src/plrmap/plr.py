"""Piecewise-linear regression trees over distance oracles.

A PLR is a binary space partition of an axis-aligned box with cyclic split
axes and midpoint splits.  Each leaf stores the coefficients of an affine
model c . [1, x] fit to oracle samples in the leaf's cell, or a "blocked"
marker when too few samples were finite.  Queries locate the leaf for a
point and evaluate one dot product.
"""

from __future__ import annotations

import math
import struct
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

BOUNDS_TOL = 1e-12

MAGIC = b"PLR1"
FORMAT_VERSION = 1


class PlrFormatError(ValueError):
    """Malformed PLR1 byte stream; carries the offending byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Cell:
    """Axis-aligned box with its depth and the axis it would split on."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    depth: int = 0
    split_axis: int = 0

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("cell lo/hi must be same nonzero dimension")
        for a, b in zip(self.lo, self.hi):
            if not a < b:
                raise ValueError(f"cell requires lo < hi, got {self.lo}/{self.hi}")
        if not 0 <= self.split_axis < len(self.lo):
            raise ValueError("split_axis out of range")

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    @property
    def longest_edge(self) -> float:
        return max(b - a for a, b in zip(self.lo, self.hi))

    def contains(self, x: Sequence[float], tol: float = BOUNDS_TOL) -> bool:
        return all(a - tol <= v <= b + tol
                   for v, a, b in zip(x, self.lo, self.hi))

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float]) -> "Cell":
        return cls(tuple(float(v) for v in lo), tuple(float(v) for v in hi))


class Internal:
    __slots__ = ("axis", "split_value", "left", "right")

    def __init__(self, axis: int, split_value: float, left=None, right=None):
        self.axis = axis
        self.split_value = split_value
        self.left = left
        self.right = right


class Leaf:
    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Sequence[float]):
        self.coefficients = tuple(float(c) for c in coefficients)

    def evaluate(self, x: Sequence[float]) -> float:
        c = self.coefficients
        s = c[0]
        for j, v in enumerate(x):
            s += c[j + 1] * v
        return s


class BlockedLeaf:
    __slots__ = ()


PlrNode = Internal | Leaf | BlockedLeaf


@dataclass(frozen=True)
class BuildParams:
    """Split policy: refine until max_depth, or while the center-point
    error exceeds error_threshold (None = 1% of the root cell diameter)."""

    max_depth: int = 9
    error_threshold: float | None = None
    sample_scheme: str = "corners_plus_center"

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.error_threshold is not None and self.error_threshold < 0:
            raise ValueError("error_threshold must be >= 0")
        if self.sample_scheme != "corners_plus_center":
            raise ValueError(f"unknown sample scheme {self.sample_scheme!r}")

    def resolved(self, root_cell: Cell) -> "BuildParams":
        if self.error_threshold is not None:
            return self
        diam = math.sqrt(sum((b - a) ** 2
                             for a, b in zip(root_cell.lo, root_cell.hi)))
        return BuildParams(self.max_depth, 0.01 * diam, self.sample_scheme)


def compute_coefficients(samples: Sequence[tuple[Sequence[float], float]]) -> np.ndarray:
    """Least-squares affine fit.

    Solves min_c sum_i (c . [1, x_i] - b_i)^2 and returns c ordered
    [bias, c_1 .. c_n].  Rank-deficient systems yield the minimum-norm
    solution.
    """
    if len(samples) == 0:
        raise ValueError("compute_coefficients requires at least one sample")
    pts = np.asarray([p for p, _ in samples], dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    values = np.asarray([v for _, v in samples], dtype=float)
    if not np.isfinite(pts).all() or not np.isfinite(values).all():
        raise ValueError("samples must be finite")
    a = np.hstack([np.ones((len(pts), 1)), pts])
    coeffs, *_ = np.linalg.lstsq(a, values, rcond=None)
    return coeffs


def base_points(cell: Cell) -> list[tuple[float, ...]]:
    """The 2^n cell corners (lexicographic bit order, axis 0 = LSB) plus
    the cell center, in that fixed order."""
    n = cell.dimension
    pts = []
    for k in range(1 << n):
        pts.append(tuple(cell.hi[j] if (k >> j) & 1 else cell.lo[j]
                         for j in range(n)))
    pts.append(cell.center)
    return pts


def fit_cell(cell: Cell, oracle) -> Leaf | BlockedLeaf:
    """Fit the cell's affine model from finite oracle samples at the base
    points; a cell with fewer than n+1 finite samples is blocked."""
    n = cell.dimension
    finite = []
    for p in base_points(cell):
        v = oracle.evaluate(p)
        if math.isfinite(v):
            finite.append((p, v))
    if len(finite) < n + 1:
        return BlockedLeaf()
    return Leaf(compute_coefficients(finite))


def should_split(cell: Cell, leaf: PlrNode, oracle,
                 params: BuildParams) -> bool:
    """Split decision for a fitted cell.

    Never split at max_depth.  Blocked cells keep refining (obstacle
    boundaries).  Fitted cells split when the center error exceeds the
    threshold, or when the center itself is infeasible (mixed cell).
    """
    if cell.depth >= params.max_depth:
        return False
    if isinstance(leaf, BlockedLeaf):
        return True
    if params.error_threshold is None:
        raise ValueError("error_threshold unresolved; use BuildParams.resolved")
    d_center = oracle.evaluate(cell.center)
    if not math.isfinite(d_center):
        return True
    return abs(leaf.evaluate(cell.center) - d_center) > params.error_threshold


def split_cell(cell: Cell) -> tuple[Cell, Cell]:
    """Halve the cell at the midpoint of its split axis; children advance
    to the next axis cyclically."""
    axis = cell.split_axis
    mid = 0.5 * (cell.lo[axis] + cell.hi[axis])
    n = cell.dimension
    child_axis = (axis + 1) % n
    left_hi = tuple(mid if j == axis else v for j, v in enumerate(cell.hi))
    right_lo = tuple(mid if j == axis else v for j, v in enumerate(cell.lo))
    left = Cell(cell.lo, left_hi, cell.depth + 1, child_axis)
    right = Cell(right_lo, cell.hi, cell.depth + 1, child_axis)
    return left, right


class PlrTree:
    """Immutable PLR with a flattened preorder index for fast queries."""

    def __init__(self, dimension: int, root_cell: Cell, root: PlrNode,
                 build_params: BuildParams | None = None):
        if root_cell.dimension != dimension:
            raise ValueError("root cell dimension mismatch")
        self.dimension = dimension
        self.root_cell = root_cell
        self.root = root
        self.build_params = build_params
        self._build_flat_index()

    def _build_flat_index(self):
        tags: list[int] = []
        axes: list[int] = []
        splits: list[float] = []
        rights: list[int] = []
        coefs: list[tuple[float, ...] | None] = []
        stack: list[tuple[PlrNode, int]] = [(self.root, -1)]
        while stack:
            node, right_of = stack.pop()
            idx = len(tags)
            if right_of >= 0:
                rights[right_of] = idx
            if isinstance(node, Internal):
                tags.append(0)
                axes.append(node.axis)
                splits.append(node.split_value)
                rights.append(-1)
                coefs.append(None)
                stack.append((node.right, idx))
                stack.append((node.left, -1))
            elif isinstance(node, Leaf):
                tags.append(1)
                axes.append(0)
                splits.append(0.0)
                rights.append(-1)
                coefs.append(node.coefficients)
            elif isinstance(node, BlockedLeaf):
                tags.append(2)
                axes.append(0)
                splits.append(0.0)
                rights.append(-1)
                coefs.append(None)
            else:
                raise TypeError(f"unexpected node {node!r}")
        self._tags = tags
        self._axes = axes
        self._splits = splits
        self._rights = rights
        self._coefs = coefs
        self.node_count = len(tags)
        self.leaf_count = sum(1 for t in tags if t != 0)

    def query(self, x: Sequence[float]) -> float:
        return query(self, x)

    def locate(self, x: Sequence[float]):
        return locate(self, x)

    def serialize(self) -> bytes:
        return serialize(self)

    def leaves(self) -> Iterator[tuple[Cell, PlrNode]]:
        """Yield (cell, leaf) pairs over the leaf tiling of the root cell."""
        stack = [(self.root_cell, self.root)]
        while stack:
            cell, node = stack.pop()
            if isinstance(node, Internal):
                left_cell, right_cell = split_cell(cell)
                stack.append((right_cell, node.right))
                stack.append((left_cell, node.left))
            else:
                yield cell, node

    def depth_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for cell, _ in self.leaves():
            hist[cell.depth] = hist.get(cell.depth, 0) + 1
        return dict(sorted(hist.items()))


def build_plr(oracle, root_cell: Cell, params: BuildParams) -> PlrTree:
    """Worklist construction: fit each popped cell, split and enqueue its
    halves while the split rule fires.  Deterministic for fixed inputs."""
    if root_cell.dimension != oracle.dimension:
        raise ValueError(
            f"root cell dimension {root_cell.dimension} != oracle "
            f"dimension {oracle.dimension}")
    resolved = params.resolved(root_cell)
    root_holder: list[PlrNode | None] = [None]

    def attach(parent, side, node):
        if parent is None:
            root_holder[0] = node
        elif side == 0:
            parent.left = node
        else:
            parent.right = node

    queue: deque = deque([(root_cell, None, 0)])
    while queue:
        cell, parent, side = queue.popleft()
        payload = fit_cell(cell, oracle)
        if should_split(cell, payload, oracle, resolved):
            mid = 0.5 * (cell.lo[cell.split_axis] + cell.hi[cell.split_axis])
            node = Internal(cell.split_axis, mid)
            attach(parent, side, node)
            left_cell, right_cell = split_cell(cell)
            queue.append((left_cell, node, 0))
            queue.append((right_cell, node, 1))
        else:
            attach(parent, side, payload)
    return PlrTree(root_cell.dimension, root_cell, root_holder[0], resolved)


def _check_in_root(tree: PlrTree, x: Sequence[float]) -> None:
    if len(x) != tree.dimension:
        raise ValueError(
            f"query dimension {len(x)} != tree dimension {tree.dimension}")
    lo, hi = tree.root_cell.lo, tree.root_cell.hi
    for j in range(tree.dimension):
        v = x[j]
        if v < lo[j] - BOUNDS_TOL or v > hi[j] + BOUNDS_TOL:
            raise ValueError(f"point {tuple(x)} outside root cell on axis {j}")


def locate(tree: PlrTree, x: Sequence[float]) -> tuple[PlrNode, Cell]:
    """Descend to the leaf containing x; ties (x == split) go right."""
    _check_in_root(tree, x)
    node = tree.root
    cell = tree.root_cell
    while isinstance(node, Internal):
        left_cell, right_cell = split_cell(cell)
        if x[node.axis] < node.split_value:
            node, cell = node.left, left_cell
        else:
            node, cell = node.right, right_cell
    return node, cell


def query(tree: PlrTree, x: Sequence[float]) -> float:
    """Affine estimate at x from the containing leaf; +inf on blocked leaves."""
    _check_in_root(tree, x)
    tags = tree._tags
    axes = tree._axes
    splits = tree._splits
    rights = tree._rights
    i = 0
    while tags[i] == 0:
        i = i + 1 if x[axes[i]] < splits[i] else rights[i]
    if tags[i] == 2:
        return math.inf
    c = tree._coefs[i]
    s = c[0]
    for j in range(tree.dimension):
        s += c[j + 1] * x[j]
    return s


def serialize(tree: PlrTree) -> bytes:
    """Encode as PLR1: little-endian header, then the preorder node stream.

    Header: magic "PLR1", u8 version, u32 dimension, lo/hi as f64 pairs,
    u32 node count.  Internal: tag 0, u8 axis, f64 split.  Leaf: tag 1,
    n+1 f64 coefficients (bias first).  Blocked: tag 2.
    """
    n = tree.dimension
    out = bytearray()
    out += MAGIC
    out += struct.pack("<B", FORMAT_VERSION)
    out += struct.pack("<I", n)
    out += struct.pack(f"<{n}d", *tree.root_cell.lo)
    out += struct.pack(f"<{n}d", *tree.root_cell.hi)
    out += struct.pack("<I", tree.node_count)
    coef_fmt = f"<{n + 1}d"
    for tag, axis, split, coef in zip(tree._tags, tree._axes, tree._splits,
                                      tree._coefs):
        if tag == 0:
            out += struct.pack("<BBd", 0, axis, split)
        elif tag == 1:
            out += struct.pack("<B", 1)
            out += struct.pack(coef_fmt, *coef)
        else:
            out += struct.pack("<B", 2)
    return bytes(out)


def deserialize(data: bytes) -> PlrTree:
    """Decode a PLR1 byte string; raises PlrFormatError on malformed input."""
    buf = memoryview(data)
    offset = 0

    def take(n_bytes: int, what: str):
        nonlocal offset
        if offset + n_bytes > len(buf):
            raise PlrFormatError(f"truncated while reading {what}", offset)
        chunk = buf[offset:offset + n_bytes]
        offset += n_bytes
        return chunk

    if bytes(take(4, "magic")) != MAGIC:
        raise PlrFormatError("bad magic", 0)
    version = take(1, "version")[0]
    if version != FORMAT_VERSION:
        raise PlrFormatError(f"unsupported version {version}", 4)
    (n,) = struct.unpack("<I", take(4, "dimension"))
    if n == 0 or n > 255:
        raise PlrFormatError(f"dimension mismatch: invalid dimension {n}", 5)
    lo = struct.unpack(f"<{n}d", take(8 * n, "lower bounds"))
    hi = struct.unpack(f"<{n}d", take(8 * n, "upper bounds"))
    (node_count,) = struct.unpack("<I", take(4, "node count"))
    if node_count == 0:
        raise PlrFormatError("empty node stream", offset)
    root = None
    pending: list[list] = []
    for _ in range(node_count):
        node_offset = offset
        tag = take(1, "node tag")[0]
        if tag == 0:
            axis = take(1, "split axis")[0]
            if axis >= n:
                raise PlrFormatError(
                    f"dimension mismatch: split axis {axis} >= {n}", node_offset)
            (split,) = struct.unpack("<d", take(8, "split value"))
            node = Internal(axis, split)
        elif tag == 1:
            coeffs = struct.unpack(f"<{n + 1}d", take(8 * (n + 1), "coefficients"))
            node = Leaf(coeffs)
        elif tag == 2:
            node = BlockedLeaf()
        else:
            raise PlrFormatError(f"unknown node tag {tag}", node_offset)
        if root is None:
            root = node
        elif pending:
            parent = pending[-1]
            if parent[1] == 0:
                parent[0].left = node
                parent[1] = 1
            else:
                parent[0].right = node
                pending.pop()
        else:
            raise PlrFormatError("node stream has unattached extra node",
                                 node_offset)
        if tag == 0:
            pending.append([node, 0])
    if pending:
        raise PlrFormatError("node stream ended with incomplete internal node",
                             offset)
    if offset != len(buf):
        raise PlrFormatError("trailing data after node stream", offset)
    try:
        root_cell = Cell.from_bounds(lo, hi)
    except ValueError as exc:
        raise PlrFormatError(f"invalid root bounds: {exc}", 9) from exc
    return PlrTree(n, root_cell, root, build_params=None)
