"""Quantitative evaluation of PLR trees: error maps against a reference
oracle, serialized-size accounting, Lipschitz estimation, and empirical
checks of the per-cell error bounds (value spread <= k*eps*sqrt(n), fit
error <= (5/2)*k*eps*sqrt(n) on certified obstacle-free cells)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
import numpy as np

from .oracles import DistanceOracle
from .plr import BlockedLeaf, Cell, PlrTree, base_points, serialize

BOUND_TOL = 1e-9
# interior probes per certification segment (spacing <= cell diagonal / 10)
_CERT_PROBES = 9


@dataclass
class ErrorReport:
    """Grid comparison |estimate - reference| over a cell."""

    grid_resolution: int
    max_error: float
    mean_error: float
    evaluated_points: int
    skipped_points: int
    heatmap: np.ndarray = field(repr=False)

    def to_dict(self, include_heatmap: bool = True) -> dict:
        out = {
            "grid_resolution": self.grid_resolution,
            "max_error": self.max_error,
            "mean_error": self.mean_error,
            "evaluated_points": self.evaluated_points,
            "skipped_points": self.skipped_points,
        }
        if include_heatmap:
            flat = [None if math.isnan(v) else v
                    for v in self.heatmap.ravel().tolist()]
            out["heatmap_shape"] = list(self.heatmap.shape)
            out["heatmap"] = flat
        return out


@dataclass
class BoundCheck:
    """Aggregate result of the per-cell bound checks."""

    kappa: float
    cells_checked: int
    worst_ratio: float
    violations: int
    lemma_worst_ratio: float = 0.0
    lemma_violations: int = 0
    theorem_violations: int = 0
    witnesses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "cells_checked": self.cells_checked,
            "worst_ratio": self.worst_ratio,
            "violations": self.violations,
            "lemma_worst_ratio": self.lemma_worst_ratio,
            "lemma_violations": self.lemma_violations,
            "theorem_violations": self.theorem_violations,
            "witnesses": self.witnesses,
        }


def grid_points(cell: Cell, resolution: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Uniform row-major grid over the cell, endpoints included."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    axes = [np.linspace(cell.lo[j], cell.hi[j], resolution)
            for j in range(cell.dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return pts, (resolution,) * cell.dimension


def _estimate_values(estimator, pts: np.ndarray) -> np.ndarray:
    if isinstance(estimator, PlrTree):
        return np.array([estimator.query(p) for p in pts], dtype=float)
    if isinstance(estimator, DistanceOracle):
        return np.asarray(estimator.evaluate_many(pts), dtype=float)
    raise TypeError(f"estimator must be a PlrTree or DistanceOracle, "
                    f"got {type(estimator).__name__}")


def error_map(estimator, reference: DistanceOracle, resolution: int,
              region: Cell | None = None) -> ErrorReport:
    """Evaluate |estimator - reference| on a uniform grid.

    Grid points where either side is infinite are skipped and counted;
    the heatmap stores NaN there.  `estimator` is a PLR tree or another
    oracle (for raw-oracle comparisons); `region` defaults to the tree's
    root cell.
    """
    if region is None:
        if not isinstance(estimator, PlrTree):
            raise ValueError("region is required for non-tree estimators")
        region = estimator.root_cell
    pts, shape = grid_points(region, resolution)
    est = _estimate_values(estimator, pts)
    ref = np.asarray(reference.evaluate_many(pts), dtype=float)
    ok = np.isfinite(est) & np.isfinite(ref)
    errors = np.full(len(pts), np.nan)
    errors[ok] = np.abs(est[ok] - ref[ok])
    evaluated = int(ok.sum())
    skipped = len(pts) - evaluated
    max_err = float(errors[ok].max()) if evaluated else 0.0
    mean_err = float(errors[ok].mean()) if evaluated else 0.0
    return ErrorReport(resolution, max_err, mean_err, evaluated, skipped,
                       errors.reshape(shape))


def memory_footprint(tree: PlrTree) -> int:
    """Serialized byte length; the canonical size figure for a tree."""
    return len(serialize(tree))


def estimate_lipschitz(oracle: DistanceOracle, region: Cell, pairs: int,
                       seed: int) -> float:
    """Empirical Lipschitz constant: max |d(p)-d(q)| / |p-q| over sampled
    finite-valued pairs in the region (0 if no valid pair)."""
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    rng = np.random.default_rng(seed)
    lo = np.asarray(region.lo)
    hi = np.asarray(region.hi)
    p = rng.uniform(lo, hi, size=(pairs, region.dimension))
    q = rng.uniform(lo, hi, size=(pairs, region.dimension))
    vp = np.asarray(oracle.evaluate_many(p), dtype=float)
    vq = np.asarray(oracle.evaluate_many(q), dtype=float)
    sep = np.linalg.norm(p - q, axis=1)
    ok = np.isfinite(vp) & np.isfinite(vq) & (sep > 1e-12)
    if not ok.any():
        return 0.0
    return float((np.abs(vp[ok] - vq[ok]) / sep[ok]).max())


def _certified(cell: Cell, oracle: DistanceOracle, pts: np.ndarray,
               values: np.ndarray) -> bool:
    """Obstacle-free certification proxy: every probe point and every
    subdivision point of every pairwise segment must have a finite value."""
    if not np.isfinite(values).all():
        return False
    m = len(pts)
    if m < 2:
        return True
    ii, jj = np.triu_indices(m, k=1)
    ts = (np.arange(1, _CERT_PROBES + 1) / (_CERT_PROBES + 1.0))
    # (pairs, probes, n) interior points of every segment
    seg = pts[ii][:, None, :] + ts[None, :, None] * (pts[jj] - pts[ii])[:, None, :]
    probe_vals = np.asarray(
        oracle.evaluate_many(seg.reshape(-1, cell.dimension)), dtype=float)
    return bool(np.isfinite(probe_vals).all())


def check_bounds(tree: PlrTree, oracle: DistanceOracle, kappa: float,
                 samples_per_cell: int, seed: int) -> BoundCheck:
    """Check the value-spread and fit-error bounds on certified cells.

    Per certified fitted leaf with longest edge eps: the spread of oracle
    values over drawn samples must stay within kappa*eps*sqrt(n), and the
    fit error within (5/2)*kappa*eps*sqrt(n).  Cells that fail the
    obstacle-free certification are excluded, not guessed.
    """
    if samples_per_cell < 2:
        raise ValueError("samples_per_cell must be >= 2")
    rng = np.random.default_rng(seed)
    n = tree.dimension
    sqrt_n = math.sqrt(n)
    cells_checked = 0
    worst_ratio = 0.0
    lemma_worst = 0.0
    violations = 0
    lemma_violations = 0
    theorem_violations = 0
    witnesses: list = []
    for cell, leaf in tree.leaves():
        if isinstance(leaf, BlockedLeaf):
            continue
        draws = rng.uniform(cell.lo, cell.hi, size=(samples_per_cell, n))
        base = np.asarray(base_points(cell), dtype=float)
        pts = np.vstack([base, draws])
        values = np.asarray(oracle.evaluate_many(pts), dtype=float)
        if not _certified(cell, oracle, pts, values):
            continue
        cells_checked += 1
        eps = cell.longest_edge
        v_draw = values[len(base):]
        spread = float(v_draw.max() - v_draw.min())
        lemma_bound = kappa * eps * sqrt_n
        coeffs = np.asarray(leaf.coefficients)
        l_draw = coeffs[0] + draws @ coeffs[1:]
        fit_err = float(np.abs(v_draw - l_draw).max())
        theorem_bound = 2.5 * kappa * eps * sqrt_n
        lemma_ratio = spread / lemma_bound if lemma_bound > 0 else math.inf
        theorem_ratio = fit_err / theorem_bound if theorem_bound > 0 else math.inf
        worst_ratio = max(worst_ratio, theorem_ratio)
        lemma_worst = max(lemma_worst, lemma_ratio)
        lemma_bad = spread > lemma_bound + BOUND_TOL
        theorem_bad = fit_err > theorem_bound + BOUND_TOL
        if lemma_bad:
            lemma_violations += 1
        if theorem_bad:
            theorem_violations += 1
        if lemma_bad or theorem_bad:
            violations += 1
            witnesses.append({
                "cell_lo": list(cell.lo),
                "cell_hi": list(cell.hi),
                "depth": cell.depth,
                "spread": spread,
                "lemma_bound": lemma_bound,
                "fit_error": fit_err,
                "theorem_bound": theorem_bound,
            })
    return BoundCheck(kappa, cells_checked, worst_ratio, violations,
                      lemma_worst, lemma_violations, theorem_violations,
                      witnesses)


def write_heatmap_csv(report: ErrorReport, path) -> None:
    """Row-major CSV of the error grid; NaN marks skipped points."""
    grid = report.heatmap
    if grid.ndim != 2:
        grid = grid.reshape(grid.shape[0], -1)
    with open(path, "w", encoding="utf-8") as fh:
        for row in grid:
            fh.write(",".join("nan" if math.isnan(v) else repr(float(v))
                              for v in row))
            fh.write("\n")


def write_heatmap_pgm(report: ErrorReport, path) -> None:
    """Binary 8-bit PGM: errors min-max normalized, NaN rendered black."""
    grid = report.heatmap
    if grid.ndim != 2:
        grid = grid.reshape(grid.shape[0], -1)
    finite = grid[np.isfinite(grid)]
    img = np.zeros(grid.shape, dtype=np.uint8)
    if finite.size:
        lov, hiv = float(finite.min()), float(finite.max())
        span = hiv - lov
        if span > 0:
            scaled = np.clip((grid - lov) / span, 0.0, 1.0)
            scaled = np.where(np.isfinite(grid), scaled, 0.0)
            img = np.round(scaled * 255.0).astype(np.uint8)
    header = f"P5\n{grid.shape[1]} {grid.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.tobytes())


def write_report_json(report_fields: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_fields, fh, indent=2)
        fh.write("\n")
