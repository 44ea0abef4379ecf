"""Parameter sweeps over (theta, alpha) for rotation offsets.

Each cell classifies the map with T = rotation(theta) and a = (0, alpha):
fixed-point count from the closed form, minimal-period-2 count from the
numeric oracle, the attracting fixed point Q when two fixed points exist,
and a flag for cells near the existence boundary cos(theta) =
sqrt(1 - alpha^2).  The CSV layout is byte-stable: theta-major rows, 17
significant digits, '\\n' line endings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import circle

BOUNDARY_BAND = 1e-3
CSV_HEADER = "theta,alpha,fixed_count,period2_count,boundary"


@dataclass(frozen=True)
class SweepCell:
    theta: float
    alpha: float
    fixed_count: int
    period2_count: int
    boundary: bool
    attracting_q: np.ndarray | None


@dataclass(frozen=True)
class SweepGrid:
    thetas: np.ndarray
    alphas: np.ndarray
    cells: list  # theta-major order


def grid_values(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive uniform grid start, start+step, ..., up to stop."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError("empty grid")
    return start + step * np.arange(count)


def boundary_flag(theta: float, alpha: float, band: float = BOUNDARY_BAND) -> bool:
    return abs(math.cos(theta) - math.sqrt(1.0 - alpha * alpha)) < band


def sweep_cell(theta: float, alpha: float) -> SweepCell:
    a = np.array([0.0, alpha])
    records = circle.rotation_fixed_points(theta, a)
    attracting_q = None
    if len(records) == 2:
        q, _ = circle.classify_rotation(theta, a)
        attracting_q = q.point
    sys = circle.build(circle.rotation_matrix(theta), a, require_homeo=True)
    period2 = [r for r in circle.fixed_points_numeric(sys, 2) if r.period == 2]
    return SweepCell(
        theta=theta,
        alpha=alpha,
        fixed_count=len(records),
        period2_count=len(period2),
        boundary=boundary_flag(theta, alpha),
        attracting_q=attracting_q,
    )


def run_sweep(thetas, alphas) -> SweepGrid:
    thetas = np.asarray(thetas, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas <= 0.0) or np.any(alphas >= 1.0):
        raise ValueError("alpha grid must lie inside (0, 1)")
    cells = [sweep_cell(t, al) for t in thetas for al in alphas]
    return SweepGrid(thetas=thetas, alphas=alphas, cells=cells)


def write_csv(grid: SweepGrid, path) -> None:
    lines = [CSV_HEADER]
    for c in grid.cells:
        lines.append(
            f"{c.theta:.17g},{c.alpha:.17g},{c.fixed_count},"
            f"{c.period2_count},{int(c.boundary)}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
