"""Static figure emission for sweeps and orbits (matplotlib, Agg backend)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .sweep import SweepGrid


def render_sweep(grid: SweepGrid, path) -> None:
    """Heat map of the fixed-point count with the analytic existence
    boundary cos(theta) = sqrt(1 - alpha^2) overlaid."""
    thetas, alphas = grid.thetas, grid.alphas
    counts = np.array([c.fixed_count for c in grid.cells]).reshape(
        len(thetas), len(alphas)
    )
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    mesh = ax.pcolormesh(
        thetas,
        alphas,
        counts.T,
        cmap="viridis",
        vmin=0,
        vmax=2,
        shading="nearest",
    )
    fig.colorbar(mesh, ax=ax, label="fixed points", ticks=[0, 1, 2])

    alpha_curve = np.linspace(max(alphas.min(), 1e-6), min(alphas.max(), 1 - 1e-9), 512)
    theta_curve = np.arccos(np.sqrt(1.0 - alpha_curve**2))
    ax.plot(theta_curve, alpha_curve, "w--", lw=1.5, label="existence boundary")

    per2 = np.array([c.period2_count for c in grid.cells]).reshape(
        len(thetas), len(alphas)
    )
    if per2.any():
        tt, aa = np.meshgrid(thetas, alphas, indexing="ij")
        mask = per2 > 0
        ax.plot(
            tt[mask], aa[mask], ".", color="crimson", ms=2, label="period-2 points"
        )

    ax.set_xlabel("theta (rad)")
    ax.set_ylabel("alpha = ||a||")
    ax.set_title("fixed and period-2 points of the rotation-offset sphere map")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_orbit(points: np.ndarray, path, title: str = "orbit") -> None:
    """Orbit diagram on the circle (dim 2) or its first-two-coordinate
    projection for higher dimensions."""
    points = np.asarray(points, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    phis = np.linspace(0, 2 * math.pi, 512)
    ax.plot(np.cos(phis), np.sin(phis), color="0.8", lw=1.0)
    xs, ys = points[:, 0], points[:, 1]
    ax.plot(xs, ys, "-", color="0.6", lw=0.7, alpha=0.7)
    sc = ax.scatter(xs, ys, c=np.arange(len(points)), cmap="plasma", s=14, zorder=3)
    fig.colorbar(sc, ax=ax, label="iterate")
    ax.plot(xs[0], ys[0], "ko", ms=7, mfc="none", label="start")
    ax.plot(xs[-1], ys[-1], "k^", ms=7, mfc="none", label="end")
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(title)
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
