"""Matplotlib figures for the experiment reports, rendered off-screen to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {"js": ("tab:blue", "o"), "yc": ("tab:orange", "s"), "fweno": ("tab:green", "^")}


def plot_efficiency(rows, path, title: str = "") -> Path:
    """L1 error against kernel seconds, one curve per (variant, r)."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    curves = {}
    for kind, r, N, l1, kern, _total in rows:
        curves.setdefault((kind, r), []).append((kern, l1))
    for (kind, r), pts in sorted(curves.items()):
        pts.sort()
        color, marker = _STYLE.get(kind, ("k", "x"))
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker=marker, color=color,
                  label=f"{kind} order {2 * r - 1}")
    ax.set_xlabel("kernel time [s]")
    ax.set_ylabel("L1 error")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_shock(data: dict, problem, refs: dict, path) -> Path:
    """First component on the finest grid of each run, with the reference when there is one."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    finest = {}
    for (kind, r, N), (_row, res) in data.items():
        if (kind, r) not in finest or N > finest[(kind, r)][0]:
            finest[(kind, r)] = (N, res)
    for r, ref in sorted(refs.items()):
        if ref is not None:
            grids, U = ref
            ax.plot(grids[0].nodes, U[0], color="k", lw=0.8, label=f"reference N={grids[0].N}")
            break
    for (kind, r), (N, res) in sorted(finest.items()):
        color, marker = _STYLE.get(kind, ("k", "x"))
        x = problem.grids(N)[0].nodes
        ax.plot(x, res.U[0], ls="none", marker=marker, ms=3, mfc="none", color=color,
                label=f"{kind} order {2 * r - 1}, N={N}")
    ax.set_xlabel("x")
    ax.set_ylabel("density" if problem.model.is_euler else "u")
    ax.set_title(problem.name)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_density_2d(rho: np.ndarray, grids, path, title: str = "") -> Path:
    path = Path(path)
    gx, gy = grids
    fig, ax = plt.subplots(figsize=(7.0, 7.0 * gy.length / gx.length + 0.8))
    ax.contour(gx.nodes, gy.nodes, rho.T, levels=30, colors="k", linewidths=0.5)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
