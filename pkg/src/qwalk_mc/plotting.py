"""
Figure rendering for simulation reports.

Figures are written with the Agg backend. SVG output uses a fixed hash salt
and no date stamp, so identical data gives byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib as mpl  # noqa: E402
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_distribution", "plot_comparison", "plot_convergence", "save_figure"]

STYLE = {
    "svg.hashsalt": "qwalk-mc",
    "svg.fonttype": "none",
    "axes.labelsize": 12,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "xtick.labelsize": 10,
    "ytick.labelsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
}

BAR_COLOR = "#3b6ea8"
MC_COLOR = "#c8553d"


def save_figure(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = path.suffix.lstrip(".") or "svg"
    # Agg/SVG/PDF writers honour a None date; PNG has no date field
    metadata = {"Date": None} if fmt in ("svg", "pdf") else None
    fig.savefig(path, format=fmt, metadata=metadata)
    plt.close(fig)
    return path


def _bars(ax, positions, probs, color, errors=None):
    ax.bar(positions, probs, width=0.8, color=color, edgecolor="none")
    if errors is not None:
        ax.errorbar(positions, probs, yerr=errors, fmt="none", ecolor="black", elinewidth=0.8, capsize=2)
    ax.set_xlabel("position x")
    ax.set_ylabel("probability")


def plot_distribution(
    positions: Sequence[int],
    probs: Sequence[float],
    path: str | Path,
    title: str = "",
    errors: Sequence[float] | None = None,
) -> Path:
    with mpl.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 4))
        _bars(ax, positions, probs, BAR_COLOR, errors)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return save_figure(fig, path)


def plot_comparison(
    positions: Sequence[int],
    p_reference: Sequence[float],
    p_mc: Sequence[float],
    path: str | Path,
    se: Sequence[float] | None = None,
    titles: tuple[str, str] = ("unitary evolution", "Poisson sampling"),
) -> Path:
    """Side-by-side bar charts, reference on the left and Monte Carlo on the right, sharing the y axis."""
    with mpl.rc_context(STYLE):
        fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4), sharey=True)
        _bars(left, positions, p_reference, BAR_COLOR)
        _bars(right, positions, p_mc, MC_COLOR, se)
        left.set_title(titles[0])
        right.set_title(titles[1])
        right.set_ylabel("")
        fig.tight_layout()
        return save_figure(fig, path)


def plot_convergence(samples: Sequence[int], tvd: Sequence[float], slope: float, path: str | Path) -> Path:
    samples = np.asarray(samples, dtype=np.float64)
    tvd = np.asarray(tvd, dtype=np.float64)
    with mpl.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(samples, tvd, "o-", color=MC_COLOR, label=f"fitted slope {slope:.3f}")
        guide = tvd[0] * (samples / samples[0]) ** -0.5
        ax.loglog(samples, guide, "--", color="gray", label="M^-1/2")
        ax.set_xlabel("samples M")
        ax.set_ylabel("total variation distance")
        ax.legend(frameon=False)
        fig.tight_layout()
        return save_figure(fig, path)
