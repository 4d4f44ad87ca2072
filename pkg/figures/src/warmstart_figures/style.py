"""Shared figure styling: one rc profile, a deterministic palette, one seed.

STYLE_SEED pins every stochastic styling choice (currently the jitter in
strip overlays) and the SVG hash salt, so byte-identical input CSVs render
identical images.
"""
from __future__ import annotations

import matplotlib
import numpy as np

STYLE_SEED = 20240513

RC = {
    "figure.dpi": 110,
    "savefig.dpi": 200,
    "font.size": 9.0,
    "axes.titlesize": 9.5,
    "axes.labelsize": 9.0,
    "legend.fontsize": 7.5,
    "xtick.labelsize": 8.0,
    "ytick.labelsize": 8.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.5,
    "lines.linewidth": 1.4,
    "legend.framealpha": 0.85,
    "svg.hashsalt": f"style-{STYLE_SEED}",
}


def apply_style() -> None:
    matplotlib.rcParams.update(RC)


def style_rng() -> np.random.Generator:
    return np.random.default_rng(STYLE_SEED)


def series_palette(k: int) -> list:
    """k visually distinct colors from a fixed sequential map, same every call."""
    cmap = matplotlib.colormaps["viridis"]
    if k <= 1:
        return [cmap(0.3)]
    return [cmap(0.12 + 0.76 * i / (k - 1)) for i in range(k)]
