"""Figure analogues rendered from the experiment driver's CSV artifacts.

Read-only by design: all statistics are computed by the data producer and
this package only draws them, so figures can never silently diverge from
the recorded tables.
"""
import matplotlib

matplotlib.use("Agg")  # file output only; never require a display

from .artifacts import Artifact, SchemaError, load_artifact, load_fits
from .figures import (
    BUILDERS,
    PANEL_COUNTS,
    SCHEMAS,
    FigureSpec,
    build,
    panels,
    render,
)
from .style import STYLE_SEED, apply_style

__all__ = [
    "Artifact",
    "BUILDERS",
    "FigureSpec",
    "PANEL_COUNTS",
    "SCHEMAS",
    "STYLE_SEED",
    "SchemaError",
    "apply_style",
    "build",
    "load_artifact",
    "load_fits",
    "panels",
    "render",
]
