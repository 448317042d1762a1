"""Figures from horolab CSV/OBJ artifacts."""

from .render import (
    KINDS,
    PlotJob,
    SchemaError,
    plot_dual,
    plot_heatmap,
    plot_mesh,
    plot_residuals,
    read_dual,
    read_obj,
    read_report,
    read_residuals,
    render,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
