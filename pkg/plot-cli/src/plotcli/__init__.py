"""Figures from query-recovery experiment result CSVs."""

from .core import (
    PlotSpec,
    box_series,
    dump_box_series,
    dump_line_series,
    line_series,
    plot_box,
    plot_lines,
    read_results,
)

__version__ = "0.1.0"

__all__ = [
    "PlotSpec",
    "box_series",
    "dump_box_series",
    "dump_line_series",
    "line_series",
    "plot_box",
    "plot_lines",
    "read_results",
    "__version__",
]
