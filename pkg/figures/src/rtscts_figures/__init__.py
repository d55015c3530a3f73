"""Offline plotting for handshake-thinning sweep CSVs."""

from .records import COLUMNS, SCHEMA_LINE, SchemaError, read_sweep_csv
from .render import KINDS, FigureSpec, build_figure, render

__all__ = [
    "COLUMNS",
    "SCHEMA_LINE",
    "SchemaError",
    "read_sweep_csv",
    "KINDS",
    "FigureSpec",
    "build_figure",
    "render",
]

__version__ = "0.1.0"
