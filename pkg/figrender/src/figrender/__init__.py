"""CSV-to-figure rendering for logdesign experiment output."""

from .render import PlotSpec, SchemaError, load_rows, main, render

__all__ = ["PlotSpec", "SchemaError", "load_rows", "main", "render"]
