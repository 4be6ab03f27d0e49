"""Figure rendering for levicool CSV outputs."""

from .render import PlotSpec, SchemaError, render

__all__ = ["PlotSpec", "SchemaError", "render"]
