"""Figure rendering for couplelab CSV outputs."""

from .render import (FIGURE_KINDS, FigureSpec, RenderResult, read_csv,
                     render, spec_from_json)

__version__ = "0.1.0"
