"""Figure rendering for ris-street CSV sweeps.

Consumes only the public CSV contract of the ris-street CLI; no quantity is
recomputed here.
"""

from .render import FIGURE_KINDS, FigureError, FigureSpec, build_figure, render

__version__ = "0.1.0"
