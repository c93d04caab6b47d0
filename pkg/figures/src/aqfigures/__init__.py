"""Figure rendering for the sweep-analysis CSV artifacts."""

from .figures import FIGURE_IDS, FigureSpec, build_figure, render

__all__ = ["FIGURE_IDS", "FigureSpec", "build_figure", "render"]
__version__ = "0.1.0"
