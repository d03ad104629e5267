"""Batch figure rendering for the wave-lab CSV artifacts.

Rendering is read-only over the artifacts and fully deterministic: fixed
styles, no timestamps, and a pinned SVG hash salt so identical inputs give
byte-identical files.  All fitted constants come from the summary file; this
package never re-fits anything.
"""

from .render import FigureSpec, load_figure_spec, render

__all__ = ["FigureSpec", "load_figure_spec", "render"]
