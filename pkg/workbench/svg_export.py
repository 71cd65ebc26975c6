# workbench/svg_export.py
"""
Deterministic SVG figures (line plots and heatmaps) rendered with matplotlib's
object API, so no pyplot state is shared between threads.
"""

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from core.errors import InvalidParameterError

SVG_RC = {
    'svg.hashsalt': 'ptcrystal-workbench',
    'svg.fonttype': 'path',
    'path.simplify': False,
}


@dataclass(frozen=True)
class LineSeries:
    label: str
    x: Sequence[float]
    y: Sequence[float]


@dataclass(frozen=True)
class FigureStyle:
    title: str = ''
    xlabel: str = ''
    ylabel: str = ''
    colorbar_label: str = ''
    width: float = 6.0
    height: float = 4.0


def _require_finite(name: str, values) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(array)):
        raise InvalidParameterError(f"{name} contains NaN or Inf; refusing to draw it")
    return array


def _render(figure: Figure) -> str:
    buffer = io.StringIO()
    FigureCanvasSVG(figure)
    figure.savefig(buffer, format='svg', metadata={'Date': None})
    return buffer.getvalue()


def export_line_svg(series: Sequence[LineSeries], style: Optional[FigureStyle] = None) -> str:
    style = style or FigureStyle()
    if not series:
        raise InvalidParameterError("A line figure needs at least one series")
    with matplotlib.rc_context(SVG_RC):
        figure = Figure(figsize=(style.width, style.height))
        ax = figure.add_subplot(1, 1, 1)
        for s in series:
            x = _require_finite(f"x of '{s.label}'", s.x)
            y = _require_finite(f"y of '{s.label}'", s.y)
            if x.shape != y.shape:
                raise InvalidParameterError(f"Series '{s.label}': x and y lengths differ")
            ax.plot(x, y, marker='o', markersize=3, linewidth=1.2, label=s.label)
        ax.set_title(style.title)
        ax.set_xlabel(style.xlabel)
        ax.set_ylabel(style.ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend(frameon=False)
        figure.tight_layout()
        return _render(figure)


def export_heatmap_svg(matrix, style: Optional[FigureStyle] = None,
                       x_values: Optional[Sequence[float]] = None,
                       y_values: Optional[Sequence[float]] = None) -> str:
    """One cell per matrix entry; rows run along y"""
    style = style or FigureStyle()
    data = _require_finite('heatmap', matrix)
    if data.ndim != 2 or data.size == 0:
        raise InvalidParameterError(f"Heatmap data must be a non-empty matrix, got shape {data.shape}")
    with matplotlib.rc_context(SVG_RC):
        figure = Figure(figsize=(style.width, style.height))
        ax = figure.add_subplot(1, 1, 1)
        image = ax.pcolormesh(data, cmap='viridis', shading='flat')
        ax.set_aspect('auto')
        if x_values is not None:
            ax.set_xticks(np.arange(len(x_values)) + 0.5)
            ax.set_xticklabels([f"{v:g}" for v in x_values], rotation=90)
        if y_values is not None:
            ax.set_yticks(np.arange(len(y_values)) + 0.5)
            ax.set_yticklabels([f"{v:g}" for v in y_values])
        ax.invert_yaxis()
        figure.colorbar(image, ax=ax, label=style.colorbar_label)
        ax.set_title(style.title)
        ax.set_xlabel(style.xlabel)
        ax.set_ylabel(style.ylabel)
        figure.tight_layout()
        return _render(figure)


def export_svg(kind: str, data, style: Optional[FigureStyle] = None, **kwargs) -> str:
    if kind == 'line':
        return export_line_svg(data, style)
    if kind == 'heatmap':
        return export_heatmap_svg(data, style, **kwargs)
    raise InvalidParameterError(f"Unknown figure kind {kind!r}")
