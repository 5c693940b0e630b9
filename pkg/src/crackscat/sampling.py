"""Direct sampling indicator and segment initial guesses extracted from it.

The indicator correlates the far field with plane waves,

    I(z) = | sum_j u_inf(xhat_j) exp(i k xhat_j . z) |,

and peaks near the scatterer.  :func:`extract_initial_cracks` turns the
bright regions of ``I`` into flat Chebyshev segments that can seed the
Newton iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .forward import FarFieldSet
from .geometry import ChebCrack

DEFAULT_BOUNDS = (-4.0, 4.0, -4.0, 4.0)
DEFAULT_SPACING = 0.05


@dataclass
class IndicatorGrid:
    """``values[i, j]`` is the indicator at ``(x[j], y[i])``."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    spacing: float
    k: float
    d: np.ndarray

    @property
    def bounds(self):
        return (float(self.x[0]), float(self.x[-1]), float(self.y[0]), float(self.y[-1]))

    def argmax_point(self) -> np.ndarray:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return np.array([self.x[j], self.y[i]])


def grid_axis(lo: float, hi: float, spacing: float) -> np.ndarray:
    if spacing <= 0 or hi < lo:
        raise ValueError("invalid grid bounds or spacing")
    count = int(np.floor((hi - lo) / spacing + 1e-9)) + 1
    return lo + spacing * np.arange(count)


def dsm_indicator(data: FarFieldSet, bounds=DEFAULT_BOUNDS, spacing: float = DEFAULT_SPACING) -> IndicatorGrid:
    if len(data) < 1:
        raise ValueError("indicator needs at least one direction")
    x = grid_axis(bounds[0], bounds[1], spacing)
    y = grid_axis(bounds[2], bounds[3], spacing)
    k = data.k
    xh = data.directions
    # the plane-wave factor separates: exp(ik(xh_x x + xh_y y))
    ex = np.exp(1j * k * np.outer(xh[:, 0], x))  # (N, nx)
    ey = np.exp(1j * k * np.outer(y, xh[:, 1]))  # (ny, N)
    values = np.abs((ey * data.values) @ ex)
    return IndicatorGrid(x, y, values, float(spacing), k, np.asarray(data.d, dtype=float))


@dataclass
class Extraction:
    cracks: list
    shortage: bool
    components: int


def _segment(xs, ys, spacing):
    cx, cy = xs.mean(), ys.mean()
    half_extent = 0.5 * (xs.max() - xs.min())
    if len(xs) > 1:
        cov = np.cov(np.vstack([xs - cx, ys - cy]))
        _, vecs = np.linalg.eigh(cov)
        axis = vecs[:, -1]
        proj = (xs - cx) * axis[0] + (ys - cy) * axis[1]
        half_len = 0.5 * (proj.max() - proj.min())
        half_x = min(half_len * abs(axis[0]), half_extent)
    else:
        half_x = 0.0
    # a segment needs a non-zero horizontal axis; fall back to half a cell
    return cx, cy, max(half_x, 0.5 * spacing)


def extract_initial_cracks(grid: IndicatorGrid, n_cracks: int, threshold: float = 0.7) -> Extraction:
    """Flat segments through the ``n_cracks`` largest bright components."""
    if n_cracks < 1:
        raise ValueError("n_cracks must be at least 1")
    vmax = grid.values.max()
    if vmax <= 0:
        return Extraction([], True, 0)
    mask = grid.values >= threshold * vmax
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, count + 1))
    # stable ordering: larger first, then by label number
    order = sorted(range(count), key=lambda i: (-sizes[i], i))[:n_cracks]
    cracks = []
    for idx in order:
        rows, cols = np.nonzero(labels == idx + 1)
        cx, cy, half = _segment(grid.x[cols], grid.y[rows], grid.spacing)
        cracks.append(ChebCrack(float(cx), float(half), (float(cy),)))
    return Extraction(cracks, len(cracks) < n_cracks, count)
