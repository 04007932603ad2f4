"""Uniform scalar grids with bilinear sampling.

Fields are node-based on a uniform lattice: ``values[j, i]`` lives at
``(x0 + i*h, y0 + j*h)``.  Sampling outside the lattice returns zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class GridField2D:
    origin: tuple[float, float]
    spacing: float
    values: np.ndarray  # shape (ny, nx)

    @property
    def shape(self):
        return self.values.shape

    def node_coords(self):
        ny, nx = self.values.shape
        xs = self.origin[0] + self.spacing * np.arange(nx)
        ys = self.origin[1] + self.spacing * np.arange(ny)
        return xs, ys

    def sample(self, pts: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at ``pts`` (k, 2); zero outside the grid."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        h = self.spacing
        ny, nx = self.values.shape
        fx = (pts[:, 0] - self.origin[0]) / h
        fy = (pts[:, 1] - self.origin[1]) / h
        inside = (fx >= 0) & (fx <= nx - 1) & (fy >= 0) & (fy <= ny - 1)
        fx = np.clip(fx, 0, nx - 1)
        fy = np.clip(fy, 0, ny - 1)
        i0 = np.clip(fx.astype(int), 0, nx - 2)
        j0 = np.clip(fy.astype(int), 0, ny - 2)
        tx = fx - i0
        ty = fy - j0
        v = self.values
        out = ((1 - tx) * (1 - ty) * v[j0, i0]
               + tx * (1 - ty) * v[j0, i0 + 1]
               + (1 - tx) * ty * v[j0 + 1, i0]
               + tx * ty * v[j0 + 1, i0 + 1])
        return np.where(inside, out, 0.0)

    def integral(self) -> float:
        """Cell-based integral: mean of the four corners per cell times h^2."""
        v = self.values
        cell = 0.25 * (v[:-1, :-1] + v[:-1, 1:] + v[1:, :-1] + v[1:, 1:])
        return float(cell.sum() * self.spacing ** 2)


def circle_points(center, radius, n: int) -> np.ndarray:
    """``n`` equally spaced points on the circle, starting at angle 0."""
    ang = 2 * np.pi * np.arange(n) / n
    return np.stack([center[0] + radius * np.cos(ang),
                     center[1] + radius * np.sin(ang)], axis=1)
