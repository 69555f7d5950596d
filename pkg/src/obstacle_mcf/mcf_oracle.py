"""Exact shrinking-sphere solutions of mean curvature flow and zero-level extraction."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from skimage import measure

from .errors import EmptyContourError, ExtinctError


def extinction_time(r0: float, n: int) -> float:
    return r0 * r0 / (2.0 * (n - 1))


def sphere_radius_exact(r0: float, n: int, t: float) -> float:
    """Radius ``sqrt(r0**2 - 2(n-1)t)`` of a sphere moving by mean curvature."""
    if n < 2:
        raise ValueError("a sphere needs n >= 2")
    if t >= extinction_time(r0, n):
        raise ExtinctError(f"sphere of radius {r0} vanishes at t={extinction_time(r0, n):.6g}")
    return math.sqrt(r0 * r0 - 2.0 * (n - 1) * t)


@dataclass
class Contour:
    """Zero level set: ``vertices`` in physical coordinates.

    In 2-D ``paths`` holds one ordered ``(m, 2)`` polyline per connected
    component; in 3-D ``faces`` indexes triangles into ``vertices``.
    """

    vertices: np.ndarray
    paths: Optional[list] = None
    faces: Optional[np.ndarray] = None

    def to_csv(self, path):
        dim = self.vertices.shape[1]
        header = ",".join(f"x{i + 1}" for i in range(dim))
        np.savetxt(path, self.vertices, delimiter=",", header=header, comments="", fmt="%.17g")


def _tie_broken(field):
    # exact zeros count as positive: lift them to the smallest positive double
    f = np.array(field, dtype=float)
    f[f == 0.0] = np.nextafter(0.0, 1.0)
    return f


def extract_zero_level(state=None, *, field=None, grid=None) -> Contour:
    """Marching squares (2-D) or marching cubes (3-D) on ``{phi = 0}``.

    Accepts a :class:`~obstacle_mcf.solver.PhaseState` or explicit
    ``field``/``grid``.  Vertices come from linear interpolation along grid
    edges.
    """
    if state is not None:
        field, grid = state.field, state.grid
    f = _tie_broken(field)
    if not (np.any(f > 0) and np.any(f < 0)):
        raise EmptyContourError("field has no sign change")
    lower = grid.lower
    if grid.dim == 2:
        paths = [lower + grid.h * c for c in measure.find_contours(f, 0.0)]
        verts = np.concatenate(paths, axis=0)
        # closed contours repeat their first point
        verts = np.unique(np.round(verts, 14), axis=0)
        return Contour(verts, paths=paths)
    if grid.dim == 3:
        verts, faces, _, _ = measure.marching_cubes(f, level=0.0, spacing=(grid.h,) * 3)
        return Contour(lower + verts, faces=faces)
    raise ValueError("level sets are extracted in 2-D or 3-D only")


def radius_estimate(contour: Contour, center) -> tuple:
    """Mean vertex distance to ``center`` and the largest deviation from that mean."""
    d = np.linalg.norm(contour.vertices - np.asarray(center, dtype=float), axis=1)
    mean = float(np.mean(d))
    return mean, float(np.max(np.abs(d - mean)))


def hausdorff_distance(contour: Contour, center, radius: float) -> float:
    """``max | |v - center| - radius |`` over vertices (exact for a sphere reference)."""
    d = np.linalg.norm(contour.vertices - np.asarray(center, dtype=float), axis=1)
    return float(np.max(np.abs(d - radius)))
