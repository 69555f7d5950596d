"""Uniform node lattice over an axis-aligned box centered at the origin."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

MIN_NODES = 16


@dataclass(frozen=True)
class Grid:
    """``nodes[i]`` points spanning ``[-extent[i]/2, extent[i]/2]`` on axis ``i``.

    The spacing must agree across axes.
    """

    nodes: Tuple[int, ...]
    extent: Tuple[float, ...]

    def __post_init__(self):
        nodes = tuple(int(n) for n in self.nodes)
        extent = tuple(float(e) for e in self.extent)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "extent", extent)
        if len(nodes) not in (1, 2, 3) or len(extent) != len(nodes):
            raise ValueError("grid must have 1, 2 or 3 axes with one extent per axis")
        if min(nodes) < MIN_NODES:
            raise ValueError(f"need at least {MIN_NODES} nodes per axis, got {nodes}")
        if min(extent) <= 0:
            raise ValueError("extents must be positive")
        hs = [e / (n - 1) for e, n in zip(extent, nodes)]
        if max(hs) - min(hs) > 1e-12 * max(hs):
            raise ValueError(f"spacing differs across axes: {hs}")

    @classmethod
    def cube(cls, dim: int, nodes: int, length: float) -> "Grid":
        return cls((nodes,) * dim, (length,) * dim)

    @property
    def dim(self) -> int:
        return len(self.nodes)

    @property
    def h(self) -> float:
        return self.extent[0] / (self.nodes[0] - 1)

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.nodes

    @property
    def lower(self) -> np.ndarray:
        return -0.5 * np.asarray(self.extent)

    @property
    def upper(self) -> np.ndarray:
        return 0.5 * np.asarray(self.extent)

    def axes(self):
        # measured from the center so that mirrored nodes have exactly opposite coordinates
        return [self.h * (np.arange(n) - 0.5 * (n - 1)) for n in self.nodes]

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``nodes + (dim,)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def point(self, index) -> np.ndarray:
        return self.lower + self.h * np.asarray(index, dtype=float)

    def distance_to_boundary(self) -> np.ndarray:
        x = self.coords()
        return np.min(np.minimum(x - self.lower, self.upper - x), axis=-1)

    def conforms(self, field) -> bool:
        return tuple(np.shape(field)) == self.nodes

    @staticmethod
    def for_resolution(dim: int, length: float, h: float) -> "Grid":
        n = int(round(length / h)) + 1
        if not math.isclose((n - 1) * h, length, rel_tol=1e-9):
            raise ValueError(f"length {length} is not a multiple of h={h}")
        return Grid.cube(dim, n, length)
