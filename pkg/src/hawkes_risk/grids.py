"""Uniform time grids and functions tabulated on them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, InvalidParameter


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*step on [0, t_max], k = 0..n_points-1."""

    t_max: float
    step: float

    def __post_init__(self):
        if self.t_max <= 0 or self.step <= 0:
            raise InvalidParameter("t_max and step must be > 0")
        if self.step > self.t_max:
            raise InvalidParameter("step must not exceed t_max")

    @property
    def n_points(self) -> int:
        # fuzz absorbs float division noise for commensurate t_max/step
        return math.floor(self.t_max / self.step + 1e-9) + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_points) * self.step

    def coarsened(self) -> "TimeGrid":
        """Grid with doubled step over the same horizon."""
        return TimeGrid(self.t_max, 2.0 * self.step)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values tabulated at the nodes of a TimeGrid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise GridMismatch(
                f"values length {values.shape} does not match grid ({self.grid.n_points},)")
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("grid function values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def cumulative(self) -> "GridFunction":
        """Cumulative trapezoidal integral, zero at t = 0."""
        v = self.values
        dt = self.grid.step
        out = np.concatenate(([0.0], np.cumsum(0.5 * dt * (v[1:] + v[:-1]))))
        return GridFunction(self.grid, out)

    def at_end(self) -> float:
        return float(self.values[-1])

    def to_csv(self, path) -> None:
        """Two-column CSV (t, value) with shortest round-trip formatting."""
        nodes = self.grid.nodes
        with open(path, "w", newline="") as fh:
            fh.write("t,value\n")
            for t, v in zip(nodes, self.values):
                fh.write(f"{float(t)!r},{float(v)!r}\n")


def require_same_grid(*fns: GridFunction) -> TimeGrid:
    grid = fns[0].grid
    for fn in fns[1:]:
        if fn.grid != grid:
            raise GridMismatch(f"grids differ: {fn.grid} vs {grid}")
    return grid
