"""Uniform periodic grids and grid functions.

Every field in this package lives on the torus [0, L)^d with d in {1, 2}.
Grids and fields are immutable after construction; all operations are pure
functions returning new objects, so concurrent evaluation is safe and
results are independent of evaluation order (reductions use exact max or
numpy's fixed pairwise summation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "PeriodicGrid",
    "GridField",
    "Trajectory",
    "sample",
    "sup_dist",
    "sup_norm",
    "discrete_gradient",
    "lipschitz_constant",
    "field_to_csv",
    "write_field_csv",
    "read_field_csv",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform lattice on [0, length)^dim with wraparound indexing.

    points_per_axis must be a power of two (>= 8): spectral transforms stay
    fast and spacing = length / points_per_axis is exact in binary floating
    point, so spacing * points_per_axis == length holds exactly.
    """

    dim: int
    points_per_axis: int
    length: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        n = self.points_per_axis
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"points_per_axis must be a power of two >= 8, got {n}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be a positive real, got {self.length}")
        if self.spacing * n != self.length:
            raise ValueError("length must make spacing = length/n exactly representable")

    @property
    def spacing(self) -> float:
        return self.length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def num_nodes(self) -> int:
        return self.points_per_axis**self.dim

    def axis(self) -> np.ndarray:
        """1D node coordinates 0, h, 2h, ... along one axis."""
        return np.arange(self.points_per_axis) * self.spacing

    def coords(self) -> tuple[np.ndarray, ...]:
        """Node coordinates, one array per axis, each of shape `shape`."""
        ax = self.axis()
        if self.dim == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))


@dataclass(frozen=True, eq=False)
class GridField:
    """A real-valued function sampled on the nodes of a PeriodicGrid."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise ValueError(f"field values must be finite; offending node index {tuple(bad)}")
        object.__setattr__(self, "values", _readonly(v))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-indexed sequence of grid fields on one common grid."""

    times: np.ndarray
    fields: tuple[GridField, ...]

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a nonempty 1D array")
        if t[0] != 0.0:
            raise ValueError(f"times must start at 0, got {t[0]}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        fields = tuple(self.fields)
        if len(fields) != t.size:
            raise ValueError("one field per time required")
        grid = fields[0].grid
        for f in fields:
            if f.grid != grid:
                raise ValueError("all trajectory fields must share one grid")
        object.__setattr__(self, "times", _readonly(t))
        object.__setattr__(self, "fields", fields)

    @property
    def grid(self) -> PeriodicGrid:
        return self.fields[0].grid

    def stack(self) -> np.ndarray:
        """Values as one array of shape (num_times, *grid.shape)."""
        return np.stack([f.values for f in self.fields])


def sample(grid: PeriodicGrid, f: Callable) -> GridField:
    """Evaluate a pointwise function at the grid nodes.

    `f` receives one coordinate array per axis (vectorized evaluation) and
    must return finite values; a non-finite value is rejected naming the node.
    """
    vals = np.asarray(f(*grid.coords()), dtype=float)
    vals = np.broadcast_to(vals, grid.shape)
    if not np.all(np.isfinite(vals)):
        bad = tuple(np.argwhere(~np.isfinite(vals))[0])
        x_bad = tuple(c[bad] for c in grid.coords())
        raise ValueError(f"sample: f returned non-finite value at node {bad}, x = {x_bad}")
    return GridField(grid, vals)


def sup_dist(a: GridField, b: GridField) -> float:
    """Sup-norm distance max_nodes |a - b| between fields on one grid."""
    if a.grid != b.grid:
        raise ValueError("sup_dist requires fields on the same grid")
    return float(np.max(np.abs(a.values - b.values)))


def sup_norm(a: GridField) -> float:
    """Sup norm max_nodes |a|."""
    return float(np.max(np.abs(a.values)))


def discrete_gradient(field: GridField) -> tuple[GridField, ...]:
    """Periodic central-difference gradient, one component field per axis.

    Second-order accurate on smooth fields; exactly zero on constants.
    """
    h = field.grid.spacing
    v = field.values
    comps = []
    for ax in range(field.grid.dim):
        d = (np.roll(v, -1, axis=ax) - np.roll(v, 1, axis=ax)) / (2.0 * h)
        comps.append(GridField(field.grid, d))
    return tuple(comps)


def lipschitz_constant(field: GridField) -> float:
    """Max nearest-neighbour slope magnitude over all axes.

    Equals the true Lipschitz constant for data piecewise linear in the grid.
    """
    h = field.grid.spacing
    v = field.values
    best = 0.0
    for ax in range(field.grid.dim):
        best = max(best, float(np.max(np.abs(np.roll(v, -1, axis=ax) - v))) / h)
    return best


def _csv_header(dim: int) -> str:
    return ",".join([f"x_{a}" for a in range(dim)] + ["value"])


def field_to_csv(field: GridField) -> str:
    """Serialize a field: header x_0[,x_1],value; row-major nodes; 17 significant digits."""
    coords = field.grid.coords()
    lines = [_csv_header(field.grid.dim)]
    flat_coords = [c.ravel() for c in coords]
    flat_vals = field.values.ravel()
    for i in range(flat_vals.size):
        cells = [f"{c[i]:.17g}" for c in flat_coords] + [f"{flat_vals[i]:.17g}"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_field_csv(field: GridField, path) -> None:
    with open(path, "w") as fh:
        fh.write(field_to_csv(field))


def read_field_csv(path) -> GridField:
    """Reconstruct a field from its CSV serialization (grid inferred from coordinates)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    dim = len(header) - 1
    if dim not in (1, 2) or header != _csv_header(dim).split(","):
        raise ValueError(f"unrecognized field CSV header: {header}")
    values = data[:, -1]
    n = round(values.size ** (1.0 / dim))
    x0 = data[:, 0]
    if dim == 1:
        spacing = x0[1] - x0[0]
    else:
        spacing = data[1, 1] - data[0, 1]
    length = spacing * n
    grid = PeriodicGrid(dim, n, float(length))
    return GridField(grid, values.reshape(grid.shape))
