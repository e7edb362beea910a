"""Hashed n-cube grid index: equal-width binning with a sparse occupancy map.

The bounding box is cut into ``(k*y + 1)`` equal intervals per dimension,
giving ``(k*y + 1)**dims`` cubes. Each point hashes to exactly one cube in a
single pass; per-cube membership and counts support an approximate median that
walks cube slabs instead of sorting the data.

Cube count grows exponentially with dimensionality, so construction refuses
configurations whose total cube count exceeds a hard cap. The refusal error
carries the exact count so callers can report the blow-up instead of crashing.
Occupancy is stored sparsely; `grid_stats` measures how empty the dense cube
space would be, which is the scheme's practical failure mode at high d.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, Point
from .kdtree import select_rank

__all__ = [
    "GridFeasibilityError",
    "GridConfig",
    "GridIndex",
    "GridStats",
    "build_grid",
    "locate_cube",
    "flatten_cells",
    "unflatten_index",
    "grid_find_median",
    "grid_stats",
]

DEFAULT_CUBE_CAP = 2**24


class GridFeasibilityError(ValueError):
    """Cube count exceeds the cap; carries the exact (possibly astronomical) count."""

    def __init__(self, cubes_per_dim: int, dims: int, total_cubes: int, cap: int):
        self.cubes_per_dim = cubes_per_dim
        self.dims = dims
        self.total_cubes = total_cubes
        self.cap = cap
        super().__init__(
            f"grid of {cubes_per_dim}^{dims} = {total_cubes} cubes exceeds the cap of {cap}; "
            f"the scheme is impractical at this dimensionality"
        )

    def marker(self) -> str:
        """Compact refusal tag for report cells, e.g. 'REFUSED(M=3^64)'."""
        return f"REFUSED(M={self.cubes_per_dim}^{self.dims})"


@dataclass(frozen=True)
class GridConfig:
    """Grid shape: y splits per dimension scaled by k, for a given dimensionality.

    ``effective_splits = k*y`` so ``cubes_per_dim = k*y + 1``; higher k gives a
    finer grid (better median accuracy, more cubes). ``total_cubes`` is exact
    arbitrary-precision arithmetic, checked against ``cube_cap`` on
    construction.
    """

    splits_y: int
    multiplier_k: int = 1
    dims: int = 1
    cube_cap: int = DEFAULT_CUBE_CAP

    def __post_init__(self):
        if self.splits_y < 1:
            raise ValueError("splits_y must be at least 1")
        if self.multiplier_k < 1:
            raise ValueError("multiplier_k must be at least 1")
        if self.dims < 1:
            raise ValueError("dims must be at least 1")
        if not 1 <= self.cube_cap <= 2**62:
            raise ValueError("cube_cap must be in [1, 2**62]")
        if self.total_cubes > self.cube_cap:
            raise GridFeasibilityError(self.cubes_per_dim, self.dims, self.total_cubes, self.cube_cap)

    @property
    def effective_splits(self) -> int:
        return self.multiplier_k * self.splits_y

    @property
    def cubes_per_dim(self) -> int:
        return self.effective_splits + 1

    @property
    def total_cubes(self) -> int:
        return self.cubes_per_dim**self.dims


def flatten_cells(cells: Sequence[int], cubes_per_dim: int) -> int:
    """Row-major flattening: sum of cells[j] * cubes_per_dim**j, dimension 0 first."""
    flat = 0
    stride = 1
    for c in cells:
        if not 0 <= c < cubes_per_dim:
            raise ValueError(f"cell index {c} out of range [0, {cubes_per_dim})")
        flat += int(c) * stride
        stride *= cubes_per_dim
    return flat


def unflatten_index(flat: int, cubes_per_dim: int, dims: int) -> tuple[int, ...]:
    if not 0 <= flat < cubes_per_dim**dims:
        raise ValueError(f"flat index {flat} out of range")
    cells = []
    for _ in range(dims):
        cells.append(flat % cubes_per_dim)
        flat //= cubes_per_dim
    return tuple(cells)


class GridIndex:
    """Immutable occupancy index over a dataset's own bounding box.

    ``occupancy`` maps flattened cube index to the row positions of member
    points (ascending). ``build_passes`` counts full sweeps over the point set
    during construction; the build hashes every point exactly once.
    """

    __slots__ = ("config", "dataset", "mins", "maxs", "widths", "occupancy", "build_passes")

    def __init__(self, config: GridConfig, dataset: Dataset, mins, maxs, widths, occupancy, build_passes):
        self.config = config
        self.dataset = dataset
        self.mins = mins
        self.maxs = maxs
        self.widths = widths
        self.occupancy = occupancy
        self.build_passes = build_passes

    @property
    def occupied_cubes(self) -> int:
        return len(self.occupancy)

    @property
    def bounds(self) -> tuple[tuple[float, float], ...]:
        return tuple((float(lo), float(hi)) for lo, hi in zip(self.mins, self.maxs))

    def cube_count(self, flat: int) -> int:
        return len(self.occupancy.get(flat, ()))

    def member_ids(self, flat: int) -> np.ndarray:
        return self.dataset.ids[self.occupancy[flat]]


def build_grid(ds: Dataset, cfg: GridConfig) -> GridIndex:
    """Hash every point to its cube in one pass over the data."""
    if cfg.dims != ds.dims:
        raise ValueError(f"grid config is for {cfg.dims} dims, dataset has {ds.dims}")
    mins = ds.coords.min(axis=0)
    maxs = ds.coords.max(axis=0)
    cubes = cfg.cubes_per_dim
    widths = (maxs - mins) / cubes

    safe = np.where(widths > 0, widths, 1.0)
    cells = np.floor((ds.coords - mins) / safe).astype(np.int64)
    cells[:, widths == 0] = 0
    np.clip(cells, 0, cubes - 1, out=cells)
    strides = cubes ** np.arange(ds.dims, dtype=np.int64)
    flat = cells @ strides

    order = np.argsort(flat, kind="stable")
    sorted_flat = flat[order]
    uniq, starts = np.unique(sorted_flat, return_index=True)
    occupancy: dict[int, np.ndarray] = {}
    boundaries = list(starts) + [len(order)]
    for i, key in enumerate(uniq):
        members = np.sort(order[boundaries[i] : boundaries[i + 1]])
        occupancy[int(key)] = members
    return GridIndex(cfg, ds, mins, maxs, widths, occupancy, build_passes=1)


def locate_cube(p, grid: GridIndex) -> int:
    """Flattened cube index of a point; max-boundary points belong to the last cube.

    Points outside the grid's bounds are a hard error: grids are built from the
    dataset's own bounds, so an out-of-bounds point signals misuse.
    """
    coords = p.coords if isinstance(p, Point) else np.asarray(p, dtype=np.float64)
    if coords.shape != (grid.config.dims,):
        raise ValueError(f"point has shape {coords.shape}, grid expects ({grid.config.dims},)")
    cubes = grid.config.cubes_per_dim
    cells = []
    for j, (v, lo, hi, w) in enumerate(zip(coords, grid.mins, grid.maxs, grid.widths)):
        if v < lo or v > hi:
            raise ValueError(f"coordinate {v} outside grid bounds [{lo}, {hi}] in dimension {j}")
        c = 0 if w == 0 else min(int((v - lo) / w), cubes - 1)
        cells.append(c)
    return flatten_cells(cells, cubes)


def grid_find_median(grid: GridIndex, dim: int) -> float:
    """Median along a dimension via the cube-slab walk.

    Accumulates slab populations in ascending coordinate order until the
    running total reaches ceil(P/2), then selects the needed rank among the
    stopping slab's points only. Because slabs are coordinate-ordered, the
    returned value's true rank is within the largest slab population of the
    median rank.
    """
    if not 0 <= dim < grid.config.dims:
        raise ValueError(f"dimension {dim} out of range")
    if not grid.occupancy:
        raise ValueError("grid is empty")
    cubes = grid.config.cubes_per_dim
    stride = cubes**dim

    slab_counts = np.zeros(cubes, dtype=np.int64)
    for flat, members in grid.occupancy.items():
        slab_counts[(flat // stride) % cubes] += len(members)

    total = int(slab_counts.sum())
    rank = (total + 1) // 2
    cum = 0
    stop = 0
    for s in range(cubes):
        if cum + slab_counts[s] >= rank:
            stop = s
            break
        cum += int(slab_counts[s])

    positions = np.concatenate(
        [members for flat, members in grid.occupancy.items() if (flat // stride) % cubes == stop]
    )
    values = grid.dataset.coords[positions, dim]
    return select_rank(values, rank - cum - 1)


@dataclass(frozen=True)
class GridStats:
    """Occupancy report; quantifies how sparse the dense cube space would be."""

    total_cubes: int
    occupied: int
    empty: int
    max_load: int
    mean_nonzero_load: float
    occupied_fraction: float

    def to_dict(self) -> dict:
        return {
            "M": self.total_cubes,
            "occupied": self.occupied,
            "empty": self.empty,
            "max_load": self.max_load,
            "mean_nonzero_load": self.mean_nonzero_load,
            "occupied_fraction": self.occupied_fraction,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def grid_stats(grid: GridIndex) -> GridStats:
    loads = [len(v) for v in grid.occupancy.values()]
    occupied = len(loads)
    total = grid.config.total_cubes
    return GridStats(
        total_cubes=total,
        occupied=occupied,
        empty=total - occupied,
        max_load=max(loads),
        mean_nonzero_load=sum(loads) / occupied,
        occupied_fraction=occupied / total,
    )
