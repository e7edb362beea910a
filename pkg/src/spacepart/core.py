"""Core data model: points, datasets, synthetic generators, and partition metrics.

Everything downstream (the kd-tree, the grid index, the Voronoi split tree and
the benchmark harness) consumes the types defined here. All types are immutable
after construction and safe to share across threads; every randomized function
takes an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "Point",
    "Dataset",
    "PartitionAssignment",
    "PartitionMetrics",
    "make_rng",
    "euclidean_distance",
    "variance_per_dimension",
    "generate_uniform",
    "generate_gaussian_mixture",
    "compute_metrics",
    "balance_floor",
    "write_assignment_csv",
    "read_assignment_csv",
]


def make_rng(seed: int | np.random.Generator) -> np.random.Generator:
    """Return a PCG64-backed generator for the given integer seed.

    PCG64 is the single PRNG used everywhere in this package so that any
    randomized result is reproducible from the integer seed alone. Passing an
    existing Generator returns it unchanged (lets callers thread one stream
    through several draws).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class Point:
    """A single point: a non-negative integer id plus a float64 coordinate row."""

    id: int
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=np.float64))
        if self.id < 0:
            raise ValueError(f"point id must be non-negative, got {self.id}")
        if self.coords.ndim != 1:
            raise ValueError("point coords must be one-dimensional")
        if not np.isfinite(self.coords).all():
            raise ValueError(f"point {self.id} has non-finite coordinates")

    @property
    def dims(self) -> int:
        return self.coords.shape[0]


class Dataset:
    """An immutable in-memory collection of n-dimensional points.

    Coordinates live in a C-contiguous ``(n, dims)`` float64 array; ``ids`` is a
    parallel int64 array of unique non-negative identifiers (defaults to the
    row index). Per-dimension ``(min, max)`` bounds are computed lazily.
    """

    __slots__ = ("coords", "ids", "_bounds")

    def __init__(self, coords, ids=None):
        coords = np.ascontiguousarray(coords, dtype=np.float64)
        if coords.ndim != 2:
            raise ValueError(f"coords must be a 2-d array, got shape {coords.shape}")
        n, dims = coords.shape
        if n == 0:
            raise ValueError("a dataset must contain at least one point")
        if dims == 0:
            raise ValueError("a dataset must have at least one dimension")
        finite = np.isfinite(coords)
        if not finite.all():
            bad = int(np.flatnonzero(~finite.all(axis=1))[0])
            raise ValueError(f"non-finite coordinate in point row {bad}")
        if ids is None:
            ids = np.arange(n, dtype=np.int64)
        else:
            ids = np.asarray(ids, dtype=np.int64)
            if ids.shape != (n,):
                raise ValueError(f"ids must have shape ({n},), got {ids.shape}")
            if (ids < 0).any():
                raise ValueError("point ids must be non-negative")
            if len(np.unique(ids)) != n:
                raise ValueError("point ids must be unique")
        self.coords = coords
        self.ids = ids
        self._bounds = None
        coords.setflags(write=False)
        ids.setflags(write=False)

    @classmethod
    def from_points(cls, points: Iterable[Point]) -> "Dataset":
        points = list(points)
        if not points:
            raise ValueError("a dataset must contain at least one point")
        dims = points[0].dims
        for p in points:
            if p.dims != dims:
                raise ValueError(f"point {p.id} has {p.dims} coords, expected {dims}")
        coords = np.stack([p.coords for p in points])
        ids = np.array([p.id for p in points], dtype=np.int64)
        return cls(coords, ids)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dims(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n

    def point(self, row: int) -> Point:
        """Point at a given row position (not id)."""
        return Point(int(self.ids[row]), self.coords[row])

    @property
    def points(self) -> list[Point]:
        return [self.point(i) for i in range(self.n)]

    @property
    def bounds(self) -> tuple[tuple[float, float], ...]:
        """Per-dimension (min, max), cached after the first call."""
        if self._bounds is None:
            mins = self.coords.min(axis=0)
            maxs = self.coords.max(axis=0)
            self._bounds = tuple((float(lo), float(hi)) for lo, hi in zip(mins, maxs))
        return self._bounds


def _coords_of(p) -> np.ndarray:
    if isinstance(p, Point):
        return p.coords
    return np.asarray(p, dtype=np.float64)


def as_point_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    """Coerce a Dataset or an iterable of Points into (coords, ids) arrays."""
    if isinstance(points, Dataset):
        return points.coords, points.ids
    pts = list(points)
    if not pts:
        raise ValueError("need at least one point")
    coords = np.stack([p.coords for p in pts])
    ids = np.array([p.id for p in pts], dtype=np.int64)
    return coords, ids


def euclidean_distance(a, b) -> float:
    """Euclidean distance between two points (or raw coordinate sequences).

    Raises ValueError on dimensionality mismatch.
    """
    ca, cb = _coords_of(a), _coords_of(b)
    if ca.shape != cb.shape:
        raise ValueError(f"dimensionality mismatch: {ca.shape[0]} vs {cb.shape[0]}")
    diff = ca - cb
    return float(math.sqrt(float(np.dot(diff, diff))))


def variance_per_dimension(ds: Dataset) -> np.ndarray:
    """Population variance of each coordinate across all points.

    The argmax of this vector is the split dimension used by the kd-tree
    partitioner and by median seeding.
    """
    return ds.coords.var(axis=0)


def generate_uniform(n: int, d: int, lo: float = 0.0, hi: float = 100.0, seed: int = 0) -> Dataset:
    """n points with i.i.d. uniform coordinates in [lo, hi), reproducible from seed."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    rng = make_rng(seed)
    return Dataset(rng.uniform(lo, hi, size=(n, d)))


def generate_gaussian_mixture(
    n: int,
    d: int,
    k: int,
    spread: float = 5.0,
    seed: int = 0,
    center_lo: float = 0.0,
    center_hi: float = 100.0,
) -> Dataset:
    """Clustered synthetic data: k uniform cluster centers, points round-robin.

    Point i belongs to cluster ``i % k`` and is the center plus isotropic
    Gaussian noise with standard deviation ``spread``. Reproducible from seed.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < k:
        raise ValueError(f"need n >= k, got n={n}, k={k}")
    if d < 1:
        raise ValueError("d must be at least 1")
    if not spread > 0:
        raise ValueError("spread must be positive")
    rng = make_rng(seed)
    centers = rng.uniform(center_lo, center_hi, size=(k, d))
    labels = np.arange(n) % k
    coords = centers[labels] + rng.normal(0.0, spread, size=(n, d))
    return Dataset(coords)


class PartitionAssignment:
    """Total map from point id to partition id, plus the affected-point set.

    ``labels`` covers every point of the source dataset exactly once (the
    partitions are disjoint and complete); ``affected`` flags points close
    enough to a split boundary that neighbouring partitions interact through
    them when cluster results are merged.

    Backed by parallel id/label arrays; the mapping and set views materialize
    lazily on first access.
    """

    __slots__ = ("partition_count", "_ids", "_label_rows", "_affected_ids", "_labels", "_affected")

    def __init__(self, partition_count: int, labels: Mapping[int, int], affected: Iterable[int] = ()):
        labels = dict(labels)
        if not labels:
            raise ValueError("labels must not be empty")
        ids = np.fromiter(labels.keys(), dtype=np.int64, count=len(labels))
        rows = np.fromiter(labels.values(), dtype=np.int64, count=len(labels))
        self._init_arrays(partition_count, ids, rows, np.fromiter((int(i) for i in affected), dtype=np.int64))

    @classmethod
    def from_arrays(cls, partition_count: int, ids, label_rows, affected_ids=()) -> "PartitionAssignment":
        """Construct from parallel arrays; ids must already be unique."""
        self = cls.__new__(cls)
        self._init_arrays(
            partition_count,
            np.asarray(ids, dtype=np.int64),
            np.asarray(label_rows, dtype=np.int64),
            np.asarray(affected_ids, dtype=np.int64),
        )
        return self

    def _init_arrays(self, partition_count, ids, rows, affected_ids):
        if partition_count < 1:
            raise ValueError("partition_count must be at least 1")
        if ids.shape != rows.shape or ids.ndim != 1 or len(ids) == 0:
            raise ValueError("labels must be a non-empty map of point id to partition id")
        if len(rows) and (rows.min() < 0 or rows.max() >= partition_count):
            bad = int(rows[(rows < 0) | (rows >= partition_count)][0])
            raise ValueError(f"partition id {bad} out of range [0, {partition_count})")
        if len(affected_ids) and not np.isin(affected_ids, ids).all():
            raise ValueError("affected set references unknown point ids")
        self.partition_count = partition_count
        self._ids = ids
        self._label_rows = rows
        self._affected_ids = affected_ids
        self._labels = None
        self._affected = None

    @property
    def labels(self) -> dict[int, int]:
        if self._labels is None:
            self._labels = {int(i): int(p) for i, p in zip(self._ids, self._label_rows)}
        return self._labels

    @property
    def affected(self) -> frozenset[int]:
        if self._affected is None:
            self._affected = frozenset(int(i) for i in self._affected_ids)
        return self._affected

    @property
    def n(self) -> int:
        return len(self._ids)

    def sizes(self) -> np.ndarray:
        """Per-partition point counts (length partition_count, empty ones included)."""
        return np.bincount(self._label_rows, minlength=self.partition_count)

    def validate_against(self, ds: Dataset) -> None:
        """Check completeness: the label keys are exactly the dataset's ids."""
        if not np.array_equal(np.sort(self._ids), np.sort(ds.ids)):
            raise ValueError("assignment does not cover the dataset exactly")


@dataclass(frozen=True)
class PartitionMetrics:
    """Quality measurements of one partitioning run.

    ``bias`` is max partition size divided by the ideal size N/m; 1.0 means a
    perfect balance (the floor is ceil(N/m)*m/N when m does not divide N).
    ``size_cv`` is the coefficient of variation of the sizes, a secondary
    balance signal.
    """

    sizes: tuple[int, ...]
    bias: float
    size_cv: float
    affected_count: int
    wall_time: float


def compute_metrics(assignment: PartitionAssignment, elapsed: float = 0.0) -> PartitionMetrics:
    sizes = assignment.sizes()
    n = int(sizes.sum())
    m = assignment.partition_count
    ideal = n / m
    bias = float(sizes.max() / ideal)
    size_cv = float(sizes.std() / ideal)
    return PartitionMetrics(
        sizes=tuple(int(s) for s in sizes),
        bias=bias,
        size_cv=size_cv,
        affected_count=len(assignment.affected),
        wall_time=float(elapsed),
    )


def balance_floor(n: int, m: int) -> float:
    """Lowest achievable bias for n points in m partitions: ceil(n/m)*m/n."""
    return math.ceil(n / m) * m / n


def write_assignment_csv(assignment: PartitionAssignment, path) -> None:
    """Write one `point-id,partition-id,affected-flag` row per point, ordered by id."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        for pid in sorted(assignment.labels):
            flag = 1 if pid in assignment.affected else 0
            f.write(f"{pid},{assignment.labels[pid]},{flag}\n")


def read_assignment_csv(path) -> PartitionAssignment:
    labels: dict[int, int] = {}
    affected = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 fields, got {len(parts)}")
            pt, part, flag = (int(x) for x in parts)
            labels[pt] = part
            if flag:
                affected.append(pt)
    if not labels:
        raise ValueError(f"{path}: empty assignment file")
    return PartitionAssignment(max(labels.values()) + 1, labels, affected)
