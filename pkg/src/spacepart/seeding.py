"""Seed selection strategies for Voronoi splits.

Four ways to pick the k split centers of one node:

- ``random``: uniform sample without replacement. No balance guarantee either
  way; every load distribution is equally likely.
- ``gnat``: greedy farthest-point spread. After a uniform first pick, each
  next seed maximizes the *sum* of distances to the seeds chosen so far.
- ``kmeanspp``: squared-distance weighted sampling. Each next seed is drawn
  with probability proportional to its squared distance from the nearest
  already-chosen seed, which gravitates toward cluster centroids.
- ``median``: the two points straddling the median of the highest-variance
  dimension, reproducing an axis median split (fanout 2 only).

Every strategy is a pure function of (points, k, seed): ties break toward the
lowest point id and sampling uses an inverse-CDF over an explicit uniform
variate, so results are independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Point, as_point_arrays, make_rng
from .kdtree import select_median

__all__ = [
    "STRATEGY_KINDS",
    "SeedStrategy",
    "SeedSet",
    "seeds_random",
    "seeds_gnat",
    "seeds_kmeanspp",
    "seeds_median",
    "weighted_index",
    "sq_column",
    "squared_distance_weights",
]

STRATEGY_KINDS = ("random", "gnat", "kmeanspp", "median")


@dataclass(frozen=True)
class SeedStrategy:
    """A strategy kind plus the seed that makes its draws reproducible."""

    kind: str
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown seeding strategy {self.kind!r}, expected one of {STRATEGY_KINDS}")


@dataclass(frozen=True)
class SeedSet:
    """Ordered centers drawn from the input point set, in selection order."""

    centers: tuple[Point, ...]

    def __post_init__(self):
        ids = [c.id for c in self.centers]
        if len(self.centers) < 1:
            raise ValueError("a seed set needs at least one center")
        if len(set(ids)) != len(ids):
            raise ValueError("seed centers must be distinct points")

    @property
    def k(self) -> int:
        return len(self.centers)


def weighted_index(weights: np.ndarray, u: float) -> int:
    """Inverse-CDF bucket of a uniform variate u in [0, 1) under the given weights.

    Zero-weight entries have empty buckets and can never be returned. The total
    weight must be positive.
    """
    weights = np.asarray(weights, dtype=np.float64)
    cum = np.cumsum(weights)
    total = cum[-1]
    if not total > 0:
        raise ValueError("total weight must be positive")
    return int(np.searchsorted(cum, u * total, side="right"))


def sq_column(coords: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Exact squared distances from every row to one center (no expansion tricks)."""
    diff = coords - center
    return np.einsum("ij,ij->i", diff, diff)


def squared_distance_weights(coords: np.ndarray, center_coords: np.ndarray) -> np.ndarray:
    """Per-point squared distance to the nearest of the given centers."""
    centers = np.atleast_2d(center_coords)
    out = sq_column(coords, centers[0])
    for c in centers[1:]:
        np.minimum(out, sq_column(coords, c), out=out)
    return out


def _pick_lowest_id(candidates: np.ndarray, ids: np.ndarray) -> int:
    return int(candidates[np.argmin(ids[candidates])])


def _seed_set(coords, ids, positions) -> SeedSet:
    return SeedSet(tuple(Point(int(ids[i]), coords[i]) for i in positions))


def seeds_random(points, k: int, rng) -> SeedSet:
    """k distinct points sampled uniformly without replacement."""
    coords, ids = as_point_arrays(points)
    positions = random_positions(coords.shape[0], k, make_rng(rng))
    return _seed_set(coords, ids, positions)


def random_positions(n: int, k: int, rng: np.random.Generator) -> list[int]:
    if not 1 <= k <= n:
        raise ValueError(f"cannot draw {k} seeds from {n} points")
    return [int(i) for i in rng.choice(n, size=k, replace=False)]


def seeds_gnat(points, k: int, rng) -> SeedSet:
    """Farthest-sum greedy seeds: maximize total distance to the seeds so far."""
    coords, ids = as_point_arrays(points)
    positions, _ = gnat_positions(coords, ids, k, make_rng(rng))
    return _seed_set(coords, ids, positions)


def gnat_positions(
    coords: np.ndarray, ids: np.ndarray, k: int, rng: np.random.Generator
) -> tuple[list[int], np.ndarray]:
    """Greedy farthest-sum selection; also returns the (n, k) distance columns.

    The i-th seed (i >= 2) is the unselected point with the largest sum of
    Euclidean distances to the previous seeds, ties broken by lowest id.
    """
    n = coords.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"cannot draw {k} seeds from {n} points (need 2 <= k <= n)")
    first = int(rng.integers(n))
    positions = [first]
    dist_cols = np.empty((n, k))
    dist_cols[:, 0] = np.sqrt(sq_column(coords, coords[first]))
    sum_dist = dist_cols[:, 0].copy()
    chosen = np.zeros(n, dtype=bool)
    chosen[first] = True
    while len(positions) < k:
        masked = np.where(chosen, -np.inf, sum_dist)
        best = masked.max()
        nxt = _pick_lowest_id(np.flatnonzero(masked == best), ids)
        dist_cols[:, len(positions)] = np.sqrt(sq_column(coords, coords[nxt]))
        sum_dist += dist_cols[:, len(positions)]
        positions.append(nxt)
        chosen[nxt] = True
    return positions, dist_cols


def seeds_kmeanspp(points, k: int, rng) -> SeedSet:
    """Squared-distance weighted sampling after a uniform first center."""
    coords, ids = as_point_arrays(points)
    positions, _ = kmeanspp_positions(coords, k, make_rng(rng))
    return _seed_set(coords, ids, positions)


def kmeanspp_positions(
    coords: np.ndarray, k: int, rng: np.random.Generator
) -> tuple[list[int], np.ndarray]:
    """Weighted D^2 selection; also returns the (n, k) squared-distance columns.

    Each round samples the next center with probability proportional to the
    squared distance to the nearest chosen center; points at distance zero can
    never be drawn. Raises when the points offer fewer distinct locations than
    requested centers.
    """
    n = coords.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"cannot draw {k} seeds from {n} points (need 2 <= k <= n)")
    first = int(rng.integers(n))
    positions = [first]
    sq_cols = np.empty((n, k))
    sq_cols[:, 0] = sq_column(coords, coords[first])
    nearest_sq = sq_cols[:, 0].copy()
    while len(positions) < k:
        if not nearest_sq.sum() > 0:
            distinct = len(np.unique(coords, axis=0))
            raise ValueError(
                f"cannot place {k} centers: the points span only {distinct} distinct locations"
            )
        nxt = weighted_index(nearest_sq, float(rng.random()))
        sq_cols[:, len(positions)] = sq_column(coords, coords[nxt])
        np.minimum(nearest_sq, sq_cols[:, len(positions)], out=nearest_sq)
        positions.append(nxt)
    return positions, sq_cols


def seeds_median(points, k: int = 2) -> SeedSet:
    """The two points straddling the median of the highest-variance dimension.

    Returns (below, above): the point with the largest coordinate <= median and
    the point with the smallest coordinate strictly above it, ties broken by
    lowest id. A Voronoi split compared along that dimension reproduces an axis
    median split. Only defined for k = 2.
    """
    coords, ids = as_point_arrays(points)
    positions, _ = median_positions(coords, ids, k)
    return _seed_set(coords, ids, positions)


def median_positions(coords: np.ndarray, ids: np.ndarray, k: int = 2) -> tuple[list[int], int]:
    """Straddling pair around the axis median; also returns the chosen axis."""
    if k != 2:
        raise ValueError(f"median seeding only supports k=2, got k={k}")
    n = coords.shape[0]
    if n < 2:
        raise ValueError("median seeding needs at least 2 points")
    axis = int(np.argmax(coords.var(axis=0)))
    col = coords[:, axis]
    median = select_median(col)

    below = np.flatnonzero(col <= median)
    below_best = below[col[below] == col[below].max()]
    lo = _pick_lowest_id(below_best, ids)

    above = np.flatnonzero(col > median)
    if len(above) == 0:
        raise ValueError(f"no point lies above the median along dimension {axis}; cannot straddle it")
    above_best = above[col[above] == col[above].min()]
    hi = _pick_lowest_id(above_best, ids)
    return [lo, hi], axis
