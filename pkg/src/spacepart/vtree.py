"""Voronoi split tree: recursive nearest-center partitioning with seeded centers.

Each internal node holds a handful of seed centers drawn from its own points;
every point routes to its nearest center and the process repeats inside each
cell until the requested number of leaf partitions exists. Points whose
distance gap to a rival center is at most ``2*eps`` are flagged affected (for
two centers this covers everything within ``eps`` of the bisecting hyperplane,
and is a conservative superset of that band in general).

Nodes built with median seeding compare along the seeding axis only, which
makes the split coincide with an axis median split. Internal nodes drop their
point storage the moment they are split, keeping only center data and counts,
so the finished tree stores points in its leaves alone. Walking the tree
bottom-up yields the order in which per-partition cluster results should be
merged.

Distance kernel: squared distances come from the expansion |p|^2 - 2 p.c +
|c|^2 with precomputed row norms, clamped at zero. One BLAS column per center
replaces per-center subtraction passes, which is what makes high-dimensional
builds cheap; construction, routing, boundary probes and verification all go
through the same kernel. Public `assign_to_centers` uses the plain
elementwise form instead, where exact zero self-distances matter more than
throughput.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import Dataset, PartitionAssignment, Point, as_point_arrays, make_rng
from .seeding import (
    STRATEGY_KINDS,
    SeedStrategy,
    median_positions,
    sq_column,
    weighted_index,
)

__all__ = [
    "CenterSummary",
    "VNode",
    "VTreeConfig",
    "VTree",
    "MergeStep",
    "MergeOrder",
    "assign_to_centers",
    "build_vtree",
    "route_point",
    "route_point_counted",
    "affected_partitions",
    "merge_order",
    "internal_member_storage",
    "vtree_to_dict",
    "vtree_to_json",
]


def row_sqnorms(coords: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", coords, coords)


@dataclass(frozen=True)
class CenterSummary:
    """What a split keeps of a child's points: count, centroid, bounding box."""

    count: int
    centroid: Optional[np.ndarray]
    bbox_min: Optional[np.ndarray]
    bbox_max: Optional[np.ndarray]


@dataclass
class VNode:
    """One tree node. Leaves carry their member rows; internal nodes do not.

    ``axis`` is set on nodes split with median seeding: distances to centers
    are then measured along that dimension only, so the cell boundary is the
    axis midpoint between the two straddling seeds. ``summary`` stays None
    until ``VTree.ensure_summaries`` derives it from the leaf data.
    """

    level: int
    centers: tuple[Point, ...] = ()
    center_sqnorms: tuple[float, ...] = ()
    child_counts: tuple[int, ...] = ()
    overlap_count: int = 0
    children: tuple["VNode", ...] = ()
    partition_id: Optional[int] = None
    summary: Optional[tuple[CenterSummary, ...]] = None
    axis: Optional[int] = None
    members: Optional[np.ndarray] = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def center_matrix(self) -> np.ndarray:
        return np.stack([c.coords for c in self.centers])

    def squared_distances(self, coords: np.ndarray, sqnorms: Optional[np.ndarray] = None) -> np.ndarray:
        """Per-center squared distances, one expansion column per center.

        Same arithmetic as the build's column kernel, so recomputing a node's
        own rows reproduces its recorded split.
        """
        coords = np.atleast_2d(coords)
        if self.axis is not None:
            ax = np.array([c.coords[self.axis] for c in self.centers])
            diff = coords[:, self.axis : self.axis + 1] - ax[None, :]
            return diff * diff
        if sqnorms is None:
            sqnorms = row_sqnorms(coords)
        cols = [
            np.maximum(sqnorms - 2.0 * (coords @ c.coords) + sq_c, 0.0)
            for c, sq_c in zip(self.centers, self.center_sqnorms)
        ]
        return np.column_stack(cols)

    def distances_from(self, coords: np.ndarray, sqnorms: Optional[np.ndarray] = None) -> np.ndarray:
        """Real distances to this node's centers (axis distance on median nodes)."""
        coords = np.atleast_2d(coords)
        if self.axis is not None:
            ax = np.array([c.coords[self.axis] for c in self.centers])
            return np.abs(coords[:, self.axis : self.axis + 1] - ax[None, :])
        return np.sqrt(self.squared_distances(coords, sqnorms))


@dataclass(frozen=True)
class VTreeConfig:
    fanout: Union[int, tuple[int, ...]]
    eps: float
    strategy: str
    partition_count: int
    seed: int


@dataclass
class VTree:
    levels: int
    root: VNode
    leaf_assignment: PartitionAssignment
    config: VTreeConfig
    scan_count: int
    leaf_nodes: dict[int, VNode]
    dims: int
    _coords: np.ndarray = field(repr=False, default=None)
    _summaries_done: bool = field(repr=False, default=False)

    @property
    def leaf_count(self) -> int:
        return self.config.partition_count

    def ensure_summaries(self) -> None:
        """Populate per-center summaries bottom-up from the leaf point data.

        Summaries are diagnostics (rendering, routing sanity checks); they are
        derived on demand so building and timing a partition does not pay for
        them. Idempotent.
        """
        if not self._summaries_done:
            _attach_summaries(self.root, self._coords)
            self._summaries_done = True


def _assign_labels(dist_cols: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Labels (argmin, ties to the lowest center index) and the affected mask.

    ``dist_cols`` may be squared or real distances for the labels; the margin
    test runs on real distances, so callers pass real columns whenever eps
    matters (monotonicity makes the argmin identical either way).
    """
    labels = np.argmin(dist_cols, axis=1)
    if dist_cols.shape[1] == 1:
        return labels, np.zeros(len(dist_cols), dtype=bool)
    two = np.partition(dist_cols, 1, axis=1)
    affected = (two[:, 1] - two[:, 0]) <= 2.0 * eps
    return labels, affected


def assign_to_centers(points, centers: Sequence[Point], eps: float = 0.0):
    """Assign each point to its nearest center and flag boundary points.

    Returns ``(per_center_ids, affected_ids)``: one id list per center in
    center order, and the set of assigned points whose distance gap to some
    rival center is at most ``2*eps``. Equidistant points go to the lowest
    center index and are affected for any eps >= 0.
    """
    centers = tuple(centers)
    if not centers:
        raise ValueError("need at least one center")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    coords, ids = as_point_arrays(points)
    dists = np.column_stack([np.sqrt(sq_column(coords, c.coords)) for c in centers])
    labels, affected = _assign_labels(dists, eps)
    per_center = [[int(i) for i in ids[labels == c]] for c in range(len(centers))]
    return per_center, {int(i) for i in ids[affected]}


def _fanout_for(fanout, level: int) -> int:
    if isinstance(fanout, int):
        return fanout
    return fanout[min(level, len(fanout) - 1)]


def _split_rows(cols, axis, eps: float, k: int):
    """Labels, affected mask and child counts from per-center distance columns.

    Columns are squared distances (axis nodes: real axis distances); squared
    values order identically, and the 2*eps margin test moves to real values
    only when eps is positive.
    """
    if k == 2:
        c0, c1 = cols
        labels = (c1 < c0).astype(np.int64)
        if eps == 0.0:
            affected = c0 == c1
        elif axis is not None:
            affected = np.abs(c0 - c1) <= 2.0 * eps
        else:
            affected = np.abs(np.sqrt(c0) - np.sqrt(c1)) <= 2.0 * eps
        ones = int(labels.sum())
        counts = np.array([len(labels) - ones, ones], dtype=np.int64)
        return labels, affected, counts

    dists = np.column_stack(cols)
    labels = np.argmin(dists, axis=1)
    if eps > 0.0 and axis is None:
        dists = np.sqrt(dists)
    two = np.partition(dists, 1, axis=1)
    affected = (two[:, 1] - two[:, 0]) <= 2.0 * eps
    return labels, affected, np.bincount(labels, minlength=k)


class _NodeView:
    """A pending node's points as rows of a reference array.

    Distance columns come from one BLAS pass over the reference array. When
    the node spans at least half of it the pass runs dense and slices the
    node's rows out (cheaper than gathering a copy); smaller nodes are
    materialized once at split time so the work stays proportional to the
    node. ``touched`` records how many rows each column pass actually read.
    """

    def __init__(self, ref_coords, ref_sq, ref_ids, rows, force_materialize=False):
        self.touched = 0
        if rows is not None and (force_materialize or 2 * len(rows) < len(ref_coords)):
            ref_coords = ref_coords[rows]
            ref_sq = ref_sq[rows] if ref_sq is not None else None
            ref_ids = ref_ids[rows]
            self.touched = len(rows)
            rows = None
        self.ref_coords = ref_coords
        self.ref_sq = ref_sq
        self.ref_ids = ref_ids
        self.rows = rows
        self.n = len(ref_coords) if rows is None else len(rows)
        self.ids = ref_ids if rows is None else ref_ids[rows]

    def materialized(self) -> np.ndarray:
        """The node's own coordinate rows (forces a gather on dense views)."""
        if self.rows is None:
            return self.ref_coords
        return self.ref_coords[self.rows]

    def ref_position(self, local: int) -> int:
        return int(local if self.rows is None else self.rows[local])

    def center_coords(self, local: int) -> np.ndarray:
        return self.ref_coords[self.ref_position(local)].copy()

    def center_sqnorm(self, local: int) -> float:
        return float(self.ref_sq[self.ref_position(local)])

    def sq_col(self, local: int) -> np.ndarray:
        """Clamped expansion column of squared distances to one member point."""
        pos = self.ref_position(local)
        dot = self.ref_coords @ self.ref_coords[pos]
        col = np.maximum(self.ref_sq - 2.0 * dot + self.ref_sq[pos], 0.0)
        self.touched += len(self.ref_coords)
        return col if self.rows is None else col[self.rows]

    def child_rows(self, local_rows: np.ndarray) -> np.ndarray:
        return local_rows if self.rows is None else self.rows[local_rows]


def _seed_columns(kind, view: _NodeView, k, rng):
    """Pick k centers and return (local positions, per-center columns, axis).

    Columns are squared distances for the kernel strategies and real axis
    distances for median seeding (the argmin is the same either way).
    kmeans++ and farthest-sum selection reuse the columns they compute while
    sampling, so a binary split costs two column passes total.
    """
    n = view.n
    if kind == "median":
        node_coords = view.materialized()
        positions, axis = median_positions(node_coords, view.ids, k)
        col = node_coords[:, axis]
        cols = [np.abs(col - node_coords[p, axis]) for p in positions]
        view.touched += 3 * n
        return positions, cols, axis

    if kind == "random":
        positions = [int(i) for i in rng.choice(n, size=k, replace=False)]
        cols = [view.sq_col(p) for p in positions]
    elif kind == "kmeanspp":
        first = int(rng.integers(n))
        positions = [first]
        cols = [view.sq_col(first)]
        nearest = cols[0].copy()
        while len(positions) < k:
            if not nearest.sum() > 0:
                distinct = len(np.unique(view.materialized(), axis=0))
                raise ValueError(
                    f"cannot place {k} centers: the points span only {distinct} distinct locations"
                )
            nxt = weighted_index(nearest, float(rng.random()))
            positions.append(nxt)
            cols.append(view.sq_col(nxt))
            np.minimum(nearest, cols[-1], out=nearest)
    elif kind == "gnat":
        first = int(rng.integers(n))
        positions = [first]
        cols = [view.sq_col(first)]
        sum_dist = np.sqrt(cols[0])
        chosen = np.zeros(n, dtype=bool)
        chosen[first] = True
        while len(positions) < k:
            masked = np.where(chosen, -np.inf, sum_dist)
            best = masked.max()
            candidates = np.flatnonzero(masked == best)
            nxt = int(candidates[np.argmin(view.ids[candidates])])
            positions.append(nxt)
            chosen[nxt] = True
            cols.append(view.sq_col(nxt))
            sum_dist = sum_dist + np.sqrt(cols[-1])
    else:
        raise ValueError(f"unknown seeding strategy {kind!r}, expected one of {STRATEGY_KINDS}")

    return positions, cols, None


def build_vtree(
    ds: Dataset,
    m: int,
    fanout: Union[int, Sequence[int]] = 2,
    strategy: Union[str, SeedStrategy] = "kmeanspp",
    eps: float = 0.0,
    seed: Optional[int] = None,
) -> VTree:
    """Grow a Voronoi split tree until the dataset is cut into m leaf partitions.

    Always splits the currently largest leaf (ties: lowest partition id). The
    requested fanout may be a single value or a per-level schedule; the last
    split shrinks its fanout when fewer children are needed to reach exactly m
    leaves. A split that produces an empty child is retried once with fresh
    seed draws and then accepted (deterministic strategies reproduce the same
    split and are accepted as-is). Reproducible from the seed.
    """
    if isinstance(strategy, SeedStrategy):
        kind = strategy.kind
        if seed is None:
            seed = strategy.seed
    else:
        kind = strategy
        if kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown seeding strategy {kind!r}, expected one of {STRATEGY_KINDS}")
    if seed is None:
        seed = 0
    if m < 1:
        raise ValueError("m must be at least 1")
    if m > ds.n:
        raise ValueError(f"cannot make {m} partitions from {ds.n} points")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if isinstance(fanout, int):
        fanout_cfg: Union[int, tuple[int, ...]] = fanout
        fanout_values = (fanout,)
    else:
        fanout_cfg = tuple(int(f) for f in fanout)
        if not fanout_cfg:
            raise ValueError("fanout schedule must not be empty")
        fanout_values = fanout_cfg
    if any(f < 2 for f in fanout_values):
        raise ValueError("fanout must be at least 2")
    if kind == "median" and any(f != 2 for f in fanout_values):
        raise ValueError("median seeding requires fanout 2")

    coords = ds.coords
    ids = ds.ids
    needs_sqnorms = kind in ("random", "gnat", "kmeanspp")
    sqnorms = row_sqnorms(coords) if needs_sqnorms else None
    rng = make_rng(seed)
    root = VNode(level=0, partition_id=0, members=np.arange(ds.n))
    leaves: dict[int, VNode] = {0: root}
    # pending leaves reference an ancestor's arrays plus row numbers; a node
    # materializes its own rows only when it is split AND is small relative to
    # that array, so final leaves never pay for a coordinate gather
    arrays = {0: (coords, sqnorms, ids, None)}
    heap: list[tuple[int, int]] = [(-ds.n, 0)]
    affected_rows = np.zeros(ds.n, dtype=bool)
    track_affected = False
    scan = ds.n if needs_sqnorms else 0
    next_id = 1

    while len(leaves) < m:
        _, lid = heapq.heappop(heap)
        node = leaves.pop(lid)
        ref_coords, ref_sq, ref_ids, rows = arrays.pop(lid)
        view = _NodeView(ref_coords, ref_sq, ref_ids, rows, force_materialize=(kind == "median"))
        idx = node.members
        n_node = len(idx)
        k = min(_fanout_for(fanout_cfg, node.level), m - len(leaves), n_node)

        for attempt in (0, 1):
            positions, cols, axis = _seed_columns(kind, view, k, rng)
            labels, aff_mask, counts = _split_rows(cols, axis, eps, k)
            if counts.min() > 0 or attempt == 1 or kind == "median":
                break

        node.centers = tuple(Point(int(view.ids[p]), view.center_coords(p)) for p in positions)
        node.center_sqnorms = (
            tuple(view.center_sqnorm(p) for p in positions) if view.ref_sq is not None else ()
        )
        node.child_counts = tuple(int(c) for c in counts)
        node.overlap_count = int(aff_mask.sum())
        node.axis = axis
        if node.overlap_count:
            affected_rows[idx[aff_mask]] = True
            track_affected = True

        children = []
        for c in range(k):
            pid = lid if c == 0 else next_id
            if c > 0:
                next_id += 1
            local_rows = np.flatnonzero(labels == c)
            child = VNode(level=node.level + 1, partition_id=pid, members=idx[local_rows])
            children.append(child)
            leaves[pid] = child
            arrays[pid] = (view.ref_coords, view.ref_sq, view.ref_ids, view.child_rows(local_rows))
            heapq.heappush(heap, (-len(local_rows), pid))
        node.children = tuple(children)
        node.partition_id = None
        node.members = None
        scan += view.touched + n_node

    label_rows = np.empty(ds.n, dtype=np.int64)
    for pid, leaf in leaves.items():
        label_rows[leaf.members] = pid
    affected_ids = ids[affected_rows] if track_affected else ()
    assignment = PartitionAssignment.from_arrays(m, ids, label_rows, affected_ids)

    levels = max(leaf.level for leaf in leaves.values())
    config = VTreeConfig(fanout=fanout_cfg, eps=eps, strategy=kind, partition_count=m, seed=int(seed))
    return VTree(
        levels=levels,
        root=root,
        leaf_assignment=assignment,
        config=config,
        scan_count=scan,
        leaf_nodes=dict(sorted(leaves.items())),
        dims=ds.dims,
        _coords=coords,
    )


def _attach_summaries(node: VNode, coords: np.ndarray):
    """Bottom-up per-center summaries; returns (count, coord_sum, min, max)."""
    if node.is_leaf:
        if len(node.members) == 0:
            stats = (0, None, None, None)
        else:
            sub = coords[node.members]
            stats = (len(node.members), sub.sum(axis=0), sub.min(axis=0), sub.max(axis=0))
        node.summary = (_stats_to_summary(stats),)
        return stats
    child_stats = [_attach_summaries(child, coords) for child in node.children]
    node.summary = tuple(_stats_to_summary(s) for s in child_stats)
    count = sum(s[0] for s in child_stats)
    live = [s for s in child_stats if s[0] > 0]
    total = sum(s[1] for s in live)
    mins = np.min(np.stack([s[2] for s in live]), axis=0)
    maxs = np.max(np.stack([s[3] for s in live]), axis=0)
    return count, total, mins, maxs


def _stats_to_summary(stats) -> CenterSummary:
    count, total, mins, maxs = stats
    centroid = total / count if count else None
    return CenterSummary(count=count, centroid=centroid, bbox_min=mins, bbox_max=maxs)


def internal_member_storage(tree: VTree) -> int:
    """Point rows still stored on internal nodes; zero for a well-formed tree."""
    total = 0
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if not node.is_leaf:
            if node.members is not None:
                total += len(node.members)
            stack.extend(node.children)
    return total


def _check_point(tree: VTree, p) -> np.ndarray:
    coords = p.coords if isinstance(p, Point) else np.asarray(p, dtype=np.float64)
    if coords.shape != (tree.dims,):
        raise ValueError(f"point has shape {coords.shape}, tree expects ({tree.dims},)")
    return coords


def route_point_counted(tree: VTree, p) -> tuple[int, int]:
    """Leaf partition id for a point plus the number of distance comparisons."""
    coords = _check_point(tree, p)
    node = tree.root
    comparisons = 0
    while not node.is_leaf:
        dists = node.squared_distances(coords[None, :])[0]
        comparisons += len(node.centers)
        node = node.children[int(np.argmin(dists))]
    return node.partition_id, comparisons


def route_point(tree: VTree, p) -> int:
    """Descend the tree choosing the nearest center at each node."""
    return route_point_counted(tree, p)[0]


def affected_partitions(tree: VTree, p, eps: float) -> set[int]:
    """All leaves a point could interact with inside the 2*eps distance margin.

    Follows every center whose distance exceeds the node minimum by at most
    ``2*eps``; always contains the point's own routed leaf.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    coords = _check_point(tree, p)
    out: set[int] = set()
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            out.add(node.partition_id)
            continue
        dists = node.distances_from(coords[None, :])[0]
        dmin = dists.min()
        for j, d in enumerate(dists):
            if d - dmin <= 2.0 * eps:
                stack.append(node.children[j])
    return out


@dataclass(frozen=True)
class MergeStep:
    children: tuple[int, ...]
    parent: int


@dataclass(frozen=True)
class MergeOrder:
    """Bottom-up merge schedule: leaves are groups 0..m-1, internal groups follow."""

    steps: tuple[MergeStep, ...]
    leaf_count: int

    def replay(self) -> int:
        """Apply the steps; returns the final group id, validating coverage."""
        available = set(range(self.leaf_count))
        coverage = {pid: frozenset([pid]) for pid in available}
        for step in self.steps:
            for child in step.children:
                if child not in available:
                    raise ValueError(f"merge step consumes unavailable group {child}")
                available.remove(child)
            coverage[step.parent] = frozenset().union(*(coverage[c] for c in step.children))
            available.add(step.parent)
        if len(available) != 1:
            raise ValueError(f"merge order leaves {len(available)} groups instead of one")
        final = available.pop()
        if coverage[final] != frozenset(range(self.leaf_count)):
            raise ValueError("merge order does not cover every partition exactly once")
        return final


def merge_order(tree: VTree) -> MergeOrder:
    """Post-order traversal emitting one (children -> parent group) step per split."""
    steps: list[MergeStep] = []
    counter = tree.leaf_count

    def rec(node: VNode) -> int:
        nonlocal counter
        if node.is_leaf:
            return node.partition_id
        group_ids = tuple(rec(child) for child in node.children)
        gid = counter
        counter += 1
        steps.append(MergeStep(children=group_ids, parent=gid))
        return gid

    rec(tree.root)
    return MergeOrder(steps=tuple(steps), leaf_count=tree.leaf_count)


def vtree_to_dict(tree: VTree) -> dict:
    def rec(node: VNode):
        if node.is_leaf:
            return {"leaf": node.partition_id, "count": len(node.members)}
        return {
            "level": node.level,
            "centers": [{"id": c.id, "coords": [float(v) for v in c.coords]} for c in node.centers],
            "counts": list(node.child_counts),
            "overlap_count": node.overlap_count,
            "axis": node.axis,
            "children": [rec(child) for child in node.children],
        }

    cfg = tree.config
    return {
        "kind": "vtree",
        "m": cfg.partition_count,
        "fanout": list(cfg.fanout) if isinstance(cfg.fanout, tuple) else cfg.fanout,
        "eps": cfg.eps,
        "strategy": cfg.strategy,
        "seed": cfg.seed,
        "levels": tree.levels,
        "root": rec(tree.root),
    }


def vtree_to_json(tree: VTree) -> str:
    return json.dumps(vtree_to_dict(tree), sort_keys=True)
