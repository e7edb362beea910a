"""Baseline partitioner: recursive median splits on the highest-variance dimension.

Each split recomputes the per-dimension variance of the points at that node,
finds the lower median along the argmax dimension with randomized quickselect,
and routes points left/right with a deterministic tie rule that guarantees the
two sides differ by at most one point. Leaves are the partitions.

The build counts every full pass over a point subset (variance, selection
visits, routing) in ``scan_count`` so the benchmark can expose how much
repeated scanning the scheme needs compared to a Voronoi split tree.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import Dataset, PartitionAssignment

__all__ = [
    "KdNode",
    "KdPartitionTree",
    "select_rank",
    "select_median",
    "kd_partition",
    "kd_route",
    "kd_tree_to_dict",
    "kd_tree_to_json",
]

# Fixed pivot seed keeps builds reproducible while pivots stay effectively random.
_PIVOT_SEED = 0x5EEDED


def _select_counted(vals: list[float], rank: int, rng: random.Random) -> tuple[float, int]:
    """Hoare quickselect for the 0-based rank; returns (value, elements visited)."""
    lo, hi = 0, len(vals) - 1
    visits = 0
    while True:
        if lo == hi:
            return vals[lo], visits
        pivot = vals[rng.randrange(lo, hi + 1)]
        i, j = lo, hi
        while i <= j:
            while vals[i] < pivot:
                i += 1
            while vals[j] > pivot:
                j -= 1
            if i <= j:
                vals[i], vals[j] = vals[j], vals[i]
                i += 1
                j -= 1
        visits += hi - lo + 1
        if rank <= j:
            hi = j
        elif rank >= i:
            lo = i
        else:
            return vals[rank], visits


def select_rank(values, rank: int) -> float:
    """Value at the given 0-based rank of the sorted order, in expected O(n).

    Randomized in-place quickselect over a working copy; the result is a pure
    function of the input regardless of pivot choices.
    """
    vals = np.asarray(values, dtype=np.float64).tolist()
    if not vals:
        raise ValueError("cannot select from an empty sequence")
    if not 0 <= rank < len(vals):
        raise ValueError(f"rank {rank} out of range for {len(vals)} values")
    value, _ = _select_counted(vals, rank, random.Random(_PIVOT_SEED ^ len(vals)))
    return float(value)


def select_median(values) -> float:
    """Lower median: the element at rank floor((len-1)/2) of the sorted order."""
    n = len(values)
    if n == 0:
        raise ValueError("cannot take the median of an empty sequence")
    return select_rank(values, (n - 1) // 2)


@dataclass
class KdNode:
    """One median split. ``left``/``right`` are child nodes or leaf partition ids.

    Points with coordinate strictly below ``split_value`` go left, strictly
    above go right; points exactly at the median go left in ascending id order
    until the left side holds ceil(count/2) points (``tie_left_max_id`` records
    the largest id sent left, None when no tie point went left).
    """

    split_dim: int
    split_value: float
    point_count: int
    left: Union["KdNode", int]
    right: Union["KdNode", int]
    tie_left_max_id: Optional[int]


@dataclass
class KdPartitionTree:
    root: Union[KdNode, int]
    leaf_count: int
    assignment: PartitionAssignment
    eps: float
    scan_count: int
    leaf_sizes: dict[int, int]


def kd_partition(ds: Dataset, m: int, eps: float = 0.0) -> KdPartitionTree:
    """Split a dataset into m partitions by recursive median splitting.

    Splits the currently largest leaf (ties: lowest leaf id) until m leaves
    exist; every split halves its node to within one point. A point is
    affected when it lies within ``eps`` of any split hyperplane on its own
    root-to-leaf path.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if m > ds.n:
        raise ValueError(f"cannot make {m} partitions from {ds.n} points")
    if eps < 0:
        raise ValueError("eps must be non-negative")

    coords = ds.coords
    ids = ds.ids
    pivot_rng = random.Random(_PIVOT_SEED)
    # pending leaves reference their parent's arrays plus local row numbers;
    # rows materialize only when a leaf is actually split, so final leaves
    # never pay for a coordinate gather
    leaves: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, Optional[np.ndarray]]] = {
        0: (coords, ids, np.arange(ds.n), None)
    }
    heap: list[tuple[int, int]] = [(-ds.n, 0)]
    slots: dict[int, tuple[KdNode, str]] = {}
    root: Union[KdNode, int] = 0
    affected: set[int] = set()
    scan = 0
    next_id = 1

    while len(leaves) < m:
        _, lid = heapq.heappop(heap)
        parent_coords, parent_ids, idx, rows = leaves.pop(lid)
        if rows is None:
            node_coords, node_ids = parent_coords, parent_ids
        else:
            node_coords, node_ids = parent_coords[rows], parent_ids[rows]
        n_node = len(idx)

        var = node_coords.var(axis=0)
        scan += n_node
        split_dim = int(np.argmax(var))
        col = node_coords[:, split_dim]

        median, visits = _select_counted(col.tolist(), (n_node - 1) // 2, pivot_rng)
        scan += visits

        below = col < median
        eq_pos = np.flatnonzero(col == median)
        target = (n_node + 1) // 2
        need = target - int(below.sum())
        eq_ids = node_ids[eq_pos]
        order = np.argsort(eq_ids, kind="stable")
        left_mask = below.copy()
        left_mask[eq_pos[order[:need]]] = True
        tie_left_max_id = int(eq_ids[order[need - 1]]) if need > 0 else None
        scan += n_node

        near = np.abs(col - median) <= eps
        if near.any():
            affected.update(int(i) for i in node_ids[near])
        scan += n_node

        node = KdNode(
            split_dim=split_dim,
            split_value=float(median),
            point_count=n_node,
            left=lid,
            right=next_id,
            tie_left_max_id=tie_left_max_id,
        )
        if lid in slots:
            parent, side = slots.pop(lid)
            setattr(parent, side, node)
        else:
            root = node
        slots[lid] = (node, "left")
        slots[next_id] = (node, "right")

        left_rows = np.flatnonzero(left_mask)
        right_rows = np.flatnonzero(~left_mask)
        leaves[lid] = (node_coords, node_ids, idx[left_rows], left_rows)
        leaves[next_id] = (node_coords, node_ids, idx[right_rows], right_rows)
        heapq.heappush(heap, (-len(left_rows), lid))
        heapq.heappush(heap, (-len(right_rows), next_id))
        next_id += 1

    label_rows = np.empty(ds.n, dtype=np.int64)
    leaf_sizes = {}
    for lid, (_, _, idx, _) in leaves.items():
        leaf_sizes[lid] = len(idx)
        label_rows[idx] = lid
    assignment = PartitionAssignment.from_arrays(m, ids, label_rows, sorted(affected))
    return KdPartitionTree(
        root=root,
        leaf_count=m,
        assignment=assignment,
        eps=eps,
        scan_count=scan,
        leaf_sizes=leaf_sizes,
    )


def kd_route(tree: KdPartitionTree, point_id: int, coords) -> int:
    """Replay the recorded routing of a build point; returns its leaf id.

    Intended for verification: ties at a median are resolved with the recorded
    id cutoff, so this reproduces the build-time assignment exactly.
    """
    coords = np.asarray(coords, dtype=np.float64)
    node = tree.root
    while isinstance(node, KdNode):
        v = coords[node.split_dim]
        if v < node.split_value:
            node = node.left
        elif v > node.split_value:
            node = node.right
        elif node.tie_left_max_id is not None and point_id <= node.tie_left_max_id:
            node = node.left
        else:
            node = node.right
    return node


def kd_tree_to_dict(tree: KdPartitionTree) -> dict:
    def rec(node):
        if isinstance(node, KdNode):
            return {
                "split_dim": node.split_dim,
                "split_value": node.split_value,
                "count": node.point_count,
                "tie_left_max_id": node.tie_left_max_id,
                "left": rec(node.left),
                "right": rec(node.right),
            }
        return {"leaf": node, "count": tree.leaf_sizes[node]}

    return {"kind": "kdtree", "leaf_count": tree.leaf_count, "eps": tree.eps, "root": rec(tree.root)}


def kd_tree_to_json(tree: KdPartitionTree) -> str:
    return json.dumps(kd_tree_to_dict(tree), sort_keys=True)
