"""Spatial partitioning of high-dimensional point sets for parallel clustering.

Three partitioning schemes over a shared data model: recursive kd-tree median
splits, a hashed n-cube grid index with an approximate slab median, and a
Voronoi split tree with pluggable seeding (random, farthest-sum, weighted
squared-distance sampling, median straddling). A benchmark harness compares
wall time, load bias, affected-point counts and scan counters across schemes,
and a CLI exposes generation, partitioning, benchmarking and SVG rendering.
"""

from .core import (
    Dataset,
    PartitionAssignment,
    PartitionMetrics,
    Point,
    balance_floor,
    compute_metrics,
    euclidean_distance,
    generate_gaussian_mixture,
    generate_uniform,
    make_rng,
    variance_per_dimension,
)
from .dataio import DatasetFormatError, load_dataset, save_dataset
from .grid import (
    GridConfig,
    GridFeasibilityError,
    GridIndex,
    build_grid,
    grid_find_median,
    grid_stats,
    locate_cube,
)
from .kdtree import KdNode, KdPartitionTree, kd_partition, select_median, select_rank
from .seeding import (
    SeedSet,
    SeedStrategy,
    seeds_gnat,
    seeds_kmeanspp,
    seeds_median,
    seeds_random,
)
from .vtree import (
    MergeOrder,
    VNode,
    VTree,
    affected_partitions,
    assign_to_centers,
    build_vtree,
    merge_order,
    route_point,
)
from .bench import BenchConfig, BenchReport, DatasetSpec, emit_report, run_benchmark
from .render import render_2d

__version__ = "0.1.0"
