"""Acceptance suite: one test per release criterion, one printed line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL lines.
Property criteria (1-7) check exact contracts against independent oracles;
quantitative criteria (8-11) reproduce the benchmark's headline comparisons
on freshly generated data at fixed seeds.
"""

import gc
import json
import math
import statistics
import time
from contextlib import contextmanager

import numpy as np
import pytest

from spacepart.cli import main as cli_main
from spacepart.core import (
    Dataset,
    balance_floor,
    compute_metrics,
    euclidean_distance,
    generate_gaussian_mixture,
    generate_uniform,
    make_rng,
)
from spacepart.grid import GridConfig, build_grid, grid_find_median
from spacepart.kdtree import KdNode, kd_partition, select_median
from spacepart.seeding import seeds_gnat, seeds_kmeanspp
from spacepart.vtree import affected_partitions, build_vtree, route_point


@contextmanager
def criterion(number: int, summary: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {number:2d}: FAIL ({summary})")
        raise
    print(f"[acceptance] criterion {number:2d}: PASS ({summary})")


def all_schemes(ds, m, seed):
    yield "kdtree", kd_partition(ds, m).assignment
    for strategy in ("random", "gnat", "kmeanspp", "median"):
        yield f"vtree:{strategy}", build_vtree(ds, m, strategy=strategy, seed=seed).leaf_assignment


def test_criterion_1_partition_totality():
    start = time.perf_counter()
    with criterion(1, "every scheme yields a total map onto [0, m), sizes sum to N"):
        datasets = [
            generate_uniform(1000, 8, seed=1),
            generate_gaussian_mixture(2000, 16, k=5, seed=2),
            generate_uniform(10_000, 64, seed=3),
        ]
        for ds in datasets:
            id_set = set(int(i) for i in ds.ids)
            for m in (7, 16):
                for name, assignment in all_schemes(ds, m, seed=11):
                    labels = assignment.labels
                    assert labels.keys() == id_set, f"{name} not total"
                    assert set(labels.values()) <= set(range(m)), f"{name} label out of range"
                    sizes = assignment.sizes()
                    assert sizes.sum() == ds.n and len(sizes) == m
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"totality sweep took {elapsed:.1f}s, budget is 60s"


def _walk_balance(tree):
    def rec(node):
        if not isinstance(node, KdNode):
            return tree.leaf_sizes[node]
        left = rec(node.left)
        right = rec(node.right)
        assert abs(left - right) <= 1, "median split sides differ by more than one point"
        assert left + right == node.point_count
        return node.point_count

    rec(tree.root)


def test_criterion_2_kdtree_balance():
    with criterion(2, "kd splits balanced to 1 point; leaf spread <= ceil(log2 m) on 200 datasets"):
        rng = make_rng(7)
        for case in range(200):
            n = int(rng.integers(16, 400))
            d = int(rng.integers(1, 7))
            m = int(rng.choice([2, 4, 8, 16]))
            m = min(m, n)
            ds = Dataset(rng.uniform(-50, 50, size=(n, d)))
            tree = kd_partition(ds, m)
            _walk_balance(tree)
            sizes = tree.assignment.sizes()
            assert sizes.max() - sizes.min() <= math.ceil(math.log2(m))


def _check_voronoi_node(node, rows, ds):
    if node.is_leaf:
        assert np.array_equal(np.sort(rows), np.sort(node.members))
        return
    dists = node.squared_distances(ds.coords[rows])
    labels = np.argmin(dists, axis=1)
    row_min = dists.min(axis=1)
    chosen = dists[np.arange(len(rows)), labels]
    assert np.all(chosen <= row_min), "a point is not assigned to its nearest center"
    counts = np.bincount(labels, minlength=len(node.centers))
    assert tuple(int(c) for c in counts) == node.child_counts
    for j, child in enumerate(node.children):
        _check_voronoi_node(child, rows[labels == j], ds)


def test_criterion_3_voronoi_invariant():
    with criterion(3, "100% nearest-center membership at every tree node, exact"):
        specs = [
            (generate_uniform(400, 3, seed=5), 8),
            (generate_gaussian_mixture(600, 16, k=4, seed=6), 9),
            (generate_uniform(250, 2, seed=7), 16),
        ]
        for ds, m in specs:
            for strategy in ("random", "gnat", "kmeanspp", "median"):
                tree = build_vtree(ds, m, strategy=strategy, seed=3)
                _check_voronoi_node(tree.root, np.arange(ds.n), ds)


def test_criterion_4_median_oracles():
    with criterion(4, "quickselect matches sorting on 1e4 vectors; slab median rank bound on 1e3 grids"):
        rng = make_rng(13)
        for _ in range(10_000):
            length = int(rng.integers(1, 60))
            values = rng.integers(-30, 30, size=length).astype(float)
            assert select_median(values) == float(np.sort(values)[(length - 1) // 2])

        for case in range(1000):
            n = int(rng.integers(1, 200))
            d = int(rng.integers(1, 3))
            ds = Dataset(rng.uniform(-10, 10, size=(n, d)))
            grid = build_grid(ds, GridConfig(int(rng.integers(1, 7)), int(rng.integers(1, 4)), dims=d))
            dim = case % d
            value = grid_find_median(grid, dim)
            column = ds.coords[:, dim]
            ordered = np.sort(column)
            first = int(np.searchsorted(ordered, value, side="left")) + 1
            last = int(np.searchsorted(ordered, value, side="right"))
            assert first <= last, "returned median is not a data value"
            target = (n + 1) // 2
            cubes = grid.config.cubes_per_dim
            width = grid.widths[dim] or 1.0
            slabs = np.clip(np.floor((column - grid.mins[dim]) / width).astype(int), 0, cubes - 1)
            max_slab = int(np.bincount(slabs, minlength=cubes).max())
            error = 0 if first <= target <= last else min(abs(first - target), abs(last - target))
            assert error <= max_slab


def test_criterion_5_seeding_oracles():
    with criterion(5, "farthest-sum maximality exact; kmeans++ frequencies within 0.02 of D^2 law"):
        rng = make_rng(17)
        for case in range(25):
            n = int(rng.integers(5, 501))
            k = min(int(rng.integers(2, 7)), n)
            ds = Dataset(rng.integers(0, 1000, size=(n, 2)).astype(float))
            centers = seeds_gnat(ds, k, rng=case).centers
            chosen = {centers[0].id}
            for i in range(1, k):
                sums = {
                    p.id: sum(euclidean_distance(p, c) for c in centers[:i])
                    for p in ds.points
                    if p.id not in chosen
                }
                best = max(sums.values())
                assert sums[centers[i].id] == best, "seed does not attain the maximum distance sum"
                assert centers[i].id == min(pid for pid, s in sums.items() if s == best)
                chosen.add(centers[i].id)

        line = Dataset([[0.0], [1.0], [2.0]])
        kept = 0
        second_counts = np.zeros(3)
        seed = 0
        while kept < 10_000:
            out = seeds_kmeanspp(line, 2, rng=seed)
            seed += 1
            if out.centers[0].id == 0:
                second_counts[out.centers[1].id] += 1
                kept += 1
        freqs = second_counts / kept
        assert freqs[0] == 0.0
        assert abs(freqs[1] - 0.2) <= 0.02
        assert abs(freqs[2] - 0.8) <= 0.02


def test_criterion_6_median_split_equals_kd():
    with criterion(6, "one median-seeded split reproduces the kd m=2 assignment on 100 datasets"):
        rng = make_rng(19)
        done = 0
        while done < 100:
            n = int(rng.integers(10, 200))
            d = int(rng.integers(1, 9))
            ds = Dataset(rng.uniform(-100, 100, size=(n, d)))
            top = int(np.argmax(ds.coords.var(axis=0)))
            if len(np.unique(ds.coords[:, top])) != n:
                continue
            vt = build_vtree(ds, 2, strategy="median", seed=done)
            kd = kd_partition(ds, 2)
            assert vt.leaf_assignment.labels == kd.assignment.labels
            done += 1


def brute_force_affected(tree, coords, eps):
    found = set()

    def descend(node):
        if node.is_leaf:
            found.add(node.partition_id)
            return
        dists = node.distances_from(np.asarray(coords, dtype=float)[None, :])[0]
        dmin = dists.min()
        for j in range(len(node.centers)):
            if dists[j] - dmin <= 2.0 * eps:
                descend(node.children[j])

    descend(tree.root)
    return found


def test_criterion_7_affected_set_oracle():
    with criterion(7, "affected_partitions equals exhaustive path enumeration on trees <= 16 leaves"):
        rng = make_rng(23)
        strategies = ("random", "gnat", "kmeanspp", "median")
        for case in range(100):
            n = int(rng.integers(20, 150))
            d = int(rng.integers(1, 5))
            m = int(rng.integers(2, 17))
            m = min(m, n)
            ds = Dataset(rng.uniform(-20, 20, size=(n, d)))
            tree = build_vtree(ds, m, strategy=strategies[case % 4], seed=case)
            eps = [0.0, 0.5, 3.0][case % 3]
            probes = [ds.coords[row] for row in range(0, n, max(1, n // 8))]
            probes.append(rng.uniform(-20, 20, size=d))
            for p in probes:
                got = affected_partitions(tree, p, eps)
                assert route_point(tree, p) in got
                assert got == brute_force_affected(tree, p, eps)


def _paired_medians(ds, m, strategy, reps=5):
    """Median-of-reps wall time for the kd-tree and one vtree strategy.

    The two builds run in tightly alternating rounds (order swapping each
    round) so both sample the same machine conditions; one untimed warmup
    round precedes the measured ones and the GC stays out of the timed
    region.
    """
    builders = {
        "kdtree": lambda: kd_partition(ds, m),
        strategy: lambda: build_vtree(ds, m, strategy=strategy, seed=0),
    }
    times = {name: [] for name in builders}
    for fn in builders.values():
        fn()  # warmup
    gc.disable()
    try:
        for rep in range(reps):
            gc.collect()
            order = ("kdtree", strategy) if rep % 2 == 0 else (strategy, "kdtree")
            for name in order:
                t0 = time.perf_counter()
                builders[name]()
                times[name].append(time.perf_counter() - t0)
    finally:
        gc.enable()
    return statistics.median(times["kdtree"]), statistics.median(times[strategy])


def _ratio_criterion(number, summary, strategy, passes, attempts=3):
    """Timed comparisons retry on a shared, noisy machine.

    A genuinely misbehaving implementation cannot pass three independent
    median-of-5 measurements; transient co-tenant load can fail one.
    """
    datasets = [(n, d, generate_gaussian_mixture(n, d, k=8, seed=0)) for n, d in ((1500, 1024), (4000, 1024))]
    with criterion(number, summary):
        for attempt in range(attempts):
            results = []
            for n, d, ds in datasets:
                kd_time, vt_time = _paired_medians(ds, 8, strategy)
                ratio = vt_time / kd_time
                results.append((n, d, kd_time, vt_time, ratio))
                print(
                    f"    attempt {attempt}: {n}x{d} kd={kd_time*1000:.1f}ms "
                    f"vtree({strategy})={vt_time*1000:.1f}ms ratio={ratio:.3f}"
                )
            if all(passes(r[4]) for r in results):
                return
        for n, d, _, _, ratio in results:
            assert passes(ratio), f"{n}x{d}: ratio {ratio:.3f} out of bounds after {attempts} attempts"


def test_criterion_8_kmeanspp_speedup():
    _ratio_criterion(
        8,
        "vtree(kmeans++) at most half the kd-tree wall time on 1500/4000 x 1024",
        "kmeanspp",
        lambda ratio: ratio <= 0.5,
    )
    t0 = time.perf_counter()
    kd_partition(generate_gaussian_mixture(700, 9, k=8, seed=0), 8)
    assert time.perf_counter() - t0 < 1.0, "700x9 cell must finish within a second"


def test_criterion_9_median_seeding_no_faster_than_kd():
    _ratio_criterion(
        9,
        "vtree(median) wall time at least 0.9x the kd-tree's on the same cells",
        "median",
        lambda ratio: ratio >= 0.9,
    )


def test_criterion_10_grid_infeasibility(tmp_path, capsys):
    start = time.perf_counter()
    with criterion(10, "grid-stats reports M=6561 and sparse occupancy at d=8, refuses at d=64"):
        data8 = tmp_path / "d8.bin"
        assert cli_main(["gen", "--uniform", "-n", "1000", "-d", "8", "--seed", "0", "-o", str(data8)]) == 0
        assert cli_main(["grid-stats", "-i", str(data8), "-y", "2", "-k", "1"]) == 0
        out = capsys.readouterr().out
        stats = json.loads(out.strip().splitlines()[-1])
        assert stats["M"] == 6561
        assert stats["occupied_fraction"] < 0.15

        data64 = tmp_path / "d64.bin"
        assert cli_main(["gen", "--uniform", "-n", "50", "-d", "64", "--seed", "0", "-o", str(data64)]) == 0
        code = cli_main(["grid-stats", "-i", str(data64), "-y", "2", "-k", "1"])
        err = capsys.readouterr().err
        assert code == 2
        assert "3^64" in err
        assert time.perf_counter() - start < 10.0


def test_criterion_11_bias_trend():
    with criterion(11, "vtree bias grows from m=4 to m=8 over 5 seeds; kd hits the bias floor"):
        bias4, bias8 = [], []
        for seed in range(5):
            ds = generate_gaussian_mixture(2000, 2, k=4, spread=6.0, seed=seed)
            for m, sink in ((4, bias4), (8, bias8)):
                tree = build_vtree(ds, m, strategy="kmeanspp", seed=seed)
                sink.append(compute_metrics(tree.leaf_assignment).bias)
        mean4 = statistics.mean(bias4)
        mean8 = statistics.mean(bias8)
        print(f"    vtree(kmeanspp) mean bias: m=4 -> {mean4:.3f}, m=8 -> {mean8:.3f}")
        assert mean8 >= mean4

        for n in (1000, 1003):
            ds = generate_uniform(n, 2, seed=40 + n)
            kd_bias = compute_metrics(kd_partition(ds, 4).assignment).bias
            assert kd_bias == balance_floor(n, 4), f"kd bias off the floor for n={n}"
            vt_bias = compute_metrics(build_vtree(ds, 4, strategy="kmeanspp", seed=1).leaf_assignment).bias
            print(f"    uniform n={n} m=4: kd bias={kd_bias:.6f} (floor), vtree bias={vt_bias:.3f} (reported)")
