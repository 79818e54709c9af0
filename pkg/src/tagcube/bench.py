"""Benchmark harnesses: iceberg approximation quality and layout
heuristics.

The iceberg bench builds one iceberg per limit over the cube dimensions,
then re-aggregates it into a tag cloud per target dimension and size,
comparing against the exact computation: relative entropy of the exact
cloud, false-positive/false-negative indexes, and per-query wall time
(build time is reported separately, not per row).

The layout bench walks every ordered (display, cluster) dimension pair,
computes the similarity matrix from an iceberg, and times each heuristic.
"""

from __future__ import annotations

import time

from . import layout, similarity, tagcloud
from .cube import Aggregator, Filter
from .engine import parse_heuristic
from .iceberg import build_iceberg, topk_exact, topk_iceberg

ICEBERG_HEADER = (
    "dataset", "dims", "limit", "size",
    "relative_entropy", "fp_index", "fn_index", "iceberg_ms", "exact_ms",
)

LAYOUT_HEADER = ("instance", "heuristic", "parameter", "mla_cost", "time_ms")

DEFAULT_LIMITS = (150, 600, 1200, 4800, 19600)
DEFAULT_SIZES = (50, 100, 150, 200)


def _ms(seconds: float) -> float:
    return round(seconds * 1000.0, 3)


def bench_iceberg(dataset, targets=None, limits=DEFAULT_LIMITS, sizes=DEFAULT_SIZES,
                  cube_dims=None, aggregator=Aggregator.COUNT, measure=None):
    """Quality/time grid; returns (header, rows, build_times).

    build_times is a list of (limit, build_ms) for the one iceberg built
    per limit over the cube dimensions.
    """
    cube_dims = tuple(cube_dims) if cube_dims else dataset.schema.dimensions
    targets = tuple(targets) if targets else cube_dims
    icebergs = {}
    build_times = []
    for limit in limits:
        t0 = time.perf_counter()
        icebergs[limit] = build_iceberg(dataset, cube_dims, aggregator, measure, limit)
        build_times.append((limit, _ms(time.perf_counter() - t0)))

    rows = []
    for dim in targets:
        for limit in limits:
            ice = icebergs[limit]
            for size in sizes:
                t0 = time.perf_counter()
                approx = topk_iceberg(ice, Filter(), size, dims=(dim,))
                iceberg_ms = _ms(time.perf_counter() - t0)
                t0 = time.perf_counter()
                exact = topk_exact(dataset, (dim,), aggregator, measure, Filter(), size)
                exact_ms = _ms(time.perf_counter() - t0)
                rel = (
                    tagcloud.relative_entropy(exact) if len(exact.tags) >= 2 else 0.0
                )
                fp = tagcloud.fp_index(approx, exact) if approx.tags else 1.0
                fn = tagcloud.fn_index(approx, exact)
                rows.append((
                    dataset.name, dim, limit, size,
                    round(rel, 6), round(fp, 6), round(fn, 6), iceberg_ms, exact_ms,
                ))
    return ICEBERG_HEADER, rows, build_times


def _run_heuristic(name, param, matrix, seed):
    if name == "nn":
        return layout.nn_arrange(matrix)
    if name == "pwmc":
        return layout.pwmc_arrange(matrix, param, seed)
    return layout.mc_block_arrange(matrix, param, seed)


def bench_layout(dataset, heuristics=("nn", "pwmc:10", "pwmc:100", "pwmc:1000"),
                 seed=0, kinds=("cosine", "tanimoto"), limit=150, size=150,
                 aggregator=Aggregator.COUNT, measure=None):
    """Heuristic cost/time over all ordered (display, cluster) pairs."""
    specs = [parse_heuristic(h) for h in heuristics]
    dims = dataset.schema.dimensions
    rows = []
    for display in dims:
        for cluster in dims:
            if cluster == display:
                continue
            ice = build_iceberg(dataset, (display, cluster), aggregator, measure, limit)
            cloud = topk_iceberg(ice, Filter(), size, dims=(display,))
            if len(cloud.tags) < 2:
                continue
            for kind in kinds:
                matrix = similarity.similarity_matrix(
                    dataset, cloud, (cluster,), kind, aggregator, measure, source=ice
                )
                instance = f"{display}|{cluster}|{kind}"
                for name, param in specs:
                    t0 = time.perf_counter()
                    arrangement = _run_heuristic(name, param, matrix, seed)
                    elapsed = _ms(time.perf_counter() - t0)
                    cost = layout.mla_cost(arrangement, matrix)
                    rows.append((
                        instance, name, "" if name == "nn" else param,
                        round(cost, 6), elapsed,
                    ))
    return LAYOUT_HEADER, rows
