"""Iceberg cuboids: the memory-resident, truncated substitute for a full
cuboid that answers top-k tag-cloud queries in O(limit) time.

Building one computes the full cuboid once, ranks cells by (measure desc,
address asc) and keeps the first ``limit``. Queries then filter and
re-aggregate the retained cells only; querying a subset of the iceberg's
dimensions under-counts merged cells, which is the accepted source of
approximation error that the false-positive/false-negative indexes
measure.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from . import cube
from .cube import Aggregator, CellStats, Filter, cell_measure, merge_stats
from .fact_store import BoundDataset
from .tagcloud import TagCloud, cloud_from_cells


class IcebergError(ValueError):
    pass


@dataclass(frozen=True)
class IcebergCuboid:
    """The ``limit`` largest-measure cells of a cuboid, in rank order.

    Cells keep their full accumulator stats, so re-aggregation over
    retained cells stays exact for every aggregator (AVERAGE included);
    truncation is the only approximation.
    """

    dataset: BoundDataset = field(repr=False, compare=False)
    dimensions: tuple[str, ...]
    aggregator: Aggregator
    measure: str | None
    limit: int
    cells: tuple[tuple[tuple[str, ...], CellStats], ...]
    full_cell_count: int


def build_iceberg(dataset, dimensions, aggregator, measure=None, limit=150) -> IcebergCuboid:
    """Materialize the full cuboid once and truncate to the top ``limit``
    cells, ties broken by lexicographic address."""
    if limit < 1:
        raise IcebergError("limit must be at least 1")
    dimensions, aggregator, measure = cube.validate_query(dataset, dimensions, aggregator, measure)
    stats = cube.aggregate(dataset, dimensions, aggregator, measure)
    ranked = heapq.nsmallest(
        limit,
        stats.items(),
        key=lambda kv: (-cell_measure(kv[1], aggregator), kv[0]),
    )
    return IcebergCuboid(
        dataset=dataset,
        dimensions=dimensions,
        aggregator=aggregator,
        measure=measure,
        limit=limit,
        cells=tuple(ranked),
        full_cell_count=len(stats),
    )


def _filter_ops_dims(iceberg: IcebergCuboid, filter: Filter, groups) -> None:
    known = set(iceberg.dimensions)
    for gmap in groups:
        if gmap.dimension not in known:
            raise IcebergError(f"grouping dimension {gmap.dimension!r} not in iceberg")
    for dim, _ in filter.slices:
        if dim not in known:
            raise IcebergError(f"slice dimension {dim!r} not in iceberg")
    for dim, values in filter.dices:
        if dim not in known:
            raise IcebergError(f"dice dimension {dim!r} not in iceberg")
        if not values:
            raise IcebergError(f"empty value set for dimension {dim!r}")


def topk_iceberg(iceberg: IcebergCuboid, filter: Filter = Filter(), k: int = 150,
                 *, dims=None, groups=()) -> TagCloud:
    """Approximate top-k tag cloud from retained cells only.

    Grouping maps apply first, then slice/dice filters; finally the cells
    are re-aggregated onto ``dims`` (default: the iceberg dimensions minus
    the sliced ones). May return fewer than k tags.
    """
    if k < 1:
        raise IcebergError("k must be at least 1")
    _filter_ops_dims(iceberg, filter, groups)

    sliced = set(filter.sliced_dimensions())
    if dims is None:
        dims = tuple(d for d in iceberg.dimensions if d not in sliced)
    else:
        dims = tuple(dims)
        for d in dims:
            if d not in iceberg.dimensions:
                raise IcebergError(f"dimension {d!r} not in iceberg")
        if set(dims) & sliced:
            raise IcebergError("cannot keep a sliced dimension")

    index = {d: i for i, d in enumerate(iceberg.dimensions)}
    group_by_dim: dict[int, list] = {}
    for gmap in groups:
        group_by_dim.setdefault(index[gmap.dimension], []).append(gmap)
    slice_checks = [(index[d], v) for d, v in filter.slices]
    dice_checks = [(index[d], set(vs)) for d, vs in filter.dices]
    out_idx = [index[d] for d in dims]

    merged: dict[tuple[str, ...], CellStats] = {}
    for addr, stats in iceberg.cells:
        if group_by_dim:
            addr = list(addr)
            for i, gmaps in group_by_dim.items():
                v = addr[i]
                for gmap in gmaps:
                    v = gmap.apply(v)
                addr[i] = v
        if any(addr[i] != v for i, v in slice_checks):
            continue
        if any(addr[i] not in vs for i, vs in dice_checks):
            continue
        key = tuple(addr[i] for i in out_idx)
        prev = merged.get(key)
        merged[key] = stats if prev is None else merge_stats(prev, stats)

    cells = ((addr, cell_measure(s, iceberg.aggregator)) for addr, s in merged.items())
    return cloud_from_cells(cells, dims, k, tie="object")


def topk_exact(dataset, dimensions, aggregator, measure=None,
               filter: Filter = Filter(), k: int = 150, groups=()) -> TagCloud:
    """Ground-truth top-k over the full restricted cuboid; same tie-break
    as the iceberg path."""
    if k < 1:
        raise IcebergError("k must be at least 1")
    dimensions, aggregator, measure = cube.validate_query(dataset, dimensions, aggregator, measure)
    ops = tuple(cube.RollupOp(g) for g in groups)
    ops += tuple(cube.SliceOp(d, v) for d, v in filter.slices)
    for dim, values in filter.dices:
        if not values:
            raise IcebergError(f"empty value set for dimension {dim!r}")
        ops += (cube.DiceOp(dim, tuple(values)),)
    stats = cube.aggregate(dataset, dimensions, aggregator, measure, ops)
    top = heapq.nsmallest(
        k,
        ((addr, cell_measure(s, aggregator)) for addr, s in stats.items()),
        key=lambda it: (-it[1], it[0]),
    )
    return cloud_from_cells(top, dimensions, k, tie="object")
