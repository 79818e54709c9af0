"""In-memory cuboids and the OLAP operation algebra.

Every operation re-aggregates from the base facts of its dataset rather
than from the parent cuboid, which keeps AVERAGE, MIN and MAX correct
under arbitrary operation chains. The chain itself is recorded on the
cuboid; drill-down works by deleting its roll-up from the chain and
re-evaluating.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NamedTuple

from .fact_store import BoundDataset


class CubeError(ValueError):
    pass


class Aggregator(str, Enum):
    COUNT = "count"
    SUM = "sum"
    AVERAGE = "average"
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class GroupingMap:
    """User-supplied coarsening of one dimension (e.g. city -> country).

    Total over the dimension's dictionary: unmapped values map to
    themselves.
    """

    dimension: str
    name: str
    mapping: Mapping[str, str]

    def apply(self, value: str) -> str:
        return self.mapping.get(value, value)


@dataclass(frozen=True)
class Filter:
    """Single-value bindings (slice) and per-dimension value sets (dice)."""

    slices: tuple[tuple[str, str], ...] = ()
    dices: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def sliced_dimensions(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.slices)


@dataclass(frozen=True)
class SliceOp:
    dimension: str
    value: str


@dataclass(frozen=True)
class DiceOp:
    dimension: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class RollupOp:
    map: GroupingMap


class CellStats(NamedTuple):
    """Decomposable accumulator for one cell; all five aggregators derive
    their measure from it, and two of them merge exactly."""

    count: int
    total: float
    minimum: float
    maximum: float


def cell_measure(stats: CellStats, aggregator: Aggregator) -> float:
    if aggregator is Aggregator.COUNT:
        return float(stats.count)
    if aggregator is Aggregator.SUM:
        return stats.total
    if aggregator is Aggregator.AVERAGE:
        return stats.total / stats.count
    if aggregator is Aggregator.MIN:
        return stats.minimum
    return stats.maximum


def merge_stats(a: CellStats, b: CellStats) -> CellStats:
    return CellStats(
        a.count + b.count,
        a.total + b.total,
        min(a.minimum, b.minimum),
        max(a.maximum, b.maximum),
    )


@dataclass(frozen=True)
class Cuboid:
    """One materialized group-by view of a dataset."""

    dataset: BoundDataset = field(repr=False, compare=False)
    dimensions: tuple[str, ...]
    aggregator: Aggregator
    measure: str | None
    cells: dict[tuple[str, ...], float]
    ops: tuple = ()

    @property
    def provenance(self):
        return (self.dataset.id, self.ops)


def validate_query(dataset: BoundDataset, dimensions, aggregator, measure):
    """Common preconditions for materializing over a dataset."""
    dimensions = tuple(dimensions)
    if not dimensions:
        raise CubeError("at least one dimension is required")
    if len(set(dimensions)) != len(dimensions):
        raise CubeError("duplicate dimensions")
    for d in dimensions:
        if d not in dataset.schema.dimensions:
            raise CubeError(f"unknown dimension {d!r}")
    aggregator = Aggregator(aggregator)
    if aggregator is Aggregator.COUNT:
        measure = None  # COUNT ignores the measure column
    else:
        if measure is None:
            raise CubeError(f"aggregator {aggregator.value} requires a measure column")
        if measure not in dataset.schema.measures:
            raise CubeError(f"unknown measure {measure!r}")
    return dimensions, aggregator, measure


def aggregate(dataset, dimensions, aggregator, measure=None, ops=()):
    """Replay ``ops`` over the base facts, then group by ``dimensions``.

    Returns address tuple -> CellStats. Roll-ups rewrite a dimension's
    column in place for all later steps, so a slice or dice recorded after
    a roll-up tests coarse values while earlier ones tested fine values.
    """
    aggregator = Aggregator(aggregator)
    n = dataset.n_rows
    cols: dict[str, tuple[str, ...]] = dict(dataset.dim_data)
    selected: list[int] | None = None  # None means every row

    for op in ops:
        if isinstance(op, RollupOp):
            gmap = op.map
            if gmap.dimension not in cols:
                raise CubeError(f"unknown dimension {gmap.dimension!r}")
            mapping = gmap.mapping
            src = cols[gmap.dimension]
            cols[gmap.dimension] = tuple(mapping.get(v, v) for v in src)
        elif isinstance(op, SliceOp):
            col = cols[op.dimension]
            scan = range(n) if selected is None else selected
            value = op.value
            selected = [i for i in scan if col[i] == value]
        elif isinstance(op, DiceOp):
            col = cols[op.dimension]
            allowed = set(op.values)
            scan = range(n) if selected is None else selected
            selected = [i for i in scan if col[i] in allowed]
        else:
            raise CubeError(f"unknown operation {op!r}")

    key_cols = [cols[d] for d in dimensions]
    if dimensions:
        if selected is None:
            keys = zip(*key_cols)
        else:
            keys = (tuple(c[i] for c in key_cols) for i in selected)
    else:
        count = n if selected is None else len(selected)
        keys = itertools.repeat((), count)

    if aggregator is Aggregator.COUNT:
        return {
            addr: CellStats(c, 0.0, 0.0, 0.0) for addr, c in Counter(keys).items()
        }

    values = dataset.measure_data[measure]
    if selected is None:
        pairs = zip(keys, values)
    else:
        pairs = zip(keys, (values[i] for i in selected))
    acc: dict[tuple[str, ...], list] = {}
    for addr, v in pairs:
        slot = acc.get(addr)
        if slot is None:
            acc[addr] = [1, v, v, v]
        else:
            slot[0] += 1
            slot[1] += v
            if v < slot[2]:
                slot[2] = v
            if v > slot[3]:
                slot[3] = v
    return {addr: CellStats(*slot) for addr, slot in acc.items()}


def _build(dataset, dimensions, aggregator, measure, ops) -> Cuboid:
    stats = aggregate(dataset, dimensions, aggregator, measure, ops)
    cells = {addr: cell_measure(s, aggregator) for addr, s in stats.items()}
    return Cuboid(
        dataset=dataset,
        dimensions=tuple(dimensions),
        aggregator=aggregator,
        measure=measure,
        cells=cells,
        ops=tuple(ops),
    )


def materialize(dataset, dimensions, aggregator, measure=None) -> Cuboid:
    """Group the base facts by ``dimensions`` under one aggregator."""
    dimensions, aggregator, measure = validate_query(dataset, dimensions, aggregator, measure)
    return _build(dataset, dimensions, aggregator, measure, ())


def effective_domain(dataset, dimension, ops) -> set[str]:
    """Values a dimension can take after the roll-ups recorded in ``ops``."""
    values = set(dataset.dictionaries[dimension])
    for op in ops:
        if isinstance(op, RollupOp) and op.map.dimension == dimension:
            values = {op.map.apply(v) for v in values}
    return values


def slice(cuboid: Cuboid, dimension: str, value: str) -> Cuboid:
    """Fix one attribute value and drop its dimension (arity d-1)."""
    if dimension not in cuboid.dimensions:
        raise CubeError(f"dimension {dimension!r} not in cuboid")
    domain = effective_domain(cuboid.dataset, dimension, cuboid.ops)
    if value not in domain:
        # an unknown value is a typo, not an empty result
        raise CubeError(f"unknown value {value!r} for dimension {dimension!r}")
    dims = tuple(d for d in cuboid.dimensions if d != dimension)
    ops = cuboid.ops + (SliceOp(dimension, value),)
    return _build(cuboid.dataset, dims, cuboid.aggregator, cuboid.measure, ops)


def dice(cuboid: Cuboid, filter: Filter) -> Cuboid:
    """Restrict to per-dimension value sets; dimensionality is unchanged."""
    if filter.slices:
        raise CubeError("dice takes value sets; use slice() for single-value bindings")
    if not filter.dices:
        raise CubeError("dice requires at least one value set")
    ops = cuboid.ops
    for dim, values in filter.dices:
        if dim not in cuboid.dataset.schema.dimensions:
            raise CubeError(f"unknown dimension {dim!r}")
        if not values:
            raise CubeError(f"empty value set for dimension {dim!r}")
        ops = ops + (DiceOp(dim, tuple(values)),)
    return _build(cuboid.dataset, cuboid.dimensions, cuboid.aggregator, cuboid.measure, ops)


def rollup(cuboid: Cuboid, grouping_map: GroupingMap) -> Cuboid:
    """Aggregate one dimension onto coarser attribute values."""
    if grouping_map.dimension not in cuboid.dimensions:
        raise CubeError(f"dimension {grouping_map.dimension!r} not in cuboid")
    ops = cuboid.ops + (RollupOp(grouping_map),)
    return _build(cuboid.dataset, cuboid.dimensions, cuboid.aggregator, cuboid.measure, ops)


def drilldown(cuboid: Cuboid, grouping_map: GroupingMap) -> Cuboid:
    """Reverse a roll-up by removing it from the operation chain."""
    target = RollupOp(grouping_map)
    for i in range(len(cuboid.ops) - 1, -1, -1):
        if cuboid.ops[i] == target:
            ops = cuboid.ops[:i] + cuboid.ops[i + 1 :]
            return _build(
                cuboid.dataset, cuboid.dimensions, cuboid.aggregator, cuboid.measure, ops
            )
    raise CubeError(f"grouping map {grouping_map.name!r} not in the cuboid's provenance")
