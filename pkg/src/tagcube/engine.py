"""Query descriptors, stateless permalinks and the end-to-end pipeline.

A QueryDescriptor is the complete, canonical description of one tag-cloud
query: dataset, tag dimensions, aggregation, filters, grouping maps,
iceberg limit, clustering/layout choices and the seed. Encoding its
canonical JSON as base64url yields the permalink; identical descriptors
yield identical tokens and identical response bytes, which is what makes
clouds bookmarkable and embeddable with no server-side state.

The wire format is pinned here, byte for byte:

    {"version":1,"query":{...},"permalink":"...",
     "entries":[{"t":term,"w":weight,"b":bucket} |
                {"hint":"glued"} | {"hint":"permutable"}]}

Numbers carry at most 6 fractional digits with no trailing zeros.
"""

from __future__ import annotations

import base64
import binascii
import html
import json
import threading
from dataclasses import dataclass, field, replace

from . import cube, iceberg, layout, similarity, tagcloud
from .cube import Aggregator, Filter, GroupingMap
from .fact_store import (
    BoundDataset,
    RawTable,
    SchemaError,
    bind_schema,
    content_id,
    parse_table,
)
from .layout import HintToken
from .tagcloud import DEFAULT_BOUND


class DescriptorError(ValueError):
    """Query descriptor is malformed or does not fit the dataset."""


class PermalinkError(ValueError):
    """Token is not a valid encoded descriptor."""


HEURISTIC_NAMES = ("nn", "pwmc", "mc")
DEFAULT_EXCHANGES = 100


def parse_heuristic(spec: str) -> tuple[str, int]:
    """Parse 'nn', 'pwmc[:N]' or 'mc[:N]' into (name, parameter)."""
    name, _, param = spec.partition(":")
    if name not in HEURISTIC_NAMES:
        raise DescriptorError(f"unknown heuristic {spec!r}")
    if name == "nn":
        if param:
            raise DescriptorError("nn takes no parameter")
        return "nn", 0
    if not param:
        return name, DEFAULT_EXCHANGES
    try:
        value = int(param)
    except ValueError:
        raise DescriptorError(f"bad heuristic parameter in {spec!r}") from None
    if value < 0:
        raise DescriptorError("heuristic parameter must be non-negative")
    return name, value


@dataclass(frozen=True)
class QueryDescriptor:
    dataset: str
    dims: tuple[str, ...]
    agg: str = "count"
    measure: str | None = None
    slices: tuple[tuple[str, str], ...] = ()
    dices: tuple[tuple[str, tuple[str, ...]], ...] = ()
    groups: tuple[GroupingMap, ...] = ()
    k: int = DEFAULT_BOUND
    limit: int = DEFAULT_BOUND
    exact: bool = False
    cluster: tuple[str, ...] = ()
    sim: str = "cosine"
    heuristic: str = "nn"
    seed: int = 0
    buckets: int = 7

    def filter(self) -> Filter:
        return Filter(slices=self.slices, dices=self.dices)


def normalize_descriptor(desc: QueryDescriptor) -> QueryDescriptor:
    """Canonical form: COUNT drops its measure, heuristics get explicit
    parameters. Canonical descriptors encode to identical tokens."""
    agg = desc.agg.lower()
    measure = None if agg == Aggregator.COUNT.value else desc.measure
    name, param = parse_heuristic(desc.heuristic)
    heuristic = "nn" if name == "nn" else f"{name}:{param}"
    return replace(desc, agg=agg, measure=measure, heuristic=heuristic)


def descriptor_to_dict(desc: QueryDescriptor) -> dict:
    """Canonical JSON object; field order is part of the wire contract."""
    return {
        "dataset": desc.dataset,
        "dims": list(desc.dims),
        "agg": desc.agg,
        "measure": desc.measure,
        "slices": [[d, v] for d, v in desc.slices],
        "dices": [[d, list(vs)] for d, vs in desc.dices],
        "groups": [
            {
                "dimension": g.dimension,
                "name": g.name,
                "mapping": {k: g.mapping[k] for k in sorted(g.mapping)},
            }
            for g in desc.groups
        ],
        "k": desc.k,
        "limit": desc.limit,
        "exact": desc.exact,
        "cluster": list(desc.cluster),
        "sim": desc.sim,
        "heuristic": desc.heuristic,
        "seed": desc.seed,
        "buckets": desc.buckets,
    }


def _expect(cond: bool, message: str):
    if not cond:
        raise DescriptorError(message)


def _str_list(value, what: str) -> tuple[str, ...]:
    _expect(isinstance(value, list) and all(isinstance(v, str) for v in value),
            f"{what} must be a list of strings")
    return tuple(value)


def descriptor_from_dict(obj) -> QueryDescriptor:
    """Strict inverse of descriptor_to_dict; rejects unknown fields."""
    _expect(isinstance(obj, dict), "descriptor must be an object")
    known = {
        "dataset", "dims", "agg", "measure", "slices", "dices", "groups",
        "k", "limit", "exact", "cluster", "sim", "heuristic", "seed", "buckets",
    }
    unknown = set(obj) - known
    _expect(not unknown, f"unknown descriptor fields: {sorted(unknown)}")
    _expect(isinstance(obj.get("dataset"), str), "dataset must be a string")

    slices = []
    for entry in obj.get("slices", []):
        _expect(isinstance(entry, list) and len(entry) == 2
                and all(isinstance(x, str) for x in entry), "bad slice entry")
        slices.append((entry[0], entry[1]))
    dices = []
    for entry in obj.get("dices", []):
        _expect(isinstance(entry, list) and len(entry) == 2
                and isinstance(entry[0], str), "bad dice entry")
        dices.append((entry[0], _str_list(entry[1], "dice values")))
    groups = []
    for entry in obj.get("groups", []):
        _expect(isinstance(entry, dict)
                and isinstance(entry.get("dimension"), str)
                and isinstance(entry.get("name"), str)
                and isinstance(entry.get("mapping"), dict)
                and all(isinstance(k, str) and isinstance(v, str)
                        for k, v in entry["mapping"].items()),
                "bad grouping map entry")
        groups.append(GroupingMap(dimension=entry["dimension"], name=entry["name"],
                                  mapping=dict(entry["mapping"])))

    def _int(name, default):
        value = obj.get(name, default)
        _expect(isinstance(value, int) and not isinstance(value, bool),
                f"{name} must be an integer")
        return value

    exact = obj.get("exact", False)
    _expect(isinstance(exact, bool), "exact must be a boolean")
    measure = obj.get("measure")
    _expect(measure is None or isinstance(measure, str), "measure must be a string or null")
    agg = obj.get("agg", "count")
    _expect(isinstance(agg, str), "agg must be a string")
    sim = obj.get("sim", "cosine")
    _expect(isinstance(sim, str), "sim must be a string")
    heuristic = obj.get("heuristic", "nn")
    _expect(isinstance(heuristic, str), "heuristic must be a string")

    return normalize_descriptor(QueryDescriptor(
        dataset=obj["dataset"],
        dims=_str_list(obj.get("dims", []), "dims"),
        agg=agg,
        measure=measure,
        slices=tuple(slices),
        dices=tuple(dices),
        groups=tuple(groups),
        k=_int("k", DEFAULT_BOUND),
        limit=_int("limit", DEFAULT_BOUND),
        exact=exact,
        cluster=_str_list(obj.get("cluster", []), "cluster"),
        sim=sim,
        heuristic=heuristic,
        seed=_int("seed", 0),
        buckets=_int("buckets", 7),
    ))


def encode_permalink(desc: QueryDescriptor) -> str:
    payload = json.dumps(descriptor_to_dict(normalize_descriptor(desc)),
                         separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    return base64.urlsafe_b64encode(payload).rstrip(b"=").decode("ascii")


def decode_permalink(token: str) -> QueryDescriptor:
    padded = token + "=" * (-len(token) % 4)
    try:
        raw = base64.urlsafe_b64decode(padded.encode("ascii"))
        obj = json.loads(raw.decode("utf-8"))
        return descriptor_from_dict(obj)
    except (binascii.Error, UnicodeError, ValueError) as exc:
        raise PermalinkError(f"malformed permalink: {exc}") from None


# ---------------------------------------------------------------------------
# dataset registry and iceberg cache

@dataclass
class DatasetRecord:
    id: str
    name: str
    table: RawTable
    delimiter: str
    bound: BoundDataset | None = None


class DatasetRegistry:
    """id -> dataset store; single writer, any number of readers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._records: dict[str, DatasetRecord] = {}

    def ingest(self, data: bytes | str, name: str = "dataset", delimiter: str = ",",
               header: bool = True) -> DatasetRecord:
        if isinstance(data, str):
            data = data.encode("utf-8")
        table = parse_table(data, delimiter, header)
        dataset_id = content_id(data)
        record = DatasetRecord(id=dataset_id, name=name, table=table, delimiter=delimiter)
        with self._lock:
            self._records.setdefault(dataset_id, record)
            return self._records[dataset_id]

    def bind(self, dataset_id: str, dimensions, measures) -> BoundDataset:
        record = self.get(dataset_id)
        bound = bind_schema(record.table, dimensions, measures,
                            dataset_id=record.id, name=record.name)
        with self._lock:
            record.bound = bound
        return bound

    def get(self, dataset_id: str) -> DatasetRecord:
        with self._lock:
            if dataset_id not in self._records:
                raise LookupError(f"unknown dataset {dataset_id!r}")
            return self._records[dataset_id]

    def dataset(self, dataset_id: str) -> BoundDataset:
        record = self.get(dataset_id)
        if record.bound is None:
            raise SchemaError(f"dataset {dataset_id!r} has no schema bound yet")
        return record.bound

    def list(self) -> list[dict]:
        with self._lock:
            records = list(self._records.values())
        return [
            {
                "id": r.id,
                "name": r.name,
                "columns": list(r.table.columns),
                "rows": len(r.table.rows),
                "bound": r.bound is not None,
            }
            for r in records
        ]


class IcebergCache:
    """Lazily built icebergs keyed by (dataset, schema, dims, agg, measure,
    limit); a build in flight blocks only identical keys."""

    def __init__(self):
        self._lock = threading.Lock()
        self._built: dict[tuple, iceberg.IcebergCuboid] = {}
        self._building: dict[tuple, threading.Lock] = {}

    def get_or_build(self, dataset: BoundDataset, dims, aggregator, measure, limit):
        key = (dataset.id, dataset.schema.dimensions, dataset.schema.measures,
               tuple(dims), Aggregator(aggregator).value, measure, limit)
        with self._lock:
            hit = self._built.get(key)
            if hit is not None:
                return hit
            gate = self._building.setdefault(key, threading.Lock())
        with gate:
            with self._lock:
                hit = self._built.get(key)
                if hit is not None:
                    return hit
            built = iceberg.build_iceberg(dataset, dims, aggregator, measure, limit)
            with self._lock:
                self._built[key] = built
                self._building.pop(key, None)
            return built


# ---------------------------------------------------------------------------
# descriptor validation and execution

def validate_descriptor(dataset: BoundDataset, desc: QueryDescriptor) -> QueryDescriptor:
    desc = normalize_descriptor(desc)
    schema = dataset.schema
    _expect(len(desc.dims) > 0, "dims must not be empty")
    _expect(len(set(desc.dims)) == len(desc.dims), "duplicate dims")
    for d in desc.dims:
        _expect(d in schema.dimensions, f"unknown dimension {d!r}")
    try:
        Aggregator(desc.agg)
    except ValueError:
        raise DescriptorError(f"unknown aggregator {desc.agg!r}") from None
    if desc.agg != Aggregator.COUNT.value:
        _expect(desc.measure is not None, f"aggregator {desc.agg} requires a measure")
        _expect(desc.measure in schema.measures, f"unknown measure {desc.measure!r}")
    for g in desc.groups:
        _expect(g.dimension in schema.dimensions,
                f"unknown grouping dimension {g.dimension!r}")
        _expect(bool(g.name), "grouping map needs a name")
    for d, values in desc.dices:
        _expect(d in schema.dimensions, f"unknown dice dimension {d!r}")
        _expect(len(values) > 0, f"empty dice value set for {d!r}")
    for d, value in desc.slices:
        _expect(d in schema.dimensions, f"unknown slice dimension {d!r}")
        _expect(d not in desc.dims, f"cannot display sliced dimension {d!r}")
        rollup_ops = tuple(cube.RollupOp(g) for g in desc.groups)
        domain = cube.effective_domain(dataset, d, rollup_ops)
        _expect(value in domain, f"unknown value {value!r} for dimension {d!r}")
    _expect(desc.k >= 1, "k must be at least 1")
    _expect(desc.limit >= 1, "limit must be at least 1")
    _expect(desc.buckets >= 1, "buckets must be at least 1")
    _expect(len(set(desc.cluster)) == len(desc.cluster), "duplicate cluster dimensions")
    for d in desc.cluster:
        _expect(d in schema.dimensions, f"unknown cluster dimension {d!r}")
        _expect(d not in desc.dims, f"cluster dimension {d!r} overlaps tag dimensions")
    _expect(desc.sim in similarity.SIMILARITY_KINDS, f"unknown similarity kind {desc.sim!r}")
    parse_heuristic(desc.heuristic)
    return desc


def _iceberg_dims(dataset: BoundDataset, desc: QueryDescriptor) -> tuple[str, ...]:
    # finest cuboid over every queried dimension: tag dims first (their
    # order defines tag addresses), then filter/cluster dims in schema order
    extra = {d for d, _ in desc.slices}
    extra.update(d for d, _ in desc.dices)
    extra.update(desc.cluster)
    extra -= set(desc.dims)
    return desc.dims + tuple(d for d in dataset.schema.dimensions if d in extra)


def _arrange(matrix, desc: QueryDescriptor):
    name, param = parse_heuristic(desc.heuristic)
    if name == "nn":
        return layout.nn_arrange(matrix)
    if name == "pwmc":
        return layout.pwmc_arrange(matrix, param, desc.seed)
    return layout.mc_block_arrange(matrix, param, desc.seed)


def run_query(registry: DatasetRegistry, cache: IcebergCache,
              desc: QueryDescriptor) -> dict:
    """Execute a descriptor end to end; returns the wire payload dict."""
    dataset = registry.dataset(desc.dataset)
    desc = validate_descriptor(dataset, desc)
    filter = desc.filter()

    ice = None
    if desc.exact:
        cloud = iceberg.topk_exact(dataset, desc.dims, desc.agg, desc.measure,
                                   filter, desc.k, groups=desc.groups)
    else:
        ice = cache.get_or_build(dataset, _iceberg_dims(dataset, desc),
                                 desc.agg, desc.measure, desc.limit)
        # a grouping on a dimension outside the iceberg cannot affect it
        groups = tuple(g for g in desc.groups if g.dimension in ice.dimensions)
        cloud = iceberg.topk_iceberg(ice, filter, desc.k, dims=desc.dims,
                                     groups=groups)

    entries: list = []
    if desc.cluster and len(cloud.tags) > 0:
        matrix = similarity.similarity_matrix(dataset, cloud, desc.cluster, desc.sim,
                                              desc.agg, desc.measure, source=ice,
                                              groups=desc.groups)
        arrangement = _arrange(matrix, desc)
        hinted = layout.insert_hints(arrangement, matrix, bucket_count=desc.buckets)
        entries = list(hinted.entries)
    else:
        buckets = tagcloud.font_buckets(cloud, desc.buckets)
        entries = [layout.LayoutEntry(term=t.term, weight=t.weight, bucket=buckets[t.term])
                   for t in cloud.tags]

    return {
        "version": 1,
        "query": descriptor_to_dict(desc),
        "permalink": encode_permalink(desc),
        "entries": entries,
    }


# ---------------------------------------------------------------------------
# canonical serialization

def wire_number(x: float):
    """At most 6 fractional digits, no trailing zeros: integral values
    serialize as JSON integers."""
    r = round(float(x), 6)
    if r == int(r):
        return int(r)
    return r


def _entry_to_dict(entry) -> dict:
    if isinstance(entry, HintToken):
        return {"hint": entry.value}
    return {"t": entry.term, "w": wire_number(entry.weight), "b": entry.bucket}


def payload_to_bytes(payload: dict) -> bytes:
    body = {
        "version": payload["version"],
        "query": payload["query"],
        "permalink": payload["permalink"],
        "entries": [_entry_to_dict(e) for e in payload["entries"]],
    }
    return json.dumps(body, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def execute(registry: DatasetRegistry, cache: IcebergCache,
            desc: QueryDescriptor) -> tuple[bytes, dict]:
    """Run a descriptor and serialize it; the bytes are the response body."""
    payload = run_query(registry, cache, desc)
    return payload_to_bytes(payload), payload


# ---------------------------------------------------------------------------
# renderings shared by the service and the CLI

_EMBED_CSS = """body{font-family:sans-serif;margin:1em}
.cloud{line-height:1.9}
.cloud span.tag{padding:0 .15em}
.nobr{white-space:nowrap}
.b1{font-size:.7em}.b2{font-size:.85em}.b3{font-size:1em}.b4{font-size:1.2em}
.b5{font-size:1.45em}.b6{font-size:1.75em}.b7{font-size:2.1em}"""


def _bucket_class(bucket: int, bucket_count: int) -> str:
    # embeds ship a 7-size stylesheet; rescale other bucket counts onto it
    if bucket_count == 7:
        return f"b{bucket}"
    scaled = 1 + round((bucket - 1) * 6 / max(bucket_count - 1, 1))
    return f"b{scaled}"


def render_embed_html(payload: dict) -> str:
    """Self-contained HTML for iframe embedding: one span per tag in
    layout order, GLUED neighbours wrapped in a no-break container."""
    bucket_count = payload["query"]["buckets"]
    runs = _glued_runs(payload["entries"])
    parts = []
    for run in runs:
        spans = " ".join(
            f'<span class="tag {_bucket_class(e.bucket, bucket_count)}">{html.escape(e.term)}</span>'
            for e in run
        )
        parts.append(f'<span class="nobr">{spans}</span>' if len(run) > 1 else spans)
    cloud = " ".join(parts)
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>tag cloud</title><style>{_EMBED_CSS}</style></head>\n"
        f"<body><div class=\"cloud\">{cloud}</div></body></html>\n"
    )


def _glued_runs(entries) -> list[list]:
    """Group tag entries into maximal runs connected by GLUED tokens."""
    runs: list[list] = []
    glue_pending = False
    for entry in entries:
        if entry is HintToken.GLUED:
            glue_pending = True
            continue
        if entry is HintToken.PERMUTABLE:
            glue_pending = False
            continue
        if glue_pending and runs:
            runs[-1].append(entry)
        else:
            runs.append([entry])
        glue_pending = False
    return runs


def render_text(payload: dict) -> str:
    """Aligned text cloud: term, weight, and the font bucket as a marker."""
    tags = [e for e in payload["entries"] if not isinstance(e, HintToken)]
    if not tags:
        return "(empty cloud)\n"
    width = max(len(t.term) for t in tags)
    lines = []
    for t in tags:
        w = wire_number(t.weight)
        lines.append(f"{t.term:<{width}}  {w}  {'#' * t.bucket}")
    return "\n".join(lines) + "\n"
