"""Command-line interface.

Subcommands: ingest, cloud, serve, bench-iceberg, bench-layout, synth.
The cloud command drives the same in-process engine and serializer as the
HTTP service, so its JSON output is byte-identical to the service
response for the same descriptor and seed. Validation failures exit with
status 2.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import engine
from .bench import DEFAULT_LIMITS, DEFAULT_SIZES, bench_iceberg, bench_layout
from .cube import Aggregator
from .engine import DatasetRegistry, IcebergCache, QueryDescriptor
from .synth import synth_csv


def _split_csv(value: str) -> list[str]:
    return [part for part in value.split(",") if part]


def _load_dataset(args, registry: DatasetRegistry):
    data = Path(args.data).read_bytes()
    record = registry.ingest(
        data,
        name=args.name or Path(args.data).stem,
        delimiter=args.delimiter,
        header=not args.no_header,
    )
    return registry.bind(record.id, _split_csv(args.dimensions), _split_csv(args.measures))


def _add_dataset_args(parser):
    parser.add_argument("--data", required=True, help="delimited text file")
    parser.add_argument("--delimiter", default=",")
    parser.add_argument("--no-header", action="store_true")
    parser.add_argument("--name", default=None, help="dataset display name")
    parser.add_argument("--dimensions", required=True, help="comma-separated dimension columns")
    parser.add_argument("--measures", default="", help="comma-separated measure columns")


def _write_out(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_csv(header, rows, out: str | None):
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _write_out(buf.getvalue(), out)


def cmd_ingest(args) -> int:
    registry = DatasetRegistry()
    if args.dimensions:
        bound = _load_dataset(args, registry)
        print(f"dataset {bound.id} ({bound.name}): {bound.n_rows} rows")
        for d in bound.schema.dimensions:
            print(f"  dimension {d}: {len(bound.dictionaries[d])} distinct values")
        for m in bound.schema.measures:
            print(f"  measure {m}: numeric")
    else:
        data = Path(args.data).read_bytes()
        record = registry.ingest(data, name=args.name or Path(args.data).stem,
                                 delimiter=args.delimiter, header=not args.no_header)
        print(f"dataset {record.id} ({record.name}): "
              f"{len(record.table.rows)} rows, columns: {', '.join(record.table.columns)}")
    return 0


def cmd_cloud(args) -> int:
    registry = DatasetRegistry()
    cache = IcebergCache()
    bound = _load_dataset(args, registry)
    desc = QueryDescriptor(
        dataset=bound.id,
        dims=tuple(_split_csv(args.dims)),
        agg=args.agg,
        measure=args.measure,
        slices=tuple(tuple(item.split("=", 1)) for item in args.slice),
        dices=tuple((d, tuple(vs.split("|"))) for d, _, vs in
                    (item.partition("=") for item in args.dice)),
        groups=engine_groups(args.group),
        k=args.k,
        limit=args.limit,
        exact=args.exact,
        cluster=tuple(_split_csv(args.cluster)),
        sim=args.sim,
        heuristic=args.heuristic,
        seed=args.seed,
        buckets=args.buckets,
    )
    body, payload = engine.execute(registry, cache, desc)
    if args.format == "json":
        if args.out:
            Path(args.out).write_bytes(body)
        else:
            sys.stdout.buffer.write(body)
            sys.stdout.buffer.flush()
    else:
        _write_out(engine.render_text(payload), args.out)
    return 0


def engine_groups(raw: list[str]):
    import json

    from .cube import GroupingMap

    groups = []
    for item in raw:
        obj = json.loads(item)
        if not isinstance(obj, dict) or not isinstance(obj.get("mapping"), dict):
            raise engine.DescriptorError("group needs dimension, name and mapping fields")
        groups.append(GroupingMap(
            dimension=str(obj.get("dimension", "")),
            name=str(obj.get("name", "")),
            mapping={str(k): str(v) for k, v in obj["mapping"].items()},
        ))
    return tuple(groups)


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    port = args.port if args.port is not None else int(os.environ.get("TAGCUBE_PORT", "8000"))
    uvicorn.run(create_app(), host=args.host, port=port, log_level="info")
    return 0


def cmd_bench_iceberg(args) -> int:
    registry = DatasetRegistry()
    bound = _load_dataset(args, registry)
    aggregator = Aggregator(args.agg)
    header, rows, build_times = bench_iceberg(
        bound,
        targets=_split_csv(args.dims) if args.dims else None,
        limits=[int(x) for x in _split_csv(args.limits)],
        sizes=[int(x) for x in _split_csv(args.sizes)],
        cube_dims=_split_csv(args.cube_dims) if args.cube_dims else None,
        aggregator=aggregator,
        measure=args.measure,
    )
    for limit, ms in build_times:
        print(f"iceberg build: limit={limit} took {ms} ms", file=sys.stderr)
    _write_csv(header, rows, args.out)
    return 0


def cmd_bench_layout(args) -> int:
    registry = DatasetRegistry()
    bound = _load_dataset(args, registry)
    header, rows = bench_layout(
        bound,
        heuristics=_split_csv(args.heuristics),
        seed=args.seed,
        kinds=tuple(_split_csv(args.kinds)),
        limit=args.limit,
        size=args.k,
        aggregator=Aggregator(args.agg),
        measure=args.measure,
    )
    _write_csv(header, rows, args.out)
    return 0


def cmd_synth(args) -> int:
    if args.cardinalities:
        cards = [int(x) for x in _split_csv(args.cardinalities)]
    else:
        cards = args.cardinality
    text = synth_csv(args.dims, cards, args.facts, args.zipf, args.seed)
    _write_out(text, args.out)
    return 0


def _add_query_args(parser):
    parser.add_argument("--dims", required=True, help="comma-separated tag dimensions")
    parser.add_argument("--agg", default="count",
                        choices=[a.value for a in Aggregator])
    parser.add_argument("--measure", default=None)
    parser.add_argument("--slice", action="append", default=[], metavar="DIM=VALUE")
    parser.add_argument("--dice", action="append", default=[], metavar="DIM=V1|V2")
    parser.add_argument("--group", action="append", default=[], metavar="JSON")
    parser.add_argument("--k", type=int, default=150)
    parser.add_argument("--limit", type=int, default=150)
    parser.add_argument("--exact", action="store_true")
    parser.add_argument("--cluster", default="", help="comma-separated cluster dimensions")
    parser.add_argument("--sim", default="cosine", choices=["cosine", "tanimoto", "jaccard"])
    parser.add_argument("--heuristic", default="nn", help="nn, pwmc[:N] or mc[:N]")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--buckets", type=int, default=7)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tagcube",
                                     description="multidimensional tag clouds over tabular data")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a file and report its shape")
    p.add_argument("--data", required=True)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--name", default=None)
    p.add_argument("--dimensions", default="", help="bind these dimension columns")
    p.add_argument("--measures", default="")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cloud", help="compute one tag cloud")
    _add_dataset_args(p)
    _add_query_args(p)
    p.add_argument("--format", default="json", choices=["json", "text"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cloud)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None,
                   help="defaults to $TAGCUBE_PORT or 8000")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench-iceberg", help="iceberg quality/time sweep")
    _add_dataset_args(p)
    p.add_argument("--dims", default="", help="target cloud dimensions (default: all)")
    p.add_argument("--cube-dims", default="", help="iceberg cube dimensions (default: all)")
    p.add_argument("--limits", default=",".join(str(x) for x in DEFAULT_LIMITS))
    p.add_argument("--sizes", default=",".join(str(x) for x in DEFAULT_SIZES))
    p.add_argument("--agg", default="count", choices=[a.value for a in Aggregator])
    p.add_argument("--measure", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench_iceberg)

    p = sub.add_parser("bench-layout", help="layout heuristic cost/time sweep")
    _add_dataset_args(p)
    p.add_argument("--heuristics", default="nn,pwmc:10,pwmc:100,pwmc:1000")
    p.add_argument("--kinds", default="cosine,tanimoto")
    p.add_argument("--limit", type=int, default=150)
    p.add_argument("--k", type=int, default=150)
    p.add_argument("--agg", default="count", choices=[a.value for a in Aggregator])
    p.add_argument("--measure", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench_layout)

    p = sub.add_parser("synth", help="generate a synthetic Zipf dataset")
    p.add_argument("--dims", type=int, required=True)
    p.add_argument("--cardinality", type=int, default=50)
    p.add_argument("--cardinalities", default="", help="per-dimension list, overrides --cardinality")
    p.add_argument("--facts", type=int, required=True)
    p.add_argument("--zipf", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
