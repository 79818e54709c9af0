"""HTTP service: datasets, schema binding, tag-cloud queries, permalinks
and iframe embeds.

Responses for cloud queries are serialized once by the engine and
returned verbatim, so identical descriptors produce byte-identical
bodies. All state lives in an in-process registry; permalinks carry the
whole query, so nothing needs to survive a restart.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import HTMLResponse
from pydantic import BaseModel

from . import engine
from .engine import (
    DatasetRegistry,
    DescriptorError,
    IcebergCache,
    PermalinkError,
    QueryDescriptor,
)
from .fact_store import SchemaError, TableParseError


class SchemaBindRequest(BaseModel):
    dimensions: list[str]
    measures: list[str] = []


class DatasetSummary(BaseModel):
    id: str
    name: str
    columns: list[str]
    rows: int
    bound: bool


def _parse_slices(raw: list[str]) -> tuple:
    out = []
    for item in raw:
        dim, sep, value = item.partition("=")
        if not sep or not dim:
            raise DescriptorError(f"slice must look like dim=value, got {item!r}")
        out.append((dim, value))
    return tuple(out)


def _parse_dices(raw: list[str]) -> tuple:
    out = []
    for item in raw:
        dim, sep, values = item.partition("=")
        if not sep or not dim or not values:
            raise DescriptorError(f"dice must look like dim=v1|v2, got {item!r}")
        out.append((dim, tuple(values.split("|"))))
    return tuple(out)


def _parse_groups(raw: list[str]) -> tuple:
    import json as _json

    from .cube import GroupingMap

    out = []
    for item in raw:
        try:
            obj = _json.loads(item)
        except ValueError:
            raise DescriptorError(f"group must be a JSON object, got {item!r}") from None
        if not isinstance(obj, dict) or not isinstance(obj.get("mapping"), dict):
            raise DescriptorError("group needs dimension, name and mapping fields")
        out.append(GroupingMap(
            dimension=str(obj.get("dimension", "")),
            name=str(obj.get("name", "")),
            mapping={str(k): str(v) for k, v in obj["mapping"].items()},
        ))
    return tuple(out)


def _csv_list(raw: str) -> tuple[str, ...]:
    return tuple(part for part in raw.split(",") if part) if raw else ()


def create_app(registry: DatasetRegistry | None = None,
               cache: IcebergCache | None = None) -> FastAPI:
    registry = registry if registry is not None else DatasetRegistry()
    cache = cache if cache is not None else IcebergCache()

    app = FastAPI(title="tagcube", version="0.1.0")
    app.state.registry = registry
    app.state.cache = cache

    origins = os.environ.get("TAGCUBE_UI_ORIGIN", "*")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[o.strip() for o in origins.split(",")],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    def _execute(desc: QueryDescriptor) -> tuple[bytes, dict]:
        try:
            return engine.execute(registry, cache, desc)
        except LookupError as exc:
            raise HTTPException(404, str(exc)) from None
        except ValueError as exc:
            # descriptor/schema/engine validation failures
            raise HTTPException(422, str(exc)) from None

    @app.post("/datasets", status_code=201)
    async def upload_dataset(request: Request, name: str = "dataset",
                             delimiter: str = ",", header: bool = True):
        body = await request.body()
        if not body:
            raise HTTPException(400, "empty request body")
        try:
            record = registry.ingest(body, name=name, delimiter=delimiter, header=header)
        except TableParseError as exc:
            raise HTTPException(400, str(exc)) from None
        return {
            "id": record.id,
            "name": record.name,
            "columns": list(record.table.columns),
            "rows": len(record.table.rows),
        }

    @app.get("/datasets", response_model=list[DatasetSummary])
    def list_datasets():
        return registry.list()

    @app.post("/datasets/{dataset_id}/schema")
    def bind_schema(dataset_id: str, body: SchemaBindRequest):
        try:
            bound = registry.bind(dataset_id, body.dimensions, body.measures)
        except LookupError as exc:
            raise HTTPException(404, str(exc)) from None
        except SchemaError as exc:
            raise HTTPException(422, str(exc)) from None
        return {
            "id": bound.id,
            "dimensions": list(bound.schema.dimensions),
            "measures": list(bound.schema.measures),
            "rows": bound.n_rows,
        }

    @app.get("/datasets/{dataset_id}/dimensions")
    def dataset_dimensions(dataset_id: str):
        try:
            bound = registry.dataset(dataset_id)
        except LookupError as exc:
            raise HTTPException(404, str(exc)) from None
        except SchemaError as exc:
            raise HTTPException(422, str(exc)) from None
        return {
            "id": bound.id,
            "dimensions": [
                {"name": d, "values": list(bound.dictionaries[d])}
                for d in bound.schema.dimensions
            ],
            "measures": list(bound.schema.measures),
        }

    @app.get("/datasets/{dataset_id}/cloud")
    def cloud(dataset_id: str,
              dims: str,
              agg: str = "count",
              measure: str | None = None,
              slice: list[str] = Query(default=[]),
              dice: list[str] = Query(default=[]),
              group: list[str] = Query(default=[]),
              k: int | None = None,
              limit: int = 150,
              exact: bool = False,
              cluster: str = "",
              sim: str = "cosine",
              heuristic: str = "nn",
              seed: int = 0,
              buckets: int = 7):
        try:
            desc = QueryDescriptor(
                dataset=dataset_id,
                dims=_csv_list(dims),
                agg=agg,
                measure=measure,
                slices=_parse_slices(slice),
                dices=_parse_dices(dice),
                groups=_parse_groups(group),
                k=k if k is not None else engine.DEFAULT_BOUND,
                limit=limit,
                exact=exact,
                cluster=_csv_list(cluster),
                sim=sim,
                heuristic=heuristic,
                seed=seed,
                buckets=buckets,
            )
        except DescriptorError as exc:
            raise HTTPException(422, str(exc)) from None
        body, _ = _execute(desc)
        return Response(content=body, media_type="application/json")

    @app.get("/c/{token}")
    def cloud_by_permalink(token: str):
        try:
            desc = engine.decode_permalink(token)
        except PermalinkError as exc:
            raise HTTPException(404, str(exc)) from None
        body, _ = _execute(desc)
        return Response(content=body, media_type="application/json")

    @app.get("/embed/{token}")
    def embed(token: str):
        try:
            desc = engine.decode_permalink(token)
        except PermalinkError as exc:
            raise HTTPException(404, str(exc)) from None
        _, payload = _execute(desc)
        return HTMLResponse(content=engine.render_embed_html(payload))

    return app


app = create_app()
