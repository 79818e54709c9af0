"""Delimited-text ingestion and user-driven schema binding.

A dataset starts life as an untyped table. The user then designates which
columns are dimensions and which are measures; binding validates the
measures, builds per-dimension value dictionaries, and freezes the dataset
for concurrent readers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import re
from dataclasses import dataclass, field

#: Sentinel stored for empty dimension fields; aggregation needs an address.
BLANK = "(blank)"

# Decimal number with optional sign and fraction. No exponents, no
# thousands separators: parsing must be deterministic.
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")


class TableParseError(ValueError):
    """Delimited input could not be parsed into a table."""


class SchemaError(ValueError):
    """A schema designation is invalid for its table."""


@dataclass(frozen=True)
class RawTable:
    """Parsed but untyped table; every value is still text."""

    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class Schema:
    dimensions: tuple[str, ...]
    measures: tuple[str, ...]


@dataclass(frozen=True)
class BoundDataset:
    """Immutable table with a bound schema.

    ``dim_data`` and ``measure_data`` are column-major copies (dimension
    blanks replaced, measures parsed); the raw table is kept untouched so
    the same table can be bound again under a different schema.
    """

    id: str
    name: str
    table: RawTable = field(repr=False)
    schema: Schema
    dim_data: dict[str, tuple[str, ...]] = field(repr=False)
    measure_data: dict[str, tuple[float, ...]] = field(repr=False)
    dictionaries: dict[str, tuple[str, ...]] = field(repr=False)

    @property
    def n_rows(self) -> int:
        return len(self.table.rows)


def parse_table(data: bytes | str, delimiter: str = ",", has_header: bool = True) -> RawTable:
    """Parse RFC-4180-style delimited text into a RawTable.

    Numeric-looking fields keep their text form; typing happens at schema
    binding. Raises TableParseError for undecodable bytes, ragged rows
    (with the offending row number) and empty input.
    """
    if len(delimiter) != 1:
        raise TableParseError(f"delimiter must be a single character, got {delimiter!r}")
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TableParseError(f"input is not valid UTF-8: {exc}") from None
    else:
        text = data

    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    columns: tuple[str, ...] | None = None
    rows: list[tuple[str, ...]] = []
    for record in reader:
        if not record:  # blank line
            continue
        if columns is None:
            if has_header:
                columns = _validate_columns(record)
                continue
            columns = tuple(f"col{i + 1}" for i in range(len(record)))
        if len(record) != len(columns):
            raise TableParseError(
                f"row {reader.line_num}: expected {len(columns)} fields, got {len(record)}"
            )
        rows.append(tuple(record))
    if columns is None:
        raise TableParseError("empty input")
    return RawTable(columns=columns, rows=tuple(rows))


def _validate_columns(record) -> tuple[str, ...]:
    names = tuple(name.strip() for name in record)
    if any(not name for name in names):
        raise TableParseError("column names must be non-empty")
    if len(set(names)) != len(names):
        raise TableParseError("column names must be unique")
    return names


def to_delimited(table: RawTable, delimiter: str = ",") -> str:
    """Serialize back to delimited text; re-parsing yields an equal table."""
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(table.columns)
    writer.writerows(table.rows)
    return out.getvalue()


def content_id(data: bytes) -> str:
    """Stable opaque dataset identifier derived from the raw upload bytes."""
    return hashlib.sha256(data).hexdigest()[:16]


def bind_schema(
    table: RawTable,
    dimensions,
    measures=(),
    *,
    dataset_id: str | None = None,
    name: str = "dataset",
) -> BoundDataset:
    """Bind a schema: designate dimension and measure columns.

    Measure columns must parse as decimal numbers in every row (a trailing
    dollar sign is stripped first); empty dimension fields become the
    ``(blank)`` sentinel. The returned dataset is immutable.
    """
    dimensions = tuple(dimensions)
    measures = tuple(measures)
    if not dimensions:
        raise SchemaError("at least one dimension column is required")
    for group, label in ((dimensions, "dimension"), (measures, "measure")):
        if len(set(group)) != len(group):
            raise SchemaError(f"duplicate {label} columns")
        for col in group:
            if col not in table.columns:
                raise SchemaError(f"unknown column {col!r}")
    overlap = set(dimensions) & set(measures)
    if overlap:
        raise SchemaError(f"columns cannot be both dimension and measure: {sorted(overlap)}")

    index = {col: i for i, col in enumerate(table.columns)}
    dim_data: dict[str, tuple[str, ...]] = {}
    dictionaries: dict[str, tuple[str, ...]] = {}
    for col in dimensions:
        i = index[col]
        values = tuple(row[i] if row[i] != "" else BLANK for row in table.rows)
        dim_data[col] = values
        dictionaries[col] = tuple(sorted(set(values)))

    measure_data: dict[str, tuple[float, ...]] = {}
    for col in measures:
        i = index[col]
        measure_data[col] = tuple(
            _parse_measure(row[i], row_num, col) for row_num, row in enumerate(table.rows, start=1)
        )

    if dataset_id is None:
        dataset_id = content_id(to_delimited(table).encode("utf-8"))
    return BoundDataset(
        id=dataset_id,
        name=name,
        table=table,
        schema=Schema(dimensions=dimensions, measures=measures),
        dim_data=dim_data,
        measure_data=measure_data,
        dictionaries=dictionaries,
    )


def _parse_measure(raw: str, row_num: int, col: str) -> float:
    text = raw.strip()
    if text.endswith("$"):
        text = text[:-1].strip()
    if not text:
        raise SchemaError(f"row {row_num}, column {col!r}: empty measure value")
    if not _NUMBER_RE.match(text):
        raise SchemaError(f"row {row_num}, column {col!r}: not a number: {raw!r}")
    return float(text)


def distinct_values(dataset: BoundDataset, dimension: str) -> tuple[str, ...]:
    """Lexicographically sorted distinct values of one dimension."""
    try:
        return dataset.dictionaries[dimension]
    except KeyError:
        raise SchemaError(f"unknown dimension {dimension!r}") from None
