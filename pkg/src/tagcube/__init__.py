"""tagcube: interactive multidimensional tag clouds over tabular data.

Core pipeline: ingest delimited text, bind a schema, materialize cuboids,
answer top-k tag-cloud queries from iceberg cuboids, order the tags by
similarity, and serve the result over HTTP with stateless permalinks.
"""

from .cube import Aggregator, Cuboid, Filter, GroupingMap
from .engine import DatasetRegistry, IcebergCache, QueryDescriptor
from .fact_store import BoundDataset, RawTable, Schema, bind_schema, parse_table
from .iceberg import IcebergCuboid, build_iceberg, topk_exact, topk_iceberg
from .tagcloud import Tag, TagCloud

__version__ = "0.1.0"

__all__ = [
    "Aggregator",
    "BoundDataset",
    "Cuboid",
    "DatasetRegistry",
    "Filter",
    "GroupingMap",
    "IcebergCache",
    "IcebergCuboid",
    "QueryDescriptor",
    "RawTable",
    "Schema",
    "Tag",
    "TagCloud",
    "bind_schema",
    "build_iceberg",
    "parse_table",
    "topk_exact",
    "topk_iceberg",
    "__version__",
]
