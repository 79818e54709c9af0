"""Subcuboid vectors and pairwise tag similarity matrices.

Each tag of a cloud owns a subcuboid: the cuboid over tag + clustering
dimensions sliced at the tag's address, flattened into a vector over
cluster-dimension cells. Cosine and Tanimoto run on the raw vectors,
Jaccard on their supports. All three are reflexive and symmetric with
values in [-1, 1]; over non-negative aggregates they stay in [0, 1].

Zero-vector convention: cosine and Tanimoto involving an all-zero vector
return 0 (a tag with no clustering signal is maximally dissimilar), while
the Jaccard of two empty supports is 1. The identity
jaccard(u, v) == tanimoto(binarize(u), binarize(v)) therefore holds for
every pair except two all-zero vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cube
from .cube import Aggregator, cell_measure, merge_stats
from .iceberg import IcebergCuboid
from .tagcloud import Tag, TagCloud

SIMILARITY_KINDS = ("cosine", "tanimoto", "jaccard")


class SimilarityError(ValueError):
    pass


@dataclass(frozen=True)
class SubcuboidVector:
    tag: Tag
    axis: tuple[tuple[str, ...], ...]
    values: np.ndarray


@dataclass(frozen=True)
class SimilarityMatrix:
    tags: tuple[Tag, ...]
    kind: str
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.tags)

    def value(self, i: int, j: int) -> float:
        return float(self.values[i, j])


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = float(np.dot(u, u))
    nv = float(np.dot(v, v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / np.sqrt(nu * nv))


def tanimoto(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    dot = float(np.dot(u, v))
    denom = float(np.dot(u, u)) + float(np.dot(v, v)) - dot
    if denom == 0.0:
        return 0.0
    return dot / denom


def jaccard(u, v) -> float:
    su = np.asarray(u, dtype=float) > 0
    sv = np.asarray(v, dtype=float) > 0
    union = int(np.sum(su | sv))
    if union == 0:
        return 1.0
    return int(np.sum(su & sv)) / union


def _cells_for(dataset, dims, aggregator, measure, source: IcebergCuboid | None):
    """(cell dims, iterable of (address, stats)) from base facts or an
    already-built iceberg covering the needed dimensions."""
    if source is None:
        dims_t, aggregator, measure = cube.validate_query(dataset, dims, aggregator, measure)
        return dims_t, cube.aggregate(dataset, dims_t, aggregator, measure).items()
    missing = [d for d in dims if d not in source.dimensions]
    if missing:
        raise SimilarityError(f"iceberg does not cover dimensions {missing}")
    return source.dimensions, source.cells


def _project_tag_vectors(cell_dims, cells, tag_dims, cluster_dims, tags, aggregator,
                         groups=()):
    """Per-tag sparse vectors over cluster cells: tag term -> {addr: value}.

    Grouping maps coarsen cell addresses before matching, so clouds built
    from rolled-up queries still find their cells.
    """
    idx = {d: i for i, d in enumerate(cell_dims)}
    grouped: dict[int, list] = {}
    for gmap in groups:
        if gmap.dimension in idx:
            grouped.setdefault(idx[gmap.dimension], []).append(gmap)
    tag_idx = [idx[d] for d in tag_dims]
    cluster_idx = [idx[d] for d in cluster_dims]
    wanted = {t.object: t.term for t in tags}
    sparse: dict[str, dict] = {t.term: {} for t in tags}
    for addr, stats in cells:
        if grouped:
            addr = list(addr)
            for i, gmaps in grouped.items():
                v = addr[i]
                for gmap in gmaps:
                    v = gmap.apply(v)
                addr[i] = v
        key = tuple(addr[i] for i in tag_idx)
        term = wanted.get(key)
        if term is None:
            continue
        caddr = tuple(addr[i] for i in cluster_idx)
        bucket = sparse[term]
        prev = bucket.get(caddr)
        bucket[caddr] = stats if prev is None else merge_stats(prev, stats)
    aggregator = Aggregator(aggregator)
    return {
        term: {addr: cell_measure(s, aggregator) for addr, s in bucket.items()}
        for term, bucket in sparse.items()
    }


def subcuboid_vector(dataset, tag: Tag, tag_dims, cluster_dims, aggregator,
                     measure=None) -> SubcuboidVector:
    """Vector of one tag over every cluster-dimension cell of the cuboid.

    The axis spans all cluster cells observed in the facts (not only the
    tag's own), so vectors of different tags over the same cuboid are
    directly comparable.
    """
    tag_dims = tuple(tag_dims)
    cluster_dims = tuple(cluster_dims)
    if set(tag_dims) & set(cluster_dims):
        raise SimilarityError("cluster dimensions must be disjoint from tag dimensions")
    if len(tag.object) != len(tag_dims):
        raise SimilarityError("tag address arity does not match its dimensions")
    cell_dims, cells = _cells_for(dataset, tag_dims + cluster_dims, aggregator, measure, None)
    cells = list(cells)
    idx = {d: i for i, d in enumerate(cell_dims)}
    cluster_idx = [idx[d] for d in cluster_dims]
    axis = sorted({tuple(addr[i] for i in cluster_idx) for addr, _ in cells})
    sparse = _project_tag_vectors(cell_dims, cells, tag_dims, cluster_dims, [tag], aggregator)
    vec = sparse[tag.term]
    values = np.array([vec.get(a, 0.0) for a in axis], dtype=float)
    return SubcuboidVector(tag=tag, axis=tuple(axis), values=values)


def _pairwise(kind: str, vectors: np.ndarray) -> np.ndarray:
    gram = vectors @ vectors.T
    sq = np.diag(gram).copy()
    if kind == "cosine":
        norms = np.sqrt(sq)
        denom = np.outer(norms, norms)
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.where(denom > 0, gram / denom, 0.0)
        np.fill_diagonal(m, np.where(sq > 0, 1.0, 0.0))
    elif kind == "tanimoto":
        denom = sq[:, None] + sq[None, :] - gram
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.where(denom > 0, gram / denom, 0.0)
        np.fill_diagonal(m, np.where(sq > 0, 1.0, 0.0))
    elif kind == "jaccard":
        b = (vectors > 0).astype(float)
        inter = b @ b.T
        sizes = np.diag(inter).copy()
        union = sizes[:, None] + sizes[None, :] - inter
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.where(union > 0, inter / union, 1.0)
        np.fill_diagonal(m, 1.0)
    else:
        raise SimilarityError(f"unknown similarity kind {kind!r}")
    return np.clip(m, -1.0, 1.0)


def similarity_matrix(dataset, cloud: TagCloud, cluster_dims, kind, aggregator,
                      measure=None, *, source: IcebergCuboid | None = None,
                      groups=()) -> SimilarityMatrix:
    """Pairwise similarity of all cloud tags over their subcuboid vectors.

    ``source`` selects the cell substrate: an iceberg cuboid covering the
    tag and cluster dimensions (the fast default in the service), or the
    base facts when None. The shared axis is the union of the cloud tags'
    cluster cells; coordinates outside it are zero for every tag and
    cannot change any of the three measures.
    """
    if not cloud.tags:
        raise SimilarityError("cloud must not be empty")
    if kind not in SIMILARITY_KINDS:
        raise SimilarityError(f"unknown similarity kind {kind!r}")
    cluster_dims = tuple(cluster_dims)
    if not cluster_dims:
        raise SimilarityError("at least one cluster dimension is required")
    if set(cluster_dims) & set(cloud.dimensions):
        raise SimilarityError("cluster dimensions must be disjoint from tag dimensions")

    need = tuple(cloud.dimensions) + cluster_dims
    cell_dims, cells = _cells_for(dataset, need, aggregator, measure, source)
    sparse = _project_tag_vectors(cell_dims, cells, cloud.dimensions, cluster_dims,
                                  cloud.tags, aggregator, groups)
    axis = sorted({addr for vec in sparse.values() for addr in vec})
    n = len(cloud.tags)
    vectors = np.zeros((n, max(len(axis), 1)), dtype=float)
    pos = {addr: i for i, addr in enumerate(axis)}
    for row, tag in enumerate(cloud.tags):
        for addr, value in sparse[tag.term].items():
            vectors[row, pos[addr]] = value
    return SimilarityMatrix(tags=cloud.tags, kind=kind, values=_pairwise(kind, vectors))
