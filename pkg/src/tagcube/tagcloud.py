"""Tags, tag clouds, the entropy measure and the approximation quality
indexes, plus cloud-level operations (sort, prune, font buckets).

A tag is a (term, object, weight) triplet: the object is the cell address
the tag describes and the term is its display phrase, the address values
joined with an en dash ("Canada–March" style). Weights are non-negative by
construction; anything negative is rejected rather than shifted, because a
silent transform would corrupt the quality indexes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

#: En dash joining attribute values of a k-tag into its display term.
TERM_JOIN = "–"

#: A tag cloud stops being readable beyond this many tags.
DEFAULT_BOUND = 150


class TagCloudError(ValueError):
    pass


@dataclass(frozen=True)
class Tag:
    term: str
    object: tuple[str, ...]
    weight: float


@dataclass(frozen=True)
class TagCloud:
    tags: tuple[Tag, ...]
    dimensions: tuple[str, ...]
    bound: int = DEFAULT_BOUND

    def __len__(self) -> int:
        return len(self.tags)

    def terms(self) -> tuple[str, ...]:
        return tuple(t.term for t in self.tags)

    def weights(self) -> tuple[float, ...]:
        return tuple(t.weight for t in self.tags)


def make_term(address) -> str:
    return TERM_JOIN.join(address)


def cloud_from_cells(cells, dimensions, k, tie="object") -> TagCloud:
    """Build the top-k tag cloud from (address, weight) cells.

    ``tie`` picks the secondary sort key for equal weights: the raw cell
    address or the joined term (they differ only when values contain the
    join character).
    """
    if k < 1:
        raise TagCloudError("k must be at least 1")
    items = [(tuple(addr), float(w)) for addr, w in cells]
    for addr, w in items:
        if w < 0:
            raise TagCloudError(
                f"tag weights must be non-negative, got {w} at {make_term(addr)!r}"
            )
    if tie == "object":
        items.sort(key=lambda it: (-it[1], it[0]))
    else:
        items.sort(key=lambda it: (-it[1], make_term(it[0])))
    items = items[:k]
    tags = tuple(Tag(term=make_term(addr), object=addr, weight=w) for addr, w in items)
    seen = set()
    for t in tags:
        if t.term in seen:
            raise TagCloudError(f"duplicate tag term {t.term!r}")
        seen.add(t.term)
    return TagCloud(tags=tags, dimensions=tuple(dimensions), bound=k)


def from_cuboid(cuboid, k: int = DEFAULT_BOUND) -> TagCloud:
    """Top-k cells of a cuboid as a tag cloud, largest weights first."""
    return cloud_from_cells(cuboid.cells.items(), cuboid.dimensions, k, tie="term")


def entropy(cloud: TagCloud) -> float:
    """Shannon entropy (natural log) of the normalized weight distribution.

    Quantifies weight disparity: uniform clouds are maximal and visually
    uninformative. Zero-weight tags contribute nothing.
    """
    total = sum(t.weight for t in cloud.tags)
    if total <= 0:
        raise TagCloudError("entropy requires positive total weight")
    h = 0.0
    for t in cloud.tags:
        if t.weight > 0:
            p = t.weight / total
            h -= p * math.log(p)
    return h


def relative_entropy(cloud: TagCloud) -> float:
    """entropy / ln(cloud size), in [0, 1]."""
    if len(cloud.tags) < 2:
        raise TagCloudError("relative entropy needs at least 2 tags")
    return entropy(cloud) / math.log(len(cloud.tags))


def fp_index(approx: TagCloud, exact: TagCloud) -> float:
    """Severity of wrongly included tags, 0 (ideal) to 1.

    Max weight among approximate tags absent from the exact cloud, divided
    by the max weight of the approximate cloud. Membership is by term.
    """
    if not approx.tags:
        raise TagCloudError("fp_index requires a non-empty approximate cloud")
    exact_terms = {t.term for t in exact.tags}
    wrong = [t.weight for t in approx.tags if t.term not in exact_terms]
    top = max(t.weight for t in approx.tags)
    if not wrong:
        return 0.0
    return max(wrong) / top


def fn_index(approx: TagCloud, exact: TagCloud) -> float:
    """Severity of missing tags, 0 (ideal) to 1; mirror of fp_index."""
    if not exact.tags:
        raise TagCloudError("fn_index requires a non-empty exact cloud")
    approx_terms = {t.term for t in approx.tags}
    missing = [t.weight for t in exact.tags if t.term not in approx_terms]
    top = max(t.weight for t in exact.tags)
    if not missing:
        return 0.0
    return max(missing) / top


def sort_cloud(cloud: TagCloud, key: str = "weight", direction: str = "desc") -> TagCloud:
    """Stable sort by weight or term; ties fall back to the other key asc."""
    if key not in ("weight", "term"):
        raise TagCloudError(f"unknown sort key {key!r}")
    if direction not in ("asc", "desc"):
        raise TagCloudError(f"unknown sort direction {direction!r}")
    reverse = direction == "desc"
    if key == "weight":
        tags = sorted(cloud.tags, key=lambda t: t.term)
        tags.sort(key=lambda t: t.weight, reverse=reverse)
    else:
        tags = sorted(cloud.tags, key=lambda t: t.weight)
        tags.sort(key=lambda t: t.term, reverse=reverse)
    return TagCloud(tags=tuple(tags), dimensions=cloud.dimensions, bound=cloud.bound)


def prune(cloud: TagCloud, min_weight: float | None = None, top_n: int | None = None) -> TagCloud:
    """Drop tags below a weight floor and/or keep only the heaviest n.

    Survivors keep their input order; top_n selects by (weight desc,
    term asc) without reordering.
    """
    if min_weight is None and top_n is None:
        raise TagCloudError("prune needs min_weight or top_n")
    tags = list(cloud.tags)
    if min_weight is not None:
        tags = [t for t in tags if t.weight >= min_weight]
    if top_n is not None and len(tags) > top_n:
        ranked = sorted(tags, key=lambda t: (-t.weight, t.term))[:top_n]
        keep = {t.term for t in ranked}
        tags = [t for t in tags if t.term in keep]
    return TagCloud(tags=tuple(tags), dimensions=cloud.dimensions, bound=cloud.bound)


def font_buckets(cloud: TagCloud, buckets: int = 7) -> dict[str, int]:
    """Map each term to a font bucket in 1..buckets by linear weight scaling.

    A flat cloud (all weights equal) lands everything on the middle bucket.
    """
    if buckets < 1:
        raise TagCloudError("bucket count must be at least 1")
    if not cloud.tags:
        return {}
    weights = [t.weight for t in cloud.tags]
    lo, hi = min(weights), max(weights)
    if hi == lo:
        middle = math.ceil(buckets / 2)
        return {t.term: middle for t in cloud.tags}
    span = hi - lo
    return {
        t.term: min(buckets, max(1, math.ceil(buckets * (t.weight - lo) / span)))
        for t in cloud.tags
    }
