"""Linear arrangement of a tag cloud under a similarity matrix.

The objective is the minimum-linear-arrangement cost: the sum over tag
pairs of similarity times index distance |i - j|. The problem is
NP-complete, so production layouts come from heuristics: greedy nearest
neighbor (NN), pairwise-exchange Monte Carlo refinement (PWMC) and a
block-swap Monte Carlo variant (MC), plus an exhaustive oracle for tiny
instances. Arrangements are deterministic: random trials come from a
seeded generator and all ties break on the lexicographic term.

After arranging, display hints can be woven into the list: GLUED marks
consecutive pairs that must stay together, PERMUTABLE marks pairs the
renderer may swap for free because their transposition provably leaves
the cost unchanged.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .similarity import SimilarityMatrix
from .tagcloud import Tag, TagCloud, font_buckets

#: Exhaustive search is capped here; 9! permutations is the sane maximum.
BRUTE_FORCE_LIMIT = 9

DEFAULT_GLUE_THRESHOLD = 0.95
DEFAULT_PERMUTE_THRESHOLD = 0.05

# Transpositions whose cost delta is below this are treated as cost-neutral.
_NEUTRAL_EPS = 1e-12


class LayoutError(ValueError):
    pass


class HintToken(Enum):
    GLUED = "glued"
    PERMUTABLE = "permutable"


@dataclass(frozen=True)
class Arrangement:
    """A permutation of the cloud's tags; position(t) maps onto 1..N."""

    order: tuple[Tag, ...]

    def positions(self) -> dict[str, int]:
        return {tag.term: i + 1 for i, tag in enumerate(self.order)}


@dataclass(frozen=True)
class LayoutEntry:
    term: str
    weight: float
    bucket: int


@dataclass(frozen=True)
class HintedLayout:
    """Arrangement order interleaved with GLUED/PERMUTABLE tokens."""

    entries: tuple


def _clamped(matrix: SimilarityMatrix) -> np.ndarray:
    # negative similarities cannot arise from non-negative aggregates, but
    # the cost contract is total: clamp to zero
    return np.maximum(matrix.values, 0.0)


def _indices_for(arrangement: Arrangement, matrix: SimilarityMatrix) -> list[int]:
    by_term = {tag.term: i for i, tag in enumerate(matrix.tags)}
    if len(arrangement.order) != len(matrix.tags):
        raise LayoutError("arrangement does not cover the matrix's tags")
    try:
        idx = [by_term[tag.term] for tag in arrangement.order]
    except KeyError as exc:
        raise LayoutError(f"tag {exc.args[0]!r} not in matrix") from None
    if len(set(idx)) != len(idx):
        raise LayoutError("arrangement repeats a tag")
    return idx


def mla_cost(arrangement: Arrangement, matrix: SimilarityMatrix) -> float:
    """Sum over unordered tag pairs of similarity times index distance."""
    idx = _indices_for(arrangement, matrix)
    n = len(idx)
    if n < 2:
        return 0.0
    w = _clamped(matrix)[np.ix_(idx, idx)]
    span = np.arange(n)
    dist = np.abs(span[:, None] - span[None, :])
    return float(np.triu(w * dist, k=1).sum())


def nn_arrange(matrix: SimilarityMatrix) -> Arrangement:
    """Greedy chain: start from the heaviest tag, repeatedly append the
    unplaced tag most similar to the last one. O(n^2), ties by term."""
    tags = matrix.tags
    n = len(tags)
    if n == 0:
        raise LayoutError("matrix is empty")
    sims = matrix.values
    start = min(range(n), key=lambda i: (-tags[i].weight, tags[i].term))
    order = [start]
    placed = [False] * n
    placed[start] = True
    for _ in range(n - 1):
        last = order[-1]
        row = sims[last]
        best = None
        for j in range(n):
            if placed[j]:
                continue
            cand = (-row[j], tags[j].term)
            if best is None or cand < best[0]:
                best = (cand, j)
        order.append(best[1])
        placed[best[1]] = True
    return Arrangement(order=tuple(tags[i] for i in order))


def _swap_delta(w: np.ndarray, pos: np.ndarray, order, i: int, j: int) -> float:
    """Cost delta of exchanging the tags at positions i and j."""
    a, b = order[i], order[j]
    di = np.abs(i - pos)
    dj = np.abs(j - pos)
    contrib = (w[a] - w[b]) * (dj - di)
    # the (a, b) pair keeps its distance; self terms are zero anyway
    return float(contrib.sum() - contrib[a] - contrib[b])


def pwmc_arrange(matrix: SimilarityMatrix, exchanges: int, seed: int = 0) -> Arrangement:
    """NN start, then random pair-exchange trials keeping only strict
    cost reductions. Deterministic for a given seed."""
    if exchanges < 0:
        raise LayoutError("exchanges must be non-negative")
    base = nn_arrange(matrix)
    n = len(base.order)
    if n < 2 or exchanges == 0:
        return base
    tags = matrix.tags
    by_term = {tag.term: i for i, tag in enumerate(tags)}
    order = [by_term[t.term] for t in base.order]
    pos = np.empty(n, dtype=float)
    pos[order] = np.arange(n)
    w = _clamped(matrix)
    rng = random.Random(seed)
    for _ in range(exchanges):
        i = rng.randrange(n)
        j = rng.randrange(n - 1)
        if j >= i:
            j += 1
        if _swap_delta(w, pos, order, i, j) < 0.0:
            a, b = order[i], order[j]
            order[i], order[j] = b, a
            pos[a], pos[b] = j, i
    return Arrangement(order=tuple(tags[i] for i in order))


def mc_block_arrange(matrix: SimilarityMatrix, iterations: int, seed: int = 0) -> Arrangement:
    """NN start, then random two-block cuts, swapping the blocks whenever
    that strictly reduces the cost."""
    if iterations < 0:
        raise LayoutError("iterations must be non-negative")
    base = nn_arrange(matrix)
    n = len(base.order)
    if n < 2 or iterations == 0:
        return base
    tags = matrix.tags
    by_term = {tag.term: i for i, tag in enumerate(tags)}
    order = [by_term[t.term] for t in base.order]
    w = _clamped(matrix)
    rng = random.Random(seed)
    for _ in range(iterations):
        cut = rng.randrange(1, n)
        head, tail = order[:cut], order[cut:]
        sub = w[np.ix_(head, tail)]
        # a cross pair at distance d sits at distance n - d after the swap
        dist = np.arange(cut, n)[None, :] - np.arange(cut)[:, None]
        delta = float((sub * (n - 2 * dist)).sum())
        if delta < 0.0:
            order = tail + head
    return Arrangement(order=tuple(tags[i] for i in order))


def brute_force_arrange(matrix: SimilarityMatrix) -> Arrangement:
    """Exhaustive optimum for small instances; ties go to the
    lexicographically smallest term sequence."""
    tags = matrix.tags
    n = len(tags)
    if n == 0:
        raise LayoutError("matrix is empty")
    if n > BRUTE_FORCE_LIMIT:
        raise LayoutError(f"brute force is capped at {BRUTE_FORCE_LIMIT} tags, got {n}")
    if n == 1:
        return Arrangement(order=(tags[0],))
    by_term = sorted(range(n), key=lambda i: tags[i].term)
    w = _clamped(matrix)[np.ix_(by_term, by_term)]
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    cost = np.zeros(len(perms))
    for i in range(n):
        for j in range(i + 1, n):
            cost += w[perms[:, i], perms[:, j]] * (j - i)
    best = perms[int(np.argmin(cost))]  # first minimum = lexicographic winner
    return Arrangement(order=tuple(tags[by_term[i]] for i in best))


def _transposition_neutral(w: np.ndarray, order, i: int) -> bool:
    """True when swapping positions i and i+1 leaves the cost unchanged."""
    n = len(order)
    pos = np.empty(n, dtype=float)
    pos[order] = np.arange(n)
    return abs(_swap_delta(w, pos, order, i, i + 1)) <= _NEUTRAL_EPS


def insert_hints(arrangement: Arrangement, matrix: SimilarityMatrix,
                 glue_threshold: float = DEFAULT_GLUE_THRESHOLD,
                 permute_threshold: float = DEFAULT_PERMUTE_THRESHOLD,
                 *, bucket_count: int = 7) -> HintedLayout:
    """Weave display hints between consecutive tags.

    GLUED when the pair's similarity reaches the glue threshold;
    PERMUTABLE when the pair is nearly unrelated and its transposition is
    cost-neutral. GLUED wins when both apply.
    """
    if not 0.0 <= permute_threshold <= 1.0 or not 0.0 <= glue_threshold <= 1.0:
        raise LayoutError("thresholds must lie in [0, 1]")
    if glue_threshold <= permute_threshold:
        raise LayoutError("glue threshold must exceed permute threshold")
    idx = _indices_for(arrangement, matrix)
    w = _clamped(matrix)
    cloud = TagCloud(tags=arrangement.order, dimensions=())
    buckets = font_buckets(cloud, bucket_count)
    entries: list = []
    for k, tag in enumerate(arrangement.order):
        entries.append(LayoutEntry(term=tag.term, weight=tag.weight, bucket=buckets[tag.term]))
        if k == len(idx) - 1:
            continue
        sim = float(matrix.values[idx[k], idx[k + 1]])
        if sim >= glue_threshold:
            entries.append(HintToken.GLUED)
        elif sim <= permute_threshold and _transposition_neutral(w, idx, k):
            entries.append(HintToken.PERMUTABLE)
    return HintedLayout(entries=tuple(entries))
