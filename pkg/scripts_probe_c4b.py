"""Probe: PWMC:1000 optimum rate on cosine-of-sparse-vectors matrices."""
import sys
import time

sys.path.insert(0, "src")

import numpy as np

from tagcube.layout import brute_force_arrange, mla_cost, nn_arrange, pwmc_arrange
from tagcube.similarity import SimilarityMatrix, _pairwise
from tagcube.tagcloud import Tag


def vector_matrix(rng, n, density=0.35, kind="cosine"):
    axis = max(3, int(rng.integers(n, 2 * n + 1)))
    vectors = rng.uniform(0.0, 10.0, (n, axis))
    mask = rng.uniform(0, 1, (n, axis)) < density
    vectors = np.where(mask, vectors, 0.0)
    # ensure no all-zero vector so the diagonal stays 1
    for i in range(n):
        if not vectors[i].any():
            vectors[i, int(rng.integers(axis))] = rng.uniform(1, 10)
    tags = tuple(Tag(term=f"t{i:03d}", object=(f"t{i:03d}",), weight=float(rng.uniform(0, 10)))
                 for i in range(n))
    return SimilarityMatrix(tags=tags, kind=kind, values=_pairwise(kind, vectors))


for stream in (0, 1, 2):
    rng = np.random.default_rng(stream)
    t0 = time.time()
    hits = total = 0
    per_n = {}
    for i in range(120):
        n = int(rng.integers(2, 9))
        m = vector_matrix(rng, n)
        optimum = mla_cost(brute_force_arrange(m), m)
        pw = mla_cost(pwmc_arrange(m, 1000, seed=i), m)
        ok = pw <= optimum + 1e-9
        hits += ok
        total += 1
        a, b = per_n.get(n, (0, 0))
        per_n[n] = (a + ok, b + 1)
    print(f"stream={stream} rate={hits}/{total} = {hits/total:.3f} ({time.time()-t0:.1f}s)")
    print("   ", {n: f"{a}/{b}" for n, (a, b) in sorted(per_n.items())})
