"""Probe: PWMC:1000 optimum rate on small random instances."""
import sys
import time

sys.path.insert(0, "src")

import numpy as np

from tagcube.layout import brute_force_arrange, mla_cost, nn_arrange, pwmc_arrange
from tagcube.similarity import SimilarityMatrix
from tagcube.tagcloud import Tag


def random_matrix(rng, n):
    values = rng.uniform(0.0, 1.0, (n, n))
    values = (values + values.T) / 2
    np.fill_diagonal(values, 1.0)
    tags = tuple(Tag(term=f"t{i:03d}", object=(f"t{i:03d}",), weight=float(rng.uniform(0, 10)))
                 for i in range(n))
    return SimilarityMatrix(tags=tags, kind="cosine", values=values)


rng = np.random.default_rng(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
t0 = time.time()
hits = 0
total = 0
per_n = {}
for i in range(120):
    n = int(rng.integers(2, 9))
    m = random_matrix(rng, n)
    optimum = mla_cost(brute_force_arrange(m), m)
    nn_cost = mla_cost(nn_arrange(m), m)
    assert nn_cost >= optimum - 1e-9
    pw = mla_cost(pwmc_arrange(m, 1000, seed=i), m)
    ok = pw <= optimum + 1e-9
    hits += ok
    total += 1
    a, b = per_n.get(n, (0, 0))
    per_n[n] = (a + ok, b + 1)
print(f"rate={hits}/{total} = {hits/total:.3f}  ({time.time()-t0:.1f}s)")
print({n: f"{a}/{b}" for n, (a, b) in sorted(per_n.items())})
