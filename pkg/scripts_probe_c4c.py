"""Probe: PWMC:1000 optimum rate on engine-produced similarity matrices."""
import sys
import time

sys.path.insert(0, "src")

import numpy as np

from tagcube.cube import Filter
from tagcube.engine import DatasetRegistry
from tagcube.iceberg import build_iceberg, topk_iceberg
from tagcube.layout import brute_force_arrange, mla_cost, nn_arrange, pwmc_arrange
from tagcube.similarity import similarity_matrix
from tagcube.synth import synth_csv

rng = np.random.default_rng(7)
t0 = time.time()
hits = total = 0
per_n = {}
datasets = []
for seed in range(3):
    csv_text = synth_csv(4, 30, 20_000, 1.1, seed + 100)
    reg = DatasetRegistry()
    rec = reg.ingest(csv_text, name=f"s{seed}")
    datasets.append(reg.bind(rec.id, ["dim1", "dim2", "dim3", "dim4"], ["value"]))

i = 0
for ds in datasets:
    dims = ds.schema.dimensions
    for display in dims:
        for cluster in dims:
            if cluster == display:
                continue
            for k in (4, 6, 8):
                for kind in ("cosine", "tanimoto"):
                    ice = build_iceberg(ds, (display, cluster), "count", None, 150)
                    cloud = topk_iceberg(ice, Filter(), k, dims=(display,))
                    if len(cloud.tags) < 2:
                        continue
                    m = similarity_matrix(ds, cloud, (cluster,), kind, "count", source=ice)
                    n = len(m.tags)
                    optimum = mla_cost(brute_force_arrange(m), m)
                    pw = mla_cost(pwmc_arrange(m, 1000, seed=i), m)
                    i += 1
                    ok = pw <= optimum + 1e-9
                    hits += ok
                    total += 1
                    a, b = per_n.get(n, (0, 0))
                    per_n[n] = (a + ok, b + 1)
print(f"rate={hits}/{total} = {hits/total:.3f} ({time.time()-t0:.1f}s)")
print({n: f"{a}/{b}" for n, (a, b) in sorted(per_n.items())})
