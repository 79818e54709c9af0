"""Probe: criterion 3 speedup ratio and criterion 5 fractions."""
import statistics
import sys
import time

sys.path.insert(0, "src")

from tagcube.bench import bench_layout
from tagcube.cube import Filter
from tagcube.engine import DatasetRegistry
from tagcube.iceberg import build_iceberg, topk_exact, topk_iceberg
from tagcube.synth import synth_csv

# --- criterion 3: per-query latency, iceberg limit 150 vs full group-by
csv_text = synth_csv(4, 50, 100_000, 1.2, 1)
reg = DatasetRegistry()
rec = reg.ingest(csv_text, name="zipf")
ds = reg.bind(rec.id, ["dim1", "dim2", "dim3", "dim4"], ["value"])

t0 = time.time()
ice = build_iceberg(ds, ds.schema.dimensions, "count", None, 150)
print(f"build: {time.time()-t0:.2f}s, cells={ice.full_cell_count}")

ice_times, exact_times = [], []
for q in range(100):
    dim = ds.schema.dimensions[q % 4]
    t0 = time.perf_counter()
    topk_iceberg(ice, Filter(), 9, dims=(dim,))
    ice_times.append(time.perf_counter() - t0)
    t0 = time.perf_counter()
    topk_exact(ds, (dim,), "count", None, Filter(), 9)
    exact_times.append(time.perf_counter() - t0)
med_i = statistics.median(ice_times)
med_e = statistics.median(exact_times)
print(f"criterion3: median iceberg {med_i*1000:.3f}ms, exact {med_e*1000:.3f}ms, "
      f"ratio {med_e/med_i:.1f}x")

# --- criterion 5: 8-dim dataset, NN vs PWMC:1000
csv_text = synth_csv(8, 40, 20_000, 1.1, 2)
reg = DatasetRegistry()
rec = reg.ingest(csv_text, name="eight")
ds8 = reg.bind(rec.id, [f"dim{i}" for i in range(1, 9)], ["value"])
t0 = time.time()
header, rows = bench_layout(ds8, heuristics=("nn", "pwmc:1000"), seed=0)
print(f"bench_layout: {time.time()-t0:.1f}s, rows={len(rows)}")

by_instance = {}
for instance, name, param, cost, ms in rows:
    by_instance.setdefault(instance, {})[name] = (cost, ms)
beat20 = 0
time_violations = 0
for instance, entry in by_instance.items():
    nn_cost, nn_ms = entry["nn"]
    pw_cost, pw_ms = entry["pwmc"]
    if nn_cost > 0 and pw_cost < 0.8 * nn_cost:
        beat20 += 1
    if not (nn_ms < pw_ms):
        time_violations += 1
n_inst = len(by_instance)
print(f"criterion5: instances={n_inst}, beat-by-20% fraction={beat20/n_inst:.3f}, "
      f"time violations={time_violations}")
