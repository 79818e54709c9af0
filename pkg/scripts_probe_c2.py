"""Probe: criterion 2 boundary behaviour across dataset seeds."""
import sys
import time

sys.path.insert(0, "src")

from tagcube.bench import bench_iceberg
from tagcube.engine import DatasetRegistry
from tagcube.synth import synth_csv

for seed in range(int(sys.argv[1]), int(sys.argv[2])):
    t0 = time.time()
    csv_text = synth_csv(4, 50, 100_000, 1.2, seed)
    reg = DatasetRegistry()
    rec = reg.ingest(csv_text, name=f"zipf{seed}")
    ds = reg.bind(rec.id, ["dim1", "dim2", "dim3", "dim4"], ["value"])
    header, rows, build = bench_iceberg(ds)
    bad = []
    worst_fp = worst_fn = 0.0
    qualifying = 0
    for row in rows:
        _, dim, limit, size, rel, fp, fn, _, _ = row
        if rel < 0.75:
            qualifying += 1
            worst_fp = max(worst_fp, fp)
            worst_fn = max(worst_fn, fn)
            if fp >= 0.05 or fn >= 0.05:
                bad.append((dim, limit, size, rel, fp, fn))
    status = "PASS" if not bad else "FAIL"
    print(f"seed={seed} {status} qualifying={qualifying}/80 "
          f"worst_fp={worst_fp:.4f} worst_fn={worst_fn:.4f} "
          f"bad={bad[:3]} ({time.time()-t0:.1f}s)", flush=True)
