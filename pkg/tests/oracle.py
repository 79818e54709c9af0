"""Independent reference computations for the test suite.

Everything in this module re-derives expected values from first principles
with plain loops over raw rows. It imports nothing from the package under
test; the point is a brute-force cross-check, not speed. Tests freeze the
values this oracle produces and also call it directly for randomized
comparisons.
"""

from __future__ import annotations

import csv
import io
import itertools
import math

DASH = "–"  # joins attribute values into a display term


def parse_csv(text, delimiter=","):
    """Return (columns, rows) where rows are lists of raw strings."""
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    rows = [row for row in reader if row]
    return rows[0], rows[1:]


def rows_as_dicts(columns, rows):
    return [dict(zip(columns, row)) for row in rows]


def measure_value(raw):
    """Numeric value of a measure field, tolerating a trailing dollar sign."""
    text = raw.strip()
    if text.endswith("$"):
        text = text[:-1].strip()
    return float(text)


def select(rows, slices=None, dices=None):
    """Rows surviving equality bindings and per-dimension value sets."""
    out = []
    for row in rows:
        if slices and any(row[d] != v for d, v in slices.items()):
            continue
        if dices and any(row[d] not in vals for d, vals in dices.items()):
            continue
        out.append(row)
    return out


def regroup(rows, dimension, mapping):
    """Copy of rows with one dimension coarsened through a value mapping."""
    out = []
    for row in rows:
        row = dict(row)
        row[dimension] = mapping.get(row[dimension], row[dimension])
        out.append(row)
    return out


def group_value(rows, dims, agg, measure=None):
    """Full group-by: address tuple -> aggregated value."""
    buckets = {}
    for row in rows:
        addr = tuple(row[d] for d in dims)
        buckets.setdefault(addr, []).append(row)
    cells = {}
    for addr, members in buckets.items():
        if agg == "count":
            cells[addr] = float(len(members))
            continue
        vals = [measure_value(m[measure]) for m in members]
        if agg == "sum":
            cells[addr] = sum(vals)
        elif agg == "average":
            cells[addr] = sum(vals) / len(vals)
        elif agg == "min":
            cells[addr] = min(vals)
        elif agg == "max":
            cells[addr] = max(vals)
        else:
            raise ValueError(agg)
    return cells


def topk(cells, k, tie="addr"):
    """Top-k cells, largest measure first, ties by address or term."""
    if tie == "addr":
        key = lambda kv: (-kv[1], kv[0])
    else:
        key = lambda kv: (-kv[1], term(kv[0]))
    return sorted(cells.items(), key=key)[:k]


def term(addr):
    return DASH.join(addr)


def cloud_terms(cells, k, tie="addr"):
    return {term(addr): w for addr, w in topk(cells, k, tie=tie)}


def entropy(weights):
    total = sum(weights)
    h = 0.0
    for w in weights:
        if w > 0:
            p = w / total
            h -= p * math.log(p)
    return h


def relative_entropy(weights):
    return entropy(weights) / math.log(len(weights))


def fp_index(approx, exact):
    """approx/exact are term -> weight maps."""
    wrong = [w for t, w in approx.items() if t not in exact]
    return (max(wrong) if wrong else 0.0) / max(approx.values())


def fn_index(approx, exact):
    missing = [w for t, w in exact.items() if t not in approx]
    return (max(missing) if missing else 0.0) / max(exact.values())


def subcuboid_vector(rows, tag_dims, tag_addr, cluster_dims, agg, measure=None):
    """Cluster-dimension cells of the subcuboid fixed at one tag address."""
    matching = [r for r in rows if tuple(r[d] for d in tag_dims) == tuple(tag_addr)]
    return group_value(matching, cluster_dims, agg, measure)


def cosine(u, v):
    """u, v are sparse dict vectors over a shared axis."""
    dot = sum(u.get(a, 0.0) * v.get(a, 0.0) for a in set(u) | set(v))
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def tanimoto(u, v):
    dot = sum(u.get(a, 0.0) * v.get(a, 0.0) for a in set(u) | set(v))
    denom = sum(x * x for x in u.values()) + sum(x * x for x in v.values()) - dot
    if denom == 0.0:
        return 0.0
    return dot / denom


def jaccard(u, v):
    su = {a for a, x in u.items() if x > 0}
    sv = {a for a, x in v.items() if x > 0}
    union = su | sv
    if not union:
        return 1.0
    return len(su & sv) / len(union)


def mla_cost(order, weights):
    """order: list of labels; weights: (label, label) -> similarity."""
    cost = 0.0
    for i, p in enumerate(order):
        for j in range(i + 1, len(order)):
            q = order[j]
            w = weights.get((p, q), weights.get((q, p), 0.0))
            cost += max(w, 0.0) * (j - i)
    return cost


def best_arrangement(labels, weights):
    """Exhaustive minimum-cost order; ties to the lexicographically least."""
    best = None
    best_cost = None
    for perm in itertools.permutations(sorted(labels)):
        c = mla_cost(perm, weights)
        if best_cost is None or c < best_cost:
            best, best_cost = perm, c
    return best_cost, list(best)
