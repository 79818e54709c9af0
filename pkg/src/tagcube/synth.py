"""Synthetic fact tables with Zipf-distributed dimension values.

Desk-scale stand-ins for the large public datasets used to benchmark the
engine: each dimension draws independently from a Zipf(s) distribution
over its own dictionary, plus one integer measure column. Output is
deterministic for a given seed.
"""

from __future__ import annotations

import csv
import io

import numpy as np

MEASURE_COLUMN = "value"


def zipf_weights(cardinality: int, s: float) -> np.ndarray:
    """P(rank r) proportional to 1/r^s over ranks 1..cardinality."""
    ranks = np.arange(1, cardinality + 1, dtype=float)
    w = ranks ** (-float(s))
    return w / w.sum()


def synth_table(dims: int, cardinalities, facts: int, zipf_s: float, seed: int):
    """(columns, numpy code matrix, measure array) for a synthetic table."""
    if dims < 1 or facts < 1:
        raise ValueError("dims and facts must be positive")
    if isinstance(cardinalities, int):
        cardinalities = [cardinalities] * dims
    cardinalities = list(cardinalities)
    if len(cardinalities) != dims:
        raise ValueError(f"expected {dims} cardinalities, got {len(cardinalities)}")
    if any(c < 1 for c in cardinalities):
        raise ValueError("cardinalities must be positive")
    rng = np.random.default_rng(seed)
    codes = np.empty((dims, facts), dtype=np.int64)
    for i, card in enumerate(cardinalities):
        codes[i] = rng.choice(card, size=facts, p=zipf_weights(card, zipf_s))
    measures = rng.integers(1, 1001, size=facts)
    columns = [f"dim{i + 1}" for i in range(dims)] + [MEASURE_COLUMN]
    return columns, codes, measures


def value_label(code: int, cardinality: int) -> str:
    # zero-padded so lexicographic order equals rank order
    width = len(str(cardinality))
    return f"v{code + 1:0{width}d}"


def synth_csv(dims: int, cardinalities, facts: int, zipf_s: float, seed: int) -> str:
    """Deterministic CSV text: dim1..dimN columns plus one measure."""
    columns, codes, measures = synth_table(dims, cardinalities, facts, zipf_s, seed)
    if isinstance(cardinalities, int):
        cardinalities = [cardinalities] * dims
    labels = [
        [value_label(c, card) for c in range(card)] for card in cardinalities
    ]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in range(facts):
        writer.writerow(
            [labels[d][codes[d, row]] for d in range(dims)] + [int(measures[row])]
        )
    return out.getvalue()
