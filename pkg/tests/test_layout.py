import itertools
import random

import numpy as np
import pytest

import oracle
from tagcube.layout import (
    Arrangement,
    HintToken,
    LayoutError,
    brute_force_arrange,
    insert_hints,
    mc_block_arrange,
    mla_cost,
    nn_arrange,
    pwmc_arrange,
)
from tagcube.similarity import SimilarityMatrix
from tagcube.tagcloud import Tag


def _matrix(terms, sims, weights=None):
    """sims: {(a, b): value}; unspecified off-diagonals are zero."""
    n = len(terms)
    values = np.zeros((n, n))
    np.fill_diagonal(values, 1.0)
    index = {t: i for i, t in enumerate(terms)}
    for (a, b), v in sims.items():
        values[index[a], index[b]] = v
        values[index[b], index[a]] = v
    weights = weights or {}
    tags = tuple(Tag(term=t, object=(t,), weight=weights.get(t, 1.0)) for t in terms)
    return SimilarityMatrix(tags=tags, kind="cosine", values=values)


def _random_matrix(rng, n):
    values = rng.uniform(0.0, 1.0, (n, n))
    values = (values + values.T) / 2
    np.fill_diagonal(values, 1.0)
    tags = tuple(
        Tag(term=f"t{i:03d}", object=(f"t{i:03d}",), weight=float(rng.uniform(0, 10)))
        for i in range(n)
    )
    return SimilarityMatrix(tags=tags, kind="cosine", values=values)


def _order(arrangement):
    return [t.term for t in arrangement.order]


THREE = _matrix(["a", "b", "c"], {("a", "b"): 1.0, ("a", "c"): 1.0, ("b", "c"): 0.0})


class TestMlaCost:
    def test_zero_matrix(self):
        m = _matrix(["a", "b", "c"], {})
        m.values[:] = 0.0
        arr = Arrangement(order=m.tags)
        assert mla_cost(arr, m) == 0.0

    def test_adjacent_pair(self):
        m = _matrix(["a", "b"], {("a", "b"): 1.0})
        assert mla_cost(Arrangement(order=m.tags), m) == 1.0

    def test_three_tag_orders(self):
        by_term = {t.term: t for t in THREE.tags}
        abc = Arrangement(order=(by_term["a"], by_term["b"], by_term["c"]))
        bac = Arrangement(order=(by_term["b"], by_term["a"], by_term["c"]))
        assert mla_cost(abc, THREE) == 3.0
        assert mla_cost(bac, THREE) == 2.0

    def test_reversal_invariance(self):
        rng = np.random.default_rng(7)
        m = _random_matrix(rng, 12)
        arr = Arrangement(order=m.tags)
        rev = Arrangement(order=tuple(reversed(m.tags)))
        assert mla_cost(arr, m) == pytest.approx(mla_cost(rev, m), rel=1e-12)

    def test_tag_set_mismatch(self):
        m = _matrix(["a", "b"], {})
        other = _matrix(["a", "x"], {})
        with pytest.raises(LayoutError):
            mla_cost(Arrangement(order=other.tags), m)

    def test_matches_oracle(self):
        rng = np.random.default_rng(11)
        m = _random_matrix(rng, 7)
        arr = Arrangement(order=m.tags)
        weights = {
            (m.tags[i].term, m.tags[j].term): float(m.values[i, j])
            for i in range(7)
            for j in range(i + 1, 7)
        }
        assert mla_cost(arr, m) == pytest.approx(
            oracle.mla_cost(_order(arr), weights), rel=1e-12
        )


class TestNearestNeighbor:
    def test_greedy_chain(self):
        m = _matrix(
            ["a", "b", "c"],
            {("a", "b"): 0.9, ("b", "c"): 0.8, ("a", "c"): 0.1},
            weights={"a": 5.0, "b": 1.0, "c": 1.0},
        )
        assert _order(nn_arrange(m)) == ["a", "b", "c"]

    def test_single_tag(self):
        m = _matrix(["only"], {})
        assert _order(nn_arrange(m)) == ["only"]

    def test_equal_similarities_chain_lexicographically(self):
        m = _matrix(["d", "b", "c", "a"], {})
        m.values[:] = 0.5
        np.fill_diagonal(m.values, 1.0)
        assert _order(nn_arrange(m)) == ["a", "b", "c", "d"]

    def test_start_is_heaviest(self):
        m = _matrix(["a", "b", "c"], {}, weights={"a": 1.0, "b": 9.0, "c": 2.0})
        assert _order(nn_arrange(m))[0] == "b"

    def test_outputs_a_permutation(self):
        rng = np.random.default_rng(13)
        for n in (1, 2, 17, 60):
            m = _random_matrix(rng, n)
            arr = nn_arrange(m)
            assert sorted(_order(arr)) == sorted(t.term for t in m.tags)


class TestPwmc:
    def test_zero_exchanges_is_nn(self):
        rng = np.random.default_rng(17)
        m = _random_matrix(rng, 20)
        assert _order(pwmc_arrange(m, 0, seed=5)) == _order(nn_arrange(m))

    def test_reaches_three_tag_optimum(self):
        arr = pwmc_arrange(THREE, 50, seed=1)
        assert mla_cost(arr, THREE) == 2.0

    def test_deterministic(self):
        rng = np.random.default_rng(19)
        m = _random_matrix(rng, 25)
        assert _order(pwmc_arrange(m, 200, seed=42)) == _order(pwmc_arrange(m, 200, seed=42))

    def test_never_worse_than_nn(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            n = int(rng.integers(2, 40))
            m = _random_matrix(rng, n)
            nn_cost = mla_cost(nn_arrange(m), m)
            for exchanges in (10, 100):
                cost = mla_cost(pwmc_arrange(m, exchanges, seed=7), m)
                assert cost <= nn_cost + 1e-9

    def test_outputs_a_permutation(self):
        rng = np.random.default_rng(29)
        m = _random_matrix(rng, 31)
        arr = pwmc_arrange(m, 500, seed=3)
        assert sorted(_order(arr)) == sorted(t.term for t in m.tags)


class TestMcBlock:
    def test_zero_iterations_is_nn(self):
        rng = np.random.default_rng(31)
        m = _random_matrix(rng, 15)
        assert _order(mc_block_arrange(m, 0, seed=5)) == _order(nn_arrange(m))

    def test_two_tags_never_change(self):
        m = _matrix(["a", "b"], {("a", "b"): 0.7})
        assert _order(mc_block_arrange(m, 100, seed=11)) == _order(nn_arrange(m))

    def test_deterministic(self):
        rng = np.random.default_rng(37)
        m = _random_matrix(rng, 22)
        assert _order(mc_block_arrange(m, 300, seed=9)) == _order(mc_block_arrange(m, 300, seed=9))

    def test_never_worse_than_nn(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            n = int(rng.integers(2, 40))
            m = _random_matrix(rng, n)
            nn_cost = mla_cost(nn_arrange(m), m)
            cost = mla_cost(mc_block_arrange(m, 100, seed=13), m)
            assert cost <= nn_cost + 1e-9


class TestBruteForce:
    def test_three_tag_optimum(self):
        arr = brute_force_arrange(THREE)
        assert mla_cost(arr, THREE) == 2.0

    def test_single_tag(self):
        m = _matrix(["x"], {})
        assert _order(brute_force_arrange(m)) == ["x"]

    def test_zero_matrix_breaks_ties_lexicographically(self):
        m = _matrix(["c", "a", "b"], {})
        m.values[:] = 0.0
        arr = brute_force_arrange(m)
        assert _order(arr) == ["a", "b", "c"]
        assert mla_cost(arr, m) == 0.0

    def test_too_many_tags(self):
        rng = np.random.default_rng(43)
        with pytest.raises(LayoutError, match="capped"):
            brute_force_arrange(_random_matrix(rng, 10))

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(47)
        for n in (2, 3, 4, 5):
            m = _random_matrix(rng, n)
            weights = {
                (m.tags[i].term, m.tags[j].term): float(m.values[i, j])
                for i, j in itertools.combinations(range(n), 2)
            }
            expected_cost, _ = oracle.best_arrangement([t.term for t in m.tags], weights)
            arr = brute_force_arrange(m)
            assert mla_cost(arr, m) == pytest.approx(expected_cost, rel=1e-12)

    def test_heuristics_never_beat_it(self):
        rng = np.random.default_rng(53)
        for _ in range(15):
            n = int(rng.integers(2, 9))
            m = _random_matrix(rng, n)
            optimum = mla_cost(brute_force_arrange(m), m)
            assert mla_cost(nn_arrange(m), m) >= optimum - 1e-9
            assert mla_cost(pwmc_arrange(m, 100, seed=1), m) >= optimum - 1e-9
            assert mla_cost(mc_block_arrange(m, 100, seed=1), m) >= optimum - 1e-9


class TestInsertHints:
    def test_glued_above_threshold(self):
        m = _matrix(["a", "b"], {("a", "b"): 1.0})
        hinted = insert_hints(Arrangement(order=m.tags), m)
        kinds = [e for e in hinted.entries if isinstance(e, HintToken)]
        assert kinds == [HintToken.GLUED]

    def test_zero_matrix_is_fully_permutable(self):
        m = _matrix(["a", "b", "c"], {})
        m.values[:] = 0.0
        hinted = insert_hints(Arrangement(order=m.tags), m)
        tokens = [e for e in hinted.entries if isinstance(e, HintToken)]
        assert tokens == [HintToken.PERMUTABLE, HintToken.PERMUTABLE]

    def test_middling_similarity_gets_no_token(self):
        m = _matrix(["a", "b"], {("a", "b"): 0.5})
        hinted = insert_hints(Arrangement(order=m.tags), m)
        assert all(not isinstance(e, HintToken) for e in hinted.entries)

    def test_glued_wins_conflicts(self):
        # a 2-tag pair is always transposition-neutral; with similarity at
        # the glue threshold the GLUED branch must win over PERMUTABLE
        m = _matrix(["a", "b"], {("a", "b"): 1.0})
        hinted = insert_hints(Arrangement(order=m.tags), m)
        tokens = [e for e in hinted.entries if isinstance(e, HintToken)]
        assert tokens == [HintToken.GLUED]

    def test_token_positions_are_legal(self):
        rng = np.random.default_rng(59)
        m = _random_matrix(rng, 12)
        hinted = insert_hints(Arrangement(order=m.tags), m)
        entries = hinted.entries
        assert not isinstance(entries[0], HintToken)
        assert not isinstance(entries[-1], HintToken)
        for a, b in zip(entries, entries[1:]):
            assert not (isinstance(a, HintToken) and isinstance(b, HintToken))

    def test_permutable_swap_is_cost_neutral(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            n = int(rng.integers(3, 10))
            m = _random_matrix(rng, n)
            # sprinkle exact zeros so some PERMUTABLE pairs can appear
            mask = rng.uniform(0, 1, (n, n)) < 0.6
            values = np.where(mask | mask.T, 0.0, m.values)
            np.fill_diagonal(values, 1.0)
            m = SimilarityMatrix(tags=m.tags, kind="cosine", values=values)
            arr = nn_arrange(m)
            hinted = insert_hints(arr, m)
            base_cost = mla_cost(arr, m)
            order = list(arr.order)
            position = 0
            for entry in hinted.entries:
                if entry is HintToken.PERMUTABLE:
                    swapped = list(order)
                    swapped[position - 1], swapped[position] = (
                        swapped[position], swapped[position - 1],
                    )
                    cost = mla_cost(Arrangement(order=tuple(swapped)), m)
                    assert cost == pytest.approx(base_cost, abs=1e-9)
                elif not isinstance(entry, HintToken):
                    position += 1

    def test_threshold_validation(self):
        m = _matrix(["a", "b"], {})
        with pytest.raises(LayoutError):
            insert_hints(Arrangement(order=m.tags), m, 0.5, 0.6)

    def test_entries_carry_buckets(self):
        m = _matrix(["a", "b"], {}, weights={"a": 1.0, "b": 10.0})
        hinted = insert_hints(Arrangement(order=m.tags), m, bucket_count=7)
        tags = [e for e in hinted.entries if not isinstance(e, HintToken)]
        assert {e.term: e.bucket for e in tags} == {"a": 1, "b": 7}
