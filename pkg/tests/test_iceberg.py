import random

import pytest

import oracle
from tagcube.cube import Aggregator, Filter, GroupingMap
from tagcube.fact_store import bind_schema, parse_table
from tagcube.iceberg import IcebergError, build_iceberg, topk_exact, topk_iceberg


def _terms(cloud):
    return [t.term for t in cloud.tags]


def _weights(cloud):
    return {t.term: t.weight for t in cloud.tags}


def _random_dataset(rng, dims=3, card=6, facts=400):
    lines = [",".join([f"d{i}" for i in range(dims)] + ["m"])]
    for _ in range(facts):
        row = [f"v{rng.randrange(card)}" for _ in range(dims)]
        row.append(str(rng.randrange(1, 50)))
        lines.append(",".join(row))
    table = parse_table("\n".join(lines).encode(), ",", True)
    return bind_schema(table, [f"d{i}" for i in range(dims)], ["m"])


class TestBuildIceberg:
    def test_limit_three_on_locations(self, table1_ds):
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=3)
        retained = [addr for addr, _ in ice.cells]
        # Montreal and NewYork tie at 2; both fit, the four 1-count cities do not
        assert retained == [("Paris",), ("Montreal",), ("NewYork",)]
        assert ice.full_cell_count == 7

    def test_limit_covers_everything(self, table1_ds):
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=100)
        assert len(ice.cells) == 7

    def test_limit_one_is_argmax(self, table1_ds):
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=1)
        assert [addr for addr, _ in ice.cells] == [("Paris",)]

    def test_limit_below_one(self, table1_ds):
        with pytest.raises(IcebergError, match="limit"):
            build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=0)

    def test_retained_measures_dominate_discarded(self, table1_ds):
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=3)
        full = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=100)
        kept = {addr for addr, _ in ice.cells}
        kept_min = min(s.count for addr, s in ice.cells)
        dropped_max = max(s.count for addr, s in full.cells if addr not in kept)
        assert kept_min >= dropped_max

    def test_monotone_in_limit(self):
        rng = random.Random(5)
        ds = _random_dataset(rng)
        previous = None
        for limit in (1, 4, 9, 20, 50, 10_000):
            ice = build_iceberg(ds, ["d0", "d1"], Aggregator.SUM, "m", limit)
            retained = [addr for addr, _ in ice.cells]
            if previous is not None:
                assert retained[: len(previous)] == previous
            previous = retained


class TestTopkIceberg:
    def test_matches_exact_top2(self, table1_ds):
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=3)
        cloud = topk_iceberg(ice, Filter(), 2)
        assert _terms(cloud) == ["Paris", "Montreal"]
        assert _weights(cloud) == {"Paris": 3.0, "Montreal": 2.0}

    def test_cannot_exceed_retained(self, table1_ds):
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=1)
        cloud = topk_iceberg(ice, Filter(), 3)
        assert _terms(cloud) == ["Paris"]

    def test_filter_excluding_everything(self, table1_ds):
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=3)
        cloud = topk_iceberg(ice, Filter(dices=(("location", ("Lyon",)),)), 5)
        assert cloud.tags == ()

    def test_slice_aggregates_dimension_away(self, table1_ds):
        ice = build_iceberg(
            table1_ds, ["location", "product"], Aggregator.COUNT, limit=1000
        )
        cloud = topk_iceberg(ice, Filter(slices=(("product", "shoe"),)), 10)
        assert cloud.dimensions == ("location",)
        assert _weights(cloud) == {"Montreal": 2.0, "Paris": 2.0}

    def test_subset_dims_reaggregate(self, table1_ds):
        ice = build_iceberg(
            table1_ds, ["location", "product"], Aggregator.COUNT, limit=1000
        )
        cloud = topk_iceberg(ice, Filter(), 10, dims=("product",))
        assert _weights(cloud) == {"shoe": 4.0, "dress": 4.0, "chair": 2.0, "table": 1.0}

    def test_grouping_maps_apply_before_filters(self, table1_ds):
        gmap = GroupingMap("location", "country", {
            "Montreal": "Canada", "Quebec": "Canada", "Ontario": "Canada",
            "Paris": "France", "Lyon": "France",
            "NewYork": "USA", "Detroit": "USA",
        })
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=1000)
        cloud = topk_iceberg(
            ice, Filter(slices=(("location", "Canada"),)), 5, dims=(), groups=(gmap,)
        )
        # 0-dim grand total of the Canada slice
        assert len(cloud.tags) == 1
        assert cloud.tags[0].weight == 4.0

    def test_filter_dimension_must_exist(self, table1_ds):
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=10)
        with pytest.raises(IcebergError, match="not in iceberg"):
            topk_iceberg(ice, Filter(slices=(("product", "shoe"),)), 3)


class TestTopkExact:
    def test_count_top3_with_tie_break(self, table1_ds):
        cloud = topk_exact(table1_ds, ["location"], Aggregator.COUNT, k=3)
        assert _terms(cloud) == ["Paris", "Montreal", "NewYork"]

    def test_k_covers_everything(self, table1_ds):
        cloud = topk_exact(table1_ds, ["location"], Aggregator.COUNT, k=50)
        assert len(cloud.tags) == 7

    def test_sum_profit_top2(self, table1_ds):
        cloud = topk_exact(table1_ds, ["location"], Aggregator.SUM, "profit", k=2)
        assert _terms(cloud) == ["Quebec", "Montreal"]
        assert _weights(cloud) == {"Quebec": 45.0, "Montreal": 40.0}

    def test_matches_oracle(self, table1_ds, table1_rows):
        cells = oracle.group_value(table1_rows, ["location"], "sum", "profit")
        expected = [oracle.term(a) for a, _ in oracle.topk(cells, 4)]
        cloud = topk_exact(table1_ds, ["location"], Aggregator.SUM, "profit", k=4)
        assert _terms(cloud) == expected


class TestOracleEquivalence:
    def test_full_iceberg_equals_exact_for_every_k(self, table1_ds):
        ice = build_iceberg(
            table1_ds, ["location", "product"], Aggregator.COUNT, limit=10_000
        )
        for k in (1, 3, 7, 50):
            approx = topk_iceberg(ice, Filter(), k)
            exact = topk_exact(table1_ds, ["location", "product"], Aggregator.COUNT, k=k)
            assert _terms(approx) == _terms(exact)
            assert _weights(approx) == _weights(exact)

    def test_randomized_queries_full_retention(self):
        rng = random.Random(99)
        ds = _random_dataset(rng, dims=3, card=5, facts=300)
        aggs = ["count", "sum", "average", "min", "max"]
        for _ in range(30):
            n_dims = rng.randint(1, 3)
            all_dims = ["d0", "d1", "d2"]
            rng.shuffle(all_dims)
            tag_dims = all_dims[:n_dims]
            rest = all_dims[n_dims:]
            slices = ()
            dices = ()
            if rest and rng.random() < 0.5:
                slices = ((rest[0], f"v{rng.randrange(5)}"),)
            if rng.random() < 0.5:
                dim = rng.choice(tag_dims + list(rest[1:]) if len(rest) > 1 else tag_dims)
                dices = ((dim, tuple({f"v{rng.randrange(5)}" for _ in range(2)})),)
            agg = rng.choice(aggs)
            measure = None if agg == "count" else "m"
            filt = Filter(slices=slices, dices=dices)
            union = tag_dims + [d for d in ("d0", "d1", "d2")
                                if d not in tag_dims and
                                (d in [s[0] for s in slices] or d in [x[0] for x in dices])]
            ice = build_iceberg(ds, union, agg, measure, limit=10_000_000)
            k = rng.randint(1, 30)
            approx = topk_iceberg(ice, filt, k, dims=tuple(tag_dims))
            exact = topk_exact(ds, tag_dims, agg, measure, filt, k)
            assert _terms(approx) == _terms(exact)
            for term, w in _weights(approx).items():
                assert w == pytest.approx(_weights(exact)[term], rel=1e-12)

    def test_per_query_work_independent_of_fact_count(self, table1_ds):
        # retained cells bound the work: a tiny iceberg answers from 3 cells
        ice = build_iceberg(table1_ds, ["location"], Aggregator.COUNT, limit=3)
        assert len(ice.cells) == 3
        cloud = topk_iceberg(ice, Filter(), 150)
        assert len(cloud.tags) == 3
