import itertools
import random

import numpy as np
import pytest

from morphcheck.adapters import CountingPort, LexiconSentiment, TaxonomyLexical
from morphcheck.core import Dataset, TextInput
from morphcheck.engine import (
    EnumerationMode,
    ScoreCache,
    VerdictSet,
    aggregate,
    count,
    premise_filter,
    render_csv,
    render_json,
    render_markdown,
    run,
    run_suite,
    unrank,
    unrank_array,
)
from morphcheck.errors import EmptyEnumeration, PlanStructureError, RankOutOfBounds
from morphcheck.fixtures import (
    fixture_valence,
    sentiment_transforms,
    small_taxonomy,
    synthetic_reviews,
)
from morphcheck.properties import BooleanPredicate, Ord, ScoreView
from morphcheck.relations import PairwiseSystematicity, ThreeWayTransitivity, bind
from morphcheck.transforms import form_pair

from oracle import naive_systematicity, naive_transitivity, rows_to_csv

S_POS = ScoreView(name="s_pos", extraction="softmax_component", index=1)


def systematicity_plan(transform):
    return PairwiseSystematicity(
        transform=transform, premise=Ord(S_POS, 0, 1), hypothesis=Ord(S_POS, 2, 3)
    )


def transitivity_plan(class_index=2, name="v_hyp"):
    return ThreeWayTransitivity(
        predicate=BooleanPredicate(name=name, class_index=class_index), separator=" "
    )


def mode(shape, **kwargs):
    return EnumerationMode(shape=shape, **kwargs)


class TestCount:
    def test_examples(self):
        assert count(mode("ordered_pairs"), 10605) == 112455420
        assert count(mode("unordered_pairs"), 292) == 42486
        assert count(mode("unordered_pairs"), 292) * 211 == 8964546
        assert count(mode("ordered_triplets"), 10) == 720
        assert count(mode("singles"), 7) == 7

    def test_allow_self(self):
        assert count(mode("ordered_pairs", allow_self=True), 10) == 100
        assert count(mode("unordered_pairs", allow_self=True), 10) == 55
        assert count(mode("ordered_triplets", allow_self=True), 10) == 1000

    def test_too_small(self):
        with pytest.raises(EmptyEnumeration):
            count(mode("ordered_triplets"), 2)

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            EnumerationMode(shape="quads")


def enumerate_reference(shape, k, allow_self):
    idx = range(k)
    if shape == "singles":
        return [(i,) for i in idx]
    if shape == "ordered_pairs":
        return [(i, j) for i in idx for j in idx if allow_self or i != j]
    if shape == "unordered_pairs":
        return [(i, j) for i in idx for j in idx if (i <= j if allow_self else i < j)]
    return [
        (i, j, l)
        for i in idx
        for j in idx
        for l in idx
        if allow_self or len({i, j, l}) == 3
    ]


class TestUnrank:
    def test_worked_examples(self):
        assert unrank(mode("ordered_pairs"), 4, 11) == (3, 2)
        assert unrank(mode("unordered_pairs"), 4, 5) == (2, 3)
        assert unrank(mode("ordered_pairs"), 4, 0) == (0, 1)

    @pytest.mark.parametrize("shape", ["singles", "ordered_pairs", "unordered_pairs", "ordered_triplets"])
    @pytest.mark.parametrize("allow_self", [False, True])
    def test_bijection_small_k(self, shape, allow_self):
        for k in range(3, 13):
            m = mode(shape, allow_self=allow_self)
            total = count(m, k)
            expected = enumerate_reference(shape, k, allow_self)
            assert total == len(expected)
            got = unrank_array(m, k, np.arange(total))
            assert [tuple(row) for row in got] == expected

    def test_large_rank_consistency(self):
        # unranking stays exact far beyond float32 precision territory
        m = mode("ordered_pairs")
        k = 10605
        i, j = unrank(m, k, count(m, k) - 1)
        assert (i, j) == (k - 1, k - 2)

    def test_rank_out_of_bounds(self):
        with pytest.raises(RankOutOfBounds):
            unrank(mode("ordered_pairs"), 4, 12)
        with pytest.raises(RankOutOfBounds):
            unrank(mode("ordered_pairs"), 4, -1)

    def test_unordered_sqrt_correction_is_exact(self):
        # sweep a large k so the float row-solve hits its worst cases
        m = mode("unordered_pairs")
        k = 4000
        total = count(m, k)
        ranks = np.unique(np.concatenate([
            np.arange(0, total, 997),
            np.array([0, 1, total - 2, total - 1]),
        ]))
        rows = unrank_array(m, k, ranks)
        offsets = rows[:, 0] * (k - 1) - rows[:, 0] * (rows[:, 0] - 1) // 2
        recomputed = offsets + (rows[:, 1] - rows[:, 0] - 1)
        assert np.array_equal(recomputed, ranks)
        assert (rows[:, 0] < rows[:, 1]).all()


def sentiment_port():
    return LexiconSentiment(fixture_valence())


class TestRunSystematicity:
    def setup_method(self):
        self.dataset = synthetic_reviews(n=12)
        self.transform = sentiment_transforms()[0]
        self.plan = systematicity_plan(self.transform)
        self.mode = mode("ordered_pairs")

    def test_conservation(self):
        vs = run(self.plan, self.dataset, self.mode, sentiment_port())
        assert vs.total == count(self.mode, len(self.dataset)) == 132
        assert vs.satisfied + vs.violated + vs.vacuous + vs.errors == vs.total

    def test_matches_naive_oracle(self):
        from morphcheck.core import ViewRequest

        vs = run(self.plan, self.dataset, self.mode, sentiment_port())
        sat, viol, vac, per_input = naive_systematicity(
            self.transform, self.dataset, sentiment_port(), ViewRequest(kind="softmax")
        )
        assert (vs.satisfied, vs.violated, vs.vacuous) == (sat, viol, vac)
        report = aggregate(vs, "by_source_input")
        naive_rows = [
            (eid, v, nv - v, 0, 0) for eid, (v, nv) in per_input.items()
        ]
        assert render_csv(report) == rows_to_csv(naive_rows)

    def test_matches_scalar_reference(self):
        vs = run(
            self.plan, self.dataset, self.mode, sentiment_port(), retain_records=True
        )
        cache = ScoreCache()
        port = sentiment_port()
        rng = random.Random(5)
        recorded = {tuple(t): v for t, _, v in vs.records}
        for _ in range(40):
            i, j = rng.sample(range(len(self.dataset)), 2)
            case = bind(self.plan, [self.dataset[i], self.dataset[j]])
            cache.ensure(port, case.scored_requests())
            assert case.evaluate(cache.get).value == recorded[(i, j)]

    def test_parallel_determinism(self):
        reports = []
        for workers in (1, 4, 8):
            vs = run(self.plan, self.dataset, self.mode, sentiment_port(), workers=workers)
            reports.append(render_json(aggregate(vs, "by_source_input")))
        assert reports[0] == reports[1] == reports[2]

    def test_cache_economy(self):
        counting = CountingPort(sentiment_port())
        run(self.plan, self.dataset, self.mode, counting)
        # 12 sources + 12 follow-ups, scored exactly once each
        assert counting.total_invocations == 24
        assert counting.unique_pairs == 24

    def test_suite_shares_cache_across_transforms(self):
        counting = CountingPort(sentiment_port())
        plans = [systematicity_plan(t) for t in sentiment_transforms()]
        vs = run_suite(plans, self.dataset, self.mode, counting)
        # sources scored once in total, plus one follow-up set per transform
        assert counting.total_invocations == 12 + 6 * 12
        assert len(vs.by_group) == 6
        assert vs.total == 6 * 132

    def test_sampling_is_deterministic_subset(self):
        m = mode("ordered_pairs", selection="sample", sample_size=37, sample_seed=9)
        a = run(self.plan, self.dataset, m, sentiment_port())
        b = run(self.plan, self.dataset, m, sentiment_port())
        assert a.total == b.total == 37
        assert (a.satisfied, a.violated, a.vacuous) == (b.satisfied, b.violated, b.vacuous)

    def test_arity_mismatch(self):
        with pytest.raises(PlanStructureError):
            run(self.plan, self.dataset, mode("ordered_triplets"), sentiment_port())

    def test_empty_dataset(self):
        with pytest.raises(EmptyEnumeration):
            run(self.plan, Dataset(entries=()), self.mode, sentiment_port())


class TestRunTransitivity:
    def setup_method(self):
        syn, hyper, dataset = small_taxonomy(n_words=12)
        self.dataset = dataset
        self.closed = TaxonomyLexical(syn, hyper, transitive_closure=True)
        self.open = TaxonomyLexical(syn, hyper, transitive_closure=False)
        self.plan = transitivity_plan()
        self.mode = mode("ordered_triplets")

    def test_closed_taxonomy_never_violates(self):
        vs = run(self.plan, self.dataset, self.mode, self.closed)
        assert vs.violated == 0
        assert vs.total == count(self.mode, 12)

    def test_open_taxonomy_matches_naive(self):
        from morphcheck.core import ViewRequest

        vs = run(self.plan, self.dataset, self.mode, self.open)
        triplets = enumerate_reference("ordered_triplets", 12, allow_self=False)
        _, sat, viol, vac, proportion = naive_transitivity(
            self.dataset, self.open, ViewRequest(kind="softmax"), 2, " ", triplets
        )
        assert (vs.satisfied, vs.violated, vs.vacuous) == (sat, viol, vac)
        assert vs.violation_proportion() == pytest.approx(proportion)

    def test_premise_filter_matches_brute_force(self):
        from morphcheck.core import ViewRequest

        rng = random.Random(3)
        triplets = [
            tuple(self.dataset[i] for i in rng.sample(range(12), 3)) for _ in range(60)
        ]
        survivors = premise_filter(self.plan, triplets, self.open)
        index_triplets = [
            tuple(int(x.id[4:]) for x in trip) for trip in triplets
        ]
        naive_survivors, *_ = naive_transitivity(
            self.dataset, self.open, ViewRequest(kind="softmax"), 2, " ", index_triplets
        )
        got = [tuple(int(x.id[4:]) for x in trip) for trip in survivors]
        assert got == naive_survivors

    def test_pair_cache_economy(self):
        counting = CountingPort(self.closed)
        run(self.plan, self.dataset, self.mode, counting)
        # every ordered pair text scored once; 1320 triplets reuse them
        assert counting.total_invocations == 12 * 11


class TestAggregateAndRender:
    def make_vs(self):
        dataset = synthetic_reviews(n=8)
        plan = systematicity_plan(sentiment_transforms()[1])
        return run(plan, dataset, mode("ordered_pairs"), sentiment_port())

    def test_rows_sorted_by_proportion_then_key(self):
        report = aggregate(self.make_vs(), "by_source_input")
        keys = [(-r.proportion, r.key) for r in report.rows]
        assert keys == sorted(keys)

    def test_zero_denominator_flag(self):
        vs = VerdictSet()
        vs.by_group["only-vacuous"] = type(vs.counters)(vacuous=5)
        report = aggregate(vs, "by_transformation")
        assert report.rows[0].proportion == 0.0
        assert report.rows[0].zero_denominator is True

    def test_unknown_grouping(self):
        with pytest.raises(ValueError):
            aggregate(self.make_vs(), "by_phase_of_moon")

    def test_render_formats_are_stable(self):
        vs = self.make_vs()
        report = aggregate(vs, "by_transformation")
        assert render_json(report) == render_json(report)
        csv_text = render_csv(report)
        assert csv_text.splitlines()[0] == "key,proportion,violated,satisfied,vacuous,errors"
        md = render_markdown(report)
        lines = md.splitlines()
        assert all(len(ln) == len(lines[0]) for ln in lines)  # aligned pipes

    def test_json_proportion_rounded(self):
        import json

        report = aggregate(self.make_vs(), "by_source_input")
        payload = json.loads(render_json(report))
        for row in payload["rows"]:
            assert row["proportion"] == round(row["proportion"], 6)


class TestCaseSink:
    def test_sink_receives_all_cases(self, tmp_path):
        import io
        import json

        dataset = synthetic_reviews(n=6)
        plan = systematicity_plan(sentiment_transforms()[0])
        sink = io.StringIO()
        vs = run(plan, dataset, mode("ordered_pairs"), sentiment_port(), case_sink=sink)
        lines = [json.loads(ln) for ln in sink.getvalue().splitlines()]
        assert len(lines) == vs.total == 30
        verdicts = {ln["verdict"] for ln in lines}
        assert verdicts <= {"satisfied", "violated", "vacuous", "error"}
        assert all(ln["group"] == plan.group_key for ln in lines)
