import pytest

from morphcheck import dotparse
from morphcheck.adapters import LexiconSentiment
from morphcheck.core import TextInput, ViewRequest
from morphcheck.errors import PlanStructureError
from morphcheck.fixtures import SENTIMENT_VALENCE
from morphcheck.properties import BooleanPredicate, Eq, Ord, ScoreView, Verdict
from morphcheck.relations import (
    ConcreteCase,
    EvaluationGraph,
    GraphEdge,
    GraphNode,
    PairwiseCompositionality,
    PairwiseSystematicity,
    SingleInput,
    ThreeWayTransitivity,
    bind,
    compile_plan,
    emit_dot,
)
from morphcheck.transforms import ConcatSentence, instantiate_pair

S_POS = ScoreView(name="s_pos", extraction="softmax_component", index=1)
CONCAT = ConcatSentence("Thank you.", "start")


def single_plan():
    return SingleInput(transform=CONCAT, prop=Eq(0, 1))


def systematicity_plan():
    return PairwiseSystematicity(
        transform=CONCAT, premise=Ord(S_POS, 0, 1), hypothesis=Ord(S_POS, 2, 3)
    )


def compositionality_plan(monotonicity="down"):
    return PairwiseCompositionality(
        hidden_view=ViewRequest(kind="hidden", layer=-2),
        hidden_score=ScoreView(name="probe", extraction="probe", probe=lambda z: 0.5),
        output_score=ScoreView(name="entail", extraction="softmax_component", index=0),
        monotonicity=monotonicity,
    )


def transitivity_plan():
    return ThreeWayTransitivity(predicate=BooleanPredicate(name="v_hyp", class_index=2))


class TestCompile:
    def test_single_input_census(self):
        g = compile_plan(single_plan())
        assert len(g.text_nodes()) == 2
        assert len(g.numeric_nodes()) == 2
        labels = [e.label for e in g.edges]
        assert labels.count("T") == 1 and labels.count("f") == 2
        assert len(g.property_nodes) == 2

    def test_systematicity_census(self):
        g = compile_plan(systematicity_plan())
        assert len(g.text_nodes()) == 4
        assert len(g.numeric_nodes()) == 4
        labels = [e.label for e in g.edges]
        assert labels.count("T") == 2 and labels.count("f") == 4
        assert len(g.property_nodes) == 4

    def test_compositionality_census(self):
        g = compile_plan(compositionality_plan())
        assert len(g.text_nodes()) == 2
        assert len(g.numeric_nodes()) == 4
        labels = [e.label for e in g.edges]
        assert labels.count("T") == 0
        assert labels.count("f") == 2 and labels.count("g") == 2
        assert len(g.property_nodes) == 4

    def test_transitivity_census(self):
        g = compile_plan(transitivity_plan())
        assert len(g.text_nodes()) == 6
        assert sum(1 for n in g.nodes if n.source) == 3
        assert len(g.numeric_nodes()) == 3
        labels = [e.label for e in g.edges]
        assert labels.count("T") == 6 and labels.count("f") == 3
        # each composed-pair node receives exactly two T edges
        incoming = {}
        for e in g.edges:
            if e.label == "T":
                incoming[e.dst] = incoming.get(e.dst, 0) + 1
        assert sorted(incoming.values()) == [2, 2, 2]

    def test_unknown_plan(self):
        with pytest.raises(PlanStructureError):
            compile_plan(object())


class TestGraphValidation:
    def test_t_edge_must_be_textual(self):
        with pytest.raises(PlanStructureError):
            EvaluationGraph(
                nodes=(GraphNode("x", "text", source=True), GraphNode("y", "numeric")),
                edges=(GraphEdge("x", "y", "T"),),
                property_nodes=(),
            )

    def test_f_edge_must_end_numeric(self):
        with pytest.raises(PlanStructureError):
            EvaluationGraph(
                nodes=(GraphNode("x", "text", source=True), GraphNode("xp", "text")),
                edges=(GraphEdge("x", "xp", "f"),),
                property_nodes=(),
            )

    def test_property_attaches_numeric_only(self):
        with pytest.raises(PlanStructureError):
            EvaluationGraph(
                nodes=(GraphNode("x", "text", source=True),),
                edges=(),
                property_nodes=("x",),
            )

    def test_source_must_be_textual(self):
        with pytest.raises(PlanStructureError):
            EvaluationGraph(
                nodes=(GraphNode("y", "numeric", source=True),),
                edges=(),
                property_nodes=(),
            )


class TestDot:
    @pytest.mark.parametrize(
        "plan_factory",
        [single_plan, systematicity_plan, compositionality_plan, transitivity_plan],
    )
    def test_round_trip(self, plan_factory):
        g = compile_plan(plan_factory())
        dot = emit_dot(g)
        parsed = dotparse.parse(dot)
        # every structural node present, with the right shape
        for n in g.nodes:
            shape = "circle" if n.kind == "text" else "square"
            assert parsed.nodes[n.name]["shape"] == shape
            assert (parsed.nodes[n.name].get("fillcolor") == "lightgray") == n.source
        # directed labeled edges survive
        labeled = {(s, d, a.get("label")) for s, d, a in parsed.edges if "label" in a}
        assert labeled == {(e.src, e.dst, e.label) for e in g.edges}
        # property links are dashed, undirected, and attach to the P node
        links = [(s, d, a) for s, d, a in parsed.edges if "label" not in a]
        assert {s for s, d, a in links} == set(g.property_nodes)
        for s, d, a in links:
            assert d == "P" and a["style"] == "dashed" and a["dir"] == "none"

    def test_emit_is_deterministic(self):
        g = compile_plan(transitivity_plan())
        assert emit_dot(g) == emit_dot(g)


def score_with(port):
    def score(text, view):
        return port.score_batch([text], [view])[0][0]

    return score


class TestBind:
    def test_arity_mismatch(self):
        with pytest.raises(PlanStructureError):
            bind(systematicity_plan(), [TextInput(id="a", text="x")])

    def test_single_input(self):
        case = bind(single_plan(), [TextInput(id="a", text="Nice and fun.")])
        assert len(case.texts) == 2
        assert case.texts[1].text == "Thank you. Nice and fun."
        assert case.premise is None
        port = LexiconSentiment(SENTIMENT_VALENCE)
        assert case.evaluate(score_with(port)) in (Verdict.SATISFIED, Verdict.VIOLATED)

    def test_systematicity_verdicts(self):
        port = LexiconSentiment(SENTIMENT_VALENCE)
        plan = systematicity_plan()
        bad = TextInput(id="b", text="A terrible waste.")
        good = TextInput(id="g", text="A wonderful delight.")
        # premise true (bad < good), monotone stub keeps the order: satisfied
        assert bind(plan, [bad, good]).evaluate(score_with(port)) is Verdict.SATISFIED
        # premise false the other way round: vacuous
        assert bind(plan, [good, bad]).evaluate(score_with(port)) is Verdict.VACUOUS

    def test_transitivity_slots(self):
        plan = ThreeWayTransitivity(
            predicate=BooleanPredicate(name="v", class_index=0), separator="<sep>"
        )
        xs = [TextInput(id=f"w{i}", text=f"word{i}") for i in range(3)]
        case = bind(plan, xs)
        assert [t.text for t in case.texts[3:]] == [
            "word0<sep>word1",
            "word1<sep>word2",
            "word0<sep>word2",
        ]
        # slots 0, 1 feed the premise; slot 2 the hypothesis
        assert [case.texts[i].id for i, _ in case.slot_map] == [
            "(w0,w1)",
            "(w1,w2)",
            "(w0,w2)",
        ]

    def test_compositionality_monotonicity_flip(self):
        from morphcheck.core import ScoreVector

        x1 = instantiate_pair("There was no ⟨x⟩.", "tree", "cherry tree")
        x2 = instantiate_pair("There was no ⟨x⟩.", "dog", "poodle")
        probe_view = ScoreView(name="p", extraction="scalar_passthrough")
        entail = ScoreView(name="e", extraction="softmax_component", index=0)
        for monotonicity, expected in (("down", Verdict.SATISFIED), ("up", Verdict.VIOLATED)):
            plan = PairwiseCompositionality(
                hidden_view=ViewRequest(kind="hidden", layer=-2),
                hidden_score=probe_view,
                output_score=entail,
                monotonicity=monotonicity,
            )
            case = bind(plan, [x1, x2])
            hidden = {x1.id: 0.2, x2.id: 0.8}

            def scorer(text, view):
                if view.kind == "hidden":
                    return ScoreVector((hidden[text.id],), "scalar")
                # output entail-score also ordered x1 < x2
                return ScoreVector((0.3, 0.7) if text.id == x1.id else (0.6, 0.4), "softmax")

            assert case.evaluate(scorer) is expected

    def test_compositionality_requires_spans(self):
        plan = compositionality_plan()
        with pytest.raises(PlanStructureError):
            bind(plan, [TextInput(id="a", text="x"), TextInput(id="b", text="y")])

    def test_hidden_views_carry_entry_spans(self):
        plan = compositionality_plan()
        x1 = instantiate_pair("no ⟨x⟩.", "tree", "cherry tree")
        x2 = instantiate_pair("no ⟨x⟩.", "dog", "poodle")
        case = bind(plan, [x1, x2])
        hv1 = case.slot_map[0][1]
        assert hv1.kind == "hidden" and hv1.spans == x1.spans
        assert case.slot_map[1][1].spans == x2.spans

    def test_scored_requests_deduplicate(self):
        plan = systematicity_plan()
        x = TextInput(id="a", text="Same text.")
        y = TextInput(id="b", text="Same text.")
        case = bind(plan, [x, y])
        # x and y share text, and so do their follow-ups: only 2 unique requests
        assert len(case.scored_requests()) == 2


class TestPlanValidation:
    def test_bad_connective(self):
        with pytest.raises(PlanStructureError):
            PairwiseSystematicity(
                transform=CONCAT,
                premise=Ord(S_POS, 0, 1),
                hypothesis=Ord(S_POS, 2, 3),
                connective="xor",
            )

    def test_premise_slot_discipline(self):
        with pytest.raises(PlanStructureError):
            PairwiseSystematicity(
                transform=CONCAT, premise=Ord(S_POS, 0, 2), hypothesis=Ord(S_POS, 2, 3)
            )

    def test_hypothesis_slot_discipline(self):
        with pytest.raises(PlanStructureError):
            PairwiseSystematicity(
                transform=CONCAT, premise=Ord(S_POS, 0, 1), hypothesis=Ord(S_POS, 0, 3)
            )

    def test_bad_monotonicity(self):
        with pytest.raises(PlanStructureError):
            compositionality_plan("sideways")

    def test_hidden_view_kind_enforced(self):
        with pytest.raises(PlanStructureError):
            PairwiseCompositionality(
                hidden_view=ViewRequest(kind="softmax"),
                hidden_score=ScoreView(name="p", extraction="scalar_passthrough"),
                output_score=S_POS,
            )
