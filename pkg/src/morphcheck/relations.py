"""The four relation classes compiled to evaluation graphs, the DOT emitter
for the graphical notation, and the binding of concrete source tuples.

Graph shapes (textual nodes are circles, numeric nodes squares, source nodes
shaded grey, edges labeled f/g/T, property links dashed):

  single_input             : x -T-> x',  x -f-> y, x' -f-> y';   P ~ {y, y'}
  pairwise_systematicity   : two copies of the above sharing P over 4 squares
  pairwise_compositionality: x -f-> z -g-> y for both inputs;    P ~ {z1,z2,y1,y2}
  three_way_transitivity   : 3 sources pair-combined; each pair node has two
                             incoming T edges;                    P ~ {y12,y23,y13}
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

from .core import ScoreVector, TextInput, ViewRequest
from .errors import PlanStructureError
from .properties import (
    And,
    BooleanPredicate,
    Iff,
    Not,
    Ord,
    Pred,
    PropertyExpr,
    ScoreView,
    Verdict,
    verdict,
)
from .transforms import TransformSpec, apply, form_pair

__all__ = [
    "SingleInput",
    "PairwiseSystematicity",
    "PairwiseCompositionality",
    "ThreeWayTransitivity",
    "GraphNode",
    "GraphEdge",
    "EvaluationGraph",
    "ConcreteCase",
    "compile_plan",
    "emit_dot",
    "bind",
]

SOFTMAX_VIEW = ViewRequest(kind="softmax")


@dataclass(frozen=True)
class GraphNode:
    name: str
    kind: str  # text | numeric
    source: bool = False


@dataclass(frozen=True)
class GraphEdge:
    src: str
    dst: str
    label: str  # f | g | T


@dataclass(frozen=True)
class EvaluationGraph:
    nodes: Tuple[GraphNode, ...]
    edges: Tuple[GraphEdge, ...]
    property_nodes: Tuple[str, ...]

    def __post_init__(self):
        by_name = {n.name: n for n in self.nodes}
        if len(by_name) != len(self.nodes):
            raise PlanStructureError("duplicate node names")
        for e in self.edges:
            src, dst = by_name[e.src], by_name[e.dst]
            if e.label == "T" and not (src.kind == "text" and dst.kind == "text"):
                raise PlanStructureError("T edges must go text -> text")
            if e.label in ("f", "g") and dst.kind != "numeric":
                raise PlanStructureError("f/g edges must end on a numeric node")
        for n in self.nodes:
            if n.source and n.kind != "text":
                raise PlanStructureError("source nodes must be textual")
        for name in self.property_nodes:
            if by_name[name].kind != "numeric":
                raise PlanStructureError("P attaches to numeric nodes only")

    def text_nodes(self) -> Tuple[GraphNode, ...]:
        return tuple(n for n in self.nodes if n.kind == "text")

    def numeric_nodes(self) -> Tuple[GraphNode, ...]:
        return tuple(n for n in self.nodes if n.kind == "numeric")


@dataclass(frozen=True)
class SingleInput:
    """One source input, one follow-up via T, one property over (y, y')."""

    transform: TransformSpec
    prop: PropertyExpr  # over slots 0 = y, 1 = y'
    view: ViewRequest = SOFTMAX_VIEW
    arity = 1

    @property
    def group_key(self) -> str:
        return self.transform.label


@dataclass(frozen=True)
class PairwiseSystematicity:
    """Two sources transformed by the same T; premise over the source outputs,
    hypothesis over the follow-up outputs."""

    transform: TransformSpec
    premise: PropertyExpr  # over slots 0 = y1, 1 = y2
    hypothesis: PropertyExpr  # over slots 2 = y1', 3 = y2'
    connective: str = "implies"
    view: ViewRequest = SOFTMAX_VIEW
    arity = 2

    def __post_init__(self):
        if self.connective not in ("implies", "iff"):
            raise PlanStructureError(f"bad connective {self.connective!r}")
        if not self.premise.slots() <= {0, 1}:
            raise PlanStructureError("premise may only use slots 0 and 1")
        if not self.hypothesis.slots() <= {2, 3}:
            raise PlanStructureError("hypothesis may only use slots 2 and 3")

    @property
    def group_key(self) -> str:
        return self.transform.label


@dataclass(frozen=True)
class PairwiseCompositionality:
    """No T: the premise compares hidden-layer scores of the two inputs, the
    hypothesis compares their final outputs. Upward-monotone contexts negate
    the hypothesis."""

    hidden_view: ViewRequest
    hidden_score: ScoreView
    output_score: ScoreView
    monotonicity: str = "down"
    connective: str = "iff"
    output_view: ViewRequest = SOFTMAX_VIEW
    group: str = ""
    arity = 2

    def __post_init__(self):
        if self.monotonicity not in ("up", "down"):
            raise PlanStructureError("monotonicity must be 'up' or 'down'")
        if self.connective not in ("implies", "iff"):
            raise PlanStructureError(f"bad connective {self.connective!r}")
        if self.hidden_view.kind != "hidden":
            raise PlanStructureError("hidden_view must be a hidden view")

    @property
    def group_key(self) -> str:
        return self.group or f"compositionality[{self.monotonicity}]"


@dataclass(frozen=True)
class ThreeWayTransitivity:
    """Three sources pair-combined; if the prediction holds on (1,2) and
    (2,3) it must hold on (1,3)."""

    predicate: BooleanPredicate
    separator: str = " "
    view: ViewRequest = SOFTMAX_VIEW
    arity = 3

    @property
    def group_key(self) -> str:
        return self.predicate.name


RelationPlan = (SingleInput, PairwiseSystematicity, PairwiseCompositionality, ThreeWayTransitivity)


def compile_plan(plan) -> EvaluationGraph:
    """Compile a relation plan to its evaluation-graph shape."""
    if isinstance(plan, SingleInput):
        return EvaluationGraph(
            nodes=(
                GraphNode("x", "text", source=True),
                GraphNode("xp", "text"),
                GraphNode("y", "numeric"),
                GraphNode("yp", "numeric"),
            ),
            edges=(
                GraphEdge("x", "xp", "T"),
                GraphEdge("x", "y", "f"),
                GraphEdge("xp", "yp", "f"),
            ),
            property_nodes=("y", "yp"),
        )
    if isinstance(plan, PairwiseSystematicity):
        return EvaluationGraph(
            nodes=(
                GraphNode("x1", "text", source=True),
                GraphNode("x2", "text", source=True),
                GraphNode("x1p", "text"),
                GraphNode("x2p", "text"),
                GraphNode("y1", "numeric"),
                GraphNode("y2", "numeric"),
                GraphNode("y1p", "numeric"),
                GraphNode("y2p", "numeric"),
            ),
            edges=(
                GraphEdge("x1", "x1p", "T"),
                GraphEdge("x2", "x2p", "T"),
                GraphEdge("x1", "y1", "f"),
                GraphEdge("x2", "y2", "f"),
                GraphEdge("x1p", "y1p", "f"),
                GraphEdge("x2p", "y2p", "f"),
            ),
            property_nodes=("y1", "y2", "y1p", "y2p"),
        )
    if isinstance(plan, PairwiseCompositionality):
        return EvaluationGraph(
            nodes=(
                GraphNode("x1", "text", source=True),
                GraphNode("x2", "text", source=True),
                GraphNode("z1", "numeric"),
                GraphNode("z2", "numeric"),
                GraphNode("y1", "numeric"),
                GraphNode("y2", "numeric"),
            ),
            edges=(
                GraphEdge("x1", "z1", "f"),
                GraphEdge("x2", "z2", "f"),
                GraphEdge("z1", "y1", "g"),
                GraphEdge("z2", "y2", "g"),
            ),
            property_nodes=("z1", "z2", "y1", "y2"),
        )
    if isinstance(plan, ThreeWayTransitivity):
        return EvaluationGraph(
            nodes=(
                GraphNode("x1", "text", source=True),
                GraphNode("x2", "text", source=True),
                GraphNode("x3", "text", source=True),
                GraphNode("x12", "text"),
                GraphNode("x13", "text"),
                GraphNode("x23", "text"),
                GraphNode("y12", "numeric"),
                GraphNode("y13", "numeric"),
                GraphNode("y23", "numeric"),
            ),
            edges=(
                GraphEdge("x1", "x12", "T"),
                GraphEdge("x2", "x12", "T"),
                GraphEdge("x1", "x13", "T"),
                GraphEdge("x3", "x13", "T"),
                GraphEdge("x2", "x23", "T"),
                GraphEdge("x3", "x23", "T"),
                GraphEdge("x12", "y12", "f"),
                GraphEdge("x13", "y13", "f"),
                GraphEdge("x23", "y23", "f"),
            ),
            property_nodes=("y12", "y13", "y23"),
        )
    raise PlanStructureError(f"unknown plan type {type(plan).__name__}")


def emit_dot(g: EvaluationGraph, name: str = "relation") -> str:
    """Byte-deterministic DOT rendering of an evaluation graph.

    The floating property label is rendered as an explicit node "P" with
    dashed undirected links to the attached numeric nodes.
    """
    lines = [f"digraph {name} {{"]
    lines.append('"P" [shape=plaintext];')
    for node in sorted(g.nodes, key=lambda n: n.name):
        shape = "circle" if node.kind == "text" else "square"
        attrs = [f"shape={shape}"]
        if node.source:
            attrs.append("style=filled")
            attrs.append("fillcolor=lightgray")
        lines.append(f'"{node.name}" [{", ".join(attrs)}];')
    for edge in sorted(g.edges, key=lambda e: (e.src, e.dst, e.label)):
        lines.append(f'"{edge.src}" -> "{edge.dst}" [label="{edge.label}"];')
    for name_ in sorted(g.property_nodes):
        lines.append(f'"{name_}" -> "P" [style=dashed, dir=none];')
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ConcreteCase:
    """One fully materialized test case: every textual node's text, which
    (text, view) pair feeds each property slot, and the verdict recipe."""

    texts: Tuple[TextInput, ...]  # all textual nodes, sources first
    slot_map: Tuple[Tuple[int, ViewRequest], ...]  # slot -> (text idx, view)
    premise: Optional[PropertyExpr]
    hypothesis: PropertyExpr
    connective: str
    group_key: str

    def scored_requests(self):
        """Unique (text, view) pairs the model must answer."""
        seen = {}
        for text_idx, view in self.slot_map:
            key = (self.texts[text_idx].text, view.fingerprint())
            seen.setdefault(key, (self.texts[text_idx], view))
        return list(seen.values())

    def evaluate(self, score: Callable[[TextInput, ViewRequest], ScoreVector]) -> Verdict:
        outputs = [score(self.texts[i], view) for i, view in self.slot_map]
        return verdict(self.premise, self.hypothesis, self.connective, outputs)


def bind(plan, sources: Sequence[TextInput]) -> ConcreteCase:
    """Materialize follow-ups, view requests and the verdict recipe for one
    tuple of source inputs."""
    if len(sources) != plan.arity:
        raise PlanStructureError(
            f"{type(plan).__name__} needs {plan.arity} sources, got {len(sources)}"
        )
    if isinstance(plan, SingleInput):
        x = sources[0]
        xp = apply(plan.transform, x)
        return ConcreteCase(
            texts=(x, xp),
            slot_map=((0, plan.view), (1, plan.view)),
            premise=None,
            hypothesis=plan.prop,
            connective="implies",
            group_key=plan.group_key,
        )
    if isinstance(plan, PairwiseSystematicity):
        x1, x2 = sources
        x1p = apply(plan.transform, x1)
        x2p = apply(plan.transform, x2)
        return ConcreteCase(
            texts=(x1, x2, x1p, x2p),
            slot_map=tuple((i, plan.view) for i in range(4)),
            premise=plan.premise,
            hypothesis=plan.hypothesis,
            connective=plan.connective,
            group_key=plan.group_key,
        )
    if isinstance(plan, PairwiseCompositionality):
        x1, x2 = sources
        for x in (x1, x2):
            if len(x.spans) != 2:
                raise PlanStructureError(
                    f"compositionality inputs need two insertion spans, {x.id!r} has {len(x.spans)}"
                )
        hv1 = ViewRequest(kind="hidden", layer=plan.hidden_view.layer, spans=x1.spans)
        hv2 = ViewRequest(kind="hidden", layer=plan.hidden_view.layer, spans=x2.spans)
        premise = Ord(plan.hidden_score, 0, 1)
        hypothesis: PropertyExpr = Ord(plan.output_score, 2, 3)
        if plan.monotonicity == "up":
            hypothesis = Not(hypothesis)
        return ConcreteCase(
            texts=(x1, x2),
            slot_map=((0, hv1), (1, hv2), (0, plan.output_view), (1, plan.output_view)),
            premise=premise,
            hypothesis=hypothesis,
            connective=plan.connective,
            group_key=plan.group_key,
        )
    if isinstance(plan, ThreeWayTransitivity):
        x1, x2, x3 = sources
        x12 = form_pair(x1, x2, plan.separator)
        x23 = form_pair(x2, x3, plan.separator)
        x13 = form_pair(x1, x3, plan.separator)
        return ConcreteCase(
            texts=(x1, x2, x3, x12, x23, x13),
            slot_map=((3, plan.view), (4, plan.view), (5, plan.view)),
            premise=And(Pred(plan.predicate, 0), Pred(plan.predicate, 1)),
            hypothesis=Pred(plan.predicate, 2),
            connective="implies",
            group_key=plan.group_key,
        )
    raise PlanStructureError(f"unknown plan type {type(plan).__name__}")
