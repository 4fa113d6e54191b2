"""Decidable first-order output properties: equivalence, similarity and order
atoms, Boolean predicates, logical connectives, and the tri-state verdict.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .core import ScoreVector, cosine_similarity, predicted_class
from .errors import (
    DegenerateVector,
    DimensionMismatch,
    EvaluationError,
    InvalidViewKind,
)

__all__ = [
    "ScoreView",
    "BooleanPredicate",
    "PropertyExpr",
    "Eq",
    "Sim",
    "Ord",
    "Pred",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "Verdict",
    "eval_expr",
    "verdict",
]

DEFAULT_SIM_THRESHOLD = 0.9


@dataclass(frozen=True)
class ScoreView:
    """Maps a ScoreVector to a single real score.

    extraction: "softmax_component" (needs index), "probe" (needs a trained
    probe with a .score method), or "scalar_passthrough".
    """

    name: str
    extraction: str
    index: Optional[int] = None
    probe: Optional[object] = None

    def __post_init__(self):
        if self.extraction not in ("softmax_component", "probe", "scalar_passthrough"):
            raise ValueError(f"unknown extraction {self.extraction!r}")
        if self.extraction == "softmax_component" and self.index is None:
            raise ValueError("softmax_component needs an index")
        if self.extraction == "probe" and self.probe is None:
            raise ValueError("probe extraction needs a probe")

    def score(self, y: ScoreVector) -> float:
        if self.extraction == "softmax_component":
            if y.kind != "softmax":
                raise InvalidViewKind(f"{self.name}: expected softmax, got {y.kind}")
            return y.values[self.index]
        if self.extraction == "probe":
            return self.probe.score(y)
        if y.kind != "scalar":
            raise InvalidViewKind(f"{self.name}: expected scalar, got {y.kind}")
        return y.values[0]


@dataclass(frozen=True)
class BooleanPredicate:
    """True iff the predicted class equals the designated index."""

    name: str
    class_index: int

    def holds(self, y: ScoreVector) -> bool:
        if self.class_index >= len(y.values):
            raise EvaluationError(
                f"{self.name}: class index {self.class_index} out of range"
            )
        return predicted_class(y) == self.class_index


class PropertyExpr:
    """Base of the expression tree; slots index a relation's output tuple."""

    def eval(self, outputs: Sequence[ScoreVector]) -> bool:
        raise NotImplementedError

    def slots(self) -> frozenset:
        raise NotImplementedError


def _slot(outputs, i) -> ScoreVector:
    try:
        return outputs[i]
    except IndexError:
        raise EvaluationError(f"unbound slot {i}", slot=i) from None


@dataclass(frozen=True)
class Eq(PropertyExpr):
    """Same predicted class on both slots."""

    i: int
    j: int

    def eval(self, outputs):
        try:
            return predicted_class(_slot(outputs, self.i)) == predicted_class(
                _slot(outputs, self.j)
            )
        except InvalidViewKind as exc:
            raise EvaluationError(str(exc), slot=self.i) from exc

    def slots(self):
        return frozenset((self.i, self.j))


@dataclass(frozen=True)
class Sim(PropertyExpr):
    """Cosine similarity above a threshold."""

    i: int
    j: int
    theta: float = DEFAULT_SIM_THRESHOLD

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")

    def eval(self, outputs):
        try:
            return cosine_similarity(_slot(outputs, self.i), _slot(outputs, self.j)) > self.theta
        except (InvalidViewKind, DimensionMismatch, DegenerateVector) as exc:
            raise EvaluationError(str(exc), slot=self.i) from exc

    def slots(self):
        return frozenset((self.i, self.j))


@dataclass(frozen=True)
class Ord(PropertyExpr):
    """Strict order s(y_i) < s(y_j); ties are false in both directions."""

    view: ScoreView
    i: int
    j: int

    def eval(self, outputs):
        try:
            return self.view.score(_slot(outputs, self.i)) < self.view.score(
                _slot(outputs, self.j)
            )
        except InvalidViewKind as exc:
            raise EvaluationError(str(exc), slot=self.i) from exc

    def slots(self):
        return frozenset((self.i, self.j))


@dataclass(frozen=True)
class Pred(PropertyExpr):
    """A Boolean prediction holds on one slot."""

    predicate: BooleanPredicate
    i: int

    def eval(self, outputs):
        try:
            return self.predicate.holds(_slot(outputs, self.i))
        except InvalidViewKind as exc:
            raise EvaluationError(str(exc), slot=self.i) from exc

    def slots(self):
        return frozenset((self.i,))


@dataclass(frozen=True)
class Not(PropertyExpr):
    inner: PropertyExpr

    def eval(self, outputs):
        return not self.inner.eval(outputs)

    def slots(self):
        return self.inner.slots()


@dataclass(frozen=True)
class And(PropertyExpr):
    left: PropertyExpr
    right: PropertyExpr

    def eval(self, outputs):
        return self.left.eval(outputs) and self.right.eval(outputs)

    def slots(self):
        return self.left.slots() | self.right.slots()


@dataclass(frozen=True)
class Or(PropertyExpr):
    left: PropertyExpr
    right: PropertyExpr

    def eval(self, outputs):
        return self.left.eval(outputs) or self.right.eval(outputs)

    def slots(self):
        return self.left.slots() | self.right.slots()


@dataclass(frozen=True)
class Implies(PropertyExpr):
    left: PropertyExpr
    right: PropertyExpr

    def eval(self, outputs):
        return (not self.left.eval(outputs)) or self.right.eval(outputs)

    def slots(self):
        return self.left.slots() | self.right.slots()


@dataclass(frozen=True)
class Iff(PropertyExpr):
    left: PropertyExpr
    right: PropertyExpr

    def eval(self, outputs):
        return self.left.eval(outputs) == self.right.eval(outputs)

    def slots(self):
        return self.left.slots() | self.right.slots()


class Verdict(enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    VACUOUS = "vacuous"
    ERROR = "error"


def eval_expr(p: PropertyExpr, outputs: Sequence[ScoreVector]) -> bool:
    """Evaluate a property tree over bound output slots."""
    return p.eval(outputs)


def verdict(
    premise: Optional[PropertyExpr],
    hypothesis: PropertyExpr,
    connective: str,
    outputs: Sequence[ScoreVector],
) -> Verdict:
    """Tri-state verdict for one test case.

    implies: false premise -> Vacuous; otherwise Satisfied/Violated by the
    hypothesis. iff: never Vacuous, Satisfied iff both sides agree. A missing
    premise (single-input relations) makes the hypothesis decisive.
    """
    if premise is None:
        return Verdict.SATISFIED if hypothesis.eval(outputs) else Verdict.VIOLATED
    if connective == "implies":
        if not premise.eval(outputs):
            return Verdict.VACUOUS
        return Verdict.SATISFIED if hypothesis.eval(outputs) else Verdict.VIOLATED
    if connective == "iff":
        same = premise.eval(outputs) == hypothesis.eval(outputs)
        return Verdict.SATISFIED if same else Verdict.VIOLATED
    raise ValueError(f"unknown connective {connective!r}")
