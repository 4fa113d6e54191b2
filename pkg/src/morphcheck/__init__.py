"""morphcheck: model-agnostic metamorphic testing for NLP systems.

Generates test tuples from unlabeled text, evaluates single-input,
pairwise-systematicity, pairwise-compositionality and three-way-transitivity
relations against any model behind a scoring port, and reports violation
statistics without ground-truth labels.
"""
from .core import Dataset, ScoreVector, TextInput, ViewRequest, cosine_similarity, predicted_class
from .engine import EnumerationMode, ScoreCache, aggregate, count, run, run_suite, unrank
from .properties import (
    And,
    BooleanPredicate,
    Eq,
    Iff,
    Implies,
    Not,
    Or,
    Ord,
    Pred,
    ScoreView,
    Sim,
    Verdict,
    verdict,
)
from .relations import (
    PairwiseCompositionality,
    PairwiseSystematicity,
    SingleInput,
    ThreeWayTransitivity,
    bind,
    compile_plan,
    emit_dot,
)

__version__ = "0.1.0"
