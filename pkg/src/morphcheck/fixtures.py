"""Deterministic synthetic fixtures for desk-scale verification: review
datasets, the sentiment lexicon behind the stub model, a small word taxonomy,
monotone contexts with insertion pairs, and a separable probe task.
"""
from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np

from .core import Dataset, TextInput
from .rng import SplitMix64
from .transforms import ConcatSentence

__all__ = [
    "SENTIMENT_VALENCE",
    "fixture_valence",
    "sentiment_transforms",
    "synthetic_reviews",
    "small_taxonomy",
    "monotone_contexts",
    "insertion_pairs",
    "separable_probe_task",
]

# word valences for the sentiment stub; sums squash through a 2-class softmax
SENTIMENT_VALENCE: Dict[str, float] = {
    "great": 1.0,
    "wonderful": 1.2,
    "masterpiece": 1.5,
    "enjoyable": 0.8,
    "charming": 0.7,
    "happy": 0.9,
    "soothing": 0.4,
    "better": 0.5,
    "good": 0.6,
    "dull": -0.8,
    "boring": -1.0,
    "wretched": -1.4,
    "forgettable": -0.6,
    "awful": -1.2,
    "terrible": -1.3,
    "flat": -0.5,
    "bad": -0.7,
    "confusing": -0.4,
}

_POSITIVE = ["great", "wonderful", "enjoyable", "charming", "good"]
_NEGATIVE = ["dull", "boring", "forgettable", "awful", "flat", "bad"]
_NEUTRAL = ["the", "film", "plot", "acting", "was", "and", "very", "a", "bit", "mostly", "scenes", "score"]


def fixture_valence(n: int = 50) -> Dict[str, float]:
    """Stub valence map for the synthetic reviews: the base lexicon plus a
    tiny distinct valence per review marker word, so score sums never tie."""
    valence = dict(SENTIMENT_VALENCE)
    for i in range(n):
        valence[f"take{i}"] = (i + 1) * 1e-3
    return valence


def sentiment_transforms(seed: int = 0) -> List[ConcatSentence]:
    """Six sentence-concatenation transforms, three at each position."""
    return [
        ConcatSentence("My friends were happy, though.", "end"),
        ConcatSentence("Anyway, the sound of the rain outside was soothing.", "end"),
        ConcatSentence("As always: popcorn and coke make everything better!", "end"),
        ConcatSentence("Thank you.", "start"),
        ConcatSentence("I watched this movie with my brother.", "start"),
        ConcatSentence("Here is my review:", "start"),
    ]


def synthetic_reviews(n: int = 50, seed: int = 7) -> Dataset:
    """n short reviews with varied lexicon-valence sums (tie-free ordering)."""
    rng = SplitMix64(seed)
    entries = []
    for i in range(n):
        words = []
        for _ in range(rng.randrange(6) + 6):
            bucket = rng.randrange(3)
            pool = (_POSITIVE, _NEGATIVE, _NEUTRAL)[bucket]
            words.append(rng.choice(pool))
        # a unique low-weight word keeps valence sums distinct across entries
        words.append(f"take{i}")
        text = " ".join(words).capitalize() + "."
        entries.append(TextInput(id=f"review-{i}", text=text))
    return Dataset(entries=tuple(entries), name="synthetic-reviews")


def small_taxonomy(n_words: int = 50, seed: int = 11) -> Tuple[List[Tuple[str, str]], List[Tuple[str, str]], Dataset]:
    """A word graph: hypernym edges follow the index order (hence acyclic)
    plus a sprinkling of synonym edges. Returns (syn_edges, hyper_edges,
    word dataset)."""
    rng = SplitMix64(seed)
    words = [f"word{i:02d}" for i in range(n_words)]
    hyper = []
    for i in range(n_words):
        for _ in range(2):
            j = rng.randrange(n_words)
            if j > i:
                hyper.append((words[i], words[j]))
    syn = []
    for _ in range(n_words // 2):
        a = rng.randrange(n_words)
        b = rng.randrange(n_words)
        if a != b:
            syn.append((words[a], words[b]))
    dataset = Dataset(
        entries=tuple(TextInput(id=w, text=w) for w in words), name="taxonomy-words"
    )
    return sorted(set(syn)), sorted(set(hyper)), dataset


def monotone_contexts() -> List[Tuple[str, str]]:
    return [
        ("There was no ⟨x⟩.", "down"),
        ("We stood on the brink of a ⟨x⟩.", "up"),
        ("Nobody mentioned any ⟨x⟩ at all.", "down"),
        ("Some ⟨x⟩ bloom in spring and others in autumn.", "up"),
    ]


def insertion_pairs() -> List[Tuple[str, str, str]]:
    return [
        ("tree", "cherry tree", "hyper"),
        ("fruit", "apple", "hyper"),
        ("animal", "dog", "hyper"),
        ("vehicle", "bicycle", "hyper"),
        ("building", "cottage", "hyper"),
        ("pine", "tree", "hypo"),
        ("apple", "fruit", "hypo"),
        ("sparrow", "bird", "hypo"),
        ("oak", "plant", "hypo"),
        ("gun", "woman", "none"),
        ("woman", "gun", "none"),
        ("potatoes", "animals", "none"),
        ("animals", "potatoes", "none"),
        ("river", "lamp", "none"),
        ("chair", "cloud", "none"),
        ("music", "stone", "none"),
    ]


def separable_probe_task(
    dim: int = 16, n: int = 400, margin_sigmas: float = 3.0, seed: int = 3
):
    """Two Gaussian clusters separated by ``margin_sigmas`` standard
    deviations along a random unit direction. Returns (X, y) arrays."""
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    y = np.arange(n) % 2
    X = rng.normal(size=(n, dim))
    X += np.outer(np.where(y == 1, margin_sigmas, -margin_sigmas), direction)
    return X, y
