"""Foundational domain types: texts, datasets, score vectors and view requests.

Everything here is immutable after construction and safe to share between
concurrent evaluation workers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence, Tuple

from .errors import DegenerateVector, DimensionMismatch, InvalidViewKind

__all__ = [
    "TextInput",
    "Dataset",
    "ScoreVector",
    "ViewRequest",
    "predicted_class",
    "cosine_similarity",
]


@dataclass(frozen=True)
class TextInput:
    """An identified piece of text.

    ``spans`` is optional bookkeeping: character ranges [start, end) into
    ``text`` that mark regions of interest (e.g. template insertions) for
    hidden-view extraction.
    """

    id: str
    text: str
    spans: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("TextInput.id must be non-empty")
        if not self.text.strip():
            raise ValueError("TextInput.text must be non-empty after trimming")
        for start, end in self.spans:
            if not (0 <= start < end <= len(self.text)):
                raise ValueError(f"span [{start},{end}) outside text bounds")


@dataclass(frozen=True)
class Dataset:
    """An ordered pool of identified texts. Iteration order is stable."""

    entries: Tuple[TextInput, ...]
    name: str = "dataset"

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate ids in dataset {self.name!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TextInput]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> TextInput:
        return self.entries[i]

    @classmethod
    def from_jsonl(cls, path, name: Optional[str] = None) -> "Dataset":
        """Load ``{"id": ..., "text": ...}`` objects, one per line."""
        path = Path(path)
        entries = []
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                entries.append(TextInput(id=str(obj["id"]), text=obj["text"]))
        return cls(entries=tuple(entries), name=name or path.stem)

    @classmethod
    def from_text_lines(cls, path, name: Optional[str] = None) -> "Dataset":
        """Plain-text mode: one text per line, ids auto-assigned line-<n>."""
        path = Path(path)
        entries = []
        with path.open(encoding="utf-8") as fh:
            for n, line in enumerate(fh):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                entries.append(TextInput(id=f"line-{n}", text=line))
        return cls(entries=tuple(entries), name=name or path.stem)


_KINDS = ("softmax", "embedding", "scalar")


@dataclass(frozen=True)
class ScoreVector:
    """A numeric model output: a softmax distribution, an embedding, or a scalar."""

    values: Tuple[float, ...]
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind not in _KINDS:
            raise InvalidViewKind(f"unknown score kind {self.kind!r}")
        if self.kind == "softmax":
            if any(v < 0.0 or v > 1.0 for v in self.values):
                raise ValueError("softmax values must lie in [0,1]")
            if abs(sum(self.values) - 1.0) > 1e-9:
                raise ValueError("softmax values must sum to 1 within 1e-9")
        if self.kind == "scalar" and len(self.values) != 1:
            raise ValueError("scalar score must have length 1")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ViewRequest:
    """What must be extracted from the model for one text.

    kind: softmax | class_score | hidden | embedding.
    ``layer`` is a signed offset (-1 = last layer, -2 = second to last) and
    only meaningful for hidden views; ``spans`` restricts a hidden view to
    character ranges of the input; ``label`` names the class for class_score.
    """

    kind: str
    label: Optional[str] = None
    layer: Optional[int] = None
    spans: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.kind not in ("softmax", "class_score", "hidden", "embedding"):
            raise InvalidViewKind(f"unknown view kind {self.kind!r}")
        if self.kind == "class_score" and self.label is None:
            raise ValueError("class_score view needs a label")
        if self.kind == "hidden" and self.layer is None:
            raise ValueError("hidden view needs a layer offset")

    def fingerprint(self) -> str:
        """Stable cache key component for this view."""
        parts = [self.kind]
        if self.label is not None:
            parts.append(f"label={self.label}")
        if self.layer is not None:
            parts.append(f"layer={self.layer}")
        if self.spans:
            parts.append("spans=" + ";".join(f"{s}:{e}" for s, e in self.spans))
        return "|".join(parts)

    def checked_against(self, text: str) -> "ViewRequest":
        for start, end in self.spans:
            if not (0 <= start < end <= len(text)):
                raise ValueError(f"span [{start},{end}) outside text of length {len(text)}")
        return self


def predicted_class(y: ScoreVector) -> int:
    """Index of the largest softmax component; ties break to the lowest index."""
    if y.kind != "softmax":
        raise InvalidViewKind(f"predicted_class needs a softmax vector, got {y.kind}")
    if len(y.values) < 2:
        raise InvalidViewKind("predicted_class needs at least 2 classes")
    best = 0
    for i, v in enumerate(y.values):
        if v > y.values[best]:
            best = i
    return best


def cosine_similarity(a: ScoreVector, b: ScoreVector) -> float:
    """Standard cosine of the angle between two vectors, in [-1, 1]."""
    if len(a.values) != len(b.values):
        raise DimensionMismatch(f"lengths {len(a.values)} vs {len(b.values)}")
    na = math.sqrt(sum(v * v for v in a.values))
    nb = math.sqrt(sum(v * v for v in b.values))
    if na == 0.0 or nb == 0.0:
        raise DegenerateVector("cosine similarity of a zero-norm vector")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    c = dot / (na * nb)
    # guard against floating-point drift just past the unit interval
    return max(-1.0, min(1.0, c))
