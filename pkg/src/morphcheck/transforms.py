"""Input transformations: character noise, word substitution, sentence
concatenation/shuffling, template instantiation and pair formation.

All transforms are deterministic: stochastic variants derive randomness only
from (seed, input id), never from global state.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .core import TextInput
from .errors import NoApplicableSite, PlaceholderMissing
from .rng import fnv1a64, stream_for

__all__ = [
    "PLACEHOLDER",
    "Lexicon",
    "KeyboardLayout",
    "ConcatSentence",
    "SynonymReplace",
    "AntonymReplace",
    "KeywordSwap",
    "CharKeyboardTypo",
    "CharRandomReplace",
    "CharSwapNeighbors",
    "CharShuffleWord",
    "SentenceShuffle",
    "TemplateInstantiate",
    "PairConcat",
    "apply",
    "instantiate_pair",
    "form_pair",
]

PLACEHOLDER = "⟨x⟩"  # ⟨x⟩

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def _split_token(token: str) -> Tuple[str, str]:
    """Detach trailing punctuation from a whitespace token."""
    core = token
    tail = ""
    while core and unicodedata.category(core[-1]).startswith("P"):
        tail = core[-1] + tail
        core = core[:-1]
    return core, tail


def _rebuild(tokens: List[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class Lexicon:
    """word -> ordered replacement list; used by synonym/antonym transforms."""

    entries: Dict[str, Tuple[str, ...]]
    case_sensitive: bool = False

    def __post_init__(self):
        fixed = {}
        for word, repls in self.entries.items():
            key = word if self.case_sensitive else word.lower()
            repls = tuple(repls)
            if not repls:
                raise ValueError(f"empty replacement list for {word!r}")
            if key in (r if self.case_sensitive else r.lower() for r in repls):
                raise ValueError(f"word {word!r} maps to itself")
            fixed[key] = repls
        object.__setattr__(self, "entries", fixed)

    def lookup(self, word: str) -> Optional[Tuple[str, ...]]:
        key = word if self.case_sensitive else word.lower()
        return self.entries.get(key)

    @classmethod
    def from_tsv(cls, path, case_sensitive: bool = False) -> "Lexicon":
        """Load ``word<TAB>repl1,repl2,...`` lines."""
        entries = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word, repls = line.split("\t", 1)
            entries[word] = tuple(r.strip() for r in repls.split(",") if r.strip())
        return cls(entries=entries, case_sensitive=case_sensitive)

    def fingerprint_key(self) -> str:
        items = sorted(self.entries.items())
        return repr((items, self.case_sensitive))


_QWERTY_ROWS = ["qwertyuiop", "asdfghjkl", "zxcvbnm"]


def _qwerty_neighbors() -> Dict[str, Tuple[str, ...]]:
    pos = {}
    for r, row in enumerate(_QWERTY_ROWS):
        for c, ch in enumerate(row):
            pos[ch] = (r, c)
    out = {}
    for ch, (r, c) in pos.items():
        near = []
        for other, (r2, c2) in pos.items():
            if other != ch and abs(r - r2) <= 1 and abs(c - c2) <= 1:
                near.append(other)
        out[ch] = tuple(sorted(near))
    return out


@dataclass(frozen=True)
class KeyboardLayout:
    """Adjacency list per key; default QWERTY."""

    neighbors: Dict[str, Tuple[str, ...]] = field(default_factory=_qwerty_neighbors)

    @classmethod
    def from_tsv(cls, path) -> "KeyboardLayout":
        """Load ``key<TAB>neighbors`` lines (neighbors as a bare string)."""
        neighbors = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            key, near = line.split("\t", 1)
            neighbors[key] = tuple(near)
        return cls(neighbors=neighbors)

    def fingerprint_key(self) -> str:
        return repr(sorted(self.neighbors.items()))


class TransformSpec:
    """Base class: a deterministic text transformation."""

    tag = "transform"

    def _params_key(self) -> str:
        raise NotImplementedError

    def fingerprint(self) -> str:
        return f"{self.tag}-{fnv1a64(self._params_key()):016x}"

    @property
    def label(self) -> str:
        """Human-readable group key for reports."""
        return self.fingerprint()

    def _transform(self, x: TextInput) -> Tuple[str, Tuple[Tuple[int, int], ...]]:
        raise NotImplementedError


@dataclass(frozen=True)
class ConcatSentence(TransformSpec):
    text: str
    position: str = "end"  # start | end
    tag = "concat"

    def __post_init__(self):
        if self.position not in ("start", "end"):
            raise ValueError("position must be 'start' or 'end'")

    def _params_key(self) -> str:
        return repr((self.text, self.position))

    @property
    def label(self) -> str:
        return f"concat[{self.position}] {self.text}"

    def _transform(self, x):
        if self.position == "start":
            return self.text + " " + x.text, ()
        return x.text + " " + self.text, ()


def _replace_words(x: TextInput, lexicon: Lexicon, rate: float, seed: int) -> str:
    rng = stream_for(seed, x.id)
    tokens = x.text.split()
    hits = 0
    for i, token in enumerate(tokens):
        core, tail = _split_token(token)
        repls = lexicon.lookup(core) if core else None
        if repls is None:
            continue
        hits += 1
        if rng.random() < rate:
            tokens[i] = rng.choice(repls) + tail
    if hits == 0 and rate >= 1.0:
        raise NoApplicableSite(f"no lexicon word present in {x.id!r}")
    return _rebuild(tokens)


@dataclass(frozen=True)
class SynonymReplace(TransformSpec):
    lexicon: Lexicon
    rate: float = 1.0
    seed: int = 0
    tag = "synonym"

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0,1]")

    def _params_key(self) -> str:
        return repr((self.lexicon.fingerprint_key(), self.rate, self.seed))

    @property
    def label(self) -> str:
        return f"synonym[rate={self.rate}]"

    def _transform(self, x):
        return _replace_words(x, self.lexicon, self.rate, self.seed), ()


@dataclass(frozen=True)
class AntonymReplace(SynonymReplace):
    tag = "antonym"

    @property
    def label(self) -> str:
        return f"antonym[rate={self.rate}]"


@dataclass(frozen=True)
class KeywordSwap(TransformSpec):
    mapping: Dict[str, str]
    tag = "kwswap"

    def _params_key(self) -> str:
        return repr(sorted(self.mapping.items()))

    @property
    def label(self) -> str:
        return f"kwswap[{len(self.mapping)} keys]"

    def _transform(self, x):
        tokens = x.text.split()
        for i, token in enumerate(tokens):
            core, tail = _split_token(token)
            if core in self.mapping:
                tokens[i] = self.mapping[core] + tail
        return _rebuild(tokens), ()


@dataclass(frozen=True)
class CharKeyboardTypo(TransformSpec):
    layout: KeyboardLayout = field(default_factory=KeyboardLayout)
    rate: float = 0.1
    seed: int = 0
    tag = "kbtypo"

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0,1]")

    def _params_key(self) -> str:
        return repr((self.layout.fingerprint_key(), self.rate, self.seed))

    @property
    def label(self) -> str:
        return f"kbtypo[rate={self.rate}]"

    def _transform(self, x):
        rng = stream_for(self.seed, x.id)
        chars = list(x.text)
        for i, ch in enumerate(chars):
            near = self.layout.neighbors.get(ch.lower())
            if not near:
                continue
            if rng.random() < self.rate:
                repl = rng.choice(near)
                chars[i] = repl.upper() if ch.isupper() else repl
        return "".join(chars), ()


@dataclass(frozen=True)
class CharRandomReplace(TransformSpec):
    rate: float = 0.1
    seed: int = 0
    tag = "chrand"

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0,1]")

    def _params_key(self) -> str:
        return repr((self.rate, self.seed))

    @property
    def label(self) -> str:
        return f"chrand[rate={self.rate}]"

    def _transform(self, x):
        rng = stream_for(self.seed, x.id)
        chars = list(x.text)
        for i, ch in enumerate(chars):
            if not ch.isalpha():
                continue
            if rng.random() < self.rate:
                pool = [c for c in _ALPHABET if c != ch.lower()]
                repl = rng.choice(pool)
                chars[i] = repl.upper() if ch.isupper() else repl
        return "".join(chars), ()


@dataclass(frozen=True)
class CharSwapNeighbors(TransformSpec):
    rate: float = 0.1
    seed: int = 0
    tag = "chswap"

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0,1]")

    def _params_key(self) -> str:
        return repr((self.rate, self.seed))

    @property
    def label(self) -> str:
        return f"chswap[rate={self.rate}]"

    def _transform(self, x):
        rng = stream_for(self.seed, x.id)
        tokens = x.text.split()
        for t, token in enumerate(tokens):
            chars = list(token)
            i = 0
            while i < len(chars) - 1:
                if chars[i].isalpha() and chars[i + 1].isalpha() and rng.random() < self.rate:
                    chars[i], chars[i + 1] = chars[i + 1], chars[i]
                    i += 2
                else:
                    i += 1
            tokens[t] = "".join(chars)
        return _rebuild(tokens), ()


@dataclass(frozen=True)
class CharShuffleWord(TransformSpec):
    rate: float = 0.1
    seed: int = 0
    tag = "chshuf"

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0,1]")

    def _params_key(self) -> str:
        return repr((self.rate, self.seed))

    @property
    def label(self) -> str:
        return f"chshuf[rate={self.rate}]"

    def _transform(self, x):
        rng = stream_for(self.seed, x.id)
        tokens = x.text.split()
        for t, token in enumerate(tokens):
            core, tail = _split_token(token)
            if len(core) <= 3:
                continue
            if rng.random() < self.rate:
                middle = list(core[1:-1])
                rng.shuffle(middle)
                tokens[t] = core[0] + "".join(middle) + core[-1] + tail
        return _rebuild(tokens), ()


_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class SentenceShuffle(TransformSpec):
    seed: int = 0
    tag = "sentshuf"

    def _params_key(self) -> str:
        return repr(self.seed)

    @property
    def label(self) -> str:
        return "sentshuf"

    def _transform(self, x):
        rng = stream_for(self.seed, x.id)
        parts = _SENTENCE_SPLIT.split(x.text)
        rng.shuffle(parts)
        return " ".join(parts), ()


@dataclass(frozen=True)
class TemplateInstantiate(TransformSpec):
    context: str
    insertion: str
    tag = "template"

    def __post_init__(self):
        if self.context.count(PLACEHOLDER) != 1:
            raise PlaceholderMissing(
                f"context must contain {PLACEHOLDER!r} exactly once"
            )

    def _params_key(self) -> str:
        return repr((self.context, self.insertion))

    @property
    def label(self) -> str:
        return f"template[{self.insertion}]"

    def _transform(self, x):
        if PLACEHOLDER not in x.text:
            raise PlaceholderMissing(f"input {x.id!r} lacks the placeholder token")
        start = x.text.index(PLACEHOLDER)
        new_text = x.text.replace(PLACEHOLDER, self.insertion, 1)
        return new_text, ((start, start + len(self.insertion)),)


@dataclass(frozen=True)
class PairConcat(TransformSpec):
    """Binary pair-forming transform; used by the transitivity relation."""

    separator: str = " "
    tag = "pair"

    def _params_key(self) -> str:
        return repr(self.separator)

    @property
    def label(self) -> str:
        return "pair"

    def apply_pair(self, a: TextInput, b: TextInput) -> TextInput:
        return form_pair(a, b, self.separator)


def apply(t: TransformSpec, x: TextInput) -> TextInput:
    """Produce the follow-up input T(x); the id records which transform made it."""
    new_text, spans = t._transform(x)
    return TextInput(id=f"{x.id}#{t.fingerprint()}", text=new_text, spans=spans)


def _instantiate(context: str, insertion: str) -> Tuple[str, Tuple[int, int]]:
    if context.count(PLACEHOLDER) != 1:
        raise PlaceholderMissing(f"context must contain {PLACEHOLDER!r} exactly once")
    start = context.index(PLACEHOLDER)
    return (
        context.replace(PLACEHOLDER, insertion, 1),
        (start, start + len(insertion)),
    )


def instantiate_pair(
    context: str,
    a: str,
    b: str,
    separator: str = " ",
    id: Optional[str] = None,
) -> TextInput:
    """Copy the same context twice with insertions a and b.

    The returned TextInput carries the character spans of a and b within the
    result, for later hidden-view extraction.
    """
    left, (sa, ea) = _instantiate(context, a)
    right, (sb, eb) = _instantiate(context, b)
    offset = len(left) + len(separator)
    text = left + separator + right
    spans = ((sa, ea), (offset + sb, offset + eb))
    tid = id or f"ctx{fnv1a64(context):08x}({a},{b})"
    return TextInput(id=tid, text=text, spans=spans)


def form_pair(a: TextInput, b: TextInput, separator: str = " ") -> TextInput:
    """Ordered concatenation of two inputs: the x_ij pair encoding."""
    return TextInput(id=f"({a.id},{b.id})", text=a.text + separator + b.text)


def load_contexts(path) -> List[Tuple[str, str]]:
    """JSONL {"context": ..., "monotonicity": "up"|"down"} -> list of tuples."""
    import json

    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        mono = obj["monotonicity"]
        if mono not in ("up", "down"):
            raise ValueError(f"monotonicity must be 'up' or 'down', got {mono!r}")
        out.append((obj["context"], mono))
    return out


def load_insertion_pairs(path) -> List[Tuple[str, str, str]]:
    """JSONL {"a": ..., "b": ..., "relation": "hyper"|"hypo"|"none"}."""
    import json

    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        rel = obj["relation"]
        if rel not in ("hyper", "hypo", "none"):
            raise ValueError(f"relation must be hyper/hypo/none, got {rel!r}")
        out.append((obj["a"], obj["b"], rel))
    return out
