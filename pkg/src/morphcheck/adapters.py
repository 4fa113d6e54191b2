"""Model ports: deterministic stub models for desk-scale verification and an
HTTP client for external inference services.

Wire protocol (see also the sidecar service):
  POST /v1/score    {"texts": [...], "views": [{"kind": ...}, ...]}
                 -> {"model_id": ..., "results": [{<kind>: [...]}, ...]}
  GET  /v1/capabilities -> {"views": [...], "classes": [...],
                            "hidden_dim": n, "max_batch": m}
"""
from __future__ import annotations

import math
import time
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .core import ScoreVector, TextInput, ViewRequest
from .errors import PortUnavailable, UnsupportedView
from .rng import SplitMix64, fnv1a64

__all__ = [
    "Capabilities",
    "ModelPort",
    "LexiconSentiment",
    "HashEmbedding",
    "TaxonomyLexical",
    "HttpPort",
    "CountingPort",
    "score_batch",
    "split_views",
]


@dataclass(frozen=True)
class Capabilities:
    views: Tuple[str, ...]
    classes: Tuple[str, ...] = ()
    hidden_dim: Optional[int] = None
    max_batch: int = 1024


class ModelPort:
    """Abstract scoring port; subclasses implement _score_one."""

    def capabilities(self) -> Capabilities:
        raise NotImplementedError

    def _score_one(self, text: TextInput, view: ViewRequest) -> ScoreVector:
        raise NotImplementedError

    def check_views(self, views: Sequence[ViewRequest]) -> None:
        caps = self.capabilities()
        for view in views:
            if view.kind not in caps.views:
                raise UnsupportedView(
                    f"{type(self).__name__} does not support {view.kind!r} views"
                )

    def score_batch(
        self, texts: Sequence[TextInput], views: Sequence[ViewRequest]
    ) -> List[List[ScoreVector]]:
        """Per-text, per-view scores, positionally aligned with the inputs."""
        caps = self.capabilities()
        if len(texts) > caps.max_batch:
            raise ValueError(f"batch of {len(texts)} exceeds max {caps.max_batch}")
        self.check_views(views)
        return [[self._score_one(t, v) for v in views] for t in texts]


def score_batch(port: ModelPort, texts, views) -> List[List[ScoreVector]]:
    return port.score_batch(texts, views)


def split_views(
    port: ModelPort, text: TextInput, hidden_view: ViewRequest, output_view: ViewRequest
) -> Tuple[ScoreVector, ScoreVector]:
    """The f/g split: hidden representation and final output for one text."""
    (result,) = port.score_batch([text], [hidden_view, output_view])
    return result[0], result[1]


def _detach_tail(token: str) -> str:
    while token and unicodedata.category(token[-1]).startswith("P"):
        token = token[:-1]
    return token


def _two_class_softmax(t: float) -> ScoreVector:
    # softmax over (-t, t)
    p = 1.0 / (1.0 + math.exp(-2.0 * t))
    return ScoreVector(values=(1.0 - p, p), kind="softmax")


@dataclass
class LexiconSentiment(ModelPort):
    """Sentiment stub: sums word valences and squashes through a two-class
    softmax, so equality, order and class predicates all apply."""

    valence: Dict[str, float]
    model_id: str = "stub:lexicon-sentiment"

    def capabilities(self) -> Capabilities:
        return Capabilities(
            views=("softmax", "class_score"), classes=("negative", "positive")
        )

    def _score_one(self, text, view):
        t = 0.0
        for token in text.text.split():
            word = _detach_tail(token).lower()
            t += self.valence.get(word, 0.0)
        y = _two_class_softmax(t)
        if view.kind == "softmax":
            return y
        if view.kind == "class_score":
            idx = self.capabilities().classes.index(view.label)
            return ScoreVector(values=(y.values[idx],), kind="scalar")
        raise UnsupportedView(f"lexicon sentiment has no {view.kind!r} view")


def _hash_vector(dim: int, seed: int, key: str) -> Tuple[float, ...]:
    rng = SplitMix64(seed ^ fnv1a64(key))
    return tuple(rng.random() * 2.0 - 1.0 for _ in range(dim))


@dataclass
class HashEmbedding(ModelPort):
    """Deterministic pseudo-embeddings from text bytes; hidden views pool each
    requested span and concatenate the pooled vectors."""

    dim: int = 16
    seed: int = 0
    model_id: str = "stub:hash-embedding"

    def capabilities(self) -> Capabilities:
        return Capabilities(
            views=("softmax", "embedding", "hidden"),
            classes=("class0", "class1"),
            hidden_dim=self.dim,
        )

    def _score_one(self, text, view):
        if view.kind == "embedding":
            return ScoreVector(values=_hash_vector(self.dim, self.seed, text.text), kind="embedding")
        if view.kind == "hidden":
            spans = view.spans or ((0, len(text.text)),)
            parts = []
            for start, end in spans:
                parts.extend(_hash_vector(self.dim, self.seed, text.text[start:end]))
            return ScoreVector(values=tuple(parts), kind="embedding")
        if view.kind == "softmax":
            p = (fnv1a64(text.text) >> 11) / float(1 << 53)
            return ScoreVector(values=(1.0 - p, p), kind="softmax")
        raise UnsupportedView(f"hash embedding has no {view.kind!r} view")


class TaxonomyLexical(ModelPort):
    """Lexical-relation stub over a word graph of synonym/hypernym edges.

    Inputs are pair-encoded texts "a<sep>b". Output is a one-hot 3-class
    softmax over (none, syn, hyp). With transitive_closure the hypernym
    relation is its reachability closure and synonymy the connected-component
    closure, so the transitivity property holds by construction.
    """

    model_id = "stub:taxonomy-lexical"

    def __init__(self, syn_edges, hyper_edges, separator: str = " ", transitive_closure: bool = False):
        self.separator = separator
        self.transitive_closure = transitive_closure
        self._syn = set()
        for a, b in syn_edges:
            self._syn.add((a, b))
            self._syn.add((b, a))
        self._hyper = set(tuple(e) for e in hyper_edges)
        self._check_acyclic()
        if transitive_closure:
            self._syn = self._close_syn()
            self._hyper = self._close_hyper()

    @classmethod
    def from_tsv(cls, path, **kwargs) -> "TaxonomyLexical":
        """Load ``rel<TAB>a<TAB>b`` lines with rel in {syn, hyper}."""
        syn, hyper = [], []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rel, a, b = line.split("\t")
            (syn if rel == "syn" else hyper).append((a, b))
        return cls(syn_edges=syn, hyper_edges=hyper, **kwargs)

    def _check_acyclic(self):
        adj: Dict[str, list] = {}
        for a, b in self._hyper:
            adj.setdefault(a, []).append(b)
        state: Dict[str, int] = {}

        def visit(node):
            state[node] = 1
            for nxt in adj.get(node, ()):
                st = state.get(nxt, 0)
                if st == 1:
                    raise ValueError("hypernym edges contain a cycle")
                if st == 0:
                    visit(nxt)
            state[node] = 2

        for node in list(adj):
            if state.get(node, 0) == 0:
                visit(node)

    def _close_syn(self):
        # union-find over synonym components
        parent = {}

        def find(w):
            parent.setdefault(w, w)
            while parent[w] != w:
                parent[w] = parent[parent[w]]
                w = parent[w]
            return w

        for a, b in self._syn:
            parent[find(a)] = find(b)
        groups: Dict[str, list] = {}
        for w in parent:
            groups.setdefault(find(w), []).append(w)
        closed = set()
        for members in groups.values():
            for a in members:
                for b in members:
                    if a != b:
                        closed.add((a, b))
        return closed

    def _close_hyper(self):
        adj: Dict[str, set] = {}
        for a, b in self._hyper:
            adj.setdefault(a, set()).add(b)
        closed = set()
        for start in adj:
            stack = list(adj[start])
            seen = set()
            while stack:
                node = stack.pop()
                if node in seen:
                    continue
                seen.add(node)
                closed.add((start, node))
                stack.extend(adj.get(node, ()))
        return closed

    def capabilities(self) -> Capabilities:
        return Capabilities(views=("softmax",), classes=("none", "syn", "hyp"))

    def relation(self, a: str, b: str) -> str:
        # hypernymy wins when a pair is both reachable and in a synonym
        # component: reachability is transitive, so the closed relation stays
        # transitive no matter how the two edge sets overlap
        if (a, b) in self._hyper:
            return "hyp"
        if (a, b) in self._syn:
            return "syn"
        return "none"

    def _score_one(self, text, view):
        if view.kind != "softmax":
            raise UnsupportedView(f"taxonomy stub has no {view.kind!r} view")
        a, _, b = text.text.partition(self.separator)
        rel = self.relation(a, b)
        onehot = {"none": (1.0, 0.0, 0.0), "syn": (0.0, 1.0, 0.0), "hyp": (0.0, 0.0, 1.0)}
        return ScoreVector(values=onehot[rel], kind="softmax")


class HttpPort(ModelPort):
    """Client for the wire protocol, with bounded exponential backoff."""

    BACKOFFS = (0.2, 0.8, 3.2)

    def __init__(self, base_url: str, session=None, timeout: float = 30.0):
        import requests

        self.base_url = base_url.rstrip("/")
        self.session = session or requests.Session()
        self.timeout = timeout
        self._caps: Optional[Capabilities] = None

    def capabilities(self) -> Capabilities:
        if self._caps is None:
            payload = self._request("GET", "/v1/capabilities")
            self._caps = Capabilities(
                views=tuple(payload["views"]),
                classes=tuple(payload.get("classes", ())),
                hidden_dim=payload.get("hidden_dim"),
                max_batch=payload.get("max_batch", 1024),
            )
        return self._caps

    def _request(self, method: str, path: str, json_body=None):
        import requests

        url = self.base_url + path
        last_error = None
        for attempt in range(len(self.BACKOFFS) + 1):
            try:
                resp = self.session.request(method, url, json=json_body, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
            else:
                if resp.status_code == 200:
                    return resp.json()
                if resp.status_code == 400:
                    raise UnsupportedView(f"service rejected request: {resp.text}")
                if resp.status_code not in (429, 503):
                    raise PortUnavailable(f"unexpected status {resp.status_code}")
                last_error = RuntimeError(f"status {resp.status_code}")
            if attempt < len(self.BACKOFFS):
                time.sleep(self.BACKOFFS[attempt])
        raise PortUnavailable(f"gave up after retries: {last_error}")

    @staticmethod
    def _view_payload(view: ViewRequest) -> dict:
        body = {"kind": view.kind}
        if view.kind == "hidden":
            body["layer"] = view.layer
            body["spans"] = [[s, e] for s, e in view.spans]
        if view.kind == "class_score":
            body["label"] = view.label
        return body

    def score_batch(self, texts, views):
        caps = self.capabilities()
        if len(texts) > caps.max_batch:
            raise ValueError(f"batch of {len(texts)} exceeds max {caps.max_batch}")
        self.check_views(views)
        payload = {
            "texts": [t.text for t in texts],
            "views": [self._view_payload(v) for v in views],
        }
        response = self._request("POST", "/v1/score", json_body=payload)
        results = response["results"]
        if len(results) != len(texts):
            raise PortUnavailable("result count does not match request")
        out = []
        key_for = {"softmax": "softmax", "class_score": "softmax", "hidden": "hidden", "embedding": "embedding"}
        for result in results:
            row = []
            for view in views:
                values = result[key_for[view.kind]]
                if view.kind == "softmax":
                    row.append(ScoreVector(values=tuple(values), kind="softmax"))
                elif view.kind == "class_score":
                    idx = caps.classes.index(view.label)
                    row.append(ScoreVector(values=(values[idx],), kind="scalar"))
                else:
                    row.append(ScoreVector(values=tuple(values), kind="embedding"))
            out.append(row)
        return out


class CountingPort(ModelPort):
    """Wrapper that tallies per-(text, view) invocations; used to verify the
    engine's cache-economy guarantee."""

    def __init__(self, inner: ModelPort):
        self.inner = inner
        self.invocations: Dict[Tuple[str, str], int] = {}

    def capabilities(self) -> Capabilities:
        return self.inner.capabilities()

    def score_batch(self, texts, views):
        for t in texts:
            for v in views:
                key = (t.text, v.fingerprint())
                self.invocations[key] = self.invocations.get(key, 0) + 1
        return self.inner.score_batch(texts, views)

    @property
    def total_invocations(self) -> int:
        return sum(self.invocations.values())

    @property
    def unique_pairs(self) -> int:
        return len(self.invocations)
