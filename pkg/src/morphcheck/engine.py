"""Test-suite execution: combinatorial tuple enumeration with unranking,
unique-input score caching, vectorized verdict computation and streaming
aggregation.

The engine must sustain tens of millions of property checks over a fixed
cache of model scores, so the per-case path is numpy over rank ranges, not
per-case Python objects. The scalar path in ``relations.ConcreteCase`` is
the behavioural reference; the two are cross-checked in the test suite.
"""
from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import Dataset, ScoreVector, TextInput, ViewRequest
from .errors import (
    EmptyEnumeration,
    MorphcheckError,
    PlanStructureError,
    RankOutOfBounds,
)
from .properties import And, Eq, Iff, Implies, Not, Or, Ord, Pred, PropertyExpr, Sim, Verdict
from .relations import (
    PairwiseCompositionality,
    PairwiseSystematicity,
    SingleInput,
    ThreeWayTransitivity,
    bind,
)
from .transforms import apply as apply_transform

__all__ = [
    "EnumerationMode",
    "ScoreCache",
    "VerdictSet",
    "ReportRow",
    "ViolationReport",
    "count",
    "unrank",
    "unrank_array",
    "run",
    "run_suite",
    "premise_filter",
    "aggregate",
    "render_json",
    "render_csv",
    "render_markdown",
]

_SHAPES = ("singles", "ordered_pairs", "unordered_pairs", "ordered_triplets")
_ARITY = {"singles": 1, "ordered_pairs": 2, "unordered_pairs": 2, "ordered_triplets": 3}

# verdict codes used on the vectorized path
_SAT, _VIOL, _VAC, _ERR = 0, 1, 2, 3
_CODE_TO_VERDICT = {
    _SAT: Verdict.SATISFIED,
    _VIOL: Verdict.VIOLATED,
    _VAC: Verdict.VACUOUS,
    _ERR: Verdict.ERROR,
}


@dataclass(frozen=True)
class EnumerationMode:
    """How source tuples are drawn from the dataset."""

    shape: str
    selection: str = "exhaustive"  # exhaustive | sample
    sample_size: Optional[int] = None
    sample_seed: int = 0
    allow_self: bool = False

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.selection not in ("exhaustive", "sample"):
            raise ValueError(f"unknown selection {self.selection!r}")
        if self.selection == "sample" and (self.sample_size is None or self.sample_size < 1):
            raise ValueError("sample selection needs sample_size >= 1")

    @property
    def arity(self) -> int:
        return _ARITY[self.shape]


def count(mode: EnumerationMode, k: int) -> int:
    """Closed-form case count for a dataset of size k."""
    if k < mode.arity:
        raise EmptyEnumeration(f"dataset of {k} cannot form {mode.shape}")
    if mode.shape == "singles":
        return k
    if mode.shape == "ordered_pairs":
        return k * k if mode.allow_self else k * (k - 1)
    if mode.shape == "unordered_pairs":
        return k * (k + 1) // 2 if mode.allow_self else k * (k - 1) // 2
    # ordered_triplets
    return k ** 3 if mode.allow_self else k * (k - 1) * (k - 2)


def unrank_array(mode: EnumerationMode, k: int, ranks: np.ndarray) -> np.ndarray:
    """Vectorized lexicographic unranking: (n,) ranks -> (n, arity) indices."""
    total = count(mode, k)
    ranks = np.asarray(ranks, dtype=np.int64)
    if ranks.size and (ranks.min() < 0 or ranks.max() >= total):
        raise RankOutOfBounds(f"rank outside [0, {total})")
    if mode.shape == "singles":
        return ranks.reshape(-1, 1)
    if mode.shape == "ordered_pairs":
        if mode.allow_self:
            return np.stack([ranks // k, ranks % k], axis=1)
        i = ranks // (k - 1)
        r = ranks % (k - 1)
        j = r + (r >= i)
        return np.stack([i, j], axis=1)
    if mode.shape == "unordered_pairs":
        # row offsets: pairs before row i
        if mode.allow_self:
            # i <= j; offset(i) = i*k - i*(i-1)/2
            i = np.floor((2 * k + 1 - np.sqrt((2 * k + 1) ** 2 - 8.0 * ranks - 8)) / 2).astype(np.int64)
            off = i * k - i * (i - 1) // 2
            # float sqrt can land one row off; correct deterministically
            too_low = ranks < off
            i = i - too_low
            off = i * k - i * (i - 1) // 2
            too_high = ranks >= off + (k - i)
            i = i + too_high
            off = i * k - i * (i - 1) // 2
            j = i + (ranks - off)
            return np.stack([i, j], axis=1)
        i = np.floor((2 * k - 1 - np.sqrt((2 * k - 1) ** 2 - 8.0 * ranks)) / 2).astype(np.int64)
        off = i * (k - 1) - i * (i - 1) // 2
        too_low = ranks < off
        i = i - too_low
        off = i * (k - 1) - i * (i - 1) // 2
        too_high = ranks >= off + (k - 1 - i)
        i = i + too_high
        off = i * (k - 1) - i * (i - 1) // 2
        j = i + 1 + (ranks - off)
        return np.stack([i, j], axis=1)
    # ordered_triplets
    if mode.allow_self:
        return np.stack([ranks // (k * k), (ranks // k) % k, ranks % k], axis=1)
    per_i = (k - 1) * (k - 2)
    i = ranks // per_i
    rem = ranks % per_i
    d1 = rem // (k - 2)
    d2 = rem % (k - 2)
    j = d1 + (d1 >= i)
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    l = d2 + (d2 >= lo)
    l = l + (l >= hi)
    return np.stack([i, j, l], axis=1)


def unrank(mode: EnumerationMode, k: int, index: int) -> Tuple[int, ...]:
    """Bijective lexicographic unranking of a single case index."""
    row = unrank_array(mode, k, np.array([index], dtype=np.int64))[0]
    return tuple(int(v) for v in row)


def _ranks_for(mode: EnumerationMode, total: int) -> Sequence[int]:
    if mode.selection == "exhaustive":
        return range(total)
    n = min(mode.sample_size, total)
    return sorted(random.Random(mode.sample_seed).sample(range(total), n))


class ScoreCache:
    """Unique-text score cache keyed by (text bytes hash, view fingerprint)."""

    def __init__(self):
        self._store: Dict[Tuple[str, str], ScoreVector] = {}

    def __len__(self) -> int:
        return len(self._store)

    def get(self, text: TextInput, view: ViewRequest) -> ScoreVector:
        return self._store[(text.text, view.fingerprint())]

    def ensure(self, port, requests: Sequence[Tuple[TextInput, ViewRequest]], batch_size: Optional[int] = None) -> None:
        """Score every (text, view) pair not yet cached, batching by view."""
        by_view: Dict[str, Tuple[ViewRequest, List[TextInput]]] = {}
        seen = set()
        for text, view in requests:
            key = (text.text, view.fingerprint())
            if key in self._store or key in seen:
                continue
            seen.add(key)
            fp = view.fingerprint()
            by_view.setdefault(fp, (view, []))[1].append(text)
        max_batch = batch_size or port.capabilities().max_batch
        for view, texts in by_view.values():
            for start in range(0, len(texts), max_batch):
                chunk = texts[start : start + max_batch]
                results = port.score_batch(chunk, [view])
                for text, row in zip(chunk, results):
                    self._store[(text.text, view.fingerprint())] = row[0]

    def scorer(self) -> Callable[[TextInput, ViewRequest], ScoreVector]:
        return self.get


@dataclass
class _Counters:
    satisfied: int = 0
    violated: int = 0
    vacuous: int = 0
    errors: int = 0

    def add_codes(self, codes: np.ndarray) -> None:
        binc = np.bincount(codes, minlength=4)
        self.satisfied += int(binc[_SAT])
        self.violated += int(binc[_VIOL])
        self.vacuous += int(binc[_VAC])
        self.errors += int(binc[_ERR])

    def merge(self, other: "_Counters") -> None:
        self.satisfied += other.satisfied
        self.violated += other.violated
        self.vacuous += other.vacuous
        self.errors += other.errors

    @property
    def total(self) -> int:
        return self.satisfied + self.violated + self.vacuous + self.errors


@dataclass
class VerdictSet:
    """Streaming verdict aggregation for one or more merged runs."""

    input_ids: Tuple[str, ...] = ()
    counters: _Counters = field(default_factory=_Counters)
    by_group: Dict[str, _Counters] = field(default_factory=dict)
    input_violated: Optional[np.ndarray] = None
    input_nonvacuous: Optional[np.ndarray] = None
    records: Optional[List[Tuple[Tuple[int, ...], str, str]]] = None

    @property
    def satisfied(self) -> int:
        return self.counters.satisfied

    @property
    def violated(self) -> int:
        return self.counters.violated

    @property
    def vacuous(self) -> int:
        return self.counters.vacuous

    @property
    def errors(self) -> int:
        return self.counters.errors

    @property
    def total(self) -> int:
        return self.counters.total

    def violation_proportion(self) -> float:
        """violated / (violated + satisfied); 0.0 on a zero denominator."""
        denom = self.counters.violated + self.counters.satisfied
        return self.counters.violated / denom if denom else 0.0

    def merge(self, other: "VerdictSet") -> None:
        self.counters.merge(other.counters)
        for key, ctr in other.by_group.items():
            self.by_group.setdefault(key, _Counters()).merge(ctr)
        if other.input_violated is not None:
            if self.input_violated is None:
                self.input_ids = other.input_ids
                self.input_violated = other.input_violated.copy()
                self.input_nonvacuous = other.input_nonvacuous.copy()
            elif self.input_ids == other.input_ids:
                self.input_violated += other.input_violated
                self.input_nonvacuous += other.input_nonvacuous
        if other.records is not None:
            if self.records is None:
                self.records = []
            self.records.extend(other.records)


class _Evaluator:
    """Vectorized verdict computation for one (plan, dataset) pair.

    Subclasses populate per-slot arrays aligned to the dataset index during
    the scoring phase; ``codes`` then evaluates a block of unranked tuples.
    """

    def __init__(self, plan, dataset: Dataset):
        self.plan = plan
        self.dataset = dataset
        self.bad = np.zeros(len(dataset), dtype=bool)

    # slot -> (tuple column, family key)
    slot_cols: Tuple[Tuple[int, str], ...] = ()

    def _family_scores(self, family: str, view) -> np.ndarray:
        raise NotImplementedError

    def _family_classes(self, family: str) -> np.ndarray:
        raise NotImplementedError

    def _family_pred(self, family: str, predicate) -> np.ndarray:
        raise NotImplementedError

    def _family_embeddings(self, family: str) -> np.ndarray:
        raise NotImplementedError

    def _slot_values(self, slot: int, idx: np.ndarray, kind: str, extra=None) -> np.ndarray:
        col, family = self.slot_cols[slot]
        sel = idx[:, col]
        if kind == "score":
            return self._family_scores(family, extra)[sel]
        if kind == "class":
            return self._family_classes(family)[sel]
        if kind == "pred":
            return self._family_pred(family, extra)[sel]
        if kind == "embedding":
            return self._family_embeddings(family)[sel]
        raise ValueError(kind)

    def _eval(self, expr: PropertyExpr, idx: np.ndarray) -> np.ndarray:
        if isinstance(expr, Ord):
            a = self._slot_values(expr.i, idx, "score", expr.view)
            b = self._slot_values(expr.j, idx, "score", expr.view)
            return a < b
        if isinstance(expr, Eq):
            return self._slot_values(expr.i, idx, "class") == self._slot_values(expr.j, idx, "class")
        if isinstance(expr, Pred):
            return self._slot_values(expr.i, idx, "pred", expr.predicate)
        if isinstance(expr, Sim):
            a = self._slot_values(expr.i, idx, "embedding")
            b = self._slot_values(expr.j, idx, "embedding")
            num = np.einsum("ij,ij->i", a, b)
            den = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
            return num / den > expr.theta
        if isinstance(expr, Not):
            return ~self._eval(expr.inner, idx)
        if isinstance(expr, And):
            return self._eval(expr.left, idx) & self._eval(expr.right, idx)
        if isinstance(expr, Or):
            return self._eval(expr.left, idx) | self._eval(expr.right, idx)
        if isinstance(expr, Implies):
            return ~self._eval(expr.left, idx) | self._eval(expr.right, idx)
        if isinstance(expr, Iff):
            return self._eval(expr.left, idx) == self._eval(expr.right, idx)
        raise PlanStructureError(f"cannot vectorize {type(expr).__name__}")

    def codes(self, idx: np.ndarray, premise, hypothesis, connective: str) -> np.ndarray:
        n = idx.shape[0]
        out = np.empty(n, dtype=np.int8)
        if premise is None:
            hyp = self._eval(hypothesis, idx)
            out[:] = np.where(hyp, _SAT, _VIOL)
        elif connective == "implies":
            prem = self._eval(premise, idx)
            hyp = self._eval(hypothesis, idx)
            out[:] = np.where(~prem, _VAC, np.where(hyp, _SAT, _VIOL))
        else:  # iff
            prem = self._eval(premise, idx)
            hyp = self._eval(hypothesis, idx)
            out[:] = np.where(prem == hyp, _SAT, _VIOL)
        if self.bad.any():
            case_bad = self.bad[idx].any(axis=1)
            out[case_bad] = _ERR
        return out

    def recipe(self):
        """(premise, hypothesis, connective) in slot terms."""
        raise NotImplementedError


class _ScoredFamilies(_Evaluator):
    """Evaluator over families of per-entry texts scored through one view."""

    def __init__(self, plan, dataset, port, cache: ScoreCache, fail_fast: bool):
        super().__init__(plan, dataset)
        self._texts: Dict[str, List[Optional[TextInput]]] = {}
        self._views: Dict[str, List[Optional[ViewRequest]]] = {}
        self._score_cache: Dict[Tuple[str, str], np.ndarray] = {}
        self._class_cache: Dict[str, np.ndarray] = {}
        self._pred_cache: Dict[Tuple[str, str], np.ndarray] = {}
        self._emb_cache: Dict[str, np.ndarray] = {}
        self.cache = cache
        self.port = port
        self.fail_fast = fail_fast

    def _add_family(self, family: str, texts, views) -> None:
        self._texts[family] = texts
        self._views[family] = views

    def _score_all(self) -> None:
        requests = []
        for family, texts in self._texts.items():
            for text, view in zip(texts, self._views[family]):
                if text is not None:
                    requests.append((text, view))
        try:
            self.cache.ensure(self.port, requests)
        except MorphcheckError:
            if self.fail_fast:
                raise
            # fall back to per-text scoring so only failing entries go bad
            for text, view in requests:
                try:
                    self.cache.ensure(self.port, [(text, view)])
                except MorphcheckError:
                    for family, texts in self._texts.items():
                        for e, t in enumerate(texts):
                            if t is not None and t.text == text.text:
                                self.bad[e] = True

    def _vector(self, family: str) -> List[Optional[ScoreVector]]:
        texts = self._texts[family]
        views = self._views[family]
        out = []
        for e, (text, view) in enumerate(zip(texts, views)):
            if text is None or self.bad[e]:
                out.append(None)
            else:
                try:
                    out.append(self.cache.get(text, view))
                except KeyError:
                    self.bad[e] = True
                    out.append(None)
        return out

    def _family_scores(self, family: str, score_view) -> np.ndarray:
        key = (family, score_view.name)
        if key not in self._score_cache:
            arr = np.zeros(len(self.dataset), dtype=np.float64)
            for e, sv in enumerate(self._vector(family)):
                if sv is not None:
                    arr[e] = score_view.score(sv)
            self._score_cache[key] = arr
        return self._score_cache[key]

    def _family_classes(self, family: str) -> np.ndarray:
        if family not in self._class_cache:
            from .core import predicted_class

            arr = np.zeros(len(self.dataset), dtype=np.int64)
            for e, sv in enumerate(self._vector(family)):
                if sv is not None:
                    arr[e] = predicted_class(sv)
            self._class_cache[family] = arr
        return self._class_cache[family]

    def _family_pred(self, family: str, predicate) -> np.ndarray:
        key = (family, predicate.name, predicate.class_index)
        if key not in self._pred_cache:
            arr = np.zeros(len(self.dataset), dtype=bool)
            for e, sv in enumerate(self._vector(family)):
                if sv is not None:
                    arr[e] = predicate.holds(sv)
            self._pred_cache[key] = arr
        return self._pred_cache[key]

    def _family_embeddings(self, family: str) -> np.ndarray:
        if family not in self._emb_cache:
            vecs = self._vector(family)
            dim = next(len(sv.values) for sv in vecs if sv is not None)
            arr = np.zeros((len(self.dataset), dim), dtype=np.float64)
            for e, sv in enumerate(vecs):
                if sv is not None:
                    arr[e] = sv.values
            self._emb_cache[family] = arr
        return self._emb_cache[family]


class _SingleOrPairwiseEvaluator(_ScoredFamilies):
    def __init__(self, plan, dataset, port, cache, fail_fast):
        super().__init__(plan, dataset, port, cache, fail_fast)
        src_texts: List[Optional[TextInput]] = list(dataset.entries)
        flw_texts: List[Optional[TextInput]] = []
        for e, x in enumerate(dataset.entries):
            try:
                flw_texts.append(apply_transform(plan.transform, x))
            except MorphcheckError:
                if fail_fast:
                    raise
                self.bad[e] = True
                flw_texts.append(None)
        views = [plan.view] * len(dataset)
        self._add_family("src", src_texts, views)
        self._add_family("flw", flw_texts, views)
        self._score_all()
        if isinstance(plan, SingleInput):
            self.slot_cols = ((0, "src"), (0, "flw"))
        else:
            self.slot_cols = ((0, "src"), (1, "src"), (0, "flw"), (1, "flw"))

    def recipe(self):
        if isinstance(self.plan, SingleInput):
            return None, self.plan.prop, "implies"
        return self.plan.premise, self.plan.hypothesis, self.plan.connective


class _CompositionalityEvaluator(_ScoredFamilies):
    def __init__(self, plan, dataset, port, cache, fail_fast):
        super().__init__(plan, dataset, port, cache, fail_fast)
        hid_views = []
        for e, x in enumerate(dataset.entries):
            if len(x.spans) != 2:
                raise PlanStructureError(
                    f"compositionality entries need two insertion spans, {x.id!r} has {len(x.spans)}"
                )
            hid_views.append(
                ViewRequest(kind="hidden", layer=plan.hidden_view.layer, spans=x.spans)
            )
        entries: List[Optional[TextInput]] = list(dataset.entries)
        self._add_family("hid", entries, hid_views)
        self._add_family("out", entries, [plan.output_view] * len(dataset))
        self._score_all()
        self.slot_cols = ((0, "hid"), (1, "hid"), (0, "out"), (1, "out"))

    def recipe(self):
        premise = Ord(self.plan.hidden_score, 0, 1)
        hypothesis: PropertyExpr = Ord(self.plan.output_score, 2, 3)
        if self.plan.monotonicity == "up":
            hypothesis = Not(hypothesis)
        return premise, hypothesis, self.plan.connective


class _TransitivityEvaluator(_Evaluator):
    """Predicate truth precomputed for every ordered pair of dataset entries."""

    def __init__(self, plan, dataset, port, cache: ScoreCache, fail_fast: bool):
        super().__init__(plan, dataset)
        from .transforms import form_pair

        k = len(dataset)
        requests = []
        pair_texts = {}
        for i in range(k):
            for j in range(k):
                if i == j:
                    continue
                text = form_pair(dataset[i], dataset[j], plan.separator)
                pair_texts[(i, j)] = text
                requests.append((text, plan.view))
        try:
            cache.ensure(port, requests)
        except MorphcheckError:
            if fail_fast:
                raise
        self._v = np.zeros((k, k), dtype=bool)
        pair_bad = np.zeros((k, k), dtype=bool)
        for (i, j), text in pair_texts.items():
            try:
                sv = cache.get(text, plan.view)
                self._v[i, j] = plan.predicate.holds(sv)
            except (KeyError, MorphcheckError):
                pair_bad[i, j] = True
        self._pair_bad = pair_bad

    slot_cols = ()  # slots are pair-indexed, handled directly below

    # slots: 0 -> (col0, col1), 1 -> (col1, col2), 2 -> (col0, col2)
    _SLOT_PAIRS = ((0, 1), (1, 2), (0, 2))

    def _eval(self, expr, idx):
        if isinstance(expr, Pred):
            a, b = self._SLOT_PAIRS[expr.i]
            return self._v[idx[:, a], idx[:, b]]
        return super()._eval(expr, idx)

    def codes(self, idx, premise, hypothesis, connective):
        out = super().codes(idx, premise, hypothesis, connective)
        if self._pair_bad.any():
            bad = np.zeros(idx.shape[0], dtype=bool)
            for a, b in self._SLOT_PAIRS:
                bad |= self._pair_bad[idx[:, a], idx[:, b]]
            out[bad] = _ERR
        return out

    def recipe(self):
        p = self.plan.predicate
        return And(Pred(p, 0), Pred(p, 1)), Pred(p, 2), "implies"


def _make_evaluator(plan, dataset, port, cache, fail_fast) -> _Evaluator:
    if isinstance(plan, (SingleInput, PairwiseSystematicity)):
        return _SingleOrPairwiseEvaluator(plan, dataset, port, cache, fail_fast)
    if isinstance(plan, PairwiseCompositionality):
        return _CompositionalityEvaluator(plan, dataset, port, cache, fail_fast)
    if isinstance(plan, ThreeWayTransitivity):
        return _TransitivityEvaluator(plan, dataset, port, cache, fail_fast)
    raise PlanStructureError(f"unknown plan type {type(plan).__name__}")


_CHUNK = 1 << 18


def _process_chunk(evaluator, mode, k, ranks: np.ndarray, group_key: str, retain_records: bool):
    idx = unrank_array(mode, k, ranks)
    premise, hypothesis, connective = evaluator.recipe()
    codes = evaluator.codes(idx, premise, hypothesis, connective)
    counters = _Counters()
    counters.add_codes(codes)
    nonvac = (codes == _SAT) | (codes == _VIOL)
    viol = codes == _VIOL
    input_violated = np.zeros(k, dtype=np.int64)
    input_nonvac = np.zeros(k, dtype=np.int64)
    for col in range(idx.shape[1]):
        input_violated += np.bincount(idx[viol, col], minlength=k)
        input_nonvac += np.bincount(idx[nonvac, col], minlength=k)
    records = None
    if retain_records:
        records = [
            (tuple(int(v) for v in row), group_key, _CODE_TO_VERDICT[int(c)].value)
            for row, c in zip(idx, codes)
        ]
    return counters, input_violated, input_nonvac, records


def run(
    plan,
    dataset: Dataset,
    mode: EnumerationMode,
    port,
    cache: Optional[ScoreCache] = None,
    workers: int = 1,
    retain_records: bool = False,
    fail_fast: bool = False,
    case_sink=None,
) -> VerdictSet:
    """Execute one relation plan over a dataset.

    Every unique (text, view) pair is scored at most once (the cache
    guarantee). The report is identical regardless of worker count: rank
    ranges are partitioned deterministically and counters merge
    associatively.
    """
    if len(dataset) == 0:
        raise EmptyEnumeration("dataset is empty")
    if mode.arity != plan.arity:
        raise PlanStructureError(
            f"{type(plan).__name__} (arity {plan.arity}) incompatible with {mode.shape}"
        )
    cache = cache if cache is not None else ScoreCache()
    k = len(dataset)
    total = count(mode, k)
    evaluator = _make_evaluator(plan, dataset, port, cache, fail_fast)
    # populate the evaluator's lazy per-slot arrays before any parallel work
    evaluator.codes(np.zeros((0, mode.arity), dtype=np.int64), *evaluator.recipe())
    ranks = _ranks_for(mode, total)
    rank_array = np.fromiter(ranks, dtype=np.int64) if mode.selection == "sample" else None

    n = total if rank_array is None else rank_array.size
    chunks = []
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        if rank_array is None:
            chunks.append(np.arange(start, stop, dtype=np.int64))
        else:
            chunks.append(rank_array[start:stop])

    retain = retain_records or case_sink is not None

    def work(chunk):
        return _process_chunk(evaluator, mode, k, chunk, plan.group_key, retain)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(chunk) for chunk in chunks]

    vs = VerdictSet(
        input_ids=tuple(e.id for e in dataset),
        input_violated=np.zeros(k, dtype=np.int64),
        input_nonvacuous=np.zeros(k, dtype=np.int64),
        records=[] if retain_records else None,
    )
    group = vs.by_group.setdefault(plan.group_key, _Counters())
    for counters, iv, inv, records in results:
        vs.counters.merge(counters)
        group.merge(counters)
        vs.input_violated += iv
        vs.input_nonvacuous += inv
        if records is not None:
            if case_sink is not None:
                for tup, gkey, verd in records:
                    case_sink.write(
                        json.dumps({"tuple": list(tup), "group": gkey, "verdict": verd}) + "\n"
                    )
            if vs.records is not None:
                vs.records.extend(records)
    return vs


def run_suite(plans, dataset, mode, port, cache=None, **kwargs) -> VerdictSet:
    """Run several plans (e.g. one per transformation) over one dataset with a
    shared score cache, merging verdicts."""
    cache = cache if cache is not None else ScoreCache()
    merged = VerdictSet()
    for plan in plans:
        merged.merge(run(plan, dataset, mode, port, cache=cache, **kwargs))
    return merged


def premise_filter(plan: ThreeWayTransitivity, triplets, port, cache: Optional[ScoreCache] = None):
    """Keep the triplets whose first two pair predictions are true."""
    cache = cache if cache is not None else ScoreCache()
    from .transforms import form_pair

    survivors = []
    for trip in triplets:
        x1, x2, x3 = trip
        x12 = form_pair(x1, x2, plan.separator)
        x23 = form_pair(x2, x3, plan.separator)
        cache.ensure(port, [(x12, plan.view), (x23, plan.view)])
        if plan.predicate.holds(cache.get(x12, plan.view)) and plan.predicate.holds(
            cache.get(x23, plan.view)
        ):
            survivors.append(trip)
    return survivors


@dataclass(frozen=True)
class ReportRow:
    key: str
    proportion: float
    violated: int
    satisfied: int
    vacuous: int
    errors: int
    zero_denominator: bool


@dataclass(frozen=True)
class ViolationReport:
    grouping: str
    rows: Tuple[ReportRow, ...]


def _make_rows(items) -> Tuple[ReportRow, ...]:
    rows = []
    for key, (violated, satisfied, vacuous, errors) in items:
        denom = violated + satisfied
        rows.append(
            ReportRow(
                key=key,
                proportion=violated / denom if denom else 0.0,
                violated=violated,
                satisfied=satisfied,
                vacuous=vacuous,
                errors=errors,
                zero_denominator=denom == 0,
            )
        )
    rows.sort(key=lambda r: (-r.proportion, r.key))
    return tuple(rows)


def aggregate(vs: VerdictSet, grouping: str) -> ViolationReport:
    """Sorted violation-proportion rows; vacuous cases are excluded from the
    denominator (raw counts stay recoverable from the row)."""
    if grouping in ("by_source_input", "by_insertion_pair"):
        # for compositionality runs each dataset entry is one insertion pair
        if vs.input_violated is None:
            raise ValueError("verdict set carries no per-input counts")
        items = []
        for e, input_id in enumerate(vs.input_ids):
            violated = int(vs.input_violated[e])
            nonvac = int(vs.input_nonvacuous[e])
            items.append((input_id, (violated, nonvac - violated, 0, 0)))
        return ViolationReport(grouping=grouping, rows=_make_rows(items))
    if grouping in ("by_transformation", "by_context", "by_language"):
        items = [
            (key, (c.violated, c.satisfied, c.vacuous, c.errors))
            for key, c in vs.by_group.items()
        ]
        return ViolationReport(grouping=grouping, rows=_make_rows(items))
    raise ValueError(f"unknown grouping {grouping!r}")


def render_json(report: ViolationReport) -> str:
    payload = {
        "grouping": report.grouping,
        "rows": [
            {
                "key": r.key,
                "proportion": round(r.proportion, 6),
                "violated": r.violated,
                "satisfied": r.satisfied,
                "vacuous": r.vacuous,
                "errors": r.errors,
                "zero_denominator": r.zero_denominator,
            }
            for r in report.rows
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render_csv(report: ViolationReport) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "proportion", "violated", "satisfied", "vacuous", "errors"])
    for r in report.rows:
        writer.writerow([r.key, f"{r.proportion:.6f}", r.violated, r.satisfied, r.vacuous, r.errors])
    return buf.getvalue()


def render_markdown(report: ViolationReport) -> str:
    headers = ["Violat.", report.grouping.replace("by_", "").replace("_", " ").title(), "Violated", "Satisfied", "Vacuous"]
    rows = [
        [f"{r.proportion:.3f}", r.key, str(r.violated), str(r.satisfied), str(r.vacuous)]
        for r in report.rows
    ]
    widths = [max(len(h), *(len(row[c]) for row in rows)) if rows else len(h) for c, h in enumerate(headers)]
    lines = [
        "| " + " | ".join(h.ljust(widths[c]) for c, h in enumerate(headers)) + " |",
        "| " + " | ".join("-" * widths[c] for c in range(len(headers))) + " |",
    ]
    for row in rows:
        lines.append("| " + " | ".join(row[c].ljust(widths[c]) for c in range(len(headers))) + " |")
    return "\n".join(lines) + "\n"
