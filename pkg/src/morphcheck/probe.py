"""Linear probe: a binary logistic-regression classifier trained on hidden
representations, used as the hidden-premise score in pairwise
compositionality.

Training is full-batch gradient descent from a zero initialization, so it is
deterministic; the seed only shuffles order in optional mini-batch mode.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import ScoreVector
from .errors import DegenerateLabels, DimensionMismatch

__all__ = ["LinearProbe", "ProbeExample", "train", "score", "grad_check"]


@dataclass(frozen=True)
class ProbeExample:
    z: ScoreVector
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")


@dataclass(frozen=True)
class LinearProbe:
    weights: Tuple[float, ...]
    bias: float
    trained_on: Dict[str, float] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.weights)

    def score(self, z: Union[ScoreVector, Sequence[float]]) -> float:
        """sigmoid(<w, z> + b), strictly inside (0, 1)."""
        values = z.values if isinstance(z, ScoreVector) else tuple(z)
        if len(values) != self.dim:
            raise DimensionMismatch(f"probe dim {self.dim}, input dim {len(values)}")
        logit = float(np.dot(self.weights, values)) + self.bias
        s = float(_sigmoid(np.array([logit]))[0])
        # clamp away from the saturation endpoints so the score is usable as a
        # strict-order premise even for extreme logits
        tiny = float(np.finfo(np.float64).tiny)
        return min(max(s, tiny), 1.0 - float(np.finfo(np.float64).epsneg))

    def to_json(self) -> str:
        return json.dumps(
            {
                "weights": list(self.weights),
                "bias": self.bias,
                "dim": self.dim,
                "meta": self.trained_on,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "LinearProbe":
        obj = json.loads(text)
        probe = cls(weights=tuple(obj["weights"]), bias=obj["bias"], trained_on=obj.get("meta", {}))
        if probe.dim != obj["dim"]:
            raise DimensionMismatch("declared dim does not match weights")
        return probe

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "LinearProbe":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _as_matrix(examples: Sequence[ProbeExample]) -> Tuple[np.ndarray, np.ndarray]:
    dims = {len(ex.z.values) for ex in examples}
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed example dimensions {sorted(dims)}")
    X = np.array([ex.z.values for ex in examples], dtype=np.float64)
    y = np.array([ex.label for ex in examples], dtype=np.float64)
    return X, y


def loss_and_grad(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray
) -> Tuple[float, np.ndarray, float]:
    """Mean logistic loss and its analytic gradient."""
    logits = X @ w + b
    # log(1 + exp(-|x|)) + max(0, -x*sign) form keeps this overflow-safe
    loss = float(np.mean(np.maximum(logits, 0) - logits * y + np.log1p(np.exp(-np.abs(logits)))))
    residual = _sigmoid(logits) - y
    grad_w = X.T @ residual / len(y)
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def train(
    examples: Sequence[ProbeExample],
    epochs: int = 1000,
    learning_rate: float = 0.1,
    seed: int = 0,
    batch_size: Optional[int] = None,
) -> LinearProbe:
    """Full-batch gradient descent on the mean logistic loss, zero init."""
    if len(examples) < 2:
        raise DegenerateLabels("need at least 2 examples")
    labels = {ex.label for ex in examples}
    if labels != {0, 1}:
        raise DegenerateLabels("training set must contain both labels")
    X, y = _as_matrix(examples)
    n, dim = X.shape
    w = np.zeros(dim)
    b = 0.0
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        if batch_size is None or batch_size >= n:
            _, gw, gb = loss_and_grad(w, b, X, y)
            w -= learning_rate * gw
            b -= learning_rate * gb
        else:
            order = rng.permutation(n)
            for start in range(0, n, batch_size):
                sel = order[start : start + batch_size]
                _, gw, gb = loss_and_grad(w, b, X[sel], y[sel])
                w -= learning_rate * gw
                b -= learning_rate * gb
    final_loss, _, _ = loss_and_grad(w, b, X, y)
    accuracy = float(np.mean((_sigmoid(X @ w + b) >= 0.5) == (y == 1)))
    return LinearProbe(
        weights=tuple(float(v) for v in w),
        bias=float(b),
        trained_on={
            "examples": float(n),
            "epochs": float(epochs),
            "final_loss": final_loss,
            "train_accuracy": accuracy,
        },
    )


def score(probe: LinearProbe, z) -> float:
    return probe.score(z)


def grad_check(
    examples: Sequence[ProbeExample],
    w: Optional[np.ndarray] = None,
    b: float = 0.0,
    epsilon: float = 1e-6,
) -> float:
    """Max relative error between the analytic loss gradient and central
    finite differences, per coordinate (bias included)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    X, y = _as_matrix(examples)
    dim = X.shape[1]
    w = np.zeros(dim) if w is None else np.asarray(w, dtype=np.float64)
    _, grad_w, grad_b = loss_and_grad(w, b, X, y)
    analytic = np.concatenate([grad_w, [grad_b]])
    numeric = np.empty(dim + 1)
    for c in range(dim):
        wp, wm = w.copy(), w.copy()
        wp[c] += epsilon
        wm[c] -= epsilon
        lp, _, _ = loss_and_grad(wp, b, X, y)
        lm, _, _ = loss_and_grad(wm, b, X, y)
        numeric[c] = (lp - lm) / (2 * epsilon)
    lp, _, _ = loss_and_grad(w, b + epsilon, X, y)
    lm, _, _ = loss_and_grad(w, b - epsilon, X, y)
    numeric[dim] = (lp - lm) / (2 * epsilon)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-12)
    return float(np.max(np.abs(analytic - numeric) / denom))
