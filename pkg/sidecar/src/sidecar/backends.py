"""Scoring backends behind the HTTP layer.

A backend answers one (text, view) request at a time; batching, validation
and error mapping live in the service layer.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .config import ServiceConfig


class ViewError(ValueError):
    """Raised for malformed or unsupported views; mapped to HTTP 400."""


class EchoBackend:
    """Deterministic conformance backend: uniform softmax, zero vectors."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.model_id = "echo"
        self.classes = tuple(config.echo_classes)
        self.hidden_dim = config.echo_hidden_dim
        self.n_layers = 13

    def softmax(self, text: str) -> List[float]:
        n = len(self.classes)
        return [1.0 / n] * n

    def hidden(self, text: str, layer: int, spans: Sequence[Tuple[int, int]]) -> List[float]:
        return [0.0] * (len(spans) * self.hidden_dim)

    def embedding(self, text: str) -> List[float]:
        return [0.0] * self.hidden_dim


class TransformerBackend:
    """Checkpoint-backed scorer over a sequence-classification model.

    Hidden views mean-pool token vectors at the requested layer; character
    spans map to tokens through the tokenizer's offset alignment, rounding
    outward so partially covered tokens are included. Pair inputs for NLI
    checkpoints are encoded by splitting on the first tab character.
    """

    def __init__(self, config: ServiceConfig):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self.config = config
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(config.checkpoint)
        self.model = AutoModelForSequenceClassification.from_pretrained(
            config.checkpoint, output_hidden_states=True
        )
        self.model.to(config.device)
        self.model.eval()
        id2label = self.model.config.id2label
        self.classes = tuple(id2label[i] for i in sorted(id2label))
        self.hidden_dim = self.model.config.hidden_size
        self.n_layers = self.model.config.num_hidden_layers + 1  # embeddings + blocks
        revision = getattr(self.model.config, "_commit_hash", None) or "local"
        self.model_id = f"{config.checkpoint}@{revision};pair-encoding=tab-split"

    def _forward(self, text: str):
        encoded = self.tokenizer(
            *text.split("\t", 1),
            return_tensors="pt",
            return_offsets_mapping=True,
            truncation=True,
        )
        offsets = encoded.pop("offset_mapping")[0].tolist()
        encoded = {k: v.to(self.config.device) for k, v in encoded.items()}
        with self._torch.no_grad():
            output = self.model(**encoded)
        return output, offsets

    def softmax(self, text: str) -> List[float]:
        output, _ = self._forward(text)
        probs = self._torch.softmax(output.logits[0], dim=-1)
        return [float(p) for p in probs]

    def hidden(self, text: str, layer: int, spans) -> List[float]:
        output, offsets = self._forward(text)
        states = output.hidden_states[layer][0]
        pooled: List[float] = []
        for start, end in spans:
            rows = [
                i
                for i, (ts, te) in enumerate(offsets)
                if te > ts and ts < end and te > start  # outward rounding
            ]
            if not rows:
                raise ViewError(f"span [{start}, {end}) covers no tokens")
            vec = states[rows].mean(dim=0)
            pooled.extend(float(v) for v in vec)
        return pooled

    def embedding(self, text: str) -> List[float]:
        output, _ = self._forward(text)
        vec = output.hidden_states[-1][0].mean(dim=0)
        return [float(v) for v in vec]


def make_backend(config: ServiceConfig):
    if config.echo_mode:
        return EchoBackend(config)
    return TransformerBackend(config)
