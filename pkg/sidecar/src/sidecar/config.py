from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple


@dataclass(frozen=True)
class ServiceConfig:
    """Resolved service settings.

    layer_policy controls which hidden layers a request may ask for:
    "all" exposes every layer index; "last:N" exposes only the N layers
    closest to the output (negative indices -1..-N).
    """

    checkpoint: Optional[str] = None
    device: str = "cpu"
    max_batch: int = 64
    layer_policy: str = "all"
    echo_mode: bool = False
    # echo-backend declarations; a loaded checkpoint overrides these
    echo_classes: Tuple[str, ...] = ("negative", "positive")
    echo_hidden_dim: int = 16

    def __post_init__(self):
        if not self.echo_mode and not self.checkpoint:
            raise ValueError("need a checkpoint unless echo_mode is set")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if self.layer_policy != "all":
            prefix, _, depth = self.layer_policy.partition(":")
            if prefix != "last" or not depth.isdigit() or int(depth) < 1:
                raise ValueError(f"bad layer policy {self.layer_policy!r}")

    def layer_allowed(self, layer: int, n_layers: int) -> bool:
        if not -n_layers <= layer < n_layers:
            return False
        if self.layer_policy == "all":
            return True
        depth = int(self.layer_policy.partition(":")[2])
        negative = layer if layer < 0 else layer - n_layers
        return negative >= -depth
