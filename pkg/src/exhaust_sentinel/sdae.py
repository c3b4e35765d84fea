"""Greedy layer-wise stacking of denoising autoencoders.

Layer 1 is a DAE trained on the raw vectors.  Its decoder is thrown away and
the *clean* (uncorrupted) data is pushed through the trained encoder to make
the training set for layer 2, and so on up the stack.  What remains is a pure
feed-forward feature extractor: a chain of sigmoid encoder layers.
Corruption only ever happens inside an individual layer's training loop —
extraction is deterministic and noise-free.

With the default architecture a 27-can profile maps 27 -> 30 -> 12.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._rng import make_rng
from .dae import DaeConfig, sigmoid, train_dae


@dataclass
class EncoderLayer:
    """One retained encoder half: weights (d_out, d_in) and bias (d_out,)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("encoder layer needs (d_out, d_in) weights "
                             "and a matching bias")

    def apply(self, x: np.ndarray) -> np.ndarray:
        """sigmoid(weights x + bias) for a vector or batch of rows."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.weights.shape[1]:
            raise ValueError(
                f"input has width {x.shape[-1]}, layer expects "
                f"{self.weights.shape[1]}"
            )
        return sigmoid(x @ self.weights.T + self.bias)


@dataclass
class SdaeModel:
    """An ordered chain of trained encoders (decoders are not kept).

    ``layers[i]`` maps dimension d_i to d_{i+1}; consecutive widths must
    chain.
    """

    layers: list[EncoderLayer]

    def __post_init__(self) -> None:
        for prev, nxt in zip(self.layers, self.layers[1:]):
            d_out = prev.weights.shape[0]
            d_in = nxt.weights.shape[1]
            if d_out != d_in:
                raise ValueError(
                    f"layer widths do not chain: {d_out} feeds a layer "
                    f"expecting {d_in}"
                )

    @property
    def widths(self) -> tuple[int, ...]:
        """Dimension chain, input first (e.g. (27, 30, 12))."""
        if not self.layers:
            return ()
        return (self.layers[0].weights.shape[1],) + tuple(
            layer.weights.shape[0] for layer in self.layers
        )


def train_sdae(
    data: np.ndarray,
    layer_configs: Sequence[DaeConfig],
    rng: np.random.Generator | None = None,
    loss_log: list[np.ndarray] | None = None,
) -> SdaeModel:
    """Train a stack of DAEs greedily, one layer at a time.

    Args:
        data: (n, d) training vectors for the bottom layer.
        layer_configs: one DaeConfig per layer, bottom first; each config's
            ``d_in`` must equal the previous layer's ``d_hidden``.
        rng: randomness for initialization, shuffling, and corruption across
            all layers; defaults to a Philox stream keyed by the first
            layer's seed.
        loss_log: optional list; when given, each layer's per-epoch mean
            clean-reconstruction loss trace is appended to it.

    Returns:
        SdaeModel holding the trained encoders only (decoders discarded).

    Raises:
        ValueError: empty data or specs, or widths that do not chain.
        RuntimeError: a diverging layer, annotated with its index.
    """
    x = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if x.size == 0:
        raise ValueError("training data is empty")
    if len(layer_configs) == 0:
        raise ValueError("need at least one layer config")
    if rng is None:
        rng = make_rng(layer_configs[0].seed)

    layers: list[EncoderLayer] = []
    current = x
    for index, cfg in enumerate(layer_configs, start=1):
        if cfg.d_in != current.shape[1]:
            raise ValueError(
                f"layer {index} expects input width {cfg.d_in}, "
                f"got {current.shape[1]}"
            )
        try:
            result = train_dae(current, cfg, rng)
        except RuntimeError as exc:
            raise RuntimeError(f"layer {index}: {exc}") from exc
        layer = EncoderLayer(
            weights=result.params.w_enc, bias=result.params.b_enc
        )
        layers.append(layer)
        if loss_log is not None:
            loss_log.append(result.epoch_losses)
        # Clean encodings of the clean inputs feed the next layer.
        current = layer.apply(current)
    return SdaeModel(layers=layers)


def extract(x: np.ndarray, model: SdaeModel) -> np.ndarray:
    """Push a vector (or batch of rows) through every encoder in order.

    An empty layer list is the identity map.  Output entries are sigmoid
    activations, so they lie strictly inside (0, 1) whenever the stack is
    non-empty.
    """
    out = np.asarray(x, dtype=np.float64)
    for layer in model.layers:
        out = layer.apply(out)
    return out


def default_layer_configs(
    d_in: int,
    widths: Sequence[int] = (30, 12),
    template: DaeConfig | None = None,
) -> list[DaeConfig]:
    """Build a chained config list from a width sequence.

    Every layer inherits the template's hyperparameters (corruption, learning
    rate, momentum, epochs, ...); only the dimensions change.  With the
    defaults this yields the 27 -> 30 -> 12 architecture.
    """
    if len(widths) == 0:
        raise ValueError("need at least one layer width")
    if template is None:
        template = DaeConfig(d_in=d_in, d_hidden=int(widths[0]))
    configs = []
    current = d_in
    for width in widths:
        configs.append(replace(template, d_in=current, d_hidden=int(width)))
        current = int(width)
    return configs
