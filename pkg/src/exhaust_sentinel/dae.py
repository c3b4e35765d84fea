"""Single denoising autoencoder trained with mini-batch SGD + momentum.

The model corrupts each input, encodes it through one sigmoid hidden layer,
decodes it back (linear or sigmoid output), and is trained to reconstruct the
*clean* input.  Everything is implemented directly on numpy arrays:
corruption schemes, both reconstruction losses, exact analytic gradients
(checked against finite differences in the test suite), optional L2 weight
decay on both weight matrices, and the classical heavy-ball update
``v <- momentum * v - lr * grad; theta <- theta + v``.

Shapes follow the convention: encoder weights are ``(d_hidden, d_in)``,
decoder weights ``(d_in, d_hidden)`` (untied), data rows are examples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._ioutil import atomic_write_text
from ._rng import make_rng

DECODER_ACTIVATIONS = ("linear", "sigmoid")
LOSS_KINDS = ("squared", "cross_entropy")
CORRUPTION_KINDS = ("gaussian", "masking", "salt_pepper")

_CE_EPS = 1e-12  # clamp for log arguments in the cross-entropy loss


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function, elementwise."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class Corruption:
    """How to corrupt inputs before encoding.

    kind "gaussian" adds Normal(0, sigma^2) noise to every coordinate;
    "masking" forces exactly round(rate * d) coordinates (chosen uniformly
    without replacement, per example) to 0; "salt_pepper" sets that many
    coordinates to ``vmin`` or ``vmax``, each picked by an independent fair
    coin.  The deterministic count uses Python's round (half to even).
    """

    kind: str = "masking"
    rate: float = 0.2
    sigma: float = 0.0
    vmin: float = 0.0
    vmax: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in CORRUPTION_KINDS:
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        if self.kind in ("masking", "salt_pepper") and not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"corruption rate must be in [0, 1], got {self.rate}")
        if self.kind == "gaussian" and self.sigma < 0.0:
            raise ValueError(f"gaussian sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class DaeConfig:
    """Dimensions, architecture choices, and training hyperparameters."""

    d_in: int
    d_hidden: int
    decoder_activation: str = "linear"
    loss_kind: str = "squared"
    corruption: Corruption = field(default_factory=Corruption)
    learning_rate: float = 0.02
    momentum: float = 0.5
    epochs: int = 200
    batch_size: int = 32
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d_in < 1 or self.d_hidden < 1:
            raise ValueError("d_in and d_hidden must be >= 1")
        if self.decoder_activation not in DECODER_ACTIVATIONS:
            raise ValueError(
                f"decoder_activation must be one of {DECODER_ACTIVATIONS}"
            )
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
        if self.loss_kind == "cross_entropy" and self.decoder_activation != "sigmoid":
            raise ValueError("cross_entropy loss requires the sigmoid decoder")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be > 0")
        if self.momentum < 0.0 or self.momentum >= 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.weight_decay < 0.0:
            raise ValueError("weight_decay must be >= 0")


@dataclass
class DaeParams:
    """The four trainable blocks of one autoencoder.

    w_enc: (d_hidden, d_in); b_enc: (d_hidden,);
    w_dec: (d_in, d_hidden);  b_dec: (d_in,).
    """

    w_enc: np.ndarray
    b_enc: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray

    def __post_init__(self) -> None:
        self.w_enc = np.asarray(self.w_enc, dtype=np.float64)
        self.b_enc = np.asarray(self.b_enc, dtype=np.float64)
        self.w_dec = np.asarray(self.w_dec, dtype=np.float64)
        self.b_dec = np.asarray(self.b_dec, dtype=np.float64)
        d_hidden, d_in = self.w_enc.shape
        if self.b_enc.shape != (d_hidden,) or self.w_dec.shape != (d_in, d_hidden) \
                or self.b_dec.shape != (d_in,):
            raise ValueError("parameter block shapes are inconsistent")


@dataclass
class Grads:
    """Gradient of the per-example objective, one array per parameter block."""

    w_enc: np.ndarray
    b_enc: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray


@dataclass
class DaeTrainResult:
    """Final parameters plus the per-epoch mean clean-reconstruction loss."""

    params: DaeParams
    epoch_losses: np.ndarray  # shape (epochs,)
    n_updates: int


def init_params(cfg: DaeConfig, rng: np.random.Generator) -> DaeParams:
    """Fan-based uniform initialization; biases start at zero.

    The base limit is sqrt(6 / (d_in + d_hidden)), scaled by 4 for weights
    feeding a sigmoid (the encoder always, the decoder only when its
    activation is sigmoid).
    """
    base = np.sqrt(6.0 / (cfg.d_in + cfg.d_hidden))
    enc_limit = 4.0 * base
    dec_limit = 4.0 * base if cfg.decoder_activation == "sigmoid" else base
    return DaeParams(
        w_enc=rng.uniform(-enc_limit, enc_limit, size=(cfg.d_hidden, cfg.d_in)),
        b_enc=np.zeros(cfg.d_hidden),
        w_dec=rng.uniform(-dec_limit, dec_limit, size=(cfg.d_in, cfg.d_hidden)),
        b_dec=np.zeros(cfg.d_in),
    )


def encode(x: np.ndarray, params: DaeParams) -> np.ndarray:
    """Hidden representation sigmoid(w_enc x + b_enc).

    Accepts one vector ``(d_in,)`` or a batch ``(n, d_in)`` (row-wise).
    Every output entry lies strictly inside (0, 1).
    """
    x = np.asarray(x, dtype=np.float64)
    d_in = params.w_enc.shape[1]
    if x.shape[-1] != d_in:
        raise ValueError(f"input has length {x.shape[-1]}, expected {d_in}")
    return sigmoid(x @ params.w_enc.T + params.b_enc)


def decode(h: np.ndarray, params: DaeParams, activation: str = "linear") -> np.ndarray:
    """Reconstruction s_g(w_dec h + b_dec); s_g is identity or sigmoid."""
    if activation not in DECODER_ACTIVATIONS:
        raise ValueError(f"activation must be one of {DECODER_ACTIVATIONS}")
    h = np.asarray(h, dtype=np.float64)
    d_hidden = params.w_dec.shape[1]
    if h.shape[-1] != d_hidden:
        raise ValueError(f"hidden vector has length {h.shape[-1]}, expected {d_hidden}")
    a = h @ params.w_dec.T + params.b_dec
    return a if activation == "linear" else sigmoid(a)


def reconstruction_loss(x: np.ndarray, y: np.ndarray, kind: str = "squared") -> float:
    """Reconstruction error between target ``x`` and output ``y``.

    squared: sum_i (x_i - y_i)^2.
    cross_entropy: -sum_i [x_i log y_i + (1 - x_i) log(1 - y_i)], requiring
    x in [0, 1]; y is clamped to [1e-12, 1 - 1e-12] before the logs.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if kind == "squared":
        return float(np.sum((x - y) ** 2))
    if kind == "cross_entropy":
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("cross_entropy targets must lie in [0, 1]")
        yc = np.clip(y, _CE_EPS, 1.0 - _CE_EPS)
        return float(-np.sum(x * np.log(yc) + (1.0 - x) * np.log1p(-yc)))
    raise ValueError(f"unknown loss kind {kind!r}")


def corrupt(x: np.ndarray, spec: Corruption, rng: np.random.Generator) -> np.ndarray:
    """Corrupted copy of ``x`` (vector or batch of row vectors).

    Masking and salt_pepper pick exactly ``round(rate * d)`` coordinates per
    example, uniformly without replacement; gaussian perturbs every
    coordinate.  The input is never modified.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    n, d = xb.shape

    if spec.kind == "gaussian":
        out = xb + rng.normal(0.0, spec.sigma, size=xb.shape)
    else:
        k = int(round(spec.rate * d))
        out = xb.copy()
        if k > 0:
            # Per-row uniform draw + argsort = k indices without replacement.
            order = np.argsort(rng.random((n, d)), axis=1)[:, :k]
            rows = np.repeat(np.arange(n), k)
            cols = order.ravel()
            if spec.kind == "masking":
                out[rows, cols] = 0.0
            else:  # salt_pepper
                coins = rng.random((n, k)).ravel() < 0.5
                out[rows, cols] = np.where(coins, spec.vmin, spec.vmax)
    return out[0] if single else out


def _delta_out(x_clean: np.ndarray, y: np.ndarray, cfg: DaeConfig) -> np.ndarray:
    """d(loss)/d(pre-activation of the output layer), rows = examples."""
    if cfg.loss_kind == "squared":
        if cfg.decoder_activation == "linear":
            return 2.0 * (y - x_clean)
        return 2.0 * (y - x_clean) * y * (1.0 - y)
    # cross_entropy + sigmoid: the sigmoid derivative cancels the log terms.
    return y - x_clean


def gradients(
    x_clean: np.ndarray,
    x_tilde: np.ndarray,
    params: DaeParams,
    cfg: DaeConfig,
) -> Grads:
    """Exact gradient of L(x_clean, decode(encode(x_tilde))) + decay term.

    The decay term is weight_decay * (||w_enc||_F^2 + ||w_dec||_F^2);
    biases are not decayed.
    """
    x_clean = np.asarray(x_clean, dtype=np.float64)
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    h = encode(x_tilde, params)
    y = decode(h, params, cfg.decoder_activation)

    d_a = _delta_out(x_clean, y, cfg)          # (d_in,)
    g_wdec = np.outer(d_a, h) + 2.0 * cfg.weight_decay * params.w_dec
    g_bdec = d_a.copy()
    d_h = params.w_dec.T @ d_a                 # (d_hidden,)
    d_z = d_h * h * (1.0 - h)
    g_wenc = np.outer(d_z, x_tilde) + 2.0 * cfg.weight_decay * params.w_enc
    g_benc = d_z.copy()
    return Grads(w_enc=g_wenc, b_enc=g_benc, w_dec=g_wdec, b_dec=g_bdec)


def momentum_step(
    value: np.ndarray,
    grad: np.ndarray,
    velocity: np.ndarray,
    lr: float,
    momentum: float,
) -> None:
    """One in-place heavy-ball update: v <- m v - lr g; value <- value + v."""
    velocity *= momentum
    velocity -= lr * grad
    value += velocity


def objective(x_clean: np.ndarray, y: np.ndarray, params: DaeParams,
              cfg: DaeConfig) -> float:
    """Per-example training objective: reconstruction loss + weight decay."""
    decay = cfg.weight_decay * (
        float(np.sum(params.w_enc**2)) + float(np.sum(params.w_dec**2))
    )
    return reconstruction_loss(x_clean, y, cfg.loss_kind) + decay


def mean_clean_loss(data: np.ndarray, params: DaeParams, cfg: DaeConfig) -> float:
    """Mean reconstruction loss over ``data`` with no corruption applied."""
    x = np.atleast_2d(np.asarray(data, dtype=np.float64))
    y = decode(encode(x, params), params, cfg.decoder_activation)
    if cfg.loss_kind == "squared":
        per_row = np.sum((x - y) ** 2, axis=1)
    else:
        yc = np.clip(y, _CE_EPS, 1.0 - _CE_EPS)
        per_row = -np.sum(x * np.log(yc) + (1.0 - x) * np.log1p(-yc), axis=1)
    return float(per_row.mean())


def train_dae(
    data: Iterable[np.ndarray] | np.ndarray,
    cfg: DaeConfig,
    rng: np.random.Generator | None = None,
) -> DaeTrainResult:
    """Train one denoising autoencoder.

    Runs ``cfg.epochs`` passes of mini-batch SGD with momentum over the
    (reshuffled) data; every example is freshly corrupted each epoch, and
    the loss always compares the reconstruction against the clean input.
    After each epoch the mean clean-reconstruction loss over the full
    training set is recorded.

    Args:
        data: training vectors, shape (n, d_in) or an iterable of vectors.
        cfg: architecture and hyperparameters.
        rng: source of randomness; defaults to a Philox stream keyed by
            ``cfg.seed``.

    Returns:
        DaeTrainResult with final parameters, the per-epoch loss trace, and
        the number of SGD updates performed.

    Raises:
        ValueError: empty data or wrong vector length.
        RuntimeError: "divergence at epoch E" when the epoch loss goes
            non-finite.
    """
    x = np.asarray(list(data) if not isinstance(data, np.ndarray) else data,
                   dtype=np.float64)
    x = np.atleast_2d(x)
    if x.size == 0:
        raise ValueError("training data is empty")
    n, d = x.shape
    if d != cfg.d_in:
        raise ValueError(f"data vectors have length {d}, expected {cfg.d_in}")
    if cfg.loss_kind == "cross_entropy" and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("cross_entropy training data must lie in [0, 1]")
    if rng is None:
        rng = make_rng(cfg.seed)

    params = init_params(cfg, rng)
    vel = Grads(
        w_enc=np.zeros_like(params.w_enc),
        b_enc=np.zeros_like(params.b_enc),
        w_dec=np.zeros_like(params.w_dec),
        b_dec=np.zeros_like(params.b_dec),
    )
    lam = cfg.weight_decay
    epoch_losses = np.empty(cfg.epochs)
    n_updates = 0

    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, cfg.epochs + 1):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                xb = x[order[start:start + cfg.batch_size]]
                b = xb.shape[0]
                xt = corrupt(xb, cfg.corruption, rng)

                hb = encode(xt, params)
                yb = decode(hb, params, cfg.decoder_activation)
                d_a = _delta_out(xb, yb, cfg)
                d_z = (d_a @ params.w_dec) * hb * (1.0 - hb)

                # Mean of the per-example gradients over the batch.
                g_wdec = d_a.T @ hb / b + 2.0 * lam * params.w_dec
                g_bdec = d_a.mean(axis=0)
                g_wenc = d_z.T @ xt / b + 2.0 * lam * params.w_enc
                g_benc = d_z.mean(axis=0)

                momentum_step(params.w_dec, g_wdec, vel.w_dec,
                              cfg.learning_rate, cfg.momentum)
                momentum_step(params.b_dec, g_bdec, vel.b_dec,
                              cfg.learning_rate, cfg.momentum)
                momentum_step(params.w_enc, g_wenc, vel.w_enc,
                              cfg.learning_rate, cfg.momentum)
                momentum_step(params.b_enc, g_benc, vel.b_enc,
                              cfg.learning_rate, cfg.momentum)
                n_updates += 1

            loss = mean_clean_loss(x, params, cfg)
            if not np.isfinite(loss):
                raise RuntimeError(f"divergence at epoch {epoch}: loss is {loss}")
            epoch_losses[epoch - 1] = loss

    return DaeTrainResult(params=params, epoch_losses=epoch_losses,
                          n_updates=n_updates)


def write_loss_csv(epoch_losses: np.ndarray, path: str) -> None:
    """Write the per-epoch loss trace as ``epoch,mean_clean_loss`` rows."""
    lines = ["epoch,mean_clean_loss"]
    lines += [f"{i + 1},{repr(float(v))}" for i, v in enumerate(epoch_losses)]
    atomic_write_text(path, "\n".join(lines) + "\n")
