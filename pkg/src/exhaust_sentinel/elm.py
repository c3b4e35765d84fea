"""Extreme learning machine: random fixed hidden layer, least-squares output.

The input-to-hidden weights are drawn once (Uniform[-1, 1], biases
Uniform[0, 1]) and never trained.  Fitting reduces to a weighted ridge
least-squares problem for the output weights:

    beta = argmin_b  sum_i w_i (H_i . b - t_i)^2 + ridge * ||b||^2

solved through the normal equations (or plain least squares when ridge = 0).
Per-sample weights let the minority class pull its own weight on heavily
imbalanced data; :func:`class_weights` implements the balanced heuristic
w_i = N / (2 * N_class(i)) so each class contributes half the total weight.

Scores are the clamped linear outputs in [0, 1] — clamping is monotone, so
ROC analysis is unaffected by it wherever raw outputs straddle the limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dae import sigmoid


@dataclass
class ElmModel:
    """Random hidden layer plus (after fitting) output weights.

    ``w_in`` (n_hidden, d_in) and ``bias`` (n_hidden,) are fixed at
    initialization.  ``beta`` stays None until :func:`fit_output_weights`;
    scoring an unfitted model raises.
    """

    w_in: np.ndarray
    bias: np.ndarray
    ridge: float = 1e-6
    beta: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        self.w_in = np.asarray(self.w_in, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.w_in.ndim != 2 or self.bias.shape != (self.w_in.shape[0],):
            raise ValueError("w_in must be (n_hidden, d_in) with matching bias")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")

    @property
    def n_hidden(self) -> int:
        return self.w_in.shape[0]

    @property
    def d_in(self) -> int:
        return self.w_in.shape[1]

    @property
    def fitted(self) -> bool:
        return self.beta is not None


def init_elm(
    d_in: int,
    n_hidden: int = 1000,
    rng: np.random.Generator | None = None,
    ridge: float = 1e-6,
) -> ElmModel:
    """Draw the fixed random hidden layer: w_in ~ U[-1,1], bias ~ U[0,1]."""
    if d_in < 1 or n_hidden < 1:
        raise ValueError("d_in and n_hidden must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    return ElmModel(
        w_in=rng.uniform(-1.0, 1.0, size=(n_hidden, d_in)),
        bias=rng.uniform(0.0, 1.0, size=n_hidden),
        ridge=ridge,
    )


def hidden_matrix(x: np.ndarray, model: ElmModel) -> np.ndarray:
    """Hidden activations H with H[i][j] = sigmoid(w_in[j] . x_i + bias[j]).

    ``x`` is (n, d_in); n = 0 is fine and yields an empty (0, n_hidden) H.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.d_in:
        raise ValueError(f"inputs have width {x.shape[1]}, expected {model.d_in}")
    return sigmoid(x @ model.w_in.T + model.bias)


def class_weights(labels: Sequence[int] | np.ndarray) -> np.ndarray:
    """Balanced per-sample weights w_i = N / (2 * N_class(i)).

    Each class then contributes total weight N/2 (so sum(w) = N), which
    counteracts imbalance like the ~150:1 normal-to-event ratio this
    pipeline is built for.

    Raises:
        ValueError: if labels are not all in {0, 1} or only one class occurs.
    """
    t = np.asarray(labels)
    if t.size == 0 or not np.all(np.isin(t, (0, 1))):
        raise ValueError("labels must be a non-empty {0,1} array")
    n = t.size
    n_pos = int(np.sum(t == 1))
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("class_weights needs both classes present")
    w = np.where(t == 1, n / (2.0 * n_pos), n / (2.0 * n_neg))
    return w.astype(np.float64)


def fit_output_weights(
    h: np.ndarray,
    targets: Sequence[float] | np.ndarray,
    weights: Sequence[float] | np.ndarray | None = None,
    ridge: float = 1e-6,
) -> np.ndarray:
    """Solve the weighted ridge least-squares problem for beta.

    Minimizes sum_i w_i (H_i . beta - t_i)^2 + ridge * ||beta||^2.  With
    ridge > 0 the normal equations (H' Omega H + ridge I) beta = H' Omega t
    are solved directly; with ridge = 0 a least-squares factorization of the
    row-weighted system is used instead.

    Raises:
        ValueError: inconsistent shapes, non-positive weights, or a
            rank-deficient system at ridge = 0 (the error advises a
            positive ridge).
    """
    h = np.atleast_2d(np.asarray(h, dtype=np.float64))
    t = np.asarray(targets, dtype=np.float64).ravel()
    n, n_hidden = h.shape
    if n < 1:
        raise ValueError("need at least one training row")
    if t.shape[0] != n:
        raise ValueError(f"{n} rows but {t.shape[0]} targets")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=np.float64).ravel()
        if w.shape[0] != n:
            raise ValueError(f"{n} rows but {w.shape[0]} weights")
        if np.any(w <= 0):
            raise ValueError("sample weights must all be > 0")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")

    if ridge > 0.0:
        hw = h * w[:, None]
        gram = h.T @ hw
        gram[np.diag_indices_from(gram)] += ridge
        return np.linalg.solve(gram, hw.T @ t)

    # ridge = 0: least squares on the sqrt(w)-scaled rows.
    sw = np.sqrt(w)
    beta, _, rank, _ = np.linalg.lstsq(h * sw[:, None], t * sw, rcond=None)
    if rank < n_hidden:
        raise ValueError(
            f"hidden matrix is rank-deficient (rank {rank} < {n_hidden}); "
            "use ridge > 0 for a well-posed fit"
        )
    return beta


def fit_elm(
    model: ElmModel,
    x: np.ndarray,
    targets: Sequence[float] | np.ndarray,
    weights: Sequence[float] | np.ndarray | None = None,
) -> ElmModel:
    """Fit output weights in place (w_in and bias are untouched) and return the model."""
    h = hidden_matrix(x, model)
    model.beta = fit_output_weights(h, targets, weights, model.ridge)
    return model


def raw_scores(x: np.ndarray, model: ElmModel) -> np.ndarray:
    """Unclamped linear outputs H beta for a batch of inputs."""
    if not model.fitted:
        raise ValueError("model is not fitted; call fit_elm first")
    return hidden_matrix(x, model) @ model.beta


def score(x: np.ndarray, model: ElmModel) -> np.ndarray | float:
    """Anomaly score(s) in [0, 1]: the clamped linear output.

    Accepts one vector or a batch; returns a float for a single vector.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    s = np.clip(raw_scores(x[None, :] if single else x, model), 0.0, 1.0)
    return float(s[0]) if single else s
