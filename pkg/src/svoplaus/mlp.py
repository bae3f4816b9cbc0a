"""Two-layer plausibility classifier over concatenated triple embeddings.

p = sigmoid(w2 . act(W1 x + b1) + b2), trained with mean binary
cross-entropy and exact hand-derived gradients. Everything is float64 and
deterministic: a fixed seed reproduces the parameter trajectory bit for
bit on the same platform.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .embeddings import EmbeddingTable, embed_triple, vectorize
from .extraction import Triple
from .rng import Stream, make_rng

__all__ = [
    "MlpParams",
    "MlpGrads",
    "TrainConfig",
    "TrainResult",
    "NonFiniteLossError",
    "init_params",
    "forward",
    "loss_and_gradients",
    "train",
    "predict",
    "make_trainer",
    "save_params",
    "load_params",
    "write_loss_curve",
]

ACTIVATIONS = ("tanh", "relu")
OPTIMIZERS = ("adam", "sgd")

_LOG_FLOOR = 1e-12
_MAGIC = {"tanh": b"SVOMLP1T", "relu": b"SVOMLP1R"}
_MAGIC_REV = {v: k for k, v in _MAGIC.items()}


class NonFiniteLossError(FloatingPointError):
    """Loss or inputs became non-finite; carries the offending batch index."""

    def __init__(self, message: str, batch_index: int | None = None):
        super().__init__(message)
        self.batch_index = batch_index


@dataclass
class MlpParams:
    w1: np.ndarray  # (hidden, 3*dim)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    activation: str = "tanh"

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def in_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def dim(self) -> int:
        return self.w1.shape[1] // 3

    def copy(self) -> "MlpParams":
        return MlpParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), float(self.b2), self.activation)

    def all_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.w1))
            and np.all(np.isfinite(self.b1))
            and np.all(np.isfinite(self.w2))
            and np.isfinite(self.b2)
        )


@dataclass
class MlpGrads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: float = 20.0
    seed: int = 0
    hidden: int = 100
    optimizer: str = "adam"
    activation: str = "tanh"

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs <= 0:
            raise ValueError("epochs must be > 0")
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")


def init_params(seed: int, hidden: int, dim: int, activation: str = "tanh") -> MlpParams:
    """Uniform init in +-sqrt(6/(fan_in+fan_out)) for both layers, zero biases."""
    if hidden < 1 or dim < 1:
        raise ValueError("hidden and dim must be >= 1")
    if activation not in ACTIVATIONS:
        raise ValueError(f"activation must be one of {ACTIVATIONS}")
    in_dim = 3 * dim
    rng = make_rng(seed, Stream.INIT)
    bound1 = np.sqrt(6.0 / (in_dim + hidden))
    bound2 = np.sqrt(6.0 / (hidden + 1))
    w1 = rng.uniform(-bound1, bound1, size=(hidden, in_dim))
    w2 = rng.uniform(-bound2, bound2, size=hidden)
    return MlpParams(
        w1=w1, b1=np.zeros(hidden), w2=w2, b2=0.0, activation=activation
    )


def _sigmoid(s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    es = np.exp(s[~pos])
    out[~pos] = es / (1.0 + es)
    return out


def _hidden_act(params: MlpParams, x: np.ndarray) -> np.ndarray:
    z1 = x @ params.w1.T + params.b1
    if params.activation == "tanh":
        return np.tanh(z1)
    return np.maximum(z1, 0.0)


def forward_batch(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Plausibility probabilities for a (n, 3*dim) feature matrix."""
    a = _hidden_act(params, x)
    return _sigmoid(a @ params.w2 + params.b2)


def forward(params: MlpParams, x: np.ndarray) -> float:
    """Probability for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    return float(forward_batch(params, x.reshape(1, -1))[0])


def loss_and_gradients(
    params: MlpParams, x: np.ndarray, y: np.ndarray
) -> tuple[float, MlpGrads]:
    """Mean binary cross-entropy and its exact gradients over one batch."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("batch must be a non-empty 2-d array")
    if y.shape != (x.shape[0],):
        raise ValueError("labels must align with the batch")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFiniteLossError("non-finite values in batch inputs")

    n = x.shape[0]
    a = _hidden_act(params, x)
    p = _sigmoid(a @ params.w2 + params.b2)
    loss = float(
        -np.mean(y * np.log(np.maximum(p, _LOG_FLOOR)) + (1.0 - y) * np.log(np.maximum(1.0 - p, _LOG_FLOOR)))
    )

    ds = (p - y) / n  # d(loss)/d(pre-sigmoid score), one entry per example
    db2 = float(np.sum(ds))
    dw2 = a.T @ ds
    da = np.outer(ds, params.w2)
    if params.activation == "tanh":
        dz1 = da * (1.0 - a * a)
    else:
        dz1 = da * (a > 0.0)
    dw1 = dz1.T @ x
    db1 = dz1.sum(axis=0)
    return loss, MlpGrads(w1=dw1, b1=db1, w2=dw2, b2=db2)


@dataclass
class TrainResult:
    params: MlpParams
    losses: list[float] = field(default_factory=list)


class _Adam:
    def __init__(self, shapes: MlpParams, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = MlpGrads(np.zeros_like(shapes.w1), np.zeros_like(shapes.b1), np.zeros_like(shapes.w2), 0.0)
        self.v = MlpGrads(np.zeros_like(shapes.w1), np.zeros_like(shapes.b1), np.zeros_like(shapes.w2), 0.0)

    def step(self, params: MlpParams, grads: MlpGrads) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name in ("w1", "b1", "w2", "b2"):
            g = getattr(grads, name)
            m = self.beta1 * getattr(self.m, name) + (1.0 - self.beta1) * g
            v = self.beta2 * getattr(self.v, name) + (1.0 - self.beta2) * (g * g)
            setattr(self.m, name, m)
            setattr(self.v, name, v)
            update = self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            setattr(params, name, getattr(params, name) - update)


def train(x: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> TrainResult:
    """Mini-batch training; returns final params and the per-batch loss trace.

    Each epoch reshuffles deterministically from (seed, epoch index). A
    fractional final epoch runs the first round(fraction * n_batches)
    batches of a fresh shuffle.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("training set must be a non-empty 2-d array")
    if x.shape[1] % 3 != 0:
        raise ValueError("feature width must be 3*dim")
    n = x.shape[0]
    params = init_params(cfg.seed, cfg.hidden, x.shape[1] // 3, activation=cfg.activation)
    opt = _Adam(params, cfg.learning_rate) if cfg.optimizer == "adam" else None

    n_batches = -(-n // cfg.batch_size)
    full_epochs = int(cfg.epochs)
    fraction = cfg.epochs - full_epochs

    losses: list[float] = []
    batch_index = 0

    def run_epoch(epoch: int, limit: int) -> None:
        nonlocal batch_index, params
        order = make_rng(cfg.seed, Stream.EPOCH, epoch).permutation(n)
        for b in range(limit):
            idx = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            try:
                loss, grads = loss_and_gradients(params, x[idx], y[idx])
            except NonFiniteLossError as err:
                raise NonFiniteLossError(
                    f"non-finite loss at batch {batch_index}", batch_index=batch_index
                ) from err
            if not np.isfinite(loss):
                raise NonFiniteLossError(
                    f"non-finite loss at batch {batch_index}", batch_index=batch_index
                )
            losses.append(loss)
            if opt is not None:
                opt.step(params, grads)
            else:
                params.w1 = params.w1 - cfg.learning_rate * grads.w1
                params.b1 = params.b1 - cfg.learning_rate * grads.b1
                params.w2 = params.w2 - cfg.learning_rate * grads.w2
                params.b2 = params.b2 - cfg.learning_rate * grads.b2
            batch_index += 1

    for epoch in range(full_epochs):
        run_epoch(epoch, n_batches)
    if fraction > 0:
        run_epoch(full_epochs, int(round(fraction * n_batches)))
    if not params.all_finite():
        raise NonFiniteLossError("parameters diverged to non-finite values", batch_index=batch_index - 1)
    return TrainResult(params=params, losses=losses)


def predict(
    params: MlpParams, table: EmbeddingTable, triple: Triple
) -> tuple[int, float] | None:
    """(label, probability) with label 1 iff p >= 0.5; None when the triple drops."""
    vec = embed_triple(table, triple)
    if vec is None:
        return None
    p = forward(params, vec)
    return (1 if p >= 0.5 else 0), p


def make_trainer(table: EmbeddingTable, cfg: TrainConfig) -> Callable:
    """Adapt this classifier to the evaluation harness's trainer interface.

    The returned callable maps (train examples, model seed) to a predictor
    over labeled examples. Train-side OOV examples are silently dropped
    from fitting; predict-side drops raise, since the harness needs one
    label per example (use the mean_vector policy for partial coverage).
    """

    def trainer(train_examples: Sequence, fit_seed: int) -> Callable:
        data = vectorize(table, train_examples)
        if data.x.shape[0] == 0:
            raise ValueError("no training examples survived embedding lookup")
        fitted = train(data.x, data.y, replace(cfg, seed=fit_seed))

        def predictor(examples: Sequence) -> np.ndarray:
            feats = vectorize(table, examples)
            if feats.dropped:
                raise ValueError(
                    f"{feats.dropped} examples lack embeddings under the drop policy"
                )
            probs = forward_batch(fitted.params, feats.x)
            return (probs >= 0.5).astype(np.int64)

        return predictor

    return trainer


def save_params(params: MlpParams, path: str | Path) -> None:
    """Checkpoint: 8-byte format id, uint32 hidden, uint32 dim, float64 params."""
    if params.in_dim % 3 != 0:
        raise ValueError("checkpoint format requires in_dim divisible by 3")
    with open(path, "wb") as f:
        f.write(_MAGIC[params.activation])
        f.write(struct.pack("<II", params.hidden, params.dim))
        f.write(np.ascontiguousarray(params.w1, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(params.b1, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(params.w2, dtype="<f8").tobytes())
        f.write(struct.pack("<d", params.b2))


def load_params(path: str | Path) -> MlpParams:
    with open(path, "rb") as f:
        blob = f.read()
    magic, rest = blob[:8], blob[8:]
    if magic not in _MAGIC_REV:
        raise ValueError(f"{path}: not a classifier checkpoint")
    hidden, dim = struct.unpack("<II", rest[:8])
    in_dim = 3 * dim
    expected = 8 * (hidden * in_dim + hidden + hidden + 1)
    body = rest[8:]
    if len(body) != expected:
        raise ValueError(f"{path}: truncated or oversized checkpoint")
    flat = np.frombuffer(body, dtype="<f8")
    w1 = flat[: hidden * in_dim].reshape(hidden, in_dim).copy()
    b1 = flat[hidden * in_dim : hidden * in_dim + hidden].copy()
    w2 = flat[hidden * in_dim + hidden : hidden * in_dim + 2 * hidden].copy()
    b2 = float(flat[-1])
    return MlpParams(w1=w1, b1=b1, w2=w2, b2=b2, activation=_MAGIC_REV[magic])


def write_loss_curve(losses: Sequence[float], path: str | Path) -> None:
    """CSV trace ``batch_index,loss``."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("batch_index,loss\n")
        for i, loss in enumerate(losses):
            f.write(f"{i},{loss!r}\n")
