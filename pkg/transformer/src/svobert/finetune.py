"""Full-model fine-tuning with the unstable-run restart heuristic.

Small-data fine-tuning sometimes fails to train at all; a run whose total
training loss fails to decrease by more than 10% is discarded and
restarted with a new derived seed, up to ``max_restarts`` times. The
restart decision is a pure function of the loss trace: the decrease is
measured between the first and last epoch's mean batch loss (for runs
shorter than two epochs, between the first and second half of the batch
losses).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import torch

from .encoding import MarkedSequence

RESTART_THRESHOLD = 0.10
_MIX = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class AllRestartsFailedError(RuntimeError):
    """Every attempt's training loss failed to decrease past the threshold."""

    def __init__(self, attempts: int, decreases: list[float]):
        super().__init__(
            f"{attempts} attempts all failed the {RESTART_THRESHOLD:.0%} loss-decrease check: "
            + ", ".join(f"{d:.3f}" for d in decreases)
        )
        self.attempts = attempts
        self.decreases = decreases


def derive_attempt_seed(seed: int, attempt: int) -> int:
    return (int(seed) ^ (attempt * _MIX)) & _MASK64


@dataclass(frozen=True)
class FinetuneConfig:
    learning_rate: float = 2e-5
    batch_size: int = 16
    epochs: float = 3.0
    seed: int = 0
    max_restarts: int = 5
    restart_threshold: float = RESTART_THRESHOLD

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs <= 0:
            raise ValueError("epochs must be > 0")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be >= 0")
        if self.restart_threshold != RESTART_THRESHOLD:
            raise ValueError(f"restart_threshold is fixed at {RESTART_THRESHOLD}")


@dataclass
class TrainTrace:
    """Per-batch losses plus the epoch boundaries needed for the restart rule."""

    batch_losses: list[float] = field(default_factory=list)
    epoch_ends: list[int] = field(default_factory=list)  # exclusive batch index per epoch

    def epoch_means(self) -> list[float]:
        means = []
        start = 0
        for end in self.epoch_ends:
            if end > start:
                means.append(float(np.mean(self.batch_losses[start:end])))
            start = end
        return means


def loss_decrease(trace: TrainTrace) -> float:
    """Fractional decrease of the training loss over the run."""
    means = trace.epoch_means()
    if len(means) >= 2:
        first, last = means[0], means[-1]
    else:
        losses = trace.batch_losses
        if len(losses) < 2:
            return 0.0
        half = len(losses) // 2
        first = float(np.mean(losses[:half]))
        last = float(np.mean(losses[half:]))
    if first == 0.0:
        return 0.0
    return (first - last) / first


def should_restart(trace: TrainTrace, threshold: float = RESTART_THRESHOLD) -> bool:
    """True when the loss failed to decrease by more than ``threshold``."""
    return not (loss_decrease(trace) > threshold)


@dataclass
class EncodedDataset:
    """Padded id tensors for a list of marked sequences plus labels."""

    input_ids: torch.Tensor
    attention_mask: torch.Tensor
    labels: torch.Tensor

    def __len__(self) -> int:
        return self.input_ids.shape[0]


def encode_dataset(
    sequences: Sequence[MarkedSequence], labels: Sequence[int], tokenizer
) -> EncodedDataset:
    if len(sequences) != len(labels):
        raise ValueError("sequences and labels must align")
    id_rows = [tokenizer.convert_tokens_to_ids(list(seq.tokens)) for seq in sequences]
    width = max(len(r) for r in id_rows)
    pad = tokenizer.pad_token_id
    input_ids = torch.full((len(id_rows), width), pad, dtype=torch.long)
    mask = torch.zeros((len(id_rows), width), dtype=torch.long)
    for i, row in enumerate(id_rows):
        input_ids[i, : len(row)] = torch.tensor(row, dtype=torch.long)
        mask[i, : len(row)] = 1
    return EncodedDataset(
        input_ids=input_ids,
        attention_mask=mask,
        labels=torch.tensor(list(labels), dtype=torch.long),
    )


@dataclass
class FinetuneResult:
    model: torch.nn.Module
    trace: TrainTrace
    attempts: int  # 1 = first run succeeded
    decrease: float


def train_once(
    data: EncodedDataset, cfg: FinetuneConfig, make_model: Callable, seed: int
) -> tuple[torch.nn.Module, TrainTrace]:
    """One full fine-tuning run (no restart logic)."""
    model = make_model(seed)
    model.train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)

    n = len(data)
    n_batches = -(-n // cfg.batch_size)
    full_epochs = int(cfg.epochs)
    fraction = cfg.epochs - full_epochs
    trace = TrainTrace()

    def run_epoch(epoch: int, limit: int) -> None:
        gen = torch.Generator().manual_seed(derive_attempt_seed(seed, epoch + 1) % (2**63))
        order = torch.randperm(n, generator=gen)
        for b in range(limit):
            idx = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            out = model(
                input_ids=data.input_ids[idx],
                attention_mask=data.attention_mask[idx],
                labels=data.labels[idx],
            )
            optimizer.zero_grad()
            out.loss.backward()
            optimizer.step()
            trace.batch_losses.append(float(out.loss.detach()))
        trace.epoch_ends.append(len(trace.batch_losses))

    for epoch in range(full_epochs):
        run_epoch(epoch, n_batches)
    if fraction > 0:
        run_epoch(full_epochs, int(round(fraction * n_batches)))
    return model, trace


def finetune(
    data: EncodedDataset,
    cfg: FinetuneConfig,
    make_model: Callable,
    run_fn: Callable | None = None,
) -> FinetuneResult:
    """Fine-tune with restarts; returns the first run that trains properly.

    ``run_fn(data, cfg, make_model, seed) -> (model, trace)`` may be
    injected; the default is :func:`train_once`.
    """
    run = run_fn or train_once
    decreases: list[float] = []
    for attempt in range(cfg.max_restarts + 1):
        seed = derive_attempt_seed(cfg.seed, attempt)
        model, trace = run(data, cfg, make_model, seed)
        decrease = loss_decrease(trace)
        decreases.append(decrease)
        if not should_restart(trace, cfg.restart_threshold):
            return FinetuneResult(model=model, trace=trace, attempts=attempt + 1, decrease=decrease)
    raise AllRestartsFailedError(attempts=cfg.max_restarts + 1, decreases=decreases)


@torch.no_grad()
def predict(model: torch.nn.Module, data: EncodedDataset, batch_size: int = 64) -> np.ndarray:
    """Predicted labels for an encoded dataset."""
    model.eval()
    preds: list[np.ndarray] = []
    for start in range(0, len(data), batch_size):
        out = model(
            input_ids=data.input_ids[start : start + batch_size],
            attention_mask=data.attention_mask[start : start + batch_size],
        )
        preds.append(out.logits.argmax(dim=-1).cpu().numpy())
    return np.concatenate(preds) if preds else np.array([], dtype=np.int64)


def accuracy(model: torch.nn.Module, data: EncodedDataset) -> float:
    preds = predict(model, data)
    return float(np.mean(preds == data.labels.numpy()))
