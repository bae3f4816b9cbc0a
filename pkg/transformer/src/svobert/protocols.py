"""Evaluation protocols shared with the extraction pipeline.

The fold plan, valid/test split, and grid-cell seeding replicate the
pipeline's published definition exactly (Philox streams keyed by
``seed XOR stream-tag XOR index*GOLDEN``), so runs of either package over
the same gold file with the same seed score identical partitions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# protocol stream tags (shared definition with the extraction pipeline)
_REPEAT_TAG = 6
_SPLIT_TAG = 7
_GRID_TAG = 8
_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _protocol_rng(seed: int, tag: int, index: int = 0) -> np.random.Generator:
    key = (int(seed) ^ tag ^ ((index * _GOLDEN) & _MASK64)) & _MASK64
    return np.random.Generator(np.random.Philox(key=key))


def fold_assignments(n: int, k: int, repeats: int, seed: int) -> list[np.ndarray]:
    """Per-repeat fold ids; first ``n % k`` folds hold one extra example."""
    if n < k:
        raise ValueError(f"need at least k={k} examples, got {n}")
    base, extra = divmod(n, k)
    sizes = [base + 1 if f < extra else base for f in range(k)]
    out = []
    for repeat in range(repeats):
        perm = _protocol_rng(seed, _REPEAT_TAG, repeat).permutation(n)
        fold_of = np.empty(n, dtype=np.int64)
        start = 0
        for f, size in enumerate(sizes):
            fold_of[perm[start : start + size]] = f
            start += size
        out.append(fold_of)
    return out


def split_valid_test(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Index split into equal halves: validation first, test second."""
    if n % 2 != 0:
        raise ValueError(f"need an even number of examples, got {n}")
    perm = _protocol_rng(seed, _SPLIT_TAG).permutation(n)
    return perm[: n // 2], perm[n // 2 :]


def grid_cell_seed(base_seed: int, cell_index: int) -> int:
    return (int(base_seed) ^ _GRID_TAG ^ ((cell_index * _GOLDEN) & _MASK64)) & _MASK64


@dataclass(frozen=True)
class GridAxes:
    learning_rates: tuple[float, ...]
    batch_sizes: tuple[int, ...]
    epochs: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.learning_rates) * len(self.batch_sizes) * len(self.epochs)

    def cells(self) -> list[tuple[float, int, float]]:
        return list(itertools.product(self.learning_rates, self.batch_sizes, self.epochs))


# the standard finetuning search space: 3 rates x 2 batch sizes x 3 epochs
TRANSFORMER_GRID = GridAxes(
    learning_rates=(1e-5, 2e-5, 3e-5),
    batch_sizes=(8, 16),
    epochs=(0.5, 1.0, 2.0),
)


@dataclass
class GridRow:
    cell_index: int
    learning_rate: float
    batch_size: int
    epochs: float
    seed: int
    accuracy: float
    error: str | None = None


def run_grid(
    evaluate: Callable,
    axes: GridAxes,
    base_seed: int,
    only_cells: set[int] | None = None,
) -> tuple[GridRow, list[GridRow]]:
    """Exhaustive sweep; ``evaluate(lr, batch, epochs, seed) -> accuracy``.

    Cell errors are recorded without aborting; ties go to the earlier cell.
    """
    rows: list[GridRow] = []
    for cell_index, (lr, batch, epochs) in enumerate(axes.cells()):
        if only_cells is not None and cell_index not in only_cells:
            continue
        seed = grid_cell_seed(base_seed, cell_index)
        row = GridRow(cell_index, lr, batch, epochs, seed, math.nan)
        try:
            row.accuracy = float(evaluate(lr, batch, epochs, seed))
        except Exception as err:  # noqa: BLE001 - sweep must survive cell failures
            row.error = f"{type(err).__name__}: {err}"
        rows.append(row)
    scored = [r for r in rows if not math.isnan(r.accuracy)]
    if not scored:
        raise RuntimeError("every grid cell failed")
    best = max(scored, key=lambda r: r.accuracy)
    return best, rows


def write_grid_csv(rows: Sequence[GridRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("cell_index,lr,batch,epochs,valid_accuracy\n")
        for row in rows:
            acc = "nan" if math.isnan(row.accuracy) else repr(row.accuracy)
            f.write(f"{row.cell_index},{row.learning_rate!r},{row.batch_size},{row.epochs!r},{acc}\n")


def pooled_cv_accuracies(
    labels: Sequence[int],
    train_and_predict: Callable,
    k: int,
    repeats: int,
    seed: int,
) -> list[float]:
    """Repeat accuracies for k-fold CV, pooling fold predictions per repeat.

    ``train_and_predict(train_idx, test_idx, repeat, fold) -> labels`` runs
    one fold and returns predictions for ``test_idx`` in order.
    """
    y = np.asarray(labels, dtype=np.int64)
    n = y.shape[0]
    assignments = fold_assignments(n, k=k, repeats=repeats, seed=seed)
    accuracies = []
    for repeat, fold_of in enumerate(assignments):
        preds = np.empty(n, dtype=np.int64)
        for f in range(k):
            test_idx = np.flatnonzero(fold_of == f)
            train_idx = np.flatnonzero(fold_of != f)
            fold_preds = np.asarray(train_and_predict(train_idx, test_idx, repeat, f))
            if fold_preds.shape != test_idx.shape:
                raise ValueError("fold predictor returned the wrong number of labels")
            preds[test_idx] = fold_preds
        accuracies.append(float(np.mean(preds == y)))
    return accuracies
