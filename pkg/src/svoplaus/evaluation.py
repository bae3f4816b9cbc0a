"""Evaluation protocols: repeated k-fold cross-validation, the fixed
valid/test split, exhaustive grid search, and confusion reporting.

Every protocol is a pure function of its inputs and seed. Repeat accuracy
pools all held-out fold predictions (with 306/307-sized folds pooling is
the unambiguous estimator); the per-fold mean is also recorded for
transparency.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .mlp import TrainConfig
from .rng import Stream, derive_seed, make_rng
from .sampling import LabeledExample

__all__ = [
    "FoldPlan",
    "EvalReport",
    "CvResult",
    "GridAxes",
    "GridRow",
    "GridResult",
    "InsufficientDataError",
    "OddSizeError",
    "LengthMismatchError",
    "NN_GRID",
    "TRANSFORMER_GRID",
    "build_fold_plan",
    "kfold_cv",
    "split_valid_test",
    "grid_search",
    "report",
    "write_report",
    "read_report",
    "write_grid_csv",
]

Predictor = Callable[[Sequence[LabeledExample]], np.ndarray]
Trainer = Callable[[Sequence[LabeledExample], int], Predictor]


class InsufficientDataError(ValueError):
    pass


class OddSizeError(ValueError):
    pass


class LengthMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GridAxes:
    learning_rates: tuple[float, ...]
    batch_sizes: tuple[int, ...]
    epochs: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.learning_rates) * len(self.batch_sizes) * len(self.epochs)

    def cells(self) -> list[tuple[float, int, float]]:
        """Cartesian product in (learning rate, batch, epochs) nesting order."""
        return list(itertools.product(self.learning_rates, self.batch_sizes, self.epochs))


NN_GRID = GridAxes(
    learning_rates=(1e-3, 1e-4, 1e-5, 2e-5),
    batch_sizes=(16, 32, 64, 128),
    epochs=(0.5, 1.0, 2.0),
)

TRANSFORMER_GRID = GridAxes(
    learning_rates=(1e-5, 2e-5, 3e-5),
    batch_sizes=(8, 16),
    epochs=(0.5, 1.0, 2.0),
)


@dataclass(frozen=True)
class FoldPlan:
    """Per-repeat assignment of example indices to folds."""

    k: int
    repeats: int
    seed: int
    assignments: tuple[np.ndarray, ...]  # one int array of fold ids per repeat

    def fold_sizes(self, repeat: int) -> list[int]:
        a = self.assignments[repeat]
        return [int(np.sum(a == f)) for f in range(self.k)]


def build_fold_plan(n: int, k: int = 10, repeats: int = 20, seed: int = 0) -> FoldPlan:
    """Shuffle-derived partitions; fold sizes differ by at most one."""
    if n < k:
        raise InsufficientDataError(f"need at least k={k} examples, got {n}")
    if k < 2:
        raise ValueError("k must be >= 2")
    base = n // k
    extra = n % k
    sizes = [base + 1 if f < extra else base for f in range(k)]
    assignments = []
    for repeat in range(repeats):
        perm = make_rng(seed, Stream.REPEAT, repeat).permutation(n)
        fold_of = np.empty(n, dtype=np.int64)
        start = 0
        for f, size in enumerate(sizes):
            fold_of[perm[start : start + size]] = f
            start += size
        assignments.append(fold_of)
    return FoldPlan(k=k, repeats=repeats, seed=seed, assignments=tuple(assignments))


@dataclass
class CvResult:
    mean_accuracy: float
    repeat_accuracies: list[float]
    repeat_fold_mean_accuracies: list[float]


def kfold_cv(
    gold: Sequence[LabeledExample],
    trainer: Trainer,
    k: int = 10,
    repeats: int = 20,
    seed: int = 0,
    init_mode: str = "fixed",
    model_seed: int = 0,
) -> CvResult:
    """Repeated k-fold cross-validation, pooling fold predictions per repeat.

    ``init_mode="fixed"`` hands every fold the same model seed;
    ``"per_repeat"`` derives a fresh one per (repeat, fold).
    """
    if init_mode not in ("fixed", "per_repeat"):
        raise ValueError(f"unknown init_mode {init_mode!r}")
    n = len(gold)
    plan = build_fold_plan(n, k=k, repeats=repeats, seed=seed)
    labels = np.array([ex.label for ex in gold], dtype=np.int64)

    repeat_accuracies: list[float] = []
    repeat_fold_means: list[float] = []
    for r in range(repeats):
        fold_of = plan.assignments[r]
        preds = np.empty(n, dtype=np.int64)
        fold_accs = []
        for f in range(k):
            test_idx = np.flatnonzero(fold_of == f)
            train_idx = np.flatnonzero(fold_of != f)
            if init_mode == "fixed":
                fit_seed = model_seed
            else:
                fit_seed = derive_seed(model_seed, Stream.MODEL, r * k + f)
            predictor = trainer([gold[i] for i in train_idx], fit_seed)
            fold_preds = np.asarray(predictor([gold[i] for i in test_idx]), dtype=np.int64)
            if fold_preds.shape != test_idx.shape:
                raise LengthMismatchError("predictor returned the wrong number of labels")
            preds[test_idx] = fold_preds
            fold_accs.append(float(np.mean(fold_preds == labels[test_idx])))
        repeat_accuracies.append(float(np.mean(preds == labels)))
        repeat_fold_means.append(float(np.mean(fold_accs)))
    return CvResult(
        mean_accuracy=float(np.mean(repeat_accuracies)),
        repeat_accuracies=repeat_accuracies,
        repeat_fold_mean_accuracies=repeat_fold_means,
    )


def split_valid_test(
    gold: Sequence[LabeledExample], seed: int = 0
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Deterministic half/half split: first half validation, second half test."""
    n = len(gold)
    if n % 2 != 0:
        raise OddSizeError(f"need an even number of examples, got {n}")
    perm = make_rng(seed, Stream.SPLIT).permutation(n)
    half = n // 2
    valid = [gold[i] for i in perm[:half]]
    test = [gold[i] for i in perm[half:]]
    return valid, test


@dataclass
class GridRow:
    cell_index: int
    learning_rate: float
    batch_size: int
    epochs: float
    seed: int
    accuracy: float  # NaN when the cell errored
    error: str | None = None


@dataclass
class GridResult:
    best: GridRow
    rows: list[GridRow]


def grid_search(
    evaluate: Callable[[TrainConfig], float],
    axes: GridAxes,
    base_config: TrainConfig,
    base_seed: int = 0,
    only_cells: set[int] | None = None,
) -> GridResult:
    """Exhaustive search; each cell's seed derives from (base seed, index).

    ``evaluate`` maps a fully-specified TrainConfig to validation accuracy.
    Cell errors are recorded in their row without aborting the sweep.
    ``only_cells`` restricts execution to the given indices while keeping
    their original seeds, so single cells can be reproduced in isolation.
    """
    cells = axes.cells()
    if not cells:
        raise ValueError("grid axes must be non-empty")
    rows: list[GridRow] = []
    for cell_index, (lr, batch, epochs) in enumerate(cells):
        if only_cells is not None and cell_index not in only_cells:
            continue
        cell_seed = derive_seed(base_seed, Stream.GRID, cell_index)
        cfg = TrainConfig(
            learning_rate=lr,
            batch_size=batch,
            epochs=epochs,
            seed=cell_seed,
            hidden=base_config.hidden,
            optimizer=base_config.optimizer,
            activation=base_config.activation,
        )
        row = GridRow(
            cell_index=cell_index,
            learning_rate=lr,
            batch_size=batch,
            epochs=epochs,
            seed=cell_seed,
            accuracy=math.nan,
        )
        try:
            row.accuracy = float(evaluate(cfg))
        except Exception as err:  # noqa: BLE001 - cell failures must not kill the sweep
            row.error = f"{type(err).__name__}: {err}"
        rows.append(row)
    scored = [r for r in rows if not math.isnan(r.accuracy)]
    if not scored:
        raise RuntimeError("every grid cell failed")
    best = max(scored, key=lambda r: r.accuracy)  # max keeps the earliest on ties
    return GridResult(best=best, rows=rows)


@dataclass
class EvalReport:
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int
    fp_share_of_errors: float | None
    per_example: list[tuple[int, int]] | None = None  # (predicted, gold)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def report(
    predictions: Sequence[int], labels: Sequence[int], keep_per_example: bool = False
) -> EvalReport:
    """Accuracy, confusion counts, and the false-positive share of errors."""
    preds = np.asarray(predictions, dtype=np.int64)
    gold = np.asarray(labels, dtype=np.int64)
    if preds.shape != gold.shape or preds.ndim != 1:
        raise LengthMismatchError("predictions and labels must be equal-length 1-d sequences")
    if preds.shape[0] == 0:
        raise LengthMismatchError("cannot report on zero examples")
    if not (np.isin(preds, (0, 1)).all() and np.isin(gold, (0, 1)).all()):
        raise ValueError("labels must be 0 or 1")
    tp = int(np.sum((preds == 1) & (gold == 1)))
    fp = int(np.sum((preds == 1) & (gold == 0)))
    tn = int(np.sum((preds == 0) & (gold == 0)))
    fn = int(np.sum((preds == 0) & (gold == 1)))
    errors = fp + fn
    return EvalReport(
        accuracy=(tp + tn) / preds.shape[0],
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        fp_share_of_errors=(fp / errors) if errors else None,
        per_example=list(zip(preds.tolist(), gold.tolist())) if keep_per_example else None,
    )


def write_report(path: str | Path, rep: EvalReport, extras: Mapping[str, object] | None = None) -> None:
    """Key-value text file, one ``key<TAB>value`` pair per line."""
    lines = [
        ("accuracy", repr(rep.accuracy)),
        ("tp", str(rep.tp)),
        ("fp", str(rep.fp)),
        ("tn", str(rep.tn)),
        ("fn", str(rep.fn)),
        ("fp_share_of_errors", "na" if rep.fp_share_of_errors is None else repr(rep.fp_share_of_errors)),
        ("n", str(rep.n)),
    ]
    if extras:
        for key, value in extras.items():
            lines.append((key, json.dumps(value, sort_keys=True) if not isinstance(value, str) else value))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in lines:
            f.write(f"{key}\t{value}\n")


def read_report(path: str | Path) -> tuple[EvalReport, dict[str, str]]:
    """Parse a report file back into an EvalReport plus any extra keys."""
    pairs: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, value = line.partition("\t")
            pairs[key] = value
    try:
        rep = EvalReport(
            accuracy=float(pairs["accuracy"]),
            tp=int(pairs["tp"]),
            fp=int(pairs["fp"]),
            tn=int(pairs["tn"]),
            fn=int(pairs["fn"]),
            fp_share_of_errors=None if pairs["fp_share_of_errors"] == "na" else float(pairs["fp_share_of_errors"]),
        )
    except KeyError as err:
        raise ValueError(f"{path}: missing report key {err}") from None
    extras = {k: v for k, v in pairs.items() if k not in {"accuracy", "tp", "fp", "tn", "fn", "fp_share_of_errors", "n"}}
    return rep, extras


def write_grid_csv(rows: Sequence[GridRow], path: str | Path) -> None:
    """CSV table ``cell_index,lr,batch,epochs,valid_accuracy``."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("cell_index,lr,batch,epochs,valid_accuracy\n")
        for row in rows:
            acc = "nan" if math.isnan(row.accuracy) else repr(row.accuracy)
            f.write(f"{row.cell_index},{row.learning_rate!r},{row.batch_size},{row.epochs!r},{acc}\n")
