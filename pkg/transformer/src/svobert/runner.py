"""File-level protocol runners: labeled TSVs in, report files out.

Supervised mode runs repeated k-fold cross-validation on a gold file;
self-supervised mode trains on a corpus-derived dataset, selects a
configuration on the validation file over the standard grid, and reports
test accuracy. All outputs use the pipeline-shared formats.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .data import confusion, read_labeled_tsv, write_report
from .encoding import encode_triple
from .finetune import FinetuneConfig, accuracy, encode_dataset, finetune, predict
from .model import ModelBundle, compact_bundle, pretrained_bundle
from .protocols import (
    TRANSFORMER_GRID,
    GridAxes,
    pooled_cv_accuracies,
    run_grid,
    split_valid_test,
    write_grid_csv,
)


def bundle_for(variant: str, vocabulary) -> ModelBundle:
    """``compact`` builds the small from-scratch variant; ``pretrained:<name>``
    loads a checkpoint (needs local weights or network access)."""
    if variant == "compact":
        return compact_bundle(vocabulary)
    if variant.startswith("pretrained:"):
        return pretrained_bundle(variant.split(":", 1)[1])
    raise ValueError(f"unknown variant {variant!r}")


def _vocabulary(*example_lists) -> list[str]:
    vocab = set()
    for examples in example_lists:
        for triple, _ in examples:
            vocab.update(w.lower() for w in triple)
    return sorted(vocab)


def _encode_all(examples, bundle):
    sequences = [encode_triple(t, bundle.tokenizer) for t, _ in examples]
    labels = [label for _, label in examples]
    return encode_dataset(sequences, labels, bundle.tokenizer)


def supervised_cv(
    gold_path: str | Path,
    out_dir: str | Path,
    cfg: FinetuneConfig,
    variant: str = "compact",
    k: int = 10,
    repeats: int = 20,
    protocol_seed: int = 0,
) -> float:
    """Repeated k-fold CV on a gold TSV; writes cv_report.txt and cv_repeats.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gold = read_labeled_tsv(gold_path)
    bundle = bundle_for(variant, _vocabulary(gold))
    data = _encode_all(gold, bundle)
    labels = [label for _, label in gold]

    def train_and_predict(train_idx, test_idx, repeat, fold):
        subset = _slice(data, train_idx)
        result = finetune(subset, cfg, bundle.make_model)
        return predict(result.model, _slice(data, test_idx))

    accuracies = pooled_cv_accuracies(
        labels, train_and_predict, k=k, repeats=repeats, seed=protocol_seed
    )
    mean = float(np.mean(accuracies))
    with open(out / "cv_report.txt", "w", encoding="utf-8", newline="\n") as f:
        f.write(f"mean_accuracy\t{mean!r}\n")
        f.write(f"k\t{k}\nrepeats\t{repeats}\ncv_seed\t{protocol_seed}\nn\t{len(gold)}\n")
    with open(out / "cv_repeats.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("repeat,accuracy\n")
        for i, acc in enumerate(accuracies):
            f.write(f"{i},{acc!r}\n")
    return mean


def _slice(data, idx):
    from .finetune import EncodedDataset

    idx = np.asarray(idx)
    return EncodedDataset(
        input_ids=data.input_ids[idx],
        attention_mask=data.attention_mask[idx],
        labels=data.labels[idx],
    )


def selfsup_protocol(
    train_path: str | Path,
    valid_path: str | Path,
    test_path: str | Path,
    out_dir: str | Path,
    base_cfg: FinetuneConfig,
    variant: str = "compact",
    axes: GridAxes = TRANSFORMER_GRID,
    only_cells: set[int] | None = None,
) -> dict:
    """Grid-search on validation, then report test accuracy of the best cell.

    Writes grid.csv, best_config.json, and report.txt in the shared formats.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train = read_labeled_tsv(train_path)
    valid = read_labeled_tsv(valid_path)
    test = read_labeled_tsv(test_path)
    bundle = bundle_for(variant, _vocabulary(train, valid, test))
    train_data = _encode_all(train, bundle)
    valid_data = _encode_all(valid, bundle)
    test_data = _encode_all(test, bundle)

    def evaluate(lr, batch, epochs, seed):
        cfg = replace(base_cfg, learning_rate=lr, batch_size=batch, epochs=epochs, seed=seed)
        result = finetune(train_data, cfg, bundle.make_model)
        return accuracy(result.model, valid_data)

    best, rows = run_grid(evaluate, axes, base_seed=base_cfg.seed, only_cells=only_cells)
    write_grid_csv(rows, out / "grid.csv")
    with open(out / "best_config.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(
            {
                "cell_index": best.cell_index,
                "learning_rate": best.learning_rate,
                "batch_size": best.batch_size,
                "epochs": best.epochs,
                "seed": best.seed,
                "valid_accuracy": best.accuracy,
            },
            f,
            indent=2,
            sort_keys=True,
        )
        f.write("\n")

    best_cfg = replace(
        base_cfg,
        learning_rate=best.learning_rate,
        batch_size=best.batch_size,
        epochs=best.epochs,
        seed=best.seed,
    )
    result = finetune(train_data, best_cfg, bundle.make_model)
    preds = predict(result.model, test_data)
    stats = confusion(preds.tolist(), [label for _, label in test])
    write_report(
        out / "report.txt",
        stats,
        extras={"split": "test", "best_cell": best.cell_index, "restart_attempts": result.attempts},
    )
    return stats
