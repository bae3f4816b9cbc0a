"""Command-line pipeline: extract, build-dataset, train, eval, cv, grid, topk.

Every run resolves its parameters from (in order of precedence) explicit
flags, the ``--config`` JSON file's per-subcommand section, the config's
top-level ``seed``, then built-in defaults, and writes the fully-resolved
set next to its outputs as ``resolved_config.json``. Identical config plus
identical inputs reproduce every output file byte for byte; diagnostics go
to stderr only.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import evaluation, mlp, sampling, store
from .conllu import IngestStats, parse_conllu
from .embeddings import load_vectors, vectorize
from .evaluation import NN_GRID, TRANSFORMER_GRID, GridAxes
from .extraction import ExtractionConfig, extract_corpus
from .mlp import TrainConfig

__all__ = ["main"]


class CliError(Exception):
    pass


def _write_kv(path: Path, pairs: list[tuple[str, object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in pairs:
            f.write(f"{key}\t{value}\n")


def _write_resolved_config(out: Path, subcommand: str, params: dict) -> None:
    payload = {"subcommand": subcommand, "params": params}
    with open(out / "resolved_config.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=str)
        f.write("\n")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as f:
        config = json.load(f)
    if not isinstance(config, dict):
        raise CliError("config file must hold a JSON object")
    return config


def _resolve(args: argparse.Namespace, config: dict, section: str, defaults: dict) -> dict:
    """Merge flag > config section > top-level seed > default, per key."""
    section_cfg = config.get(section, {})
    if not isinstance(section_cfg, dict):
        raise CliError(f"config section {section!r} must be an object")
    params = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = section_cfg.get(key)
        if value is None and key.endswith("seed"):
            value = config.get("seed")
        if value is None:
            value = default
        params[key] = value
    return params


def _require(params: dict, *keys: str) -> None:
    for key in keys:
        if params[key] is None:
            raise CliError(f"missing required parameter: {key.replace('_', '-')}")


def _out_dir(args: argparse.Namespace) -> Path:
    if args.out is None:
        raise CliError("an output directory is required (--out)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _train_config(params: dict) -> TrainConfig:
    return TrainConfig(
        learning_rate=float(params["learning_rate"]),
        batch_size=int(params["batch_size"]),
        epochs=float(params["epochs"]),
        seed=int(params["seed"]),
        hidden=int(params["hidden"]),
        optimizer=str(params["optimizer"]),
        activation=str(params["activation"]),
    )


_TRAIN_DEFAULTS = {
    "learning_rate": 1e-3,
    "batch_size": 32,
    "epochs": 20.0,
    "seed": 0,
    "hidden": 100,
    "optimizer": "adam",
    "activation": "tanh",
    "oov_policy": "drop",
}


def _extract_one(path: str, cfg: ExtractionConfig, policy: str):
    stats = IngestStats()
    with open(path, "rb") as f:
        result = extract_corpus(parse_conllu(f, policy=policy, stats=stats), cfg)
    return result, stats


def cmd_extract(args: argparse.Namespace, config: dict) -> int:
    defaults = {
        "allowed_arg_upos": ["NOUN", "PROPN"],
        "require_verb_upos": True,
        "include_passive": False,
        "threads": 1,
        "policy": None,
    }
    params = _resolve(args, config, "extract", defaults)
    params["policy"] = "strict" if args.strict else (params["policy"] or "lenient")
    params["inputs"] = list(args.inputs)
    out = _out_dir(args)

    cfg = ExtractionConfig(
        allowed_arg_upos=frozenset(params["allowed_arg_upos"]),
        require_verb_upos=bool(params["require_verb_upos"]),
        include_passive=bool(params["include_passive"]),
    )
    threads = max(1, int(params["threads"]))
    if threads > 1 and len(params["inputs"]) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: _extract_one(p, cfg, params["policy"]), params["inputs"]))
    else:
        results = [_extract_one(p, cfg, params["policy"]) for p in params["inputs"]]

    merged = store.merge(*(r.store for r, _ in results))
    sentences = sum(r.sentences for r, _ in results)
    occurrences = sum(r.occurrences for r, _ in results)
    skipped = sum(s.skipped for _, s in results)

    store.save(merged, out / "triples.tsv")
    _write_kv(
        out / "extract_stats.txt",
        [
            ("sentences", sentences),
            ("skipped_sentences", skipped),
            ("triples_emitted", occurrences),
            ("unique_triples", len(merged)),
            ("cumulative_occurrences", merged.total),
        ],
    )
    _write_resolved_config(out, "extract", params)
    print(f"extracted {len(merged)} unique triples from {sentences} sentences", file=sys.stderr)
    return 0


def cmd_build_dataset(args: argparse.Namespace, config: dict) -> int:
    defaults = {
        "store": None,
        "n_positive": None,
        "seed": 0,
        "collision_cap": 100,
        "positive_mode": "weighted",
    }
    params = _resolve(args, config, "build_dataset", defaults)
    _require(params, "store", "n_positive")
    out = _out_dir(args)

    triple_store = store.load(params["store"])
    examples = sampling.build_selfsupervised_dataset(
        triple_store,
        n_positive=int(params["n_positive"]),
        seed=int(params["seed"]),
        collision_cap=int(params["collision_cap"]),
        positive_mode=str(params["positive_mode"]),
    )
    sampling.write_dataset(examples, out / "dataset.tsv")
    collided = sum(1 for ex in examples if ex.collided)
    _write_kv(
        out / "dataset_stats.txt",
        [
            ("examples", len(examples)),
            ("positives", sum(1 for ex in examples if ex.label == 1)),
            ("negatives", sum(1 for ex in examples if ex.label == 0)),
            ("collision_flagged", collided),
        ],
    )
    _write_resolved_config(out, "build-dataset", params)
    if collided:
        print(f"warning: {collided} negatives still attested after resampling", file=sys.stderr)
    return 0


def cmd_train(args: argparse.Namespace, config: dict) -> int:
    defaults = dict(_TRAIN_DEFAULTS, dataset=None, embeddings=None)
    params = _resolve(args, config, "train", defaults)
    _require(params, "dataset", "embeddings")
    out = _out_dir(args)

    examples = sampling.read_dataset(params["dataset"], provenance="auto")
    table = load_vectors(params["embeddings"], oov_policy=str(params["oov_policy"]))
    data = vectorize(table, examples)
    if data.x.shape[0] == 0:
        raise CliError("no examples survived embedding lookup")
    cfg = _train_config(params)
    result = mlp.train(data.x, data.y, cfg)

    mlp.save_params(result.params, out / "model.ckpt")
    mlp.write_loss_curve(result.losses, out / "loss_curve.csv")
    _write_kv(
        out / "train_stats.txt",
        [
            ("examples", len(examples)),
            ("used", data.x.shape[0]),
            ("oov_dropped", data.dropped),
            ("batches", len(result.losses)),
            ("final_loss", repr(result.losses[-1]) if result.losses else "na"),
        ],
    )
    _write_resolved_config(out, "train", params)
    return 0


def cmd_eval(args: argparse.Namespace, config: dict) -> int:
    defaults = {"model": None, "dataset": None, "embeddings": None, "oov_policy": "drop"}
    params = _resolve(args, config, "eval", defaults)
    _require(params, "model", "dataset", "embeddings")
    out = _out_dir(args)

    params_model = mlp.load_params(params["model"])
    examples = sampling.read_dataset(params["dataset"])
    table = load_vectors(params["embeddings"], oov_policy=str(params["oov_policy"]))
    data = vectorize(table, examples)
    if data.x.shape[0] == 0:
        raise CliError("no examples survived embedding lookup")
    probs = mlp.forward_batch(params_model, data.x)
    preds = (probs >= 0.5).astype(np.int64)
    rep = evaluation.report(preds, data.y.astype(np.int64))
    evaluation.write_report(
        out / "report.txt",
        rep,
        extras={
            "oov_dropped": str(data.dropped),
            "examples": str(len(examples)),
            "config": json.dumps(params, sort_keys=True, default=str),
        },
    )
    _write_resolved_config(out, "eval", params)
    print(f"accuracy {rep.accuracy:.4f} on {rep.n} examples", file=sys.stderr)
    return 0


def cmd_cv(args: argparse.Namespace, config: dict) -> int:
    defaults = dict(
        _TRAIN_DEFAULTS,
        gold=None,
        embeddings=None,
        k=10,
        repeats=20,
        cv_seed=0,
        init_mode="fixed",
    )
    params = _resolve(args, config, "cv", defaults)
    _require(params, "gold", "embeddings")
    out = _out_dir(args)

    gold = sampling.read_dataset(params["gold"])
    table = load_vectors(params["embeddings"], oov_policy=str(params["oov_policy"]))
    coverage = vectorize(table, gold)
    if coverage.dropped and table.oov_policy == "drop":
        raise CliError(
            f"{coverage.dropped} gold examples lack embeddings; rerun with --oov-policy mean_vector"
        )
    cfg = _train_config(params)
    trainer = mlp.make_trainer(table, cfg)
    result = evaluation.kfold_cv(
        gold,
        trainer,
        k=int(params["k"]),
        repeats=int(params["repeats"]),
        seed=int(params["cv_seed"]),
        init_mode=str(params["init_mode"]),
        model_seed=int(params["seed"]),
    )
    _write_kv(
        out / "cv_report.txt",
        [
            ("mean_accuracy", repr(result.mean_accuracy)),
            ("k", params["k"]),
            ("repeats", params["repeats"]),
            ("cv_seed", params["cv_seed"]),
            ("init_mode", params["init_mode"]),
            ("n", len(gold)),
        ],
    )
    with open(out / "cv_repeats.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("repeat,accuracy,fold_mean_accuracy\n")
        for i, (acc, fmean) in enumerate(
            zip(result.repeat_accuracies, result.repeat_fold_mean_accuracies)
        ):
            f.write(f"{i},{acc!r},{fmean!r}\n")
    _write_resolved_config(out, "cv", params)
    print(f"cv mean accuracy {result.mean_accuracy:.4f}", file=sys.stderr)
    return 0


def _grid_axes(params: dict) -> GridAxes:
    name = params["grid"]
    if name == "nn":
        return NN_GRID
    if name == "transformer":
        return TRANSFORMER_GRID
    if name == "custom":
        for key in ("learning_rates", "batch_sizes", "epochs_axis"):
            if not params.get(key):
                raise CliError(f"custom grid requires {key} in the config")
        return GridAxes(
            learning_rates=tuple(float(x) for x in params["learning_rates"]),
            batch_sizes=tuple(int(x) for x in params["batch_sizes"]),
            epochs=tuple(float(x) for x in params["epochs_axis"]),
        )
    raise CliError(f"unknown grid {name!r} (expected nn, transformer, or custom)")


def cmd_grid(args: argparse.Namespace, config: dict) -> int:
    defaults = {
        "train_data": None,
        "valid_data": None,
        "test_data": None,
        "embeddings": None,
        "grid": "nn",
        "learning_rates": None,
        "batch_sizes": None,
        "epochs_axis": None,
        "seed": 0,
        "hidden": 100,
        "optimizer": "adam",
        "activation": "tanh",
        "oov_policy": "mean_vector",
        "cell": None,
    }
    params = _resolve(args, config, "grid", defaults)
    _require(params, "train_data", "valid_data", "embeddings")
    out = _out_dir(args)
    axes = _grid_axes(params)

    train_examples = sampling.read_dataset(params["train_data"], provenance="auto")
    valid_examples = sampling.read_dataset(params["valid_data"])
    table = load_vectors(params["embeddings"], oov_policy=str(params["oov_policy"]))
    train_vec = vectorize(table, train_examples)
    valid_vec = vectorize(table, valid_examples)
    if train_vec.x.shape[0] == 0 or valid_vec.x.shape[0] == 0:
        raise CliError("no examples survived embedding lookup")

    def evaluate(cfg: TrainConfig) -> float:
        fitted = mlp.train(train_vec.x, train_vec.y, cfg)
        probs = mlp.forward_batch(fitted.params, valid_vec.x)
        preds = (probs >= 0.5).astype(np.int64)
        return float(np.mean(preds == valid_vec.y.astype(np.int64)))

    base_cfg = TrainConfig(
        hidden=int(params["hidden"]),
        optimizer=str(params["optimizer"]),
        activation=str(params["activation"]),
    )
    only = {int(params["cell"])} if params["cell"] is not None else None
    result = evaluation.grid_search(
        evaluate, axes, base_cfg, base_seed=int(params["seed"]), only_cells=only
    )
    evaluation.write_grid_csv(result.rows, out / "grid.csv")
    best = result.best
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

    if params["test_data"] is not None:
        test_examples = sampling.read_dataset(params["test_data"])
        test_vec = vectorize(table, test_examples)
        best_cfg = TrainConfig(
            learning_rate=best.learning_rate,
            batch_size=best.batch_size,
            epochs=best.epochs,
            seed=best.seed,
            hidden=base_cfg.hidden,
            optimizer=base_cfg.optimizer,
            activation=base_cfg.activation,
        )
        fitted = mlp.train(train_vec.x, train_vec.y, best_cfg)
        probs = mlp.forward_batch(fitted.params, test_vec.x)
        preds = (probs >= 0.5).astype(np.int64)
        rep = evaluation.report(preds, test_vec.y.astype(np.int64))
        evaluation.write_report(
            out / "report.txt",
            rep,
            extras={
                "split": "test",
                "best_cell": str(best.cell_index),
                "seed": str(best.seed),
                "config": json.dumps(params, sort_keys=True, default=str),
            },
        )
        print(f"test accuracy {rep.accuracy:.4f}", file=sys.stderr)
    _write_resolved_config(out, "grid", params)
    return 0


def cmd_topk(args: argparse.Namespace, config: dict) -> int:
    defaults = {"store": None, "k": 10}
    params = _resolve(args, config, "topk", defaults)
    _require(params, "store")
    triple_store = store.load(params["store"])
    for triple, count in store.top_k(triple_store, int(params["k"])):
        sys.stdout.write(f"{triple.subject}-{triple.verb}-{triple.object}\t{count}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="seed override")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="shard workers for extract")
    common.add_argument("--strict", action="store_true", help="abort on malformed input")

    parser = argparse.ArgumentParser(prog="svoplaus", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("extract", parents=[common], help="conllu files -> triple count file")
    p.add_argument("inputs", nargs="+", help="CoNLL-U files")
    p.add_argument("--include-passive", dest="include_passive", action="store_const", const=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("build-dataset", parents=[common], help="store -> balanced labeled TSV")
    p.add_argument("--store")
    p.add_argument("--n-positive", dest="n_positive", type=int)
    p.add_argument("--collision-cap", dest="collision_cap", type=int)
    p.add_argument("--positive-mode", dest="positive_mode", choices=["weighted", "unique"])
    p.set_defaults(func=cmd_build_dataset)

    train_flags = argparse.ArgumentParser(add_help=False)
    train_flags.add_argument("--lr", dest="learning_rate", type=float)
    train_flags.add_argument("--batch", dest="batch_size", type=int)
    train_flags.add_argument("--epochs", type=float)
    train_flags.add_argument("--hidden", type=int)
    train_flags.add_argument("--optimizer", choices=["adam", "sgd"])
    train_flags.add_argument("--activation", choices=["tanh", "relu"])
    train_flags.add_argument("--oov-policy", dest="oov_policy", choices=["drop", "mean_vector"])

    p = sub.add_parser("train", parents=[common, train_flags], help="labeled TSV -> checkpoint")
    p.add_argument("--dataset")
    p.add_argument("--embeddings")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="checkpoint + labeled TSV -> report")
    p.add_argument("--model")
    p.add_argument("--dataset")
    p.add_argument("--embeddings")
    p.add_argument("--oov-policy", dest="oov_policy", choices=["drop", "mean_vector"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cv", parents=[common, train_flags], help="repeated k-fold cross-validation")
    p.add_argument("--gold")
    p.add_argument("--embeddings")
    p.add_argument("--k", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--cv-seed", dest="cv_seed", type=int)
    p.add_argument("--init-mode", dest="init_mode", choices=["fixed", "per_repeat"])
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("grid", parents=[common], help="exhaustive hyperparameter search")
    p.add_argument("--train-data", dest="train_data")
    p.add_argument("--valid-data", dest="valid_data")
    p.add_argument("--test-data", dest="test_data")
    p.add_argument("--embeddings")
    p.add_argument("--grid", choices=["nn", "transformer", "custom"])
    p.add_argument("--hidden", type=int)
    p.add_argument("--optimizer", choices=["adam", "sgd"])
    p.add_argument("--activation", choices=["tanh", "relu"])
    p.add_argument("--oov-policy", dest="oov_policy", choices=["drop", "mean_vector"])
    p.add_argument("--cell", type=int, help="run a single cell, keeping its derived seed")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("topk", parents=[common], help="print the most frequent triples")
    p.add_argument("--store")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_topk)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except (CliError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
