"""Command line for the transformer classifier: supervised CV and the
self-supervised grid protocol, over the pipeline's TSV/report formats.

Accepts the pipeline's JSON config-file convention extended with
transformer fields (variant, max_restarts); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

from .finetune import FinetuneConfig
from .protocols import TRANSFORMER_GRID, GridAxes
from .runner import selfsup_protocol, supervised_cv


def _load_config(path):
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _merge(args, config, section, defaults):
    section_cfg = config.get(section, {})
    params = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = section_cfg.get(key)
        if value is None and key.endswith("seed"):
            value = config.get("seed")
        params[key] = default if value is None else value
    return params


def _cfg(params) -> FinetuneConfig:
    return FinetuneConfig(
        learning_rate=float(params["learning_rate"]),
        batch_size=int(params["batch_size"]),
        epochs=float(params["epochs"]),
        seed=int(params["seed"]),
        max_restarts=int(params["max_restarts"]),
    )


_TRAIN_DEFAULTS = {
    "learning_rate": 2e-5,
    "batch_size": 16,
    "epochs": 3.0,
    "seed": 0,
    "max_restarts": 5,
    "variant": "compact",
}


def cmd_supervised(args, config):
    params = _merge(
        args, config, "supervised", dict(_TRAIN_DEFAULTS, gold=None, k=10, repeats=20, cv_seed=0)
    )
    if params["gold"] is None:
        raise ValueError("missing required parameter: gold")
    mean = supervised_cv(
        params["gold"],
        args.out,
        _cfg(params),
        variant=str(params["variant"]),
        k=int(params["k"]),
        repeats=int(params["repeats"]),
        protocol_seed=int(params["cv_seed"]),
    )
    print(f"cv mean accuracy {mean:.4f}", file=sys.stderr)
    return 0


def _grid_axes(params) -> GridAxes:
    if params["grid"] == "transformer":
        return TRANSFORMER_GRID
    if params["grid"] == "custom":
        for key in ("learning_rates", "batch_sizes", "epochs_axis"):
            if not params.get(key):
                raise ValueError(f"custom grid requires {key} in the config")
        return GridAxes(
            learning_rates=tuple(float(x) for x in params["learning_rates"]),
            batch_sizes=tuple(int(x) for x in params["batch_sizes"]),
            epochs=tuple(float(x) for x in params["epochs_axis"]),
        )
    raise ValueError(f"unknown grid {params['grid']!r} (expected transformer or custom)")


def cmd_selfsup(args, config):
    params = _merge(
        args,
        config,
        "selfsup",
        dict(
            _TRAIN_DEFAULTS,
            train_data=None,
            valid_data=None,
            test_data=None,
            cell=None,
            grid="transformer",
            learning_rates=None,
            batch_sizes=None,
            epochs_axis=None,
        ),
    )
    for key in ("train_data", "valid_data", "test_data"):
        if params[key] is None:
            raise ValueError(f"missing required parameter: {key.replace('_', '-')}")
    only = {int(params["cell"])} if params["cell"] is not None else None
    stats = selfsup_protocol(
        params["train_data"],
        params["valid_data"],
        params["test_data"],
        args.out,
        _cfg(params),
        variant=str(params["variant"]),
        axes=_grid_axes(params),
        only_cells=only,
    )
    print(f"test accuracy {stats['accuracy']:.4f}", file=sys.stderr)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", required=True)
    common.add_argument("--variant")
    common.add_argument("--lr", dest="learning_rate", type=float)
    common.add_argument("--batch", dest="batch_size", type=int)
    common.add_argument("--epochs", type=float)
    common.add_argument("--max-restarts", dest="max_restarts", type=int)

    parser = argparse.ArgumentParser(prog="svobert", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("supervised", parents=[common], help="repeated k-fold CV on a gold TSV")
    p.add_argument("--gold")
    p.add_argument("--k", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--cv-seed", dest="cv_seed", type=int)
    p.set_defaults(func=cmd_supervised)

    p = sub.add_parser("selfsup", parents=[common], help="grid on validation, report test accuracy")
    p.add_argument("--train-data", dest="train_data")
    p.add_argument("--valid-data", dest="valid_data")
    p.add_argument("--test-data", dest="test_data")
    p.add_argument("--grid", choices=["transformer", "custom"])
    p.add_argument("--cell", type=int, help="run a single grid cell, keeping its derived seed")
    p.set_defaults(func=cmd_selfsup)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
