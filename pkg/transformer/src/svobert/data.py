"""Labeled-TSV and report-file io, format-compatible with the extraction
pipeline's files: datasets are ``subject\\tverb\\tobject\\tlabel`` rows and
reports are ``key\\tvalue`` lines.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

from .encoding import Triple

REPORT_KEYS = ("accuracy", "tp", "fp", "tn", "fn", "fp_share_of_errors", "n")


class DatasetFormatError(ValueError):
    pass


def read_labeled_tsv(path: str | Path) -> list[tuple[Triple, int]]:
    examples: list[tuple[Triple, int]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            row = line.rstrip("\n")
            if not row:
                continue
            cols = row.split("\t")
            if len(cols) != 4 or cols[3] not in ("0", "1"):
                raise DatasetFormatError(f"{path}:{lineno}: expected subject\\tverb\\tobject\\tlabel")
            examples.append((Triple(cols[0], cols[1], cols[2]), int(cols[3])))
    return examples


def confusion(predictions: Sequence[int], labels: Sequence[int]) -> dict[str, float | int | None]:
    if len(predictions) != len(labels) or not predictions:
        raise ValueError("predictions and labels must be equal-length and non-empty")
    tp = fp = tn = fn = 0
    for p, g in zip(predictions, labels):
        if p == 1 and g == 1:
            tp += 1
        elif p == 1 and g == 0:
            fp += 1
        elif p == 0 and g == 0:
            tn += 1
        else:
            fn += 1
    errors = fp + fn
    return {
        "accuracy": (tp + tn) / len(predictions),
        "tp": tp,
        "fp": fp,
        "tn": tn,
        "fn": fn,
        "fp_share_of_errors": (fp / errors) if errors else None,
        "n": len(predictions),
    }


def write_report(path: str | Path, stats: Mapping[str, object], extras: Mapping[str, object] | None = None) -> None:
    """Key-value report rows in the pipeline's shared format."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key in REPORT_KEYS:
            value = stats[key]
            if key == "fp_share_of_errors" and value is None:
                f.write("fp_share_of_errors\tna\n")
            elif key == "accuracy" or key == "fp_share_of_errors":
                f.write(f"{key}\t{value!r}\n")
            else:
                f.write(f"{key}\t{value}\n")
        if extras:
            for key, value in extras.items():
                f.write(f"{key}\t{value}\n")


def read_report(path: str | Path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if line:
                key, _, value = line.partition("\t")
                pairs[key] = value
    return pairs
