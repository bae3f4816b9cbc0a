"""Static word vectors: text-format loading and triple featurization.

Vector files carry one token per row followed by its components, space
separated. A leading row with exactly two integer fields (the header some
tools emit) is detected and skipped. Vectors are held as 64-bit floats so
downstream gradient checks stay tight.
"""

from __future__ import annotations

from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .extraction import Triple
from .sampling import LabeledExample

__all__ = [
    "EmbeddingTable",
    "EmbeddingError",
    "EmptyTableError",
    "InconsistentDimError",
    "load_vectors",
    "write_vectors",
    "embed_triple",
    "Vectorized",
    "vectorize",
]

OOV_POLICIES = ("drop", "mean_vector")


class EmbeddingError(ValueError):
    pass


class EmptyTableError(EmbeddingError):
    """No vector rows survived loading."""


class InconsistentDimError(EmbeddingError):
    """Row length differs from the table dimensionality (strict mode only)."""


class EmbeddingTable:
    """Immutable lemma -> vector map with a configurable out-of-vocabulary policy."""

    __slots__ = ("dim", "_vectors", "oov_policy", "_mean", "skipped_rows")

    def __init__(
        self,
        vectors: Mapping[str, np.ndarray],
        oov_policy: str = "drop",
        skipped_rows: int = 0,
    ):
        if oov_policy not in OOV_POLICIES:
            raise ValueError(f"unknown oov_policy {oov_policy!r}")
        if not vectors:
            raise EmptyTableError("no vectors")
        self._vectors: dict[str, np.ndarray] = {}
        dim: int | None = None
        for token, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if dim is None:
                dim = arr.shape[0]
            elif arr.shape != (dim,):
                raise InconsistentDimError(f"vector for {token!r} has length {arr.shape}")
            arr.flags.writeable = False
            self._vectors[token] = arr
        self.dim = int(dim)  # type: ignore[arg-type]
        self.oov_policy = oov_policy
        self.skipped_rows = skipped_rows
        mean = np.zeros(self.dim, dtype=np.float64)
        for arr in self._vectors.values():
            mean += arr
        mean /= len(self._vectors)
        mean.flags.writeable = False
        self._mean = mean

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    @property
    def mean_vector(self) -> np.ndarray:
        """Arithmetic mean of all loaded vectors."""
        return self._mean

    def get(self, token: str) -> np.ndarray | None:
        return self._vectors.get(token)

    def vocabulary(self) -> set[str]:
        return set(self._vectors)


def load_vectors(
    stream: Iterable[str] | Iterable[bytes] | IO | str | Path,
    vocab_filter: set[str] | None = None,
    oov_policy: str = "drop",
    strict: bool = False,
) -> EmbeddingTable:
    """Build an EmbeddingTable from a vector text stream or file path.

    Rows whose length disagrees with the first retained row (or whose
    floats do not parse) are skipped and counted in ``skipped_rows``;
    strict mode raises instead. Raises EmptyTableError when nothing
    survives the ``vocab_filter``.
    """
    if isinstance(stream, (str, Path)):
        with open(stream, "r", encoding="utf-8") as f:
            return load_vectors(f, vocab_filter=vocab_filter, oov_policy=oov_policy, strict=strict)

    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    skipped = 0
    first_row = True
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        fields = raw.rstrip("\n").split(" ")
        if not fields or fields == [""]:
            continue
        if first_row and len(fields) == 2:
            try:
                int(fields[0]), int(fields[1])
                first_row = False
                continue  # tool-emitted header row
            except ValueError:
                pass
        first_row = False
        token = fields[0]
        if vocab_filter is not None and token not in vocab_filter:
            continue
        try:
            values = np.array([float(x) for x in fields[1:]], dtype=np.float64)
        except ValueError:
            if strict:
                raise InconsistentDimError(f"unparseable vector row for {token!r}")
            skipped += 1
            continue
        if values.shape[0] == 0:
            if strict:
                raise InconsistentDimError(f"row for {token!r} has no components")
            skipped += 1
            continue
        if dim is None:
            dim = values.shape[0]
        elif values.shape[0] != dim:
            if strict:
                raise InconsistentDimError(
                    f"row for {token!r} has {values.shape[0]} components, expected {dim}"
                )
            skipped += 1
            continue
        vectors[token] = values
    if not vectors:
        raise EmptyTableError("no vector rows retained")
    return EmbeddingTable(vectors, oov_policy=oov_policy, skipped_rows=skipped)


def write_vectors(vectors: Mapping[str, np.ndarray], path: str | Path) -> None:
    """Write vectors in the text format, tokens in sorted order."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for token in sorted(vectors):
            components = " ".join(repr(float(x)) for x in np.asarray(vectors[token]))
            f.write(f"{token} {components}\n")


def embed_triple(table: EmbeddingTable, triple: Triple) -> np.ndarray | None:
    """Concatenated [subject; verb; object] vector, or None when dropped."""
    parts = []
    for lemma in triple:
        vec = table.get(lemma)
        if vec is None:
            if table.oov_policy == "drop":
                return None
            vec = table.mean_vector
        parts.append(vec)
    return np.concatenate(parts)


class Vectorized:
    """Feature matrix for a labeled dataset plus bookkeeping about drops."""

    __slots__ = ("x", "y", "kept", "dropped")

    def __init__(self, x: np.ndarray, y: np.ndarray, kept: list[int], dropped: int):
        self.x = x
        self.y = y
        self.kept = kept
        self.dropped = dropped


def vectorize(table: EmbeddingTable, examples: Sequence[LabeledExample]) -> Vectorized:
    """Embed every example; under the drop policy OOV examples are recorded."""
    rows: list[np.ndarray] = []
    labels: list[int] = []
    kept: list[int] = []
    dropped = 0
    for i, ex in enumerate(examples):
        vec = embed_triple(table, ex.triple)
        if vec is None:
            dropped += 1
            continue
        rows.append(vec)
        labels.append(ex.label)
        kept.append(i)
    if rows:
        x = np.vstack(rows)
    else:
        x = np.empty((0, 3 * table.dim), dtype=np.float64)
    y = np.array(labels, dtype=np.float64)
    return Vectorized(x=x, y=y, kept=kept, dropped=dropped)
