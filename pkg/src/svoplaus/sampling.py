"""Pseudo-implausible triple sampling and self-supervised dataset assembly.

Negatives are composed by drawing each slot independently from its
occurrence-weighted role frequency table (alias method, constant time per
draw). A composed triple that is attested in the store is redrawn, up to a
configurable cap; a draw that exhausts the cap is returned anyway and
flagged, so degenerate stores still terminate and label leakage stays
measurable.

Determinism contract: all draws consume the Philox streams below in a
fixed order, so identical (store, n, seed) always yields the identical
example list.

* negatives: rounds of ``rng.random(6 * unresolved)``; row i consumes the
  six entries ``[6i, 6i+6)`` as subject (index, accept), verb (index,
  accept), object (index, accept) pairs.
* weighted positives: one ``rng.random(2 * n)`` call over the triple table.
* final order: one ``rng.permutation`` over the assembled list.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .extraction import Triple
from .rng import Stream, make_rng
from .store import TripleStore

__all__ = [
    "AliasTable",
    "LabeledExample",
    "EmptyDistributionError",
    "DatasetFormatError",
    "build_alias",
    "NegativeSampler",
    "sample_negative",
    "build_selfsupervised_dataset",
    "write_dataset",
    "read_dataset",
]

PROVENANCES = ("gold", "attested", "sampled")


class EmptyDistributionError(ValueError):
    """Sampling requested from an empty weight table or store."""


class DatasetFormatError(ValueError):
    """Labeled TSV row that does not parse."""


@dataclass(frozen=True)
class AliasTable:
    """Constant-time sampler over ``items`` with probabilities ∝ input weights."""

    items: tuple
    prob: np.ndarray
    alias: np.ndarray

    def __len__(self) -> int:
        return len(self.items)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` item indices; consumes exactly ``2 * size`` uniforms."""
        u = rng.random(2 * size)
        return kernels.alias_draw(self.prob, self.alias, u)

    def induced_distribution(self) -> np.ndarray:
        """Exact per-item probabilities encoded by the table (sums to 1)."""
        n = len(self.items)
        p = self.prob.copy()
        for j in range(n):
            if self.prob[j] < 1.0:
                p[self.alias[j]] += 1.0 - self.prob[j]
        return p / n


def build_alias(weights: Mapping) -> AliasTable:
    """Alias table over the mapping's keys, sorted for determinism."""
    if not weights:
        raise EmptyDistributionError("cannot build an alias table from no weights")
    items = tuple(sorted(weights))
    w = np.array([float(weights[item]) for item in items], dtype=np.float64)
    if not np.all(w > 0):
        raise ValueError("all weights must be > 0")
    prob, alias = kernels.build_alias_arrays(w)
    return AliasTable(items=items, prob=prob, alias=alias)


@dataclass(frozen=True)
class LabeledExample:
    """A triple with a plausibility label and where it came from."""

    triple: Triple
    label: int
    provenance: str
    collided: bool = False

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "sampled" and self.label != 0:
            raise ValueError("sampled examples must carry label 0")
        if self.provenance == "attested" and self.label != 1:
            raise ValueError("attested examples must carry label 1")


class NegativeSampler:
    """Reusable sampler holding the per-role alias tables and attested keys."""

    def __init__(self, store: TripleStore, collision_cap: int = 100):
        if len(store) == 0:
            raise EmptyDistributionError("cannot sample from an empty store")
        if collision_cap < 0:
            raise ValueError("collision_cap must be >= 0")
        self.collision_cap = collision_cap
        self._tables = tuple(build_alias(store.role_freq(role)) for role in ("subject", "verb", "object"))
        ns, nv, no = (len(t) for t in self._tables)
        if ns * nv * no >= 2**63:
            raise ValueError("role vocabularies too large to compose 64-bit keys")
        self._nv = np.uint64(nv)
        self._no = np.uint64(no)
        index = [{lemma: i for i, lemma in enumerate(t.items)} for t in self._tables]
        keys = np.array(
            [
                (index[0][t.subject] * nv + index[1][t.verb]) * no + index[2][t.object]
                for t in store.counts
            ],
            dtype=np.uint64,
        )
        self._attested = np.sort(keys)

    def _compose_keys(self, s: np.ndarray, v: np.ndarray, o: np.ndarray) -> np.ndarray:
        return (s.astype(np.uint64) * self._nv + v.astype(np.uint64)) * self._no + o.astype(np.uint64)

    def sample(self, n: int, rng: np.random.Generator) -> tuple[list[Triple], np.ndarray]:
        """Draw ``n`` negatives; returns triples plus a collided-flag array.

        Rounds run over the still-unresolved rows in ascending order, so
        the result is a pure function of (store, collision_cap, rng state,
        n); see the module docstring for the exact stream consumption.
        """
        if n < 0:
            raise ValueError("n must be >= 0")
        sub_t, verb_t, obj_t = self._tables
        s_idx = np.empty(n, dtype=np.int64)
        v_idx = np.empty(n, dtype=np.int64)
        o_idx = np.empty(n, dtype=np.int64)
        flags = np.zeros(n, dtype=bool)

        unresolved = np.arange(n, dtype=np.int64)
        rounds = max(1, self.collision_cap)
        for round_no in range(rounds):
            if unresolved.shape[0] == 0:
                break
            k = unresolved.shape[0]
            u = rng.random(6 * k).reshape(k, 6)
            s_new = kernels.alias_draw(sub_t.prob, sub_t.alias, np.ascontiguousarray(u[:, 0:2]).ravel())
            v_new = kernels.alias_draw(verb_t.prob, verb_t.alias, np.ascontiguousarray(u[:, 2:4]).ravel())
            o_new = kernels.alias_draw(obj_t.prob, obj_t.alias, np.ascontiguousarray(u[:, 4:6]).ravel())
            s_idx[unresolved] = s_new
            v_idx[unresolved] = v_new
            o_idx[unresolved] = o_new
            attested = kernels.membership(self._compose_keys(s_new, v_new, o_new), self._attested).astype(bool)
            flags[unresolved] = attested
            if self.collision_cap == 0:
                break
            unresolved = unresolved[attested]

        triples = [
            Triple(sub_t.items[s_idx[i]], verb_t.items[v_idx[i]], obj_t.items[o_idx[i]])
            for i in range(n)
        ]
        return triples, flags


def sample_negative(
    store: TripleStore, rng: np.random.Generator, collision_cap: int = 100
) -> tuple[Triple, bool]:
    """One pseudo-implausible triple plus its collision flag.

    Builds the sampler tables on every call; loops should construct a
    :class:`NegativeSampler` once instead.
    """
    sampler = NegativeSampler(store, collision_cap=collision_cap)
    triples, flags = sampler.sample(1, rng)
    return triples[0], bool(flags[0])


def build_selfsupervised_dataset(
    store: TripleStore,
    n_positive: int,
    seed: int,
    collision_cap: int = 100,
    positive_mode: str = "weighted",
) -> list[LabeledExample]:
    """Balanced dataset: n attested positives and n sampled negatives, shuffled.

    ``weighted`` draws positives from unique triples with replacement,
    weighted by occurrence count; ``unique`` draws without replacement and
    unweighted (requires ``n_positive <= len(store)``).
    """
    if len(store) == 0:
        raise EmptyDistributionError("cannot build a dataset from an empty store")
    if n_positive < 1:
        raise ValueError("n_positive must be >= 1")

    if positive_mode == "weighted":
        table = build_alias(store.counts)
        idx = table.draw(make_rng(seed, Stream.POSITIVES), n_positive)
        positives = [table.items[i] for i in idx]
    elif positive_mode == "unique":
        if n_positive > len(store):
            raise ValueError("unique mode needs n_positive <= number of unique triples")
        triples = sorted(store.counts)
        perm = make_rng(seed, Stream.POSITIVES).permutation(len(triples))
        positives = [triples[i] for i in perm[:n_positive]]
    else:
        raise ValueError(f"unknown positive_mode {positive_mode!r}")

    sampler = NegativeSampler(store, collision_cap=collision_cap)
    negatives, flags = sampler.sample(n_positive, make_rng(seed, Stream.NEGATIVES))

    examples = [LabeledExample(t, 1, "attested") for t in positives]
    examples += [
        LabeledExample(t, 0, "sampled", collided=bool(f)) for t, f in zip(negatives, flags)
    ]
    order = make_rng(seed, Stream.SHUFFLE).permutation(len(examples))
    return [examples[i] for i in order]


def write_dataset(examples: Sequence[LabeledExample], path: str | Path) -> None:
    """Labeled TSV rows ``subject\\tverb\\tobject\\tlabel``."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for ex in examples:
            t = ex.triple
            f.write(f"{t.subject}\t{t.verb}\t{t.object}\t{ex.label}\n")


def read_dataset(path: str | Path, provenance: str = "gold") -> list[LabeledExample]:
    """Read a labeled TSV.

    ``provenance="auto"`` maps label 1 to attested and 0 to sampled;
    anything else is stamped on every example as-is.
    """
    if provenance != "auto" and provenance not in PROVENANCES:
        raise ValueError(f"unknown provenance {provenance!r}")
    examples: list[LabeledExample] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            row = line.rstrip("\n")
            if not row:
                continue
            cols = row.split("\t")
            if len(cols) != 4 or cols[3] not in ("0", "1"):
                raise DatasetFormatError(f"{path}:{lineno}: expected subject\\tverb\\tobject\\tlabel")
            triple = Triple(cols[0], cols[1], cols[2])
            if not triple.is_valid():
                raise DatasetFormatError(f"{path}:{lineno}: invalid triple")
            label = int(cols[3])
            if provenance == "auto":
                prov = "attested" if label == 1 else "sampled"
            else:
                prov = provenance
            examples.append(LabeledExample(triple, label, prov))
    return examples
