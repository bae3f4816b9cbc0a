"""Counted triple multisets: persistence, filtering, merging, queries.

A store keeps one count per unique triple plus three derived lemma
frequency tables, one per syntactic role. Role frequencies are occurrence
weighted (each of a triple's occurrences contributes once per role), which
is exactly the distribution negative sampling draws from.

On-disk format: UTF-8 rows ``subject\\tverb\\tobject\\tcount``, no header,
sorted by count descending then lexicographically, so files are diffable
and byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import IO, Iterable, Iterator, Mapping

from .extraction import Triple, normalize_lemma

__all__ = [
    "TripleStore",
    "StoreError",
    "MalformedRowError",
    "CorruptStoreFileError",
    "IngestResult",
    "ingest_external_triples",
    "merge",
    "save",
    "load",
    "top_k",
]

ROLES = ("subject", "verb", "object")


class StoreError(ValueError):
    pass


class MalformedRowError(StoreError):
    """TSV row with the wrong column count or a non-integer count."""


class CorruptStoreFileError(StoreError):
    """Saved store file that no longer parses."""


class TripleStore:
    """Immutable counted multiset of triples with per-role frequencies."""

    __slots__ = ("_counts", "_role_freq", "_total")

    def __init__(self, counts: Mapping[Triple, int]):
        items = sorted(counts.items())
        ordered: dict[Triple, int] = {}
        freqs: tuple[dict[str, int], ...] = ({}, {}, {})
        total = 0
        for triple, count in items:
            if not isinstance(triple, Triple):
                triple = Triple(*triple)
            count = int(count)
            if count < 1:
                raise StoreError(f"count must be >= 1, got {count} for {triple}")
            if not triple.is_valid():
                raise StoreError(f"invalid triple {triple}")
            ordered[triple] = count
            total += count
            for slot, lemma in enumerate(triple):
                freqs[slot][lemma] = freqs[slot].get(lemma, 0) + count
        self._counts = ordered
        self._role_freq = freqs
        self._total = total

    @classmethod
    def from_counts(cls, counts: Mapping[Triple, int]) -> "TripleStore":
        return cls(counts)

    @classmethod
    def empty(cls) -> "TripleStore":
        return cls({})

    @property
    def counts(self) -> Mapping[Triple, int]:
        return MappingProxyType(self._counts)

    def role_freq(self, role: str) -> Mapping[str, int]:
        """Occurrence-weighted lemma frequencies for one of subject/verb/object."""
        try:
            slot = ROLES.index(role)
        except ValueError:
            raise KeyError(f"unknown role {role!r}; expected one of {ROLES}") from None
        return MappingProxyType(self._role_freq[slot])

    @property
    def total(self) -> int:
        """Cumulative occurrences across all unique triples."""
        return self._total

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._counts

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TripleStore):
            return NotImplemented
        return self._counts == other._counts

    def __repr__(self) -> str:
        return f"TripleStore(unique={len(self)}, total={self.total})"


def merge(*stores: TripleStore) -> TripleStore:
    """Pointwise count addition; commutative and associative."""
    counts: dict[Triple, int] = {}
    for store in stores:
        for triple, count in store.counts.items():
            counts[triple] = counts.get(triple, 0) + count
    return TripleStore.from_counts(counts)


def _sorted_rows(store: TripleStore) -> list[tuple[Triple, int]]:
    return sorted(store.counts.items(), key=lambda item: (-item[1], item[0]))


def save(store: TripleStore, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for triple, count in _sorted_rows(store):
            f.write(f"{triple.subject}\t{triple.verb}\t{triple.object}\t{count}\n")


def load(path: str | Path) -> TripleStore:
    """Read a saved store; raises CorruptStoreFileError on any bad row."""
    counts: dict[Triple, int] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            row = line.rstrip("\n")
            if not row:
                continue
            cols = row.split("\t")
            if len(cols) != 4:
                raise CorruptStoreFileError(f"{path}:{lineno}: expected 4 columns")
            try:
                count = int(cols[3])
            except ValueError:
                raise CorruptStoreFileError(f"{path}:{lineno}: non-integer count") from None
            triple = Triple(cols[0], cols[1], cols[2])
            if not triple.is_valid() or count < 1:
                raise CorruptStoreFileError(f"{path}:{lineno}: invalid triple or count")
            counts[triple] = counts.get(triple, 0) + count
    return TripleStore.from_counts(counts)


@dataclass
class IngestResult:
    """Store built from an external TSV plus per-reason drop counters."""

    store: TripleStore
    malformed: int = 0
    dropped_nonalpha: int = 0
    dropped_low_count: int = 0


def ingest_external_triples(
    rows: Iterable[str] | IO,
    min_count: int = 5,
    policy: str = "lenient",
) -> IngestResult:
    """Accumulate ``subject\\tverb\\tobject\\tcount`` rows into a store.

    Rows whose lemmas fail alphabetic normalization or whose count falls
    below ``min_count`` are dropped before accumulation, so duplicates only
    sum when each row passes the filter on its own.
    """
    if policy not in ("strict", "lenient"):
        raise ValueError(f"unknown policy: {policy!r}")
    counts: dict[Triple, int] = {}
    malformed = 0
    dropped_nonalpha = 0
    dropped_low = 0
    for lineno, raw in enumerate(rows, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        row = raw.rstrip("\n")
        if not row:
            continue
        cols = row.split("\t")
        count: int | None = None
        if len(cols) == 4:
            try:
                count = int(cols[3])
            except ValueError:
                count = None
        if count is None or count < 0:
            if policy == "strict":
                raise MalformedRowError(f"row {lineno}: bad column count or count field")
            malformed += 1
            continue
        slots = [normalize_lemma(c) for c in cols[:3]]
        if any(s is None for s in slots):
            dropped_nonalpha += 1
            continue
        if count < max(min_count, 1):
            dropped_low += 1
            continue
        triple = Triple(*slots)  # type: ignore[arg-type]
        counts[triple] = counts.get(triple, 0) + count
    return IngestResult(
        store=TripleStore.from_counts(counts),
        malformed=malformed,
        dropped_nonalpha=dropped_nonalpha,
        dropped_low_count=dropped_low,
    )


def top_k(store: TripleStore, k: int) -> list[tuple[Triple, int]]:
    """The k highest-count triples; ties broken lexicographically."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return _sorted_rows(store)[:k]
