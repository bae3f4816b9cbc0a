"""Extract attested subject-verb-object triples from dependency trees.

A triple is emitted for every (nsubj, obj) dependent pair sharing a verbal
head, so conjunction can produce several triples per verb. Arguments are
restricted to nominal POS tags by default, passives are excluded, and every
lemma must survive alphabetic normalization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, NamedTuple

from .conllu import DepTree

if TYPE_CHECKING:
    from .store import TripleStore

__all__ = [
    "Triple",
    "ExtractionConfig",
    "ExtractionResult",
    "normalize_lemma",
    "extract_triples",
    "extract_corpus",
]

_LEMMA = re.compile(r"[a-z]+\Z")


class Triple(NamedTuple):
    """A normalized (subject, verb, object) event. Orders lexicographically."""

    subject: str
    verb: str
    object: str

    def is_valid(self) -> bool:
        return all(_LEMMA.fullmatch(slot) for slot in self)


def normalize_lemma(raw: str) -> str | None:
    """Lowercase ``raw``; None if the result is empty or not purely a-z."""
    lowered = raw.lower()
    if _LEMMA.fullmatch(lowered):
        return lowered
    return None


@dataclass(frozen=True)
class ExtractionConfig:
    allowed_arg_upos: frozenset[str] = frozenset({"NOUN", "PROPN"})
    require_verb_upos: bool = True
    include_passive: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "allowed_arg_upos", frozenset(self.allowed_arg_upos))
        if not self.allowed_arg_upos:
            raise ValueError("allowed_arg_upos must be non-empty")


DEFAULT_CONFIG = ExtractionConfig()


def extract_triples(tree: DepTree, cfg: ExtractionConfig = DEFAULT_CONFIG) -> list[Triple]:
    """All triples licensed by ``cfg``, ordered by verb then argument position."""
    subj_rels = {"nsubj", "nsubj:pass"} if cfg.include_passive else {"nsubj"}

    subjects: dict[int, list] = {}
    objects: dict[int, list] = {}
    for t in tree.tokens:
        if t.upos not in cfg.allowed_arg_upos:
            continue
        if t.deprel in subj_rels:
            subjects.setdefault(t.head, []).append(t)
        elif t.deprel == "obj":
            objects.setdefault(t.head, []).append(t)

    triples: list[Triple] = []
    for v in tree.tokens:
        if cfg.require_verb_upos and v.upos != "VERB":
            continue
        subs = subjects.get(v.id)
        objs = objects.get(v.id)
        if not subs or not objs:
            continue
        verb = normalize_lemma(v.lemma)
        if verb is None:
            continue
        for s in subs:
            subject = normalize_lemma(s.lemma)
            if subject is None:
                continue
            for o in objs:
                obj = normalize_lemma(o.lemma)
                if obj is None:
                    continue
                triples.append(Triple(subject, verb, obj))
    return triples


@dataclass
class ExtractionResult:
    """Store plus corpus totals from one extraction pass."""

    store: TripleStore
    sentences: int
    occurrences: int

    @property
    def unique(self) -> int:
        return len(self.store)


def extract_corpus(
    trees: Iterable[DepTree], cfg: ExtractionConfig = DEFAULT_CONFIG
) -> ExtractionResult:
    """Stream trees through :func:`extract_triples`, accumulating counts."""
    from .store import TripleStore  # deferred: store keys on Triple

    counts: dict[Triple, int] = {}
    sentences = 0
    occurrences = 0
    for tree in trees:
        sentences += 1
        for triple in extract_triples(tree, cfg):
            occurrences += 1
            counts[triple] = counts.get(triple, 0) + 1
    return ExtractionResult(
        store=TripleStore.from_counts(counts), sentences=sentences, occurrences=occurrences
    )
