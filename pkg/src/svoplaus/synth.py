"""Synthetic corpora, embeddings, and gold sets for tests and benchmarks.

The generator plants recoverable structure: nouns belong to latent classes,
verbs select for (subject class, object class) pairs, and embeddings place
each word near its class centroid. Corpus sentences realize only selected
combinations, so a classifier that reads the embeddings can separate
attested events from frequency-sampled negatives. Gold sets are labeled by
a planted linear rule over the concatenated embeddings with a margin, so
the task is learnable but not trivial string matching.

Everything here is deterministic in its seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .embeddings import EmbeddingTable
from .extraction import Triple
from .rng import Stream, make_rng
from .sampling import LabeledExample

__all__ = [
    "SynthWorld",
    "make_world",
    "write_corpus",
    "make_embeddings",
    "make_gold",
]

_ONSETS = "b bl br ch cl cr d dr f fl g gl gr h j k l m n p pl pr r s sk sl st t tr v w".split()
_VOWELS = "a e i o u".split()
_CODAS = "b ck d g l m n p r sh st t x z".split()


def _word_list(count: int, rng: np.random.Generator) -> list[str]:
    """Distinct pronounceable lowercase words."""
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < count:
        parts = []
        n_syll = 1 + int(rng.random() * 2)
        for _ in range(n_syll + 1):
            parts.append(_ONSETS[int(rng.random() * len(_ONSETS))])
            parts.append(_VOWELS[int(rng.random() * len(_VOWELS))])
        parts.append(_CODAS[int(rng.random() * len(_CODAS))])
        word = "".join(parts)
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _zipf_weights(n: int) -> np.ndarray:
    return 1.0 / np.arange(1.0, n + 1.0)


@dataclass
class SynthWorld:
    """Vocabulary with planted selectional structure."""

    nouns: list[str]
    verbs: list[str]
    noun_class: dict[str, int]
    verb_subject_classes: dict[str, tuple[int, ...]]
    verb_object_classes: dict[str, tuple[int, ...]]
    n_classes: int
    seed: int

    def compatible(self, triple: Triple) -> bool:
        sc = self.noun_class.get(triple.subject)
        oc = self.noun_class.get(triple.object)
        return (
            sc is not None
            and oc is not None
            and sc in self.verb_subject_classes.get(triple.verb, ())
            and oc in self.verb_object_classes.get(triple.verb, ())
        )


def make_world(
    n_nouns: int = 360,
    n_verbs: int = 120,
    n_classes: int = 6,
    seed: int = 0,
) -> SynthWorld:
    rng = make_rng(seed, Stream.SYNTH, 1)
    words = _word_list(n_nouns + n_verbs, rng)
    nouns, verbs = words[:n_nouns], words[n_nouns:]
    noun_class = {noun: i % n_classes for i, noun in enumerate(nouns)}
    verb_subject_classes: dict[str, tuple[int, ...]] = {}
    verb_object_classes: dict[str, tuple[int, ...]] = {}
    for verb in verbs:
        n_sub = 1 + int(rng.random() * 2)
        n_obj = 1 + int(rng.random() * 2)
        subs = rng.permutation(n_classes)[:n_sub]
        objs = rng.permutation(n_classes)[:n_obj]
        verb_subject_classes[verb] = tuple(int(c) for c in sorted(subs))
        verb_object_classes[verb] = tuple(int(c) for c in sorted(objs))
    return SynthWorld(
        nouns=nouns,
        verbs=verbs,
        noun_class=noun_class,
        verb_subject_classes=verb_subject_classes,
        verb_object_classes=verb_object_classes,
        n_classes=n_classes,
        seed=seed,
    )


class _ZipfPicker:
    """Rank-weighted pick via one uniform and a cumulative table."""

    def __init__(self, items: list[str]):
        self.items = items
        cum = np.cumsum(_zipf_weights(len(items)))
        self.cum = cum / cum[-1]

    def pick(self, rng: np.random.Generator) -> str:
        i = int(np.searchsorted(self.cum, rng.random(), side="right"))
        return self.items[min(i, len(self.items) - 1)]


def _sample_triple(
    world: SynthWorld,
    rng: np.random.Generator,
    verb_picker: _ZipfPicker,
    class_pickers: dict[int, _ZipfPicker],
) -> Triple:
    verb = verb_picker.pick(rng)
    sc = world.verb_subject_classes[verb]
    oc = world.verb_object_classes[verb]
    subject = class_pickers[sc[int(rng.random() * len(sc))]].pick(rng)
    obj = class_pickers[oc[int(rng.random() * len(oc))]].pick(rng)
    return Triple(subject, verb, obj)


def write_corpus(
    sink: IO | str | Path,
    world: SynthWorld,
    n_sentences: int,
    seed: int = 0,
    passive_share: float = 0.08,
    pronoun_share: float = 0.06,
) -> int:
    """Write a CoNLL-U corpus realizing compatible events; returns sentences written.

    A slice of sentences are passives or have pronoun subjects, neither of
    which yields a triple under the default extraction rules, so the
    corpus exercises those paths at scale.
    """
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as f:
            return write_corpus(f, world, n_sentences, seed, passive_share, pronoun_share)

    rng = make_rng(seed, Stream.SYNTH, 2)
    nouns_by_class: dict[int, list[str]] = {}
    for noun in world.nouns:
        nouns_by_class.setdefault(world.noun_class[noun], []).append(noun)
    verb_picker = _ZipfPicker(world.verbs)
    class_pickers = {c: _ZipfPicker(pool) for c, pool in nouns_by_class.items()}

    for i in range(n_sentences):
        triple = _sample_triple(world, rng, verb_picker, class_pickers)
        style = rng.random()
        sid = f"synth-{i}"
        if style < passive_share:
            # "The <obj> is <verb>ed ." -> nsubj:pass, no triple
            lines = [
                f"# sent_id = {sid}",
                f"1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_",
                f"2\t{triple.object.capitalize()}\t{triple.object}\tNOUN\t_\t_\t4\tnsubj:pass\t_\t_",
                f"3\tis\tbe\tAUX\t_\t_\t4\taux:pass\t_\t_",
                f"4\t{triple.verb}ed\t{triple.verb}\tVERB\t_\t_\t0\troot\t_\t_",
                f"5\t.\t.\tPUNCT\t_\t_\t4\tpunct\t_\t_",
            ]
        elif style < passive_share + pronoun_share:
            # "It <verb>s the <obj> ." -> pronoun subject, no triple
            lines = [
                f"# sent_id = {sid}",
                f"1\tIt\tit\tPRON\t_\t_\t2\tnsubj\t_\t_",
                f"2\t{triple.verb}s\t{triple.verb}\tVERB\t_\t_\t0\troot\t_\t_",
                f"3\tthe\tthe\tDET\t_\t_\t4\tdet\t_\t_",
                f"4\t{triple.object}\t{triple.object}\tNOUN\t_\t_\t2\tobj\t_\t_",
                f"5\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_",
            ]
        else:
            lines = [
                f"# sent_id = {sid}",
                f"1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_",
                f"2\t{triple.subject.capitalize()}\t{triple.subject}\tNOUN\t_\t_\t3\tnsubj\t_\t_",
                f"3\t{triple.verb}s\t{triple.verb}\tVERB\t_\t_\t0\troot\t_\t_",
                f"4\tthe\tthe\tDET\t_\t_\t5\tdet\t_\t_",
                f"5\t{triple.object}\t{triple.object}\tNOUN\t_\t_\t3\tobj\t_\t_",
                f"6\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_",
            ]
        sink.write("\n".join(lines) + "\n\n")
    return n_sentences


def make_embeddings(world: SynthWorld, dim: int = 50, seed: int = 0) -> dict[str, np.ndarray]:
    """Class-structured vectors: word = its class/selection centroid + noise."""
    rng = make_rng(seed, Stream.SYNTH, 3)
    class_centroids = rng.normal(0.0, 1.0, size=(world.n_classes, dim))
    subj_sel = rng.normal(0.0, 1.0, size=(world.n_classes, dim))
    obj_sel = rng.normal(0.0, 1.0, size=(world.n_classes, dim))
    vectors: dict[str, np.ndarray] = {}
    for noun in world.nouns:
        c = world.noun_class[noun]
        vectors[noun] = 2.0 * class_centroids[c] + rng.normal(0.0, 0.6, size=dim)
    for verb in world.verbs:
        sel = np.zeros(dim)
        for c in world.verb_subject_classes[verb]:
            sel += subj_sel[c]
        for c in world.verb_object_classes[verb]:
            sel += obj_sel[c]
        vectors[verb] = 2.0 * sel + rng.normal(0.0, 0.6, size=dim)
    return vectors


def make_gold(
    world: SynthWorld,
    table: EmbeddingTable,
    n: int = 3062,
    seed: int = 0,
    margin_quantile: float = 0.2,
) -> list[LabeledExample]:
    """Gold set labeled by a planted linear rule over triple embeddings.

    Candidate triples are scored by a random hyperplane; the middle
    ``margin_quantile`` share is discarded and the extremes become the
    positive/negative classes, exactly ``n//2`` each.
    """
    if n % 2 != 0:
        raise ValueError("gold set size must be even")
    rng = make_rng(seed, Stream.SYNTH, 4)
    w = rng.normal(0.0, 1.0, size=3 * table.dim)

    candidates: list[Triple] = []
    seen: set[Triple] = set()
    target = int(n * (1.0 + margin_quantile)) + n // 2
    while len(candidates) < target:
        triple = Triple(
            world.nouns[int(rng.random() * len(world.nouns))],
            world.verbs[int(rng.random() * len(world.verbs))],
            world.nouns[int(rng.random() * len(world.nouns))],
        )
        if triple in seen:
            continue
        seen.add(triple)
        candidates.append(triple)

    feats = np.vstack([np.concatenate([table.get(t.subject), table.get(t.verb), table.get(t.object)]) for t in candidates])
    scores = feats @ w
    order = np.argsort(scores, kind="stable")
    half = n // 2
    negatives = [candidates[i] for i in order[:half]]
    positives = [candidates[i] for i in order[-half:]]
    examples = [LabeledExample(t, 0, "gold") for t in negatives]
    examples += [LabeledExample(t, 1, "gold") for t in positives]
    perm = rng.permutation(len(examples))
    return [examples[i] for i in perm]
