import numpy as np
import pytest

from svobert.encoding import Triple

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


def make_word(i: int, prefix: str) -> str:
    out = prefix
    while True:
        out += _CONSONANTS[i % len(_CONSONANTS)] + _VOWELS[(i // len(_CONSONANTS)) % len(_VOWELS)]
        i //= len(_CONSONANTS) * len(_VOWELS)
        if i == 0:
            return out


def planted_gold(n=3062, n_nouns=240, n_verbs=80, seed=5):
    """Gold set labeled by a planted additive rule over word identities,
    margin-separated so the classes are learnable from tokens alone."""
    rng = np.random.default_rng(seed)
    nouns = [make_word(i, "n") for i in range(n_nouns)]
    verbs = [make_word(i, "v") for i in range(n_verbs)]
    subject_score = {w: rng.normal() for w in nouns}
    verb_score = {w: rng.normal() for w in verbs}
    object_score = {w: rng.normal() for w in nouns}

    seen = set()
    candidates = []
    while len(candidates) < n + n // 2:
        t = Triple(
            nouns[rng.integers(n_nouns)], verbs[rng.integers(n_verbs)], nouns[rng.integers(n_nouns)]
        )
        if t not in seen:
            seen.add(t)
            candidates.append(t)
    scores = np.array(
        [subject_score[t.subject] + verb_score[t.verb] + object_score[t.object] for t in candidates]
    )
    order = np.argsort(scores, kind="stable")
    half = n // 2
    examples = [(candidates[i], 0) for i in order[:half]]
    examples += [(candidates[i], 1) for i in order[-half:]]
    perm = rng.permutation(len(examples))
    return [examples[i] for i in perm], nouns + verbs


@pytest.fixture(scope="session")
def gold_small():
    return planted_gold(n=300, n_nouns=60, n_verbs=20, seed=13)


def write_tsv(examples, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for triple, label in examples:
            f.write(f"{triple.subject}\t{triple.verb}\t{triple.object}\t{label}\n")
