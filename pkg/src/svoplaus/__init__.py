"""Learn physical plausibility of subject-verb-object events from text.

Pipeline: stream dependency-parsed corpora (CoNLL-U), extract attested
s-v-o triples, build balanced self-supervised datasets by frequency
sampling pseudo-negatives, train a two-layer classifier over static word
embeddings, and evaluate with repeated cross-validation or a fixed
valid/test split.
"""

from .conllu import DepTree, Token, parse_conllu, validate_tree
from .extraction import ExtractionConfig, Triple, extract_corpus, extract_triples, normalize_lemma
from .sampling import LabeledExample, build_selfsupervised_dataset, sample_negative
from .store import TripleStore, ingest_external_triples, load, merge, save, top_k

__version__ = "0.1.0"

__all__ = [
    "DepTree",
    "Token",
    "parse_conllu",
    "validate_tree",
    "ExtractionConfig",
    "Triple",
    "extract_corpus",
    "extract_triples",
    "normalize_lemma",
    "LabeledExample",
    "build_selfsupervised_dataset",
    "sample_negative",
    "TripleStore",
    "ingest_external_triples",
    "load",
    "merge",
    "save",
    "top_k",
    "__version__",
]
