"""Entity-marked triple encoding for sequence classification.

Input layout, exactly:

    [CLS] [SUBJ] <subject> [/SUBJ] [VERB] <verb> [/VERB] [OBJ] <object> [/OBJ] [SEP]

Marker tokens are registered as special vocabulary items so subword
tokenization never splits them; the lemmas between markers go through the
model's own tokenizer and may span several wordpieces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import PreTrainedTokenizerFast

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
SUBJ_OPEN, SUBJ_CLOSE = "[SUBJ]", "[/SUBJ]"
VERB_OPEN, VERB_CLOSE = "[VERB]", "[/VERB]"
OBJ_OPEN, OBJ_CLOSE = "[OBJ]", "[/OBJ]"
MARKERS = (SUBJ_OPEN, SUBJ_CLOSE, VERB_OPEN, VERB_CLOSE, OBJ_OPEN, OBJ_CLOSE)


class Triple(NamedTuple):
    subject: str
    verb: str
    object: str


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class MarkedSequence:
    """The exact token sequence fed to the classifier."""

    tokens: tuple[str, ...]


def build_tokenizer(vocabulary: Iterable[str]) -> PreTrainedTokenizerFast:
    """Whole-word WordPiece tokenizer over ``vocabulary`` plus the markers.

    Entries may be plain words or ``##``-prefixed continuation pieces, so
    multi-piece words are representable. Words outside the vocabulary map
    to the unknown token.
    """
    words = sorted(set(vocabulary))
    vocab = {tok: i for i, tok in enumerate((PAD, UNK, CLS, SEP, MASK))}
    for word in words:
        if word not in vocab:
            vocab[word] = len(vocab)
    wordpiece = models.WordPiece(vocab, unk_token=UNK, max_input_chars_per_word=64)
    tok = Tokenizer(wordpiece)
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        unk_token=UNK,
        pad_token=PAD,
        cls_token=CLS,
        sep_token=SEP,
        mask_token=MASK,
        model_max_length=64,
    )
    register_markers(fast)
    return fast


def register_markers(tokenizer) -> int:
    """Add the six marker tokens as special (never-split) vocabulary items."""
    return tokenizer.add_special_tokens({"additional_special_tokens": list(MARKERS)})


def encode_triple(triple: Triple, tokenizer) -> MarkedSequence:
    """Marked token sequence for one triple; lemmas are lowercased."""
    tokens: list[str] = [CLS]
    for open_marker, lemma, close_marker in (
        (SUBJ_OPEN, triple.subject, SUBJ_CLOSE),
        (VERB_OPEN, triple.verb, VERB_CLOSE),
        (OBJ_OPEN, triple.object, OBJ_CLOSE),
    ):
        pieces = tokenizer.tokenize(lemma.lower())
        if not pieces:
            raise EncodingError(f"tokenizer produced no pieces for {lemma!r}")
        tokens.append(open_marker)
        tokens.extend(pieces)
        tokens.append(close_marker)
    tokens.append(SEP)
    return MarkedSequence(tokens=tuple(tokens))


def _join_pieces(pieces: list[str]) -> str:
    word = ""
    for piece in pieces:
        word += piece[2:] if piece.startswith("##") else piece
    return word


def decode_sequence(seq: MarkedSequence) -> Triple:
    """Recover the triple; raises EncodingError on any layout violation."""
    tokens = list(seq.tokens)
    if not tokens or tokens[0] != CLS or tokens[-1] != SEP:
        raise EncodingError("sequence must start with [CLS] and end with [SEP]")
    body = tokens[1:-1]
    spans: list[str] = []
    expected = iter((SUBJ_OPEN, SUBJ_CLOSE, VERB_OPEN, VERB_CLOSE, OBJ_OPEN, OBJ_CLOSE))
    opener = next(expected)
    i = 0
    while i < len(body):
        if body[i] != opener:
            raise EncodingError(f"expected {opener} at position {i}")
        closer = next(expected)
        try:
            end = body.index(closer, i + 1)
        except ValueError:
            raise EncodingError(f"missing {closer}") from None
        pieces = body[i + 1 : end]
        if not pieces or any(p in MARKERS for p in pieces):
            raise EncodingError(f"malformed span between {opener} and {closer}")
        spans.append(_join_pieces(pieces))
        i = end + 1
        try:
            opener = next(expected)
        except StopIteration:
            if i != len(body):
                raise EncodingError("trailing tokens after [/OBJ]") from None
            break
    if len(spans) != 3:
        raise EncodingError("sequence does not contain three marked spans")
    return Triple(*spans)
