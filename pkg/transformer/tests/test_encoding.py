import numpy as np
import pytest

from svobert.encoding import (
    CLS,
    MARKERS,
    SEP,
    EncodingError,
    MarkedSequence,
    Triple,
    build_tokenizer,
    decode_sequence,
    encode_triple,
)

from conftest import make_word


@pytest.fixture(scope="module")
def tokenizer():
    vocab = [make_word(i, "n") for i in range(50)] + [make_word(i, "v") for i in range(20)]
    vocab += ["play", "##ing", "##ed", "nest"]
    return build_tokenizer(vocab)


def test_layout_exact(tokenizer):
    seq = encode_triple(Triple("nest", "play", "nest"), tokenizer)
    assert seq.tokens == (
        "[CLS]", "[SUBJ]", "nest", "[/SUBJ]",
        "[VERB]", "play", "[/VERB]",
        "[OBJ]", "nest", "[/OBJ]", "[SEP]",
    )


def test_lemmas_are_lowercased(tokenizer):
    seq = encode_triple(Triple("NEST", "Play", "nest"), tokenizer)
    assert "nest" in seq.tokens and "play" in seq.tokens


def test_markers_are_single_vocabulary_items(tokenizer):
    unk_id = tokenizer.convert_tokens_to_ids(tokenizer.unk_token)
    for marker in MARKERS:
        assert tokenizer.tokenize(marker) == [marker]
        assert tokenizer.convert_tokens_to_ids(marker) != unk_id


def test_multi_piece_word_round_trips(tokenizer):
    seq = encode_triple(Triple("playing", "played", "nest"), tokenizer)
    assert "##ing" in seq.tokens
    assert decode_sequence(seq) == Triple("playing", "played", "nest")


def test_identical_words_in_three_contexts(tokenizer):
    seq = encode_triple(Triple("nest", "nest", "nest"), tokenizer)
    assert seq.tokens.count("nest") == 3
    assert decode_sequence(seq) == Triple("nest", "nest", "nest")


def test_round_trip_100_random_triples(tokenizer):
    rng = np.random.default_rng(3)
    nouns = [make_word(i, "n") for i in range(50)]
    verbs = [make_word(i, "v") for i in range(20)]
    for _ in range(100):
        t = Triple(
            nouns[rng.integers(len(nouns))],
            verbs[rng.integers(len(verbs))],
            nouns[rng.integers(len(nouns))],
        )
        assert decode_sequence(encode_triple(t, tokenizer)) == t


def test_decode_rejects_malformed(tokenizer):
    with pytest.raises(EncodingError):
        decode_sequence(MarkedSequence(tokens=("[CLS]", "[SUBJX]", "x", "[SEP]")))
    with pytest.raises(EncodingError):
        decode_sequence(MarkedSequence(tokens=("[CLS]", "[SUBJ]", "[/SUBJ]", "[SEP]")))
    good = encode_triple(Triple("nest", "play", "nest"), tokenizer)
    with pytest.raises(EncodingError):
        decode_sequence(MarkedSequence(tokens=good.tokens[:-1]))
