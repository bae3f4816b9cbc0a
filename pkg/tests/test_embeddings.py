import io

import numpy as np
import pytest

from svoplaus.embeddings import (
    EmptyTableError,
    InconsistentDimError,
    embed_triple,
    load_vectors,
    vectorize,
    write_vectors,
)
from svoplaus.extraction import Triple
from svoplaus.sampling import LabeledExample


def table_from(text, **kwargs):
    return load_vectors(io.StringIO(text), **kwargs)


def test_basic_row():
    table = table_from("the 0.1 0.2 0.3\n")
    assert table.dim == 3
    assert np.array_equal(table.get("the"), np.array([0.1, 0.2, 0.3]))


def test_vocab_filter():
    table = table_from("cat 1 2\ndog 3 4\n", vocab_filter={"cat"})
    assert len(table) == 1
    assert "dog" not in table


def test_fixture_round_trip_exact(fixtures):
    """Every loaded vector equals the file's floats parsed independently."""
    path = fixtures / "vectors10.txt"
    table = load_vectors(path)
    with open(path, encoding="utf-8") as f:
        for line in f:
            parts = line.split()
            expected = [float(x) for x in parts[1:]]
            assert table.get(parts[0]).tolist() == expected
    assert len(table) == 10
    assert table.dim == 3


def test_header_row_skipped():
    table = table_from("400000 300\nword 1.0 2.0\n")
    assert len(table) == 1
    assert table.dim == 2


def test_two_field_non_integer_row_is_data():
    table = table_from("word 0.5\n")
    assert table.dim == 1


def test_inconsistent_rows_skipped_with_counter():
    table = table_from("a 1 2\nb 1 2 3\nc 4 5\nd nope nope\n")
    assert len(table) == 2
    assert table.skipped_rows == 2
    with pytest.raises(InconsistentDimError):
        table_from("a 1 2\nb 1 2 3\n", strict=True)


def test_empty_table_raises():
    with pytest.raises(EmptyTableError):
        table_from("")
    with pytest.raises(EmptyTableError):
        table_from("cat 1 2\n", vocab_filter={"absent"})


def test_filter_then_load_equals_load_then_filter():
    text = "a 1 2\nb 3 4\nc 5 6\n"
    filtered = table_from(text, vocab_filter={"a", "c"})
    full = table_from(text)
    assert filtered.vocabulary() == {"a", "c"}
    for token in filtered.vocabulary():
        assert np.array_equal(filtered.get(token), full.get(token))


def test_mean_vector_is_arithmetic_mean():
    table = table_from("a 1 2\nb 3 4\n")
    assert np.array_equal(table.mean_vector, np.array([2.0, 3.0]))


def test_embed_triple_concatenates_in_svo_order():
    table = table_from("s 1 2\nv 3 4\no 5 6\n")
    vec = embed_triple(table, Triple("s", "v", "o"))
    assert vec.tolist() == [1, 2, 3, 4, 5, 6]
    assert vec.shape == (3 * table.dim,)


def test_embed_triple_oov_drop():
    table = table_from("v 3 4\no 5 6\n")
    assert embed_triple(table, Triple("s", "v", "o")) is None


def test_embed_triple_oov_mean():
    table = table_from("v 3 4\no 5 6\n", oov_policy="mean_vector")
    vec = embed_triple(table, Triple("s", "v", "o"))
    assert vec[:2].tolist() == [4.0, 5.0]
    assert vec[2:].tolist() == [3, 4, 5, 6]


def test_vectorize_reports_drops():
    table = table_from("a 1 2\nb 3 4\nc 5 6\n")
    examples = [
        LabeledExample(Triple("a", "b", "c"), 1, "gold"),
        LabeledExample(Triple("a", "b", "zzz"), 0, "gold"),
        LabeledExample(Triple("c", "a", "b"), 0, "gold"),
    ]
    data = vectorize(table, examples)
    assert data.dropped == 1
    assert data.kept == [0, 2]
    assert data.x.shape == (2, 6)
    assert data.y.tolist() == [1.0, 0.0]


def test_write_vectors_round_trip(tmp_path):
    vectors = {"cat": np.array([0.125, -3.5]), "dog": np.array([1e-7, 2.0])}
    path = tmp_path / "v.txt"
    write_vectors(vectors, path)
    table = load_vectors(path)
    for token, vec in vectors.items():
        assert np.array_equal(table.get(token), vec)
