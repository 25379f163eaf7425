import gzip
import random
import re
from collections import defaultdict

import pytest
from hypothesis import given, strategies as st

from bitcipher.corpus import (EncodingError, FrequencyTable, TokenizerConfig,
                              build_vocabulary, count_corpus,
                              count_frequencies, merge_frequency_tables,
                              read_frequency_table, stream_tokens,
                              tokenize_line, write_frequency_table)


def test_stream_basic_line():
    out = list(stream_tokens(b"The cat sat.\n"))
    assert out == [(0, "the"), (0, "cat"), (0, "sat"), (0, ".")]


def test_stream_empty_input():
    assert list(stream_tokens(b"")) == []


def test_stream_doc_ids_per_line():
    out = list(stream_tokens(b"a b\nb c"))
    assert [doc for doc, _ in out] == [0, 0, 1, 1]
    assert [tok for _, tok in out] == ["a", "b", "b", "c"]


def test_stream_blank_line_boundary():
    config = TokenizerConfig(doc_boundary="blank")
    out = list(stream_tokens(b"a b\nc\n\n\nd e\n", config))
    assert out == [(0, "a"), (0, "b"), (0, "c"), (1, "d"), (1, "e")]


def test_tokenize_punctuation_runs():
    config = TokenizerConfig()
    assert tokenize_line("Don't stop...", config) == ["don", "'", "t", "stop", "..."]
    assert tokenize_line("x=1;y=2", config) == ["x", "=", "1", ";", "y", "=", "2"]


def test_tokenize_whitespace_only_mode():
    config = TokenizerConfig(split_punctuation=False)
    assert tokenize_line("The cat sat.", config) == ["the", "cat", "sat."]


def test_tokenize_no_lowercase():
    config = TokenizerConfig(lowercase=False)
    assert tokenize_line("The CAT", config) == ["The", "CAT"]


def test_stream_invalid_utf8_reports_offset():
    with pytest.raises(EncodingError) as err:
        list(stream_tokens(b"ok\n\xffbad\n"))
    assert err.value.offset == 3
    assert "byte offset 3" in str(err.value)


def test_stream_gzip_transparent(tmp_path):
    text = "the cat\nsat down\n"
    plain = tmp_path / "c.txt"
    plain.write_text(text)
    zipped = tmp_path / "c.txt.gz"
    with gzip.open(zipped, "wt") as out:
        out.write(text)
    assert list(stream_tokens(plain)) == list(stream_tokens(zipped))


def test_count_basic():
    table = count_frequencies([(0, "a"), (0, "a"), (1, "a"), (1, "b")])
    assert table.counts["a"] == (3, 2)
    assert table.counts["b"] == (1, 1)
    assert table.total_tokens == 4
    assert table.total_documents == 2


def test_count_single_token():
    table = count_frequencies([(0, "x")])
    assert table.counts["x"] == (1, 1)
    assert table.total_tokens == 1
    assert table.total_documents == 1


def test_count_empty_stream():
    table = count_frequencies([])
    assert table.counts == {}
    assert table.total_tokens == 0
    assert table.total_documents == 0


def _brute_force_count(text):
    """Independent recount: regex tokenization plus plain dict counting.

    The regex classes are exact for the ASCII-only fixture corpora used
    below; the package itself never touches regexes.
    """
    f = defaultdict(int)
    docs = defaultdict(set)
    total = 0
    doc_ids = set()
    for doc_id, line in enumerate(text.split("\n")):
        tokens = re.findall(r"[0-9a-z]+|[^\s0-9a-z]+", line.lower())
        if tokens:
            doc_ids.add(doc_id)
        for w in tokens:
            f[w] += 1
            total += 1
            docs[w].add(doc_id)
    return dict(f), {w: len(s) for w, s in docs.items()}, total, len(doc_ids)


def test_count_matches_brute_force_recount(write_corpus):
    rng = random.Random(7)
    words = ["alpha", "beta", "gamma", "delta", "x1", "...", "y,z"]
    lines = [" ".join(rng.choice(words) for _ in range(rng.randint(0, 12)))
             for _ in range(10)]
    text = "\n".join(lines) + "\n"
    path = write_corpus(text)
    table = count_frequencies(stream_tokens(path))
    f, d, total, n_docs = _brute_force_count(text)
    assert table.total_tokens == total
    assert table.total_documents == n_docs
    assert {t: fc for t, (fc, _) in table.counts.items()} == dict(f)
    assert {t: dc for t, (_, dc) in table.counts.items()} == d


@given(st.lists(st.lists(st.sampled_from("abcde"), max_size=6), max_size=12),
       st.integers(0, 11))
def test_shard_merge_equals_single_pass(docs, cut):
    stream = [(i, tok) for i, doc in enumerate(docs) for tok in doc]
    whole = count_frequencies(stream)
    cut = min(cut, len(docs))
    first = [(i, t) for i, t in stream if i < cut]
    second = [(i, t) for i, t in stream if i >= cut]
    merged = merge_frequency_tables([count_frequencies(first),
                                     count_frequencies(second)])
    assert merged == whole


def test_parallel_counting_matches_sequential(tmp_path, write_corpus):
    rng = random.Random(3)
    words = ["aa", "bb", "cc", "dd", "ee"]
    text = "\n".join(" ".join(rng.choice(words) for _ in range(8))
                     for _ in range(500)) + "\n"
    path = write_corpus(text)
    seq = count_corpus(path, workers=1)
    import bitcipher.corpus as corpus_mod
    old = corpus_mod.PARALLEL_CHUNK_LINES
    corpus_mod.PARALLEL_CHUNK_LINES = 97
    try:
        par = count_corpus(path, workers=2)
    finally:
        corpus_mod.PARALLEL_CHUNK_LINES = old
    seq_file = tmp_path / "seq.tsv"
    par_file = tmp_path / "par.tsv"
    write_frequency_table(seq, seq_file)
    write_frequency_table(par, par_file)
    assert seq_file.read_bytes() == par_file.read_bytes()


def test_vocabulary_tie_break_lexicographic():
    table = FrequencyTable({"a": (5, 1), "c": (3, 1), "b": (3, 1)}, 11, 1)
    vocab = build_vocabulary(table, bits=5)
    assert vocab.ranked == ("a", "b", "c")


def test_vocabulary_capacity_cap():
    counts = {f"t{i:02d}": (40 - i, 1) for i in range(40)}
    table = FrequencyTable(counts, sum(40 - i for i in range(40)), 1)
    vocab = build_vocabulary(table, bits=5)
    assert vocab.size == 31
    assert vocab.row_for("t35") == vocab.oov_index
    assert vocab.row_for("t00") == 0


def test_vocabulary_max_vocab_cap():
    table = FrequencyTable({"a": (3, 1), "b": (2, 1), "c": (1, 1)}, 6, 1)
    vocab = build_vocabulary(table, bits=5, max_vocab=2)
    assert vocab.size == 2
    assert vocab.row_for("c") == vocab.oov_index


def test_vocabulary_errors():
    table = FrequencyTable({"a": (1, 1)}, 1, 1)
    with pytest.raises(ValueError):
        build_vocabulary(table, bits=0)
    with pytest.raises(ValueError):
        build_vocabulary(FrequencyTable({}, 0, 0), bits=5)


def test_vocabulary_index_bijection():
    counts = {f"w{i}": (100 - i, 1) for i in range(20)}
    table = FrequencyTable(counts, sum(100 - i for i in range(20)), 1)
    vocab = build_vocabulary(table, bits=10)
    assert sorted(vocab.index.values()) == list(range(vocab.size))
    for token, row in vocab.index.items():
        assert vocab.ranked[row] == token
    assert vocab.oov_index == vocab.size


def test_frequency_table_round_trip(tmp_path):
    table = FrequencyTable({"the": (6, 3), "cat": (2, 2), "!": (1, 1)}, 9, 3)
    path = tmp_path / "freq.tsv"
    write_frequency_table(table, path)
    back = read_frequency_table(path)
    assert back == table
    header = path.read_text().splitlines()[0]
    assert header == "#M=9 D=3"


def test_counting_deterministic(write_corpus):
    path = write_corpus("the cat sat\nthe dog ran\n")
    first = count_frequencies(stream_tokens(path))
    second = count_frequencies(stream_tokens(path))
    assert first == second
