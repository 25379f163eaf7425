"""Corpus streaming, frequency counting, and frequency-ranked vocabularies."""

from __future__ import annotations

import gzip
import io
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

GZIP_MAGIC = b"\x1f\x8b"

# Lines per shard when counting with multiple workers.
PARALLEL_CHUNK_LINES = 200_000


class EncodingError(ValueError):
    """Corpus bytes are not valid UTF-8."""

    def __init__(self, offset: int):
        self.offset = offset
        super().__init__(f"invalid UTF-8 at byte offset {offset}")


@dataclass(frozen=True)
class TokenizerConfig:
    """Rules for the built-in splitter.

    Tokens are maximal runs of alphanumeric characters; when
    ``split_punctuation`` is set, every maximal run of remaining non-space
    characters becomes its own token, otherwise chunks are split on
    whitespace only. ``doc_boundary`` is "line" (one document per line) or
    "blank" (blank-line-separated blocks).
    """

    lowercase: bool = True
    split_punctuation: bool = True
    doc_boundary: str = "line"

    def __post_init__(self):
        if self.doc_boundary not in ("line", "blank"):
            raise ValueError(f"unknown doc_boundary: {self.doc_boundary!r}")


def tokenize_line(text: str, config: TokenizerConfig) -> list[str]:
    """Split one line of text into tokens under ``config``."""
    if config.lowercase:
        text = text.lower()
    if not config.split_punctuation:
        return text.split()
    tokens: list[str] = []
    run: list[str] = []
    run_is_word = False
    for ch in text:
        if ch.isspace():
            if run:
                tokens.append("".join(run))
                run = []
            continue
        is_word = ch.isalnum()
        if run and is_word != run_is_word:
            tokens.append("".join(run))
            run = []
        run.append(ch)
        run_is_word = is_word
    if run:
        tokens.append("".join(run))
    return tokens


def open_corpus(path: str | Path) -> BinaryIO:
    """Open a corpus file for binary reading, transparently inflating gzip."""
    fh = open(path, "rb")
    magic = fh.read(2)
    fh.seek(0)
    if magic == GZIP_MAGIC:
        return gzip.GzipFile(fileobj=fh, mode="rb")  # type: ignore[return-value]
    return fh


def _binary_stream(source) -> tuple[BinaryIO, bool]:
    if isinstance(source, (str, Path)):
        return open_corpus(source), True
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(bytes(source)), True
    return source, False


def stream_tokens(
    source,
    config: TokenizerConfig = TokenizerConfig(),
    base_doc_id: int = 0,
    base_offset: int = 0,
) -> Iterator[tuple[int, str]]:
    """Yield (document id, token) pairs in corpus order.

    ``source`` may be a path, raw bytes, or a binary file object. Document
    ids are assigned in reading order starting at ``base_doc_id``; with
    line-bounded documents an empty line still consumes an id. Invalid
    UTF-8 raises :class:`EncodingError` with the absolute byte offset
    (``base_offset`` shifts offsets for shard readers).
    """
    stream, owned = _binary_stream(source)
    doc_id = base_doc_id
    offset = base_offset
    in_block = False
    try:
        for raw in stream:
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise EncodingError(offset + exc.start) from exc
            offset += len(raw)
            if config.doc_boundary == "line":
                for tok in tokenize_line(text, config):
                    yield doc_id, tok
                doc_id += 1
            else:
                if not text.strip():
                    if in_block:
                        doc_id += 1
                        in_block = False
                else:
                    in_block = True
                    for tok in tokenize_line(text, config):
                        yield doc_id, tok
    finally:
        if owned:
            stream.close()


@dataclass
class FrequencyTable:
    """Per-token unigram (f) and document (d) counts plus corpus totals.

    ``total_tokens`` is the corpus token count M; ``total_documents`` is the
    number of token-bearing documents D. Counts are 64-bit safe Python ints.
    """

    counts: dict[str, tuple[int, int]] = field(default_factory=dict)
    total_tokens: int = 0
    total_documents: int = 0

    def unigram(self, token: str) -> int:
        return self.counts[token][0]

    def doc_frequency(self, token: str) -> int:
        return self.counts[token][1]


def count_frequencies(stream: Iterable[tuple[int, str]]) -> FrequencyTable:
    """Count unigram and document frequencies from a (doc id, token) stream.

    Tokens must arrive grouped by document (the contract of
    :func:`stream_tokens`); document transitions are detected by id change.
    """
    freqs: Counter[str] = Counter()
    doc_freqs: Counter[str] = Counter()
    current: int | None = None
    seen: set[str] = set()
    total = 0
    docs = 0
    for doc_id, token in stream:
        if doc_id != current:
            current = doc_id
            docs += 1
            seen = set()
        freqs[token] += 1
        total += 1
        if token not in seen:
            seen.add(token)
            doc_freqs[token] += 1
    counts = {t: (freqs[t], doc_freqs[t]) for t in freqs}
    return FrequencyTable(counts, total, docs)


def merge_frequency_tables(tables: Iterable[FrequencyTable]) -> FrequencyTable:
    """Merge shard tables counted over disjoint document sets."""
    counts: dict[str, tuple[int, int]] = {}
    total_tokens = 0
    total_documents = 0
    for table in tables:
        total_tokens += table.total_tokens
        total_documents += table.total_documents
        for token, (f, d) in table.counts.items():
            if token in counts:
                f0, d0 = counts[token]
                counts[token] = (f0 + f, d0 + d)
            else:
                counts[token] = (f, d)
    return FrequencyTable(counts, total_tokens, total_documents)


def _count_chunk(lines: bytes, base_doc_id: int, base_offset: int,
                 config: TokenizerConfig) -> FrequencyTable:
    return count_frequencies(
        stream_tokens(lines, config, base_doc_id=base_doc_id, base_offset=base_offset)
    )


def count_corpus(path: str | Path, config: TokenizerConfig = TokenizerConfig(),
                 workers: int = 1) -> FrequencyTable:
    """Count one corpus file, optionally sharding by line blocks.

    The merged multi-worker result is exactly equal to the sequential one;
    sharding requires line-bounded documents, so blank-line mode always runs
    sequentially.
    """
    if workers <= 1 or config.doc_boundary != "line":
        return count_frequencies(stream_tokens(path, config))
    tables = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = []
        base_doc = 0
        base_offset = 0
        stream = open_corpus(path)
        try:
            while True:
                chunk: list[bytes] = []
                for raw in stream:
                    chunk.append(raw)
                    if len(chunk) >= PARALLEL_CHUNK_LINES:
                        break
                if not chunk:
                    break
                blob = b"".join(chunk)
                futures.append(pool.submit(_count_chunk, blob, base_doc, base_offset, config))
                base_doc += len(chunk)
                base_offset += len(blob)
        finally:
            stream.close()
        tables = [f.result() for f in futures]
    return merge_frequency_tables(tables)


@dataclass(frozen=True)
class Vocabulary:
    """Frequency-ranked token inventory.

    ``ranked[0]`` is the most frequent token (rank 1). ``index`` maps tokens
    to 0-based matrix rows; out-of-vocabulary tokens share the dedicated row
    ``oov_index == size``.
    """

    ranked: tuple[str, ...]
    index: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.ranked)

    @property
    def oov_index(self) -> int:
        return len(self.ranked)

    def row_for(self, token: str) -> int:
        return self.index.get(token, self.oov_index)


def rank_tokens(table: FrequencyTable) -> list[str]:
    """All tokens by descending unigram count, ties by ascending token order."""
    return sorted(table.counts, key=lambda t: (-table.counts[t][0], t))


def build_vocabulary(table: FrequencyTable, bits: int,
                     max_vocab: int | None = None) -> Vocabulary:
    """Keep the top tokens that fit in ``bits`` (capacity 2^bits - 1)."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    capacity = (1 << bits) - 1
    size = min(len(table.counts), capacity)
    if max_vocab is not None:
        size = min(size, max_vocab)
    if size == 0:
        raise ValueError("empty vocabulary: no tokens fit the requested capacity")
    ranked = tuple(rank_tokens(table)[:size])
    return Vocabulary(ranked, {t: i for i, t in enumerate(ranked)})


def write_frequency_table(table: FrequencyTable, path: str | Path) -> None:
    """Serialize as ``#M=<int> D=<int>`` header plus rank-ordered TSV rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(f"#M={table.total_tokens} D={table.total_documents}\n")
        for token in rank_tokens(table):
            f, d = table.counts[token]
            out.write(f"{token}\t{f}\t{d}\n")


def read_frequency_table(path: str | Path) -> FrequencyTable:
    with open(path, "r", encoding="utf-8") as src:
        header = src.readline().rstrip("\n")
        if not header.startswith("#M="):
            raise ValueError(f"{path}: missing #M=... D=... header")
        m_part, d_part = header[1:].split()
        total_tokens = int(m_part.removeprefix("M="))
        total_documents = int(d_part.removeprefix("D="))
        counts: dict[str, tuple[int, int]] = {}
        for lineno, line in enumerate(src, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                token, f, d = line.split("\t")
                counts[token] = (int(f), int(d))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from exc
    return FrequencyTable(counts, total_tokens, total_documents)
