"""Interoperable embedding files: whitespace text and little-endian binary.

Text format: a ``<rows> <dim>`` header line, then one ``token v1 ... vd``
line per row with 6 significant digits. Binary format: magic ``BCEM``,
version, row count, dimension (all little-endian 32-bit), row-major float32
values, then a length-prefixed UTF-8 token table. The out-of-vocabulary row
is always written last under the reserved token ``<oov>``.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Vocabulary

OOV_TOKEN = "<oov>"
EMBED_MAGIC = b"BCEM"
EMBED_VERSION = 1
_BIN_HEADER = struct.Struct("<4sIII")

# Characters that would break the whitespace-delimited text format. '%' is
# escaped too so the mapping stays injective.
_ESCAPES = {"%": "%25", " ": "%20", "\t": "%09", "\n": "%0A", "\r": "%0D"}
_UNESCAPES = {v: k for k, v in _ESCAPES.items()}


def escape_token(token: str) -> str:
    out = token.replace("%", "%25")
    for ch, repl in _ESCAPES.items():
        if ch != "%":
            out = out.replace(ch, repl)
    return out


def unescape_token(token: str) -> str:
    parts = token.split("%25")
    decoded = []
    for part in parts:
        for code, ch in _UNESCAPES.items():
            if code != "%25":
                part = part.replace(code, ch)
        decoded.append(part)
    return "%".join(decoded)


def row_tokens(vocab: Vocabulary) -> list[str]:
    """Token labels for the (N+1)-row embedding layout, OOV last."""
    return list(vocab.ranked) + [OOV_TOKEN]


def vocabulary_from_tokens(tokens: Sequence[str]) -> Vocabulary:
    """Rebuild the row mapping from an embedding file's token column."""
    if not tokens or tokens[-1] != OOV_TOKEN:
        raise ValueError(f"embedding file must end with the {OOV_TOKEN} row")
    ranked = tuple(tokens[:-1])
    return Vocabulary(ranked, {t: i for i, t in enumerate(ranked)})


def _check_tokens(tokens: Sequence[str], rows: int) -> list[str]:
    if len(tokens) != rows:
        raise ValueError(f"{len(tokens)} tokens for {rows} matrix rows")
    escaped = [escape_token(t) for t in tokens]
    if len(set(escaped)) != len(escaped):
        dupes = sorted({t for t in escaped if escaped.count(t) > 1})
        raise ValueError(f"token collision after escaping: {dupes[:5]}")
    return escaped


def write_embeddings_text(rows: np.ndarray, tokens: Sequence[str],
                          path: str | Path) -> None:
    n, dim = rows.shape
    escaped = _check_tokens(tokens, n)
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(f"{n} {dim}\n")
        for token, row in zip(escaped, rows):
            values = " ".join(f"{v:.6g}" for v in row)
            out.write(f"{token} {values}\n")


def read_embeddings_text(path: str | Path) -> tuple[np.ndarray, list[str]]:
    with open(path, "r", encoding="utf-8") as src:
        header = src.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header")
        n, dim = int(header[0]), int(header[1])
        rows = np.empty((n, dim), dtype=np.float64)
        tokens: list[str] = []
        for i in range(n):
            parts = src.readline().split()
            if len(parts) != dim + 1:
                raise ValueError(f"{path}: row {i} has {len(parts) - 1} values, "
                                 f"expected {dim}")
            tokens.append(unescape_token(parts[0]))
            rows[i] = [float(v) for v in parts[1:]]
    return rows, tokens


def write_embeddings_binary(rows: np.ndarray, tokens: Sequence[str],
                            path: str | Path) -> None:
    n, dim = rows.shape
    _check_tokens(tokens, n)
    with open(path, "wb") as out:
        out.write(_BIN_HEADER.pack(EMBED_MAGIC, EMBED_VERSION, n, dim))
        out.write(np.ascontiguousarray(rows, dtype="<f4").tobytes())
        for token in tokens:
            raw = token.encode("utf-8")
            out.write(struct.pack("<I", len(raw)))
            out.write(raw)


def read_embeddings_binary(path: str | Path) -> tuple[np.ndarray, list[str]]:
    with open(path, "rb") as src:
        magic, version, n, dim = _BIN_HEADER.unpack(src.read(_BIN_HEADER.size))
        if magic != EMBED_MAGIC:
            raise ValueError(f"{path}: not an embedding file")
        if version != EMBED_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        rows = np.frombuffer(src.read(n * dim * 4), dtype="<f4")
        rows = rows.reshape(n, dim).astype(np.float32)
        tokens = []
        for _ in range(n):
            (length,) = struct.unpack("<I", src.read(4))
            tokens.append(src.read(length).decode("utf-8"))
    return rows, tokens


def is_binary_embedding_file(path: str | Path) -> bool:
    with open(path, "rb") as src:
        return src.read(4) == EMBED_MAGIC


def read_embeddings(path: str | Path) -> tuple[np.ndarray, list[str]]:
    """Read either format, sniffing the binary magic."""
    if is_binary_embedding_file(path):
        return read_embeddings_binary(path)
    return read_embeddings_text(path)
