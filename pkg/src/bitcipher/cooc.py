"""Windowed co-occurrence counting and Sum/Cat context aggregation."""

from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from .cipher import CipherPair, NoiseModel, NoisyEmbedding, noisy_vectors
from .corpus import Vocabulary

RUN_MAGIC = b"BCRN"
RUN_VERSION = 1
_RUN_HEADER = struct.Struct("<4sBBIQQ")
_SUM_RECORD = struct.Struct("<qqq")
_CAT_RECORD = struct.Struct("<qqqq")


@dataclass(frozen=True)
class ContextConfig:
    """Window shape and aggregation settings.

    ``radius`` is the half-width r: neighbors at offsets 1..r on each side.
    Sum mode adds weighted context vectors elementwise (output dimension b);
    cat mode aggregates each signed offset into its own slot and
    concatenates them (output dimension 2*r*b). ``log_weighting`` replaces
    raw counts x with log(1+x) as aggregation weights. ``include_center``
    adds the center token's own vector to its Sum row; cat rows are purely
    contextual and ignore it.
    """

    radius: int
    mode: str = "sum"
    log_weighting: bool = False
    include_center: bool = False

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.mode not in ("sum", "cat"):
            raise ValueError(f"unknown aggregation mode: {self.mode!r}")

    def output_dim(self, bits: int) -> int:
        return bits if self.mode == "sum" else 2 * self.radius * bits

    def offsets(self) -> list[int]:
        r = self.radius
        return list(range(-r, 0)) + list(range(1, r + 1))


@dataclass
class CoocCounts:
    """Sparse window counts.

    Keys are (center, context) in sum mode and (center, offset, context) in
    cat mode, all row indices into the (vocab + OOV) space of ``n_rows``
    rows. Counts are positive integers.
    """

    mode: str
    radius: int
    n_rows: int
    counts: dict[tuple, int] = field(default_factory=dict)

    def merge(self, other: "CoocCounts") -> "CoocCounts":
        """Combine counts from a shard over disjoint documents."""
        if (self.mode, self.radius, self.n_rows) != (other.mode, other.radius, other.n_rows):
            raise ValueError("cannot merge counts with different mode/radius/rows")
        merged = dict(self.counts)
        for key, c in other.counts.items():
            merged[key] = merged.get(key, 0) + c
        return CoocCounts(self.mode, self.radius, self.n_rows, merged)

    def offset_marginal(self) -> "CoocCounts":
        """Collapse cat counts over offsets, yielding the sum-mode counts."""
        if self.mode != "cat":
            raise ValueError("offset_marginal is only defined for cat counts")
        merged: dict[tuple, int] = {}
        for (center, _offset, context), c in self.counts.items():
            key = (center, context)
            merged[key] = merged.get(key, 0) + c
        return CoocCounts("sum", self.radius, self.n_rows, merged)


@dataclass(frozen=True)
class EmbeddingMeta:
    """Provenance carried alongside an embedding matrix."""

    bits: int
    radius: int | None = None
    mode: str = "cipher"
    log_weighting: bool = False
    include_center: bool = False
    noise_mode: str | None = None
    corpus_digest: str | None = None
    postproc: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "bits": self.bits,
            "radius": self.radius,
            "mode": self.mode,
            "log_weighting": self.log_weighting,
            "include_center": self.include_center,
            "noise_mode": self.noise_mode,
            "corpus_digest": self.corpus_digest,
            "postproc": list(self.postproc),
        }


@dataclass
class EmbeddingMatrix:
    """Dense (N+1) x d matrix; the last row is the OOV embedding."""

    rows: np.ndarray
    meta: EmbeddingMeta

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def accumulate_cooccurrence(stream: Iterable[tuple[int, str]], vocab: Vocabulary,
                            config: ContextConfig) -> CoocCounts:
    """Count windowed neighbor pairs, never crossing document boundaries.

    Every neighbor at offset o, 1 <= |o| <= radius, within the same document
    increments the (center[, o], context) cell by one. Out-of-vocabulary
    tokens participate on both sides through the shared OOV row.
    """
    counts: dict[tuple, int] = {}
    radius = config.radius
    cat = config.mode == "cat"
    doc: list[int] = []
    current: int | None = None

    def flush(ids: list[int]) -> None:
        last = len(ids)
        for pos, center in enumerate(ids):
            lo = max(0, pos - radius)
            hi = min(last, pos + radius + 1)
            for q in range(lo, hi):
                if q == pos:
                    continue
                key = (center, q - pos, ids[q]) if cat else (center, ids[q])
                counts[key] = counts.get(key, 0) + 1

    for doc_id, token in stream:
        if doc_id != current:
            if doc:
                flush(doc)
            doc = []
            current = doc_id
        doc.append(vocab.row_for(token))
    if doc:
        flush(doc)
    return CoocCounts(config.mode, config.radius, vocab.size + 1, counts)


def _weights(values: np.ndarray, log_weighting: bool) -> np.ndarray:
    return np.log1p(values) if log_weighting else values


def aggregate(counts: CoocCounts, noisy: NoisyEmbedding,
              config: ContextConfig) -> EmbeddingMatrix:
    """Blend noisy token vectors into per-center context rows."""
    if counts.mode != config.mode or counts.radius != config.radius:
        raise ValueError("counts were accumulated under a different context config")
    n_rows, bits = noisy.rows.shape
    if counts.n_rows != n_rows:
        raise ValueError(f"counts cover {counts.n_rows} rows but noisy "
                         f"embedding has {n_rows}")
    nu = noisy.rows
    if config.mode == "sum":
        out = _scatter_rows(counts.counts.items(), n_rows, nu, config.log_weighting)
        if config.include_center:
            centers = sorted({c for c, _ in counts.counts})
            out[centers] += nu[centers]
    else:
        by_offset: dict[int, list[tuple[tuple[int, int], int]]] = {
            o: [] for o in config.offsets()}
        for (center, offset, context), c in counts.counts.items():
            by_offset[offset].append(((center, context), c))
        blocks = [
            _scatter_rows(by_offset[o], n_rows, nu, config.log_weighting)
            for o in config.offsets()
        ]
        out = np.hstack(blocks)
    meta = EmbeddingMeta(bits=bits, radius=config.radius, mode=config.mode,
                         log_weighting=config.log_weighting,
                         include_center=config.include_center)
    return EmbeddingMatrix(out, meta)


def _scatter_rows(items, n_rows: int, nu: np.ndarray,
                  log_weighting: bool) -> np.ndarray:
    triples = [(c, ctx, v) for (c, ctx), v in items]
    if not triples:
        return np.zeros((n_rows, nu.shape[1]))
    centers, contexts, values = map(np.asarray, zip(*triples))
    weights = _weights(values.astype(np.float64), log_weighting)
    mat = sp.csr_matrix((weights, (centers, contexts)), shape=(n_rows, n_rows))
    return np.asarray(mat @ nu)


def embed_corpus(stream: Iterable[tuple[int, str]], vocab: Vocabulary,
                 pair: CipherPair, noise: NoiseModel, config: ContextConfig,
                 corpus_digest: str | None = None) -> EmbeddingMatrix:
    """Count and aggregate in one pass over the stream.

    Equivalent (to float tolerance) to accumulate_cooccurrence followed by
    aggregate with the same inputs.
    """
    noisy = noisy_vectors(pair, noise)
    counts = accumulate_cooccurrence(stream, vocab, config)
    matrix = aggregate(counts, noisy, config)
    matrix.meta = replace(matrix.meta, noise_mode=noise.mode,
                          corpus_digest=corpus_digest)
    return matrix


def write_count_run(counts: CoocCounts, path) -> None:
    """Spill counts as one sorted run of fixed-width little-endian records.

    Sum records are (center, context, count) triples, cat records
    (center, offset, context, count) quadruples, sorted by key so that runs
    can be merged with a streaming k-way merge.
    """
    record = _CAT_RECORD if counts.mode == "cat" else _SUM_RECORD
    keys = sorted(counts.counts)
    with open(path, "wb") as out:
        out.write(_RUN_HEADER.pack(RUN_MAGIC, RUN_VERSION,
                                   1 if counts.mode == "cat" else 0,
                                   counts.radius, counts.n_rows, len(keys)))
        for key in keys:
            out.write(record.pack(*key, counts.counts[key]))


def _read_run_header(src) -> tuple[str, int, int, int]:
    magic, version, mode_flag, radius, n_rows, n_records = _RUN_HEADER.unpack(
        src.read(_RUN_HEADER.size))
    if magic != RUN_MAGIC:
        raise ValueError("not a count-run file")
    if version != RUN_VERSION:
        raise ValueError(f"unsupported run version {version}")
    return ("cat" if mode_flag else "sum", radius, n_rows, n_records)


def _iter_run_records(path, record: struct.Struct,
                      n_records: int) -> Iterator[tuple]:
    with open(path, "rb") as src:
        src.read(_RUN_HEADER.size)
        for _ in range(n_records):
            yield record.unpack(src.read(record.size))


def merge_count_runs(paths: Iterable[str]) -> CoocCounts:
    """Stream-merge sorted runs, summing counts of equal keys."""
    paths = list(paths)
    if not paths:
        raise ValueError("no runs to merge")
    headers = []
    for path in paths:
        with open(path, "rb") as src:
            headers.append(_read_run_header(src))
    mode, radius, n_rows, _ = headers[0]
    if any(h[:3] != (mode, radius, n_rows) for h in headers):
        raise ValueError("runs disagree on mode/radius/rows")
    record = _CAT_RECORD if mode == "cat" else _SUM_RECORD
    counts: dict[tuple, int] = {}
    streams = [_iter_run_records(p, record, h[3]) for p, h in zip(paths, headers)]
    for rec in heapq.merge(*streams):
        key, c = rec[:-1], rec[-1]
        counts[key] = counts.get(key, 0) + c
    return CoocCounts(mode, radius, n_rows, counts)
