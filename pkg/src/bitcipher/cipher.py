"""Deterministic bit-vector assignment and frequency-derived noise encoding.

A b-bit cipher assigns each vocabulary rank a unique nonzero pattern from
{0,1}^b, walking Hamming-weight classes in order so that the most frequent
tokens get the most discernible (lowest-weight) patterns. L1-normalizing the
patterns yields probabilistic "plain" vectors, which are then blended with a
corpus-wide noise distribution to produce dense token vectors.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .corpus import FrequencyTable, Vocabulary

CIPHER_MAGIC = b"BCIP"
CIPHER_VERSION = 1

# Clamp for the document/unigram frequency ratio, keeping fidelities off the
# degenerate endpoints 0 and 1.
DF_CLAMP = 1e-6


class CapacityError(ValueError):
    """More vectors requested than distinct nonzero b-bit patterns exist."""


@dataclass(frozen=True)
class CipherPair:
    """Raw bit rows and their L1-normalized counterparts.

    ``bit_rows`` (N x b, entries in {0,1}) maps b-dimensional predictions
    back to ranks; ``plain_rows`` is the same matrix with each row divided
    by its L1 norm, usable directly as probabilistic token vectors.
    """

    bit_rows: np.ndarray
    plain_rows: np.ndarray
    bits: int

    @property
    def size(self) -> int:
        return self.bit_rows.shape[0]


def cipher_capacity(bits: int) -> int:
    return (1 << bits) - 1


def _walk_bit_patterns(n_vectors: int, bits: int) -> list[int]:
    """Enumerate the first ``n_vectors`` patterns in assignment order.

    Patterns are generated weight class by weight class: each candidate is
    the componentwise absolute difference between an already-assigned
    pattern of one lower weight and a standard basis vector (an XOR on the
    packed representation). Scanning advances through the lower-weight list
    for a fixed basis vector, then moves to the next basis vector; when a
    weight class is exhausted both the finished list and (after the first
    class) the basis order are reversed, which keeps consecutive ranks
    maximally similar across the class boundary.
    """
    prev_level = [0]
    cur_level: list[int] = []
    seen: set[int] = set()
    basis = list(range(bits))
    rows: list[int] = []
    i = j = 0
    k = 1
    while len(rows) < n_vectors:
        u = prev_level[j] ^ (1 << basis[i])
        if u.bit_count() == k and u not in seen:
            cur_level.append(u)
            seen.add(u)
            rows.append(u)
        j += 1
        if j == len(prev_level):
            j = 0
            i += 1
            if i == bits:
                if k == 1:
                    basis.reverse()
                i = 0
                cur_level.reverse()
                prev_level, cur_level, seen = cur_level, [], set()
                k += 1
    return rows


def build_cipher(n_vectors: int, bits: int) -> CipherPair:
    """Construct the cipher for ``n_vectors`` ranks in ``bits`` dimensions.

    The first min(n_vectors, bits) ranks are the standard basis vectors in
    index order; Hamming weight never decreases with rank. Output is a pure
    function of (n_vectors, bits).
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    if n_vectors < 1:
        raise ValueError("n_vectors must be >= 1")
    capacity = cipher_capacity(bits)
    if n_vectors > capacity:
        raise CapacityError(
            f"{n_vectors} vectors requested but only {capacity} distinct "
            f"nonzero {bits}-bit patterns exist"
        )
    patterns = _walk_bit_patterns(n_vectors, bits)
    bit_rows = np.zeros((n_vectors, bits), dtype=np.uint8)
    for row, mask in enumerate(patterns):
        while mask:
            low = mask & -mask
            bit_rows[row, low.bit_length() - 1] = 1
            mask ^= low
    weights = bit_rows.sum(axis=1, dtype=np.float64)
    plain_rows = bit_rows / weights[:, None]
    return CipherPair(bit_rows, plain_rows, bits)


@dataclass(frozen=True)
class NoiseModel:
    """Per-token fidelity and the alternative-token noise distribution.

    ``beta[i]`` is the fraction of token i's observations trusted as
    non-erroneous. ``sigma_vocab`` distributes the remaining mass over
    alternative vocabulary tokens (L1 norm 1); ``sigma_cipher`` is its
    projection into cipher space, the sigma-weighted average of plain rows,
    and is also L1-unit by convexity.
    """

    beta: np.ndarray
    sigma_vocab: np.ndarray
    sigma_cipher: np.ndarray
    mode: str


@dataclass(frozen=True)
class NoisyEmbedding:
    """Dense probabilistic token vectors, one row per rank plus an OOV row.

    Every row is a convex combination of L1-unit vectors, so each row sums
    to 1 with entries in [0, 1]. The last row, used for out-of-vocabulary
    tokens, is the pure noise centroid.
    """

    rows: np.ndarray

    @property
    def bits(self) -> int:
        return self.rows.shape[1]

    @property
    def oov_row(self) -> np.ndarray:
        return self.rows[-1]


def _vocab_frequencies(table: FrequencyTable, vocab: Vocabulary,
                       column: int) -> np.ndarray:
    try:
        return np.array([table.counts[t][column] for t in vocab.ranked],
                        dtype=np.float64)
    except KeyError as exc:
        raise ValueError(f"vocabulary token {exc.args[0]!r} missing from "
                         "frequency table") from exc


def compute_beta(table: FrequencyTable, vocab: Vocabulary,
                 mode: str = "unigram") -> np.ndarray:
    """Fidelity per rank: f/(f+1) for unigram mode, clamped d/f for df mode."""
    f = _vocab_frequencies(table, vocab, 0)
    if mode == "unigram":
        return f / (f + 1.0)
    if mode == "df":
        d = _vocab_frequencies(table, vocab, 1)
        return np.clip(d / f, DF_CLAMP, 1.0 - DF_CLAMP)
    raise ValueError(f"unknown noise mode: {mode!r}")


def compute_sigma(table: FrequencyTable, vocab: Vocabulary,
                  plain_rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Alternative-token distribution over the vocabulary and in cipher space.

    Each token's weight is proportional to 1 minus its unigram probability.
    When the vocabulary covers the whole corpus the weights sum to 1
    analytically (divided by N - 1); a truncated vocabulary leaves excess
    mass, so the result is explicitly normalized to keep the L1 invariant.
    """
    n = vocab.size
    if n < 2:
        raise ValueError("sigma requires a vocabulary of at least 2 tokens")
    if plain_rows.shape[0] != n:
        raise ValueError(f"plain rows for {plain_rows.shape[0]} ranks but "
                         f"vocabulary has {n}")
    f = _vocab_frequencies(table, vocab, 0)
    raw = (1.0 - f / table.total_tokens) / (n - 1)
    sigma_vocab = raw / raw.sum()
    sigma_cipher = plain_rows.T @ sigma_vocab
    return sigma_vocab, sigma_cipher


def build_noise_model(table: FrequencyTable, vocab: Vocabulary,
                      pair: CipherPair, mode: str = "unigram") -> NoiseModel:
    beta = compute_beta(table, vocab, mode)
    sigma_vocab, sigma_cipher = compute_sigma(table, vocab, pair.plain_rows)
    return NoiseModel(beta, sigma_vocab, sigma_cipher, mode)


def noisy_vectors(pair: CipherPair, noise: NoiseModel) -> NoisyEmbedding:
    """Blend plain rows with the noise centroid: beta*v + (1-beta)*sigma."""
    if noise.beta.shape[0] != pair.size:
        raise ValueError(f"beta has {noise.beta.shape[0]} entries for "
                         f"{pair.size} cipher rows")
    if noise.sigma_cipher.shape[0] != pair.bits:
        raise ValueError(f"sigma_cipher has {noise.sigma_cipher.shape[0]} "
                         f"entries for {pair.bits} bits")
    beta = noise.beta[:, None]
    body = beta * pair.plain_rows + (1.0 - beta) * noise.sigma_cipher
    rows = np.vstack([body, noise.sigma_cipher[None, :]])
    return NoisyEmbedding(rows)


def save_cipher(pair: CipherPair, path, mode: str = "") -> None:
    """Binary cipher file: header, packed bit rows, float32 plain rows.

    Header is magic, version, N, b (all little-endian) plus a short mode
    tag. Bit rows are packed 8 per byte in little bit order.
    """
    mode_bytes = mode.encode("utf-8")
    if len(mode_bytes) > 255:
        raise ValueError("mode tag too long")
    packed = np.packbits(pair.bit_rows, axis=1, bitorder="little")
    with open(path, "wb") as out:
        out.write(struct.pack("<4sBIIB", CIPHER_MAGIC, CIPHER_VERSION,
                              pair.size, pair.bits, len(mode_bytes)))
        out.write(mode_bytes)
        out.write(packed.tobytes())
        out.write(pair.plain_rows.astype("<f4").tobytes())


def load_cipher(path) -> tuple[CipherPair, str]:
    with open(path, "rb") as src:
        header = src.read(struct.calcsize("<4sBIIB"))
        magic, version, n, bits, mode_len = struct.unpack("<4sBIIB", header)
        if magic != CIPHER_MAGIC:
            raise ValueError(f"{path}: not a cipher file")
        if version != CIPHER_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        mode = src.read(mode_len).decode("utf-8")
        row_bytes = (bits + 7) // 8
        packed = np.frombuffer(src.read(n * row_bytes), dtype=np.uint8)
        packed = packed.reshape(n, row_bytes)
        bit_rows = np.unpackbits(packed, axis=1, bitorder="little")[:, :bits]
        plain = np.frombuffer(src.read(n * bits * 4), dtype="<f4")
        plain_rows = plain.reshape(n, bits).astype(np.float64)
    return CipherPair(bit_rows, plain_rows, bits), mode


def dump_cipher_text(pair: CipherPair, path) -> None:
    """Human-readable dump: rank, bit pattern, and plain-row values."""
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(f"# cipher bits={pair.bits} size={pair.size}\n")
        for row in range(pair.size):
            bits = "".join(str(b) for b in pair.bit_rows[row])
            values = " ".join(f"{v:.6g}" for v in pair.plain_rows[row])
            out.write(f"{row + 1}\t{bits}\t{values}\n")
