"""Message codebooks: one-hot vectors and the multi-support generalization.

A codebook maps message ids to length-M probability vectors with exactly
m non-zero entries, each 1/m. One-hot is the m=1 case. Only a power-of-two
number of entries is kept so that every message carries a whole number of
bits; support sets are chosen lexicographically by default (seeded-random
selection is available but ids then depend on the seed).
"""

from __future__ import annotations

import itertools
import warnings
from math import comb, log2

import numpy as np

from .errors import DomainError, ShapeError

PAPER_VECTOR_SIZES = (4, 8, 16, 32, 64)

# Refuse codebooks that would not fit in memory.
MAX_ENTRIES = 1 << 20


class Codebook:
    """Immutable set of transmit vectors with decode lookup tables.

    Attributes:
        M: vector length
        m: non-zero entries per vector
        bits_per_message: log2 of the entry count
        entries: (count, M) float array, rows sum to 1
        supports: (count, m) int array of non-zero index sets, each row sorted
    """

    def __init__(self, M: int, m: int, supports, selection: str = "lexicographic",
                 selection_seed=None):
        supports = np.asarray(supports, dtype=np.int64)
        if supports.ndim != 2 or supports.shape[1] != m:
            raise ShapeError(f"supports must be (count, {m}), got {supports.shape}")
        count = supports.shape[0]
        bits = int(log2(count))
        if 1 << bits != count:
            raise DomainError(f"entry count {count} is not a power of two")
        self.M = int(M)
        self.m = int(m)
        self.bits_per_message = bits
        self.selection = selection
        self.selection_seed = selection_seed
        self.supports = supports
        entries = np.zeros((count, M))
        rows = np.repeat(np.arange(count), m)
        entries[rows, supports.ravel()] = 1.0 / m
        self.entries = entries
        # uint64 bitmask per support set, for O(log K) decode lookup (needs M <= 64)
        if M > 64:
            raise DomainError(f"vector size {M} exceeds the 64 supported by decode lookup")
        masks = np.bitwise_or.reduce(
            np.left_shift(np.uint64(1), supports.astype(np.uint64)), axis=1
        )
        order = np.argsort(masks)
        self._masks_sorted = masks[order]
        self._ids_by_mask = order.astype(np.int64)
        if np.any(self._masks_sorted[1:] == self._masks_sorted[:-1]):
            raise DomainError("codebook supports are not pairwise distinct")

    def __len__(self) -> int:
        return self.entries.shape[0]

    def encode(self, message_ids) -> np.ndarray:
        """Map message id(s) to transmit vector(s)."""
        ids = np.asarray(message_ids)
        if np.any(ids < 0) or np.any(ids >= len(self)):
            raise DomainError(f"message id out of range [0, {len(self)})")
        return self.entries[ids]

    def manifest(self) -> dict:
        """Text-serializable description sufficient to rebuild the codebook."""
        return {
            "M": self.M,
            "m": self.m,
            "selection": self.selection,
            "selection_seed": self.selection_seed,
            "bits_per_message": self.bits_per_message,
        }


def build_onehot(M: int) -> Codebook:
    """Codebook of the M one-hot vectors; entry i has its 1 at index i."""
    if M < 2:
        raise DomainError(f"one-hot vector size must be >= 2, got {M}")
    if 1 << int(log2(M)) != M:
        raise DomainError(f"one-hot vector size must be a power of two, got {M}")
    if M not in PAPER_VECTOR_SIZES:
        warnings.warn(f"vector size M={M} is outside the validated range {PAPER_VECTOR_SIZES}")
    supports = np.arange(M, dtype=np.int64)[:, None]
    return Codebook(M, 1, supports)


def build_gdr(M: int, m: int, selection: str = "lexicographic",
              selection_seed=None) -> Codebook:
    """Codebook of m-of-M support vectors with entries 1/m.

    Keeps 2^floor(log2 C(M,m)) of the C(M,m) possible support sets. The
    default takes the lexicographically first ones, which makes m=1
    coincide with build_onehot; selection="random" draws them with the
    given seed instead (ids follow lexicographic order of the drawn sets).
    """
    if m < 1 or m > M // 2:
        raise DomainError(f"order m={m} outside [1, {M // 2}] for M={M}")
    total = comb(M, m)
    count = 1 << int(log2(total))
    if count > MAX_ENTRIES:
        raise DomainError(f"codebook with {count} entries exceeds the {MAX_ENTRIES} cap")
    if selection == "lexicographic":
        supports = list(itertools.islice(itertools.combinations(range(M), m), count))
    elif selection == "random":
        rng = np.random.default_rng(selection_seed)
        picked: set[int] = set()
        while len(picked) < count:
            picked.update(int(r) for r in rng.integers(0, total, size=count - len(picked)))
        supports = sorted(_unrank_combination(r, M, m) for r in sorted(picked))
    else:
        raise DomainError(f"unknown selection mode {selection!r}")
    return Codebook(M, m, np.array(supports, dtype=np.int64),
                    selection=selection, selection_seed=selection_seed)


def _unrank_combination(rank: int, M: int, m: int) -> tuple[int, ...]:
    """The rank-th m-subset of range(M) in lexicographic order."""
    out = []
    x = 0
    for k in range(m, 0, -1):
        while comb(M - 1 - x, k - 1) <= rank:
            rank -= comb(M - 1 - x, k - 1)
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def data_rate(codebook: Codebook, n: int) -> float:
    """Data rate in bits per channel use for n channel uses per block."""
    if n < 1:
        raise DomainError(f"channel uses n must be >= 1, got {n}")
    return codebook.bits_per_message / n


def decode_batch(p, codebook: Codebook) -> np.ndarray:
    """Decode received probability vectors to message ids.

    Takes the m highest-probability indices of each row (ties toward the
    lower index). If that support set is a codebook entry, returns its id;
    otherwise falls back to the entry whose support carries the largest
    probability mass (ties toward the lower message id).
    """
    pb = np.atleast_2d(np.asarray(p, dtype=np.float64))
    if pb.shape[1] != codebook.M:
        raise ShapeError(f"probability length {pb.shape[1]} != vector size {codebook.M}")
    m = codebook.m
    # stable sort on -p keeps the lower index first among ties
    top = np.argsort(-pb, axis=1, kind="stable")[:, :m]
    masks = np.bitwise_or.reduce(np.left_shift(np.uint64(1), top.astype(np.uint64)), axis=1)
    pos = np.searchsorted(codebook._masks_sorted, masks)
    pos = np.minimum(pos, len(codebook) - 1)
    hit = codebook._masks_sorted[pos] == masks
    ids = np.empty(pb.shape[0], dtype=np.int64)
    ids[hit] = codebook._ids_by_mask[pos[hit]]
    if not np.all(hit):
        miss = ~hit
        mass = pb[miss] @ (codebook.entries > 0).T.astype(np.float64)
        ids[miss] = np.argmax(mass, axis=1)
    return ids


def decode_top_m(p, codebook: Codebook) -> int:
    """Decode a single received probability vector to a message id."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ShapeError(f"expected a 1-D probability vector, got ndim={p.ndim}")
    return int(decode_batch(p[None, :], codebook)[0])


def subset_codebook(codebook: Codebook, indices) -> tuple[Codebook, np.ndarray]:
    """Restrict a codebook to the given entry indices.

    Returns the restricted codebook and the index array mapping its
    message ids back to ids in the parent codebook.
    """
    indices = np.asarray(sorted(int(i) for i in indices), dtype=np.int64)
    sub = Codebook(codebook.M, codebook.m, codebook.supports[indices],
                   selection=f"subset-of-{codebook.selection}",
                   selection_seed=codebook.selection_seed)
    return sub, indices


def gray_bits(message_id: int, k: int) -> np.ndarray:
    """Binary-reflected gray code of a message id, k bits, MSB first."""
    if message_id < 0 or message_id >= 1 << k:
        raise DomainError(f"id {message_id} out of range for {k} bits")
    g = message_id ^ (message_id >> 1)
    return np.array([(g >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.int64)


def gray_bit_errors(ids_a, ids_b) -> np.ndarray:
    """Per-pair count of differing bits under gray-coded message labels."""
    a = np.asarray(ids_a, dtype=np.uint64)
    b = np.asarray(ids_b, dtype=np.uint64)
    diff = (a ^ (a >> np.uint64(1))) ^ (b ^ (b >> np.uint64(1)))
    return np.bitwise_count(diff).astype(np.int64)
