"""Fixed-width point subsets packed into 64-bit words."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

WORD = 64


def num_words(size: int) -> int:
    return max(1, -(-size // WORD))


def pack_masks(masks: np.ndarray) -> np.ndarray:
    """Pack a ``(k, n)`` boolean array into ``(k, words)`` uint64 rows."""
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    k, n = masks.shape
    width = num_words(n) * WORD
    padded = np.zeros((k, width), dtype=bool)
    padded[:, :n] = masks
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_words(words: np.ndarray, size: int) -> np.ndarray:
    words = np.atleast_2d(np.ascontiguousarray(words, dtype="<u8"))
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :size].astype(bool)


def popcount(words: np.ndarray) -> np.ndarray:
    """Population count summed over the last axis."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def intersection_sizes(left: np.ndarray, right: np.ndarray, chunk: int = 256) -> np.ndarray:
    """All pairwise ``|A & B|`` for packed families ``left`` (a, w) and ``right`` (b, w)."""
    left = np.atleast_2d(left)
    right = np.atleast_2d(right)
    out = np.empty((left.shape[0], right.shape[0]), dtype=np.int64)
    for start in range(0, left.shape[0], chunk):
        block = left[start:start + chunk, None, :] & right[None, :, :]
        out[start:start + chunk] = np.bitwise_count(block).sum(axis=-1, dtype=np.int64)
    return out


class PointSet:
    """Immutable subset of ``range(size)`` stored as a bit vector."""

    __slots__ = ("size", "words")

    def __init__(self, size: int, words: np.ndarray | None = None) -> None:
        self.size = int(size)
        if words is None:
            words = np.zeros(num_words(self.size), dtype=np.uint64)
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (num_words(self.size),):
            raise ValueError(f"expected {num_words(self.size)} words, got {words.shape}")
        self.words = words
        self.words.flags.writeable = False

    @classmethod
    def from_indices(cls, size: int, indices: Iterable[int]) -> PointSet:
        mask = np.zeros(size, dtype=bool)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= size):
            raise IndexError("point index out of range")
        mask[idx] = True
        return cls.from_mask(mask)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> PointSet:
        mask = np.asarray(mask, dtype=bool)
        return cls(mask.size, pack_masks(mask)[0])

    @classmethod
    def full(cls, size: int) -> PointSet:
        return cls.from_mask(np.ones(size, dtype=bool))

    def mask(self) -> np.ndarray:
        return unpack_words(self.words, self.size)[0]

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask())

    def __len__(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def __contains__(self, i: int) -> bool:
        i = int(i)
        if not 0 <= i < self.size:
            return False
        return bool((int(self.words[i // WORD]) >> (i % WORD)) & 1)

    def __iter__(self):
        return iter(self.indices().tolist())

    def _check(self, other: PointSet) -> None:
        if other.size != self.size:
            raise ValueError("point sets over different ground sets")

    def __and__(self, other: PointSet) -> PointSet:
        self._check(other)
        return PointSet(self.size, self.words & other.words)

    def __or__(self, other: PointSet) -> PointSet:
        self._check(other)
        return PointSet(self.size, self.words | other.words)

    def __sub__(self, other: PointSet) -> PointSet:
        self._check(other)
        return PointSet(self.size, self.words & ~other.words)

    def __xor__(self, other: PointSet) -> PointSet:
        self._check(other)
        return PointSet(self.size, self.words ^ other.words)

    def complement(self) -> PointSet:
        return PointSet.full(self.size) - self

    def intersection_size(self, other: PointSet) -> int:
        self._check(other)
        return int(np.bitwise_count(self.words & other.words).sum())

    def issubset(self, other: PointSet) -> bool:
        self._check(other)
        return not np.any(self.words & ~other.words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.size == other.size and np.array_equal(self.words, other.words)

    def __hash__(self) -> int:
        return hash((self.size, self.words.tobytes()))

    def __repr__(self) -> str:
        idx = self.indices()
        shown = ", ".join(map(str, idx[:8].tolist()))
        more = ", ..." if idx.size > 8 else ""
        return f"PointSet({self.size}, {{{shown}{more}}}, len={idx.size})"
