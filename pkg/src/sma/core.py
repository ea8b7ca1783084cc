"""Binary vectors, deterministic seed derivation, and random generation.

Everything downstream (allocators, bound checks, Monte Carlo runs) is built
on the three primitives here: packed bit vectors with popcount-based Hamming
distance, a hierarchical seed scheme that makes every random draw
reconstructible from a master seed plus a label path, and generators for
random inputs at a given density or at an exact pairwise distance.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

_WORD_BITS = 64


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a 0/1 array into little-endian uint64 words."""
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    pad = (-len(packed)) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view(np.uint64)


class BitVector:
    """Immutable fixed-length vector in {0,1}^n, stored packed.

    Hamming distance reduces to XOR + popcount on the word array, which keeps
    n up to 10^6 cheap.  The weight (number of ones) is computed once.
    """

    __slots__ = ("n", "words", "_weight", "_unpacked")

    def __init__(self, n: int, words: np.ndarray, weight: int | None = None):
        self.n = int(n)
        words = np.ascontiguousarray(words, dtype=np.uint64)
        words.setflags(write=False)
        self.words = words
        if weight is None:
            weight = int(np.bitwise_count(words).sum())
        self._weight = weight
        self._unpacked = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_array(cls, bits) -> "BitVector":
        bits = np.asarray(bits)
        if bits.ndim != 1:
            raise UsageError("bit array must be one-dimensional")
        if not np.isin(bits, (0, 1)).all():
            raise UsageError("bit array entries must be 0 or 1")
        return cls(len(bits), _pack(bits), weight=int(bits.sum()))

    @classmethod
    def from_indices(cls, n: int, indices) -> "BitVector":
        bits = np.zeros(n, dtype=np.uint8)
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise UsageError("index out of range")
        bits[idx] = 1
        return cls(n, _pack(bits), weight=int(bits.sum()))

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        nwords = (n + _WORD_BITS - 1) // _WORD_BITS
        return cls(n, np.zeros(nwords, dtype=np.uint64), weight=0)

    @classmethod
    def ones(cls, n: int) -> "BitVector":
        return cls.from_array(np.ones(n, dtype=np.uint8))

    # -- views --------------------------------------------------------------

    @property
    def weight(self) -> int:
        return self._weight

    def to_array(self) -> np.ndarray:
        """Unpacked 0/1 uint8 view (cached; do not mutate)."""
        if self._unpacked is None:
            u = np.unpackbits(self.words.view(np.uint8), bitorder="little", count=self.n)
            u.setflags(write=False)
            self._unpacked = u
        return self._unpacked

    def active_indices(self) -> np.ndarray:
        return np.flatnonzero(self.to_array()).astype(np.int64)

    def flip(self, positions) -> "BitVector":
        """New vector with the given positions toggled."""
        bits = self.to_array().copy()
        pos = np.asarray(positions, dtype=np.int64)
        bits[pos] ^= 1
        return BitVector.from_array(bits)

    # -- dunder -------------------------------------------------------------

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.n, self.words.tobytes()))

    def __repr__(self):
        return f"BitVector(n={self.n}, weight={self._weight})"


def hamming_distance(x: BitVector, y: BitVector) -> int:
    """Number of positions where x and y differ."""
    if x.n != y.n:
        raise UsageError(f"length mismatch: {x.n} != {y.n}")
    return int(np.bitwise_count(np.bitwise_xor(x.words, y.words)).sum())


@dataclass(frozen=True)
class SeedPath:
    """Hierarchical deterministic seed: a master seed plus a (label, index) path.

    Derivation is a keyed BLAKE2b hash of the path, so every trial, matrix
    column, and flip bit can be regenerated independently without storing any
    random stream.  Distinct paths give statistically independent streams.
    """

    master_seed: int
    path: tuple = field(default=())

    def child(self, label: str, index: int = 0) -> "SeedPath":
        return SeedPath(self.master_seed, self.path + ((label, int(index)),))

    def _digest(self) -> bytes:
        h = hashlib.blake2b(digest_size=16, key=struct.pack("<Q", self.master_seed & (2**64 - 1)))
        for label, index in self.path:
            h.update(label.encode())
            h.update(struct.pack("<q", index))
        return h.digest()

    def state64(self) -> int:
        """A 64-bit state for counter-based kernels."""
        return struct.unpack("<Q", self._digest()[:8])[0]

    def generator(self) -> np.random.Generator:
        """A numpy Generator seeded from the full 128-bit digest."""
        return np.random.Generator(np.random.PCG64(int.from_bytes(self._digest(), "little")))


def random_bitvector(n: int, density: float, seed: SeedPath) -> BitVector:
    """Each bit independently one with probability `density`."""
    if not 0.0 <= density <= 1.0:
        raise UsageError(f"density must be in [0, 1], got {density}")
    rng = seed.generator()
    return BitVector.from_array(rng.random(n) < density)


def random_pair_at_distance(n: int, density: float, distance: int, seed: SeedPath):
    """A pair (x, y) at exact Hamming distance `distance`.

    x is drawn at the given density; y toggles a uniform subset of positions.
    Toggling (rather than resampling y) guarantees the distance exactly.
    """
    if distance > n or distance < 0:
        raise UsageError(f"distance must be in [0, {n}], got {distance}")
    x = random_bitvector(n, density, seed.child("base"))
    if distance == 0:
        return x, x
    positions = seed.child("toggle").generator().choice(n, size=distance, replace=False)
    return x, x.flip(positions)
