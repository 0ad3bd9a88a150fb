"""Bit-packed GF(2) vectors and matrices.

Rows of a :class:`BinaryMatrix` are stored as ``uint64`` words, bit ``j`` of a
row living in word ``j // 64`` at bit position ``j % 64``.  A :class:`BitWord`
keeps its bits in a Python ``int`` (bit ``i`` is ``(value >> i) & 1``), which
is already an arbitrary-length packed representation with native XOR.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

WORD_BITS = 64


class RankDeficientError(ValueError):
    """Raised when elimination cannot find the requested number of pivots."""


# --------------------------------------------------------------------------
# packing helpers


def n_words(n_bits: int) -> int:
    return (n_bits + WORD_BITS - 1) // WORD_BITS


def pack_bits(dense) -> np.ndarray:
    """Pack a ``(..., n)`` 0/1 array into ``(..., n_words(n))`` uint64 words."""
    dense = np.asarray(dense, dtype=np.uint8)
    n = dense.shape[-1]
    w = n_words(n)
    padded = np.zeros(dense.shape[:-1] + (w * WORD_BITS,), dtype=np.uint8)
    padded[..., :n] = dense & 1
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def unpack_bits(packed, n: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns a ``(..., n)`` uint8 array."""
    packed = np.ascontiguousarray(packed, dtype="<u8")
    as_bytes = packed.view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return bits[..., :n]


# --------------------------------------------------------------------------
# vectors


@dataclass(frozen=True)
class BitWord:
    """Fixed-length binary vector."""

    length: int
    value: int = 0

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("BitWord length must be positive")
        if self.value < 0 or self.value >> self.length:
            raise ValueError("bits set beyond BitWord length")

    @classmethod
    def zeros(cls, length: int) -> "BitWord":
        return cls(length, 0)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitWord":
        bits = [int(b) for b in bits]
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b}, expected 0 or 1")
            value |= b << i
        return cls(len(bits), value)

    @classmethod
    def from_string(cls, text: str) -> "BitWord":
        """Parse ``"1010"`` with the first character as bit 0."""
        return cls.from_bits(int(ch) for ch in text.strip())

    @classmethod
    def unit(cls, length: int, i: int) -> "BitWord":
        if not 0 <= i < length:
            raise IndexError(i)
        return cls(length, 1 << i)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.length
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.value >> i) & 1

    def __iter__(self):
        return (self[i] for i in range(self.length))

    def __xor__(self, other: "BitWord") -> "BitWord":
        return xor_into(self, other)

    def __str__(self) -> str:
        return "".join(str(b) for b in self)

    @property
    def weight(self) -> int:
        return bin(self.value).count("1")

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.uint8, count=self.length)

    def support(self) -> list[int]:
        return [i for i in range(self.length) if (self.value >> i) & 1]


def xor_into(a: BitWord, b: BitWord) -> BitWord:
    """Componentwise XOR of two equal-length words."""
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    return BitWord(a.length, a.value ^ b.value)


def hamming_distance(a: BitWord, b: BitWord) -> int:
    return xor_into(a, b).weight


# --------------------------------------------------------------------------
# permutations


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``range(n)``; ``apply(v)[i] == v[map[i]]``."""

    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(i) for i in self.map)
        if sorted(m) != list(range(len(m))):
            raise ValueError("not a permutation")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_one_based(cls, image: Sequence[int]) -> "Permutation":
        return cls(tuple(i - 1 for i in image))

    @property
    def n(self) -> int:
        return len(self.map)

    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.map)

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.map):
            inv[j] = i
        return Permutation(tuple(inv))

    def then(self, other: "Permutation") -> "Permutation":
        """Permutation equal to applying ``self`` first and ``other`` second."""
        return compose(self, other)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.map))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.map, dtype=np.intp)

    def apply(self, v):
        return apply_permutation(self, v)


def compose(first: Permutation, second: Permutation) -> Permutation:
    """``apply(compose(p, q), v) == apply(q, apply(p, v))``."""
    if first.n != second.n:
        raise ValueError("permutation sizes differ")
    return Permutation(tuple(first.map[j] for j in second.map))


def apply_permutation(p: Permutation, v):
    """Reorder ``v`` so that ``out[i] = v[p.map[i]]``.

    Works on sequences, numpy arrays (along the last axis) and BitWords.
    """
    if isinstance(v, BitWord):
        if v.length != p.n:
            raise ValueError("length mismatch")
        return BitWord.from_bits(v[j] for j in p.map)
    if isinstance(v, np.ndarray):
        if v.shape[-1] != p.n:
            raise ValueError("length mismatch")
        return v[..., p.as_array()]
    if len(v) != p.n:
        raise ValueError("length mismatch")
    out = [v[j] for j in p.map]
    return type(v)(out) if isinstance(v, tuple) else out


# --------------------------------------------------------------------------
# matrices


class BinaryMatrix:
    """Dense GF(2) matrix with packed rows.  Immutable after construction."""

    __slots__ = ("_packed", "_rows", "_cols", "__dict__")

    def __init__(self, packed: np.ndarray, cols: int):
        packed = np.array(packed, dtype=np.uint64, copy=True)
        if packed.ndim != 2 or packed.shape[1] != n_words(cols):
            raise ValueError("packed array has the wrong shape")
        tail = cols % WORD_BITS
        if tail and packed.size and np.any(packed[:, -1] >> np.uint64(tail)):
            raise ValueError("bits set beyond column count")
        packed.flags.writeable = False
        self._packed = packed
        self._rows = packed.shape[0]
        self._cols = cols

    @classmethod
    def from_dense(cls, dense) -> "BinaryMatrix":
        dense = np.asarray(dense)
        if dense.ndim != 2:
            raise ValueError("expected a 2-D array")
        if np.any((dense != 0) & (dense != 1)):
            raise ValueError("entries must be 0 or 1")
        return cls(pack_bits(dense.astype(np.uint8)), dense.shape[1])

    @classmethod
    def from_rows(cls, rows: Sequence[str | BitWord]) -> "BinaryMatrix":
        words = [BitWord.from_string(r) if isinstance(r, str) else r for r in rows]
        if not words or len({w.length for w in words}) != 1:
            raise ValueError("rows must be non-empty and equal length")
        return cls.from_dense(np.array([w.to_array() for w in words]))

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def packed(self) -> np.ndarray:
        return self._packed

    @cached_property
    def dense(self) -> np.ndarray:
        d = unpack_bits(self._packed, self._cols)
        d.flags.writeable = False
        return d

    def to_dense(self) -> np.ndarray:
        return self.dense.copy()

    @cached_property
    def _row_ints(self) -> tuple[int, ...]:
        return tuple(
            int.from_bytes(self._packed[i].astype("<u8").tobytes(), "little")
            for i in range(self._rows)
        )

    def row(self, i: int) -> BitWord:
        return BitWord(self._cols, self._row_ints[i])

    def column(self, j: int) -> BitWord:
        return BitWord.from_bits(self.dense[:, j])

    def permute_columns(self, p: Permutation) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(apply_permutation(p, self.dense))

    def submatrix(self, cols: slice) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(self.dense[:, cols])

    def is_systematic(self) -> bool:
        k = self._rows
        return k <= self._cols and np.array_equal(self.dense[:, :k], np.eye(k, dtype=np.uint8))

    def parity_part(self) -> np.ndarray:
        """Columns after the first ``rows`` ones, as a dense array."""
        return self.dense[:, self._rows :].copy()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryMatrix)
            and self.shape == other.shape
            and np.array_equal(self._packed, other._packed)
        )

    def __hash__(self):
        return hash((self.shape, self._packed.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryMatrix({self._rows}x{self._cols})"

    def __str__(self) -> str:
        return "\n".join("".join(map(str, r)) for r in self.dense)


def encode(u: BitWord, G: BinaryMatrix) -> BitWord:
    """Codeword ``u G`` over GF(2)."""
    if u.length != G.rows:
        raise ValueError(f"information word has {u.length} bits, G has {G.rows} rows")
    acc = 0
    rows = G._row_ints
    value = u.value
    i = 0
    while value:
        if value & 1:
            acc ^= rows[i]
        value >>= 1
        i += 1
    return BitWord(G.cols, acc)


def encode_many(U, G: BinaryMatrix) -> np.ndarray:
    """Encode a batch of information words given as a ``(B, K)`` 0/1 array."""
    U = np.asarray(U, dtype=np.int64)
    if U.shape[-1] != G.rows:
        raise ValueError("dimension mismatch")
    return ((U @ G.dense.astype(np.int64)) & 1).astype(np.uint8)


def gauss_echelon(
    G: BinaryMatrix,
    allow_column_swaps: bool = True,
    reduced: bool = True,
    column_order: Sequence[int] | None = None,
) -> tuple[BinaryMatrix, Permutation, int]:
    """Row-reduce ``G`` so that its first ``rows`` columns hold the pivots.

    Columns are scanned left to right (or in ``column_order``).  When a column
    has no pivot candidate it is passed over and the nearest later column with
    one takes the pivot slot; passed-over columns keep their relative order
    after the pivots.  The returned permutation maps output columns to input
    columns, i.e. ``result == gauss(G.permute_columns(perm))``.

    With ``reduced`` the left block is the identity (Gauss-Jordan); otherwise
    it is upper triangular with unit diagonal.
    """
    k, n = G.shape
    if k > n:
        raise ValueError("more rows than columns")
    order = list(range(n)) if column_order is None else [int(c) for c in column_order]
    if sorted(order) != list(range(n)):
        raise ValueError("column_order is not a permutation")
    A = G.dense[:, order].copy()

    pivots: list[int] = []
    skipped: list[int] = []
    rank = 0
    for pos in range(n):
        if rank == k:
            skipped.append(pos)
            continue
        if not allow_column_swaps and pos >= k:
            skipped.append(pos)
            continue
        hits = np.flatnonzero(A[rank:, pos])
        if hits.size == 0:
            if not allow_column_swaps:
                raise RankDeficientError(f"no pivot in column {order[pos]} without column swaps")
            skipped.append(pos)
            continue
        r = rank + hits[0]
        if r != rank:
            A[[rank, r]] = A[[r, rank]]
        targets = np.flatnonzero(A[:, pos]) if reduced else rank + 1 + np.flatnonzero(A[rank + 1 :, pos])
        targets = targets[targets != rank]
        A[targets] ^= A[rank]
        pivots.append(pos)
        rank += 1

    if rank < k:
        raise RankDeficientError(f"rank {rank} < {k}")
    final = pivots + skipped
    perm = Permutation(tuple(order[p] for p in final))
    return BinaryMatrix.from_dense(A[:, final]), perm, rank


def rank(G: BinaryMatrix) -> int:
    """GF(2) rank of any matrix (rows may exceed columns)."""
    A = G.to_dense()
    r = 0
    for c in range(A.shape[1]):
        hits = np.flatnonzero(A[r:, c])
        if hits.size == 0:
            continue
        p = r + hits[0]
        A[[r, p]] = A[[p, r]]
        below = r + 1 + np.flatnonzero(A[r + 1 :, c])
        A[below] ^= A[r]
        r += 1
        if r == A.shape[0]:
            break
    return r


# --------------------------------------------------------------------------
# file format: "K N" then K rows of N characters from {0,1}


def parse_matrix(text: str) -> BinaryMatrix:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("missing 'K N' header")
    try:
        k, n = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise ValueError("header must be two integers 'K N'") from exc
    bits = "".join(tokens[2:])
    if len(bits) != k * n or set(bits) - {"0", "1"}:
        raise ValueError(f"expected {k}x{n} bits from {{0,1}}, got {len(bits)} characters")
    dense = np.frombuffer(bits.encode(), dtype=np.uint8).reshape(k, n) - ord("0")
    return BinaryMatrix.from_dense(dense)


def format_matrix(G: BinaryMatrix) -> str:
    return f"{G.rows} {G.cols}\n{G}\n"


def read_matrix(path: str | Path) -> BinaryMatrix:
    return parse_matrix(Path(path).read_text())


def write_matrix(G: BinaryMatrix, path: str | Path) -> None:
    Path(path).write_text(format_matrix(G))
