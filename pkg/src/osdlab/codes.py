"""Linear systematic codes: narrow-sense BCH, extended BCH, and file-loaded codes."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .constants import CODE_REGISTRY, PRIMITIVE_POLYS
from .gf2 import BinaryMatrix, BitWord, RankDeficientError, gauss_echelon, read_matrix

MAX_ENUMERATION_K = 20


class GfField:
    """GF(2^m) with log/antilog tables built from a primitive polynomial."""

    def __init__(self, m: int, primitive_poly: int | None = None):
        if m < 2:
            raise ValueError("extension degree must be at least 2")
        if primitive_poly is None:
            primitive_poly = PRIMITIVE_POLYS[m]
        if primitive_poly >> m != 1:
            raise ValueError(f"polynomial {primitive_poly:#b} does not have degree {m}")
        self.m = m
        self.primitive_poly = primitive_poly
        self.order = (1 << m) - 1
        self.exp = [0] * (2 * self.order)
        self.log = [-1] * (1 << m)
        x = 1
        for i in range(self.order):
            if self.log[x] != -1:
                raise ValueError(f"{primitive_poly:#b} is not primitive")
            self.exp[i] = x
            self.log[x] = i
            x <<= 1
            if x >> m:
                x ^= primitive_poly
        if x != 1:
            raise ValueError(f"{primitive_poly:#b} is not primitive")
        for i in range(self.order, 2 * self.order):
            self.exp[i] = self.exp[i - self.order]

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def alpha(self, i: int) -> int:
        return self.exp[i % self.order]

    def __repr__(self):
        return f"GfField(m={self.m}, primitive_poly={self.primitive_poly:#b})"


def gf_mul(a: int, b: int, F: GfField) -> int:
    """Product of two field elements modulo the field's primitive polynomial."""
    limit = 1 << F.m
    if not (0 <= a < limit and 0 <= b < limit):
        raise ValueError("operand outside the field")
    return F.mul(a, b)


def poly_mul_gf2(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials held as ints."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod_gf2(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def cyclotomic_coset(i: int, n: int) -> list[int]:
    coset, j = [], i % n
    while j not in coset:
        coset.append(j)
        j = (2 * j) % n
    return coset


def minimal_polynomial(i: int, F: GfField) -> int:
    """Minimal polynomial of alpha^i as a GF(2) int (bit j = coeff of x^j)."""
    # coefficients over GF(2^m), lowest degree first
    poly = [1]
    for j in cyclotomic_coset(i, F.order):
        root = F.alpha(j)
        nxt = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            nxt[d + 1] ^= c
            nxt[d] ^= F.mul(c, root)
        poly = nxt
    if any(c not in (0, 1) for c in poly):
        raise ArithmeticError("minimal polynomial has coefficients outside GF(2)")
    return sum(c << d for d, c in enumerate(poly))


def bch_generator_poly(n: int, t: int, F: GfField) -> BitWord:
    """Generator of the narrow-sense primitive BCH code of length ``n`` correcting ``t``.

    Returns the coefficients as a BitWord of length ``deg g + 1``.
    """
    if n != F.order:
        raise ValueError(f"n={n} is not 2^{F.m} - 1")
    if t < 1:
        raise ValueError("t must be positive")
    g, seen = 1, set()
    for i in range(1, 2 * t + 1):
        rep = min(cyclotomic_coset(i, n))
        if rep in seen:
            continue
        seen.add(rep)
        g = poly_mul_gf2(g, minimal_polynomial(i, F))
    deg = g.bit_length() - 1
    if n - deg <= 0:
        raise ValueError(f"t={t} leaves no information bits for n={n}")
    return BitWord(deg + 1, g)


@dataclass(frozen=True)
class CodeSpec:
    n: int
    k: int
    dmin: int | None
    family: str
    t: int | None = None
    path: str | None = None

    def __post_init__(self):
        if self.family not in ("bch", "extended-bch", "file", "uncoded"):
            raise ValueError(f"unknown code family {self.family!r}")
        if not 0 < self.k <= self.n:
            raise ValueError(f"need 0 < k <= n, got ({self.n},{self.k})")
        if self.dmin is not None and self.dmin < 1:
            raise ValueError("dmin must be at least 1")

    @property
    def rate(self) -> float:
        return self.k / self.n


@dataclass(frozen=True)
class Code:
    """A code spec bound to its systematic generator matrix."""

    name: str
    spec: CodeSpec
    G: BinaryMatrix

    @property
    def n(self) -> int:
        return self.G.cols

    @property
    def k(self) -> int:
        return self.G.rows

    @property
    def dmin(self) -> int | None:
        return self.spec.dmin

    @property
    def rate(self) -> float:
        return self.k / self.n


def _cyclic_generator_matrix(g: BitWord, n: int) -> BinaryMatrix:
    deg = g.length - 1
    k = n - deg
    dense = np.zeros((k, n), dtype=np.uint8)
    coeffs = g.to_array()
    for i in range(k):
        dense[i, i : i + deg + 1] = coeffs
    return BinaryMatrix.from_dense(dense)


def systematize(G: BinaryMatrix) -> BinaryMatrix:
    """Bring ``G`` to ``[I | P]``, swapping columns only if the first K are dependent."""
    try:
        S, _, _ = gauss_echelon(G, allow_column_swaps=False)
    except RankDeficientError:
        S, _, _ = gauss_echelon(G, allow_column_swaps=True)
    return S


def build_code(spec: CodeSpec) -> BinaryMatrix:
    """Systematic generator matrix for ``spec``."""
    if spec.family == "uncoded":
        return BinaryMatrix.identity(spec.n)
    if spec.family == "file":
        if spec.path is None:
            raise ValueError("file code needs a path")
        G = systematize(read_matrix(spec.path))
        if G.shape != (spec.k, spec.n):
            raise ValueError(f"file matrix is {G.shape}, spec says ({spec.k},{spec.n})")
        return G
    if spec.t is None:
        raise ValueError("BCH spec needs t")
    parent_n = spec.n - 1 if spec.family == "extended-bch" else spec.n
    m = (parent_n + 1).bit_length() - 1
    if (1 << m) - 1 != parent_n:
        raise ValueError(f"BCH length must be 2^m - 1, got {parent_n}")
    g = bch_generator_poly(parent_n, spec.t, GfField(m))
    G = systematize(_cyclic_generator_matrix(g, parent_n))
    if spec.family == "extended-bch":
        dense = G.dense
        parity = dense.sum(axis=1, dtype=np.int64) & 1
        G = BinaryMatrix.from_dense(np.hstack([dense, parity[:, None].astype(np.uint8)]))
    if G.shape != (spec.k, spec.n):
        raise ValueError(f"construction gives {G.shape}, spec says ({spec.k},{spec.n})")
    return G


def enumerate_codewords(G: BinaryMatrix) -> np.ndarray:
    """All ``2^K`` codewords as packed rows; row index = information word."""
    if G.rows > MAX_ENUMERATION_K:
        raise ValueError(f"K={G.rows} exceeds the enumeration limit {MAX_ENUMERATION_K}")
    words = np.zeros((1, G.packed.shape[1]), dtype=np.uint64)
    for i in range(G.rows):
        words = np.concatenate([words, words ^ G.packed[i]])
    return words


def codeword_weights(G: BinaryMatrix) -> np.ndarray:
    return np.bitwise_count(enumerate_codewords(G)).sum(axis=1).astype(np.int64)


def min_distance_exhaustive(G: BinaryMatrix) -> int:
    """Minimum weight over the nonzero codewords (K <= 20)."""
    w = codeword_weights(G)
    nz = w[1:]
    if nz.size == 0 or nz.min() == 0:
        raise RankDeficientError("generator matrix has dependent rows")
    return int(nz.min())


def weight_spectrum(G: BinaryMatrix) -> dict[int, tuple[int, int]]:
    """Map weight -> (number of codewords, summed information weight)."""
    w = codeword_weights(G)
    info_w = np.bitwise_count(np.arange(w.size, dtype=np.uint64)).astype(np.int64)
    out = {}
    for weight in np.unique(w):
        sel = w == weight
        out[int(weight)] = (int(sel.sum()), int(info_w[sel].sum()))
    return out


@lru_cache(maxsize=None)
def _registry_code(name: str) -> Code:
    family, n, k, t, dmin = CODE_REGISTRY[name]
    spec = CodeSpec(n=n, k=k, dmin=dmin, family=family, t=t)
    return Code(name, spec, build_code(spec))


def hamming_7_4() -> Code:
    P = ["110", "011", "111", "101"]
    G = BinaryMatrix.from_rows(["1000" + P[0], "0100" + P[1], "0010" + P[2], "0001" + P[3]])
    return Code("hamming-7-4", CodeSpec(7, 4, 3, "file"), G)


def load_code(name: str) -> Code:
    """Resolve a registry name, ``uncoded-<n>``, ``hamming-7-4`` or ``file:<path>``."""
    if name in CODE_REGISTRY:
        return _registry_code(name)
    if name == "hamming-7-4":
        return hamming_7_4()
    m = re.fullmatch(r"uncoded-(\d+)", name)
    if m:
        n = int(m.group(1))
        spec = CodeSpec(n, n, 1, "uncoded")
        return Code(name, spec, build_code(spec))
    if name.startswith("file:"):
        path = name[len("file:") :]
        G = systematize(read_matrix(path))
        dmin = min_distance_exhaustive(G) if G.rows <= MAX_ENUMERATION_K else None
        spec = CodeSpec(G.cols, G.rows, dmin, "file", path=str(Path(path)))
        return Code(name, spec, G)
    known = ", ".join(sorted(CODE_REGISTRY) + ["hamming-7-4", "uncoded-<n>", "file:<path>"])
    raise KeyError(f"unknown code {name!r}; known: {known}")
