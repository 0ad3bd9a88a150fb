"""Order-statistics list decoders and the ML / hard-decision baselines.

Every list decoder works on an ordered view of the received word.  The first
``K`` ordered positions form an information set (the MRIPs for OSD, the
reliability-sorted systematic bits for POSD, the plain systematic bits for
ISD) and the generator matrix restricted to that view is ``[I | P~]``.  A test
pattern ``e`` is a set of information positions to flip relative to the
hard-decision codeword ``c0``; the winner maximises the correlation
``r . M(c0 + e G~)``, which is the same as minimising the discrepancy

    sum_{i in e} |r_i|  +  sum_{j : (e P~)_j = 1} r_j M(c0_j)

over the list.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels
from .channel import ReceivedWord, hard_decision
from .codes import MAX_ENUMERATION_K, Code, enumerate_codewords
from .constants import SEGMENT_FRACTION
from .gf2 import (
    BinaryMatrix,
    BitWord,
    Permutation,
    encode_many,
    gauss_echelon,
    pack_bits,
    unpack_bits,
    xor_into,
)

FAMILIES = ("ml", "hard", "osd", "seg-osd", "posd", "isd")
LIST_FAMILIES = ("osd", "seg-osd", "posd", "isd")


class InfeasibleDecoderError(ValueError):
    """The requested decoder cannot run on this code (e.g. ML with K > 20)."""


# --------------------------------------------------------------------------
# decoder descriptions


@dataclass(frozen=True)
class DecoderSpec:
    family: str
    segments: tuple[tuple[int, int], ...] = ()
    skipping: tuple[int, int] | None = None
    label: str = ""

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown decoder family {self.family!r}")
        if self.family in LIST_FAMILIES:
            if not self.segments:
                raise ValueError(f"{self.family} needs at least one segment")
            for kq, iq in self.segments:
                if kq < 1:
                    raise ValueError("segment lengths must be positive")
                if not 0 <= iq <= kq:
                    raise ValueError(f"reprocessing order {iq} outside [0, {kq}]")
            if self.family in ("osd", "isd") and len(self.segments) != 1:
                raise ValueError(f"{self.family} has exactly one segment")
            if self.family == "seg-osd" and len(self.segments) < 2:
                raise ValueError("seg-osd needs at least two segments")
        if self.skipping is not None and len(self.segments) != 2:
            raise ValueError("skipping rules are defined for two segments")
        if not self.label:
            object.__setattr__(self, "label", self.describe())

    @property
    def k(self) -> int:
        return sum(kq for kq, _ in self.segments)

    @property
    def q(self) -> int:
        return len(self.segments)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(iq for _, iq in self.segments)

    def describe(self) -> str:
        if self.family in ("ml", "hard"):
            return self.family
        name = {"seg-osd": "osd"}.get(self.family, self.family)
        text = f"{name}:" + ",".join(str(i) for i in self.orders)
        if self.q > 1:
            text += "@" + ",".join(str(kq) for kq, _ in self.segments[:-1])
        if self.skipping is not None:
            text += "+skip"
        return text


def default_first_segment(k: int) -> int:
    return max(1, min(k - 1, int(math.floor(SEGMENT_FRACTION * k + 0.5))))


def skip_thresholds(dmin: int) -> tuple[int, int]:
    return (math.ceil(SEGMENT_FRACTION * dmin - 1e-12), dmin)


_GRAMMAR = re.compile(
    r"^(?P<fam>osd|posd|isd)(?::(?P<orders>\d+(?:,\d+)*)(?:@(?P<lens>\d+(?:,\d+)*))?)?$"
)


def parse_decoder(text: str, k: int, dmin: int | None = None) -> DecoderSpec:
    """Parse ``osd:I``, ``osd:I1,I2@K1``, ``posd:I1,I2@K1``, ``isd:I``, ``ml``, ``hard``.

    An optional ``+skip`` suffix enables the two-segment skipping rule with
    thresholds ``(ceil(0.35 dmin), dmin)``.  Omitted segment lengths default to
    ``K1 = round(0.35 K)``.
    """
    raw = text.strip()
    body = raw.replace(" ", "")
    skip = body.endswith("+skip")
    if skip:
        body = body[: -len("+skip")]
    if body in ("ml", "hard"):
        if skip:
            raise ValueError(f"{body} has no list to skip")
        return DecoderSpec(body, label=raw)
    m = _GRAMMAR.match(body)
    if not m or not m.group("orders"):
        raise ValueError(f"cannot parse decoder {text!r}")
    fam = m.group("fam")
    orders = [int(x) for x in m.group("orders").split(",")]
    q = len(orders)
    if m.group("lens"):
        lens = [int(x) for x in m.group("lens").split(",")]
        if len(lens) != q - 1:
            raise ValueError(f"{q} segments need {q - 1} explicit lengths in {text!r}")
    elif q == 2:
        lens = [default_first_segment(k)]
    elif q == 1:
        lens = []
    else:
        raise ValueError(f"segment lengths required for {q} segments in {text!r}")
    last = k - sum(lens)
    if last < 1:
        raise ValueError(f"segment lengths {lens} leave nothing of K={k}")
    segments = tuple(zip(lens + [last], orders))
    if fam == "isd" and q != 1:
        raise ValueError("isd takes a single reprocessing order")
    family = "seg-osd" if fam == "osd" and q > 1 else fam
    skipping = None
    if skip:
        if dmin is None:
            raise ValueError("+skip needs the code's dmin")
        skipping = skip_thresholds(dmin)
    return DecoderSpec(family, segments, skipping, label=raw)


# --------------------------------------------------------------------------
# test pattern lists


@dataclass(frozen=True)
class TestPatternList:
    """Patterns in CSR form: pattern ``l`` flips positions ``idx[ptr[l]:ptr[l+1]]``."""

    __test__ = False  # not a pytest class

    k: int
    segments: tuple[tuple[int, int], ...]
    ptr: np.ndarray
    idx: np.ndarray
    segment_of: np.ndarray

    def __len__(self) -> int:
        return self.ptr.size - 1

    @property
    def distinct_count(self) -> int:
        seen = {tuple(self.idx[self.ptr[l] : self.ptr[l + 1]]) for l in range(len(self))}
        return len(seen)

    def support(self, l: int) -> np.ndarray:
        return self.idx[self.ptr[l] : self.ptr[l + 1]]

    def weights(self) -> np.ndarray:
        return np.diff(self.ptr)

    def pattern(self, l: int) -> BitWord:
        value = 0
        for i in self.support(l):
            value |= 1 << int(i)
        return BitWord(self.k, value)

    def __iter__(self):
        return (self.pattern(l) for l in range(len(self)))

    def dense(self) -> np.ndarray:
        out = np.zeros((len(self), self.k), dtype=np.uint8)
        rows = np.repeat(np.arange(len(self)), self.weights())
        out[rows, self.idx] = 1
        return out


def build_list(spec: DecoderSpec) -> TestPatternList:
    """Union over segments of all patterns up to each segment's weight cap.

    Each segment contributes its own all-zero pattern, so the list length is
    ``sum_q sum_{l <= I_q} C(K_q, l)``.  Within a segment patterns run by
    weight, then lexicographically.
    """
    if spec.family not in LIST_FAMILIES:
        raise ValueError(f"{spec.family} has no test pattern list")
    ptr, idx, seg = [0], [], []
    start = 0
    for q, (kq, iq) in enumerate(spec.segments):
        if iq > kq:
            raise ValueError(f"order {iq} exceeds segment length {kq}")
        for w in range(iq + 1):
            for comb in combinations(range(start, start + kq), w):
                idx.extend(comb)
                ptr.append(len(idx))
                seg.append(q)
        start += kq
    return TestPatternList(
        k=spec.k,
        segments=spec.segments,
        ptr=np.asarray(ptr, dtype=np.intp),
        idx=np.asarray(idx, dtype=np.intp),
        segment_of=np.asarray(seg, dtype=np.intp),
    )


def skip_test(
    e: BitWord,
    c0_hard: BitWord,
    thresholds: tuple[int, int],
    segments: tuple[tuple[int, int], ...],
) -> bool:
    """Return True to keep pattern ``e``, False to skip it.

    Distances are taken between the hard decisions on the information set and
    the candidate's information part ``c0 + e``: the first-segment distance
    against ``thresholds[0]`` and the total against ``thresholds[1]``.
    """
    if len(segments) != 2:
        raise ValueError("skipping is defined for two segments")
    candidate = xor_into(c0_hard, e)
    diff = xor_into(candidate, c0_hard)
    k1 = segments[0][0]
    d1 = sum(diff[i] for i in range(k1))
    return d1 <= thresholds[0] and diff.weight <= thresholds[1]


def keep_mask(plist: TestPatternList, spec: DecoderSpec) -> np.ndarray:
    keep = np.ones(len(plist), dtype=np.uint8)
    if spec.skipping is None:
        return keep
    zero = BitWord.zeros(plist.k)
    for l in range(len(plist)):
        keep[l] = skip_test(plist.pattern(l), zero, spec.skipping, spec.segments)
    return keep


# --------------------------------------------------------------------------
# ordering


def order_full(r, G: BinaryMatrix):
    """Sort by |r| and move the most reliable independent positions to the front.

    Returns ``(r~, G~, perm)`` with ``r~ = perm.apply(r)`` and ``G~`` the
    reduced row-echelon generator on the permuted columns.  Both the first K
    and the last N-K reliabilities are in descending order of magnitude.
    """
    r = np.asarray(r, dtype=np.float64)
    order = np.argsort(-np.abs(r), kind="stable")
    Gt, perm, _ = gauss_echelon(G, allow_column_swaps=True, column_order=order)
    return perm.apply(r), Gt, perm


def order_partial(r, k: int):
    """Sort only the first ``k`` reliabilities by magnitude; the rest stay put."""
    r = np.asarray(r, dtype=np.float64)
    head = np.argsort(-np.abs(r[:k]), kind="stable")
    perm = Permutation(tuple(head.tolist()) + tuple(range(k, r.size)))
    return perm.apply(r), perm


# --------------------------------------------------------------------------
# outcomes


@dataclass(frozen=True)
class DecodeOutcome:
    bits: np.ndarray
    metric: float
    patterns_tested: int = 0
    patterns_skipped: int = 0
    list_size: int = 0
    distinct_patterns: int = 0

    @property
    def codeword(self) -> BitWord:
        return BitWord.from_bits(self.bits)


@dataclass
class BatchOutcome:
    """Decisions for a batch, codewords in original position order."""

    codewords: np.ndarray
    metrics: np.ndarray
    patterns_tested: np.ndarray
    patterns_skipped: np.ndarray
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return self.codewords.shape[0]

    def outcome(self, b: int, list_size: int = 0, distinct: int = 0) -> DecodeOutcome:
        return DecodeOutcome(
            self.codewords[b].copy(),
            float(self.metrics[b]),
            int(self.patterns_tested[b]),
            int(self.patterns_skipped[b]),
            list_size,
            distinct,
        )


def correlation(R, C) -> np.ndarray:
    """Row-wise ``r . M(c)``."""
    return np.sum(np.asarray(R) * (1.0 - 2.0 * np.asarray(C, dtype=np.float64)), axis=-1)


# --------------------------------------------------------------------------
# decoders


class ListDecoder:
    """OSD, segmentation OSD, POSD or ISD bound to one generator matrix.

    Holds per-instance scratch; use one instance per worker.
    """

    def __init__(self, G: BinaryMatrix, spec: DecoderSpec):
        if spec.family not in LIST_FAMILIES:
            raise ValueError(f"{spec.family} is not a list decoder")
        if spec.k != G.rows:
            raise ValueError(f"segments cover K={spec.k}, code has K={G.rows}")
        if spec.family in ("posd", "isd") and not G.is_systematic():
            raise ValueError("POSD/ISD need a systematic generator matrix")
        self.G = G
        self.spec = spec
        self.plist = build_list(spec)
        self.keep = keep_mask(self.plist, spec)
        self.n_skipped = int(self.plist.ptr.size - 1 - self.keep.sum())
        self._dense = np.ascontiguousarray(G.dense)
        k, n = G.shape
        self._parity = np.zeros((k, max((n - k + 63) // 64, 1)), dtype=np.uint64)
        if n > k:
            self._parity[:, : (n - k + 63) // 64] = pack_bits(G.dense[:, k:])
        self._distinct = None

    @property
    def list_size(self) -> int:
        return len(self.plist)

    @property
    def distinct_patterns(self) -> int:
        if self._distinct is None:
            self._distinct = self.plist.distinct_count
        return self._distinct

    def _prepare(self, R):
        B, n = R.shape
        k = self.G.rows
        fam = self.spec.family
        if fam in ("osd", "seg-osd"):
            orders = np.ascontiguousarray(np.argsort(-np.abs(R), axis=1, kind="stable"), dtype=np.intp)
            perms, parity, ranks = kernels.rref_batch(self._dense, orders)
            if np.any(ranks < k):
                raise ArithmeticError("generator matrix is rank deficient")
        else:
            if fam == "posd":
                head = np.argsort(-np.abs(R[:, :k]), axis=1, kind="stable")
            else:
                head = np.broadcast_to(np.arange(k), (B, k))
            tail = np.broadcast_to(np.arange(k, n), (B, n - k))
            perms = np.ascontiguousarray(np.hstack([head, tail]), dtype=np.intp)
            parity = np.ascontiguousarray(self._parity[head])
        return perms, parity

    def decode_batch(self, R) -> BatchOutcome:
        R = np.ascontiguousarray(np.atleast_2d(R), dtype=np.float64)
        B = R.shape[0]
        perms, parity = self._prepare(R)
        rt = np.ascontiguousarray(np.take_along_axis(R, perms, axis=1))
        best, cbits = kernels.reprocess_batch(
            parity, rt, self.plist.ptr, self.plist.idx, self.keep
        )
        C = np.empty_like(cbits)
        np.put_along_axis(C, perms, cbits, axis=1)
        L = self.list_size
        return BatchOutcome(
            codewords=C,
            metrics=correlation(R, C),
            patterns_tested=np.full(B, L - self.n_skipped, dtype=np.int64),
            patterns_skipped=np.full(B, self.n_skipped, dtype=np.int64),
            extra={"pattern_index": best, "perms": perms},
        )

    def decode(self, rw: ReceivedWord | np.ndarray) -> DecodeOutcome:
        r = rw.r if isinstance(rw, ReceivedWord) else np.asarray(rw, dtype=np.float64)
        return self.decode_batch(r[None, :]).outcome(0, self.list_size, self.distinct_patterns)


class MLDecoder:
    """Exhaustive correlation maximisation over all ``2^K`` codewords."""

    def __init__(self, G: BinaryMatrix, chunk_bytes: int = 1 << 26):
        if G.rows > MAX_ENUMERATION_K:
            raise InfeasibleDecoderError(f"ML decoding needs K <= {MAX_ENUMERATION_K}, got {G.rows}")
        self.G = G
        self.spec = DecoderSpec("ml")
        words = enumerate_codewords(G)
        self._codebook = unpack_bits(words, G.cols)
        self._signs = np.ascontiguousarray((1.0 - 2.0 * self._codebook).T)
        self._chunk = max(1, chunk_bytes // (8 * words.shape[0]))

    @property
    def list_size(self) -> int:
        return self._codebook.shape[0]

    def decode_batch(self, R) -> BatchOutcome:
        R = np.atleast_2d(np.asarray(R, dtype=np.float64))
        B = R.shape[0]
        best = np.empty(B, dtype=np.intp)
        for s in range(0, B, self._chunk):
            best[s : s + self._chunk] = np.argmax(R[s : s + self._chunk] @ self._signs, axis=1)
        C = self._codebook[best]
        L = self.list_size
        return BatchOutcome(C, correlation(R, C), np.full(B, L, np.int64), np.zeros(B, np.int64))

    def decode(self, rw) -> DecodeOutcome:
        r = rw.r if isinstance(rw, ReceivedWord) else np.asarray(rw, dtype=np.float64)
        L = self.list_size
        return self.decode_batch(r[None, :]).outcome(0, L, L)


class HardDecoder:
    """Hard decisions on the systematic positions, re-encoded."""

    def __init__(self, G: BinaryMatrix):
        if not G.is_systematic():
            raise ValueError("hard-decision baseline needs a systematic generator matrix")
        self.G = G
        self.spec = DecoderSpec("hard")
        self.list_size = 1

    def decode_batch(self, R) -> BatchOutcome:
        R = np.atleast_2d(np.asarray(R, dtype=np.float64))
        C = encode_many(hard_decision(R[:, : self.G.rows]), self.G)
        B = R.shape[0]
        return BatchOutcome(C, correlation(R, C), np.ones(B, np.int64), np.zeros(B, np.int64))

    def decode(self, rw) -> DecodeOutcome:
        r = rw.r if isinstance(rw, ReceivedWord) else np.asarray(rw, dtype=np.float64)
        return self.decode_batch(r[None, :]).outcome(0, 1, 1)


def make_decoder(G: BinaryMatrix, spec: DecoderSpec):
    if spec.family == "ml":
        return MLDecoder(G)
    if spec.family == "hard":
        return HardDecoder(G)
    return ListDecoder(G, spec)


def decoder_for(code: Code, text: str):
    return make_decoder(code.G, parse_decoder(text, code.k, code.dmin))


def decode(rw: ReceivedWord, G: BinaryMatrix, spec: DecoderSpec) -> DecodeOutcome:
    """Decode one received word with a fresh decoder instance."""
    return make_decoder(G, spec).decode(rw)


def decode_ml(rw: ReceivedWord, G: BinaryMatrix) -> DecodeOutcome:
    return MLDecoder(G).decode(rw)
