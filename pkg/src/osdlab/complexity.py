"""Analytical BOPS/FLOPS cost model for the list decoders.

Costs are charged from code and decoder parameters, not measured.  Sorting
uses the real ``n log2 n`` (no ceiling), so ``128 log2 128 = 896``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .decoders import DecoderSpec

COST_COLUMNS = ("decoder", "N", "K", "flops", "bops", "list_size")
STEPS = ("reliability", "sorting", "elimination", "permutation", "reprocessing")


@dataclass(frozen=True)
class CostReport:
    """Totals plus a per-step ``{step: (flops, bops)}`` breakdown."""

    flops: float
    bops: int
    list_size: int = 0
    breakdown: dict = field(default_factory=dict)

    def __post_init__(self):
        f = sum(v[0] for v in self.breakdown.values())
        b = sum(v[1] for v in self.breakdown.values())
        if self.breakdown and (not math.isclose(f, self.flops, rel_tol=0, abs_tol=1e-9) or b != self.bops):
            raise ValueError("totals disagree with breakdown")

    @classmethod
    def from_breakdown(cls, breakdown: dict, list_size: int = 0) -> "CostReport":
        full = {s: breakdown.get(s, (0, 0)) for s in STEPS}
        return cls(
            flops=sum(v[0] for v in full.values()),
            bops=sum(v[1] for v in full.values()),
            list_size=list_size,
            breakdown=full,
        )


def _nlogn(n: int) -> float:
    v = n * math.log2(n) if n > 1 else 0.0
    return int(v) if float(v).is_integer() else v


def cost_preprocessing(N: int, K: int, family: str, q: int = 1) -> CostReport:
    """Per-codeword preprocessing cost.

    ``osd``/``seg-osd``: reliabilities (2N FLOPS), full sort (N log2 N FLOPS),
    Gauss-Jordan elimination (N min(K, N-K)^2 BOPS) and the second
    permutation (K + K(N-K) BOPS).  ``posd`` with ``q >= 2`` sorts only the
    K systematic bits (K log2 K FLOPS); ``isd`` and single-segment ``posd``
    need no ordering.  ``hard`` and ``ml`` are charged the reliabilities only.
    """
    if not 0 < K <= N:
        raise ValueError(f"invalid dimensions N={N}, K={K}")
    steps = {"reliability": (2 * N, 0)}
    if family in ("osd", "seg-osd"):
        steps["sorting"] = (_nlogn(N), 0)
        steps["elimination"] = (0, N * min(K, N - K) ** 2)
        steps["permutation"] = (0, K + K * (N - K))
    elif family == "posd":
        if q >= 2:
            steps["sorting"] = (_nlogn(K), 0)
    elif family not in ("isd", "hard", "ml"):
        raise ValueError(f"unknown decoder family {family!r}")
    return CostReport.from_breakdown(steps)


def cost_list(spec: DecoderSpec) -> int:
    """Number of test patterns: sum over segments of sum_{l <= I_q} C(K_q, l)."""
    if spec.family == "ml":
        raise ValueError("ml spec carries no dimension; use cost_report")
    if spec.family == "hard":
        return 1
    return sum(sum(math.comb(kq, l) for l in range(iq + 1)) for kq, iq in spec.segments)


def cost_report(N: int, K: int, spec: DecoderSpec) -> CostReport:
    """Preprocessing cost plus list size for one decoder on an ``(N, K)`` code."""
    if spec.family in ("osd", "seg-osd", "posd", "isd") and spec.k != K:
        raise ValueError(f"decoder is for K={spec.k}, code has K={K}")
    base = cost_preprocessing(N, K, spec.family, spec.q)
    size = 2**K if spec.family == "ml" else cost_list(spec)
    return CostReport(base.flops, base.bops, size, base.breakdown)


def cost_rows(N: int, K: int, specs) -> list[dict]:
    rows = []
    for spec in specs:
        rep = cost_report(N, K, spec)
        rows.append(dict(zip(COST_COLUMNS, (spec.label, N, K, rep.flops, rep.bops, rep.list_size))))
    return rows


def cost_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COST_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
