"""Property suite shared by the unit tests and the acceptance gate.

Each check returns a list of violation descriptions; empty means it held.
"""

from __future__ import annotations

import numpy as np

from osdlab.channel import ChannelConfig, modulate, transmit_batch
from osdlab.codes import hamming_7_4, load_code
from osdlab.decoders import make_decoder, parse_decoder
from osdlab.gf2 import encode_many
from osdlab.sim import ExperimentConfig, run

SEED = 424242


def noisy_words(code, channel, snr_db, count, seed=SEED):
    rng = np.random.default_rng(seed)
    U = rng.integers(0, 2, size=(count, code.k), dtype=np.uint8)
    C = encode_many(U, code.G)
    _, _, r = transmit_batch(modulate(C), ChannelConfig(channel, snr_db, code.rate), rng)
    return C, r


def closure_violations(count=1000):
    out = []
    cases = [
        ("hamming", ["osd:2", "osd:1,1@2", "posd:1,1@2", "isd:1", "ml", "hard"]),
        ("bch-31-16", ["osd:2", "osd:1,3@6", "posd:1,3@6", "isd:2", "posd:2", "hard"]),
        ("bch-63-45", ["osd:1", "posd:1,2@13", "isd:2"]),
        ("ebch-64-57", ["osd:2", "posd:2,3@20+skip", "isd:1"]),
    ]
    for name, decs in cases:
        code = hamming_7_4() if name == "hamming" else load_code(name)
        for channel in ("awgn", "rayleigh-fast", "rayleigh-block"):
            _, r = noisy_words(code, channel, 1.0, count)
            for text in decs:
                C = make_decoder(code.G, parse_decoder(text, code.k, code.dmin)).decode_batch(r).codewords
                bad = np.any(encode_many(C[:, : code.k], code.G) != C, axis=1)
                if bad.any():
                    out.append(f"{name} {channel} {text}: {int(bad.sum())} non-codewords")
    return out


INCLUSIONS = [
    ("hard", "isd:2"),
    ("isd:2", "isd:3"),
    ("osd:1", "osd:2"),
    ("osd:2", "osd:3"),
    ("osd:1,3@6", "osd:3"),
    ("osd:1,2@6", "osd:1,3@6"),
    ("posd:1,3@6", "posd:2,3@6"),
    ("posd:1,3@6", "posd:3"),
    ("isd:3", "ml"),
    ("osd:3", "ml"),
    ("posd:2,3@6", "ml"),
]


def inclusion_violations(count=1000):
    """A decoder whose list contains another's (same ordering) never ends with a smaller metric."""
    out = []
    code = load_code("bch-31-16")
    for channel, snr in (("awgn", 2.0), ("rayleigh-fast", 6.0)):
        _, r = noisy_words(code, channel, snr, count)
        metric = {}
        for text in {t for pair in INCLUSIONS for t in pair}:
            metric[text] = make_decoder(code.G, parse_decoder(text, code.k, code.dmin)).decode_batch(r).metrics
        for small, large in INCLUSIONS:
            bad = metric[large] < metric[small] - 1e-9
            if bad.any():
                out.append(f"{channel}: {large} below {small} on {int(bad.sum())} words")
    return out


def ordering_violations(count=2000):
    """ISD and single-segment POSD decide identically; ordering does not matter."""
    out = []
    code = load_code("bch-31-16")
    for channel in ("awgn", "rayleigh-fast"):
        _, r = noisy_words(code, channel, 3.0, count)
        for i in (1, 2, 3):
            a = make_decoder(code.G, parse_decoder(f"isd:{i}", code.k)).decode_batch(r).codewords
            b = make_decoder(code.G, parse_decoder(f"posd:{i}", code.k)).decode_batch(r).codewords
            diff = np.any(a != b, axis=1)
            if diff.any():
                out.append(f"{channel} order {i}: {int(diff.sum())} differing decisions")
    return out


def _ordered_errors(channel, snr_db, n, rate, count, seed):
    rng = np.random.default_rng(seed)
    _, _, r = transmit_batch(np.ones((count, n)), ChannelConfig(channel, snr_db, rate), rng)
    r = np.take_along_axis(r, np.argsort(-np.abs(r), axis=1, kind="stable"), axis=1)
    return (r < 0).astype(np.float64)


def ordered_error_violations(count=200_000, z=4.0):
    """Ranked single and pairwise error rates are non-decreasing in rank, within ``z`` standard errors.

    Also checks that joint error frequencies of nested position sets never increase.
    """
    out = []
    n = 31
    for channel, snr in (("awgn", 0.0), ("rayleigh-fast", 4.0)):
        E = _ordered_errors(channel, snr, n, 16 / 31, count, SEED)
        p = E.mean(axis=0)
        se = np.sqrt(p * (1 - p) / count)
        for i in range(n):
            for j in range(i + 1, n):
                if p[i] - p[j] > z * np.hypot(se[i], se[j]):
                    out.append(f"{channel}: P({i + 1})={p[i]:.4g} > P({j + 1})={p[j]:.4g}")
        J = (E.T @ E) / count
        sj = np.sqrt(J * (1 - J) / count)
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    if J[i, j] - J[i, k] > z * np.hypot(sj[i, j], sj[i, k]):
                        out.append(f"{channel}: P({i + 1},{j + 1}) > P({i + 1},{k + 1})")
        rng = np.random.default_rng(SEED)
        for _ in range(200):
            size = rng.integers(2, 8)
            big = rng.choice(n, size=size, replace=False)
            sub = big[: rng.integers(1, size)]
            p_big = np.all(E[:, big] > 0, axis=1).mean()
            p_sub = np.all(E[:, sub] > 0, axis=1).mean()
            if p_big > p_sub:
                out.append(f"{channel}: P({sorted(big + 1)}) > P({sorted(sub + 1)})")
    return out


def determinism_violations():
    cfg = ExperimentConfig(
        code="bch-31-16",
        channel="awgn",
        snr_db=(2.0, 3.0, 4.0),
        decoders=(("isd2", "isd:2"), ("posd13", "posd:1,3@6"), ("osd2", "osd:2")),
        seed=7,
        max_codewords=5000,
        min_bit_errors=150,
        block_size=400,
        checksum=True,
    )
    one = [r.key() for r in run(cfg)]
    four = [r.key() for r in run(cfg.with_overrides(workers=4))]
    again = [r.key() for r in run(cfg)]
    out = []
    if one != four:
        out.append("workers=1 and workers=4 tables differ")
    if one != again:
        out.append("repeated run differs")
    return out


def run_property_suite():
    return {
        "closure": closure_violations(),
        "list_inclusion": inclusion_violations(),
        "ordering_irrelevance": ordering_violations(),
        "ordered_error_rates": ordered_error_violations(),
        "determinism": determinism_violations(),
    }
