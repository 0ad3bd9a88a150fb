"""Compare the compiled and numpy kernels on the elimination and reprocessing hot paths.

Usage::

    python3 benchmarks/bench_kernels.py [--words 2000] [--repeat 3]

Prints one line per (code, decoder, kernel, backend) with the best wall time
and the throughput in received words per second.  Both backends are checked
to return identical decisions before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from osdlab import kernels
from osdlab.channel import ChannelConfig, modulate, transmit_batch
from osdlab.codes import load_code
from osdlab.decoders import decoder_for
from osdlab.gf2 import encode_many

CASES = [
    ("bch-31-16", "osd:2", 2.0),
    ("bch-31-16", "posd:1,3@6", 2.0),
    ("bch-63-45", "isd:2", 3.0),
    ("ebch-128-64", "osd:1", 2.0),
]


def received(code, snr, words, seed=1):
    rng = np.random.default_rng(seed)
    C = encode_many(rng.integers(0, 2, size=(words, code.k), dtype=np.uint8), code.G)
    _, _, r = transmit_batch(modulate(C), ChannelConfig("awgn", snr, code.rate), rng)
    return r


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_case(name, text, snr, words, repeat, backends):
    code = load_code(name)
    r = received(code, snr, words)
    dec = decoder_for(code, text)
    perms, parity = dec._prepare(r)
    rt = np.ascontiguousarray(np.take_along_axis(r, perms, axis=1))
    orders = np.ascontiguousarray(np.argsort(-np.abs(r), axis=1, kind="stable"), dtype=np.intp)
    dense = np.ascontiguousarray(code.G.dense)
    plist = dec.plist

    decisions = {}
    for b in backends:
        k = kernels.get_backend(b)
        decisions[b] = k.reprocess_batch(parity, rt, plist.ptr, plist.idx, dec.keep)[1]
    ref = decisions[backends[0]]
    assert all(np.array_equal(ref, d) for d in decisions.values()), "backends disagree"

    out = []
    for b in backends:
        k = kernels.get_backend(b)
        t_rp = best_of(lambda: k.reprocess_batch(parity, rt, plist.ptr, plist.idx, dec.keep), repeat)
        out.append((name, text, "reprocess", b, t_rp, words / t_rp))
        if dec.spec.family in ("osd", "seg-osd"):
            t_el = best_of(lambda: k.rref_batch(dense, orders), repeat)
            out.append((name, text, "rref", b, t_el, words / t_el))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--words", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; timing the numpy fallback only")
    print(f"{'code':<12} {'decoder':<12} {'kernel':<10} {'backend':<8} {'seconds':>9} {'words/s':>10}")
    rows = []
    for case in CASES:
        rows += bench_case(*case, args.words, args.repeat, backends)
    for name, text, kern, b, t, rate in rows:
        print(f"{name:<12} {text:<12} {kern:<10} {b:<8} {t:9.4f} {rate:10.0f}")
    if len(backends) > 1:
        print()
        for name, text, kern, b, t, _rate in rows:
            if b == "cython":
                py = next(x for x in rows if x[:3] == (name, text, kern) and x[3] == "python")[4]
                print(f"speedup {name} {text} {kern}: {py / t:.1f}x")


if __name__ == "__main__":
    main()
