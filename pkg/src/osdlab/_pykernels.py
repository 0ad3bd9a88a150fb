"""Pure numpy implementations of the reprocessing kernels.

Same signatures and results as the compiled ``_ckernels`` module, used when
the extension is not built.

``rref_batch(G, orders)``
    For each row of ``orders`` (a column scan order of ``G``), run Gauss-Jordan
    elimination taking the first independent columns as pivots.  Returns the
    final column permutations (pivots, then passed-over columns, both in scan
    order), the parity block of each reduced matrix packed into uint64 words,
    and the ranks.

``reprocess_batch(parity, rt, ptr, idx, keep)``
    For each ordered reliability vector ``rt[b]`` with packed parity rows
    ``parity[b]``, search the test patterns given in CSR form (``ptr``,
    ``idx``) for the one minimising the discrepancy cost.  Patterns with
    ``keep == 0`` are not evaluated.  Returns the index of the winning pattern
    and the decided codeword in ordered coordinates.
"""

from __future__ import annotations

import numpy as np

from .gf2 import pack_bits, unpack_bits


def rref_batch(G, orders):
    G = np.asarray(G, dtype=np.uint8)
    orders = np.asarray(orders, dtype=np.intp)
    K, N = G.shape
    M = N - K
    wp = max((M + 63) // 64, 1)
    B = orders.shape[0]
    perms = np.empty((B, N), dtype=np.intp)
    parity = np.zeros((B, K, wp), dtype=np.uint64)
    ranks = np.empty(B, dtype=np.intp)
    for b in range(B):
        A = G[:, orders[b]].copy()
        pivots, skipped = [], []
        rank = 0
        for p in range(N):
            if rank == K:
                skipped.append(p)
                continue
            hits = np.flatnonzero(A[rank:, p])
            if hits.size == 0:
                skipped.append(p)
                continue
            r = rank + hits[0]
            if r != rank:
                A[[rank, r]] = A[[r, rank]]
            targets = np.flatnonzero(A[:, p])
            targets = targets[targets != rank]
            A[targets] ^= A[rank]
            pivots.append(p)
            rank += 1
        ranks[b] = rank
        final = pivots + skipped
        perms[b] = orders[b, final]
        if rank == K and M:
            parity[b, :, : (M + 63) // 64] = pack_bits(A[:, skipped[:M]])
    return perms, parity, ranks


def reprocess_batch(parity, rt, ptr, idx, keep):
    parity = np.asarray(parity, dtype=np.uint64)
    rt = np.asarray(rt, dtype=np.float64)
    ptr = np.asarray(ptr, dtype=np.intp)
    idx = np.asarray(idx, dtype=np.intp)
    keep = np.asarray(keep, dtype=bool)
    B, N = rt.shape
    K = parity.shape[1]
    M = N - K
    L = ptr.size - 1

    # padded support matrix; column value K points at an all-zero sentinel row
    lengths = np.diff(ptr)
    width = max(int(lengths.max(initial=0)), 1)
    pad = np.full((L, width), K, dtype=np.intp)
    rows_of = np.repeat(np.arange(L), lengths)
    cols_of = np.arange(idx.size) - np.repeat(ptr[:-1], lengths)
    pad[rows_of, cols_of] = idx
    active = np.flatnonzero(keep)
    pad = pad[active]

    best = np.full(B, -1, dtype=np.intp)
    cbits = np.empty((B, N), dtype=np.uint8)
    for b in range(B):
        par = np.vstack([parity[b], np.zeros((1, parity.shape[2]), dtype=np.uint64)])
        hard = (rt[b, :K] < 0).astype(np.uint8)
        c0 = np.bitwise_xor.reduce(par[:K][hard.astype(bool)], axis=0) if hard.any() else par[K]
        c0_bits = unpack_bits(c0, M).astype(np.float64) if M else np.zeros(0)
        r0 = rt[b, K:] * (1.0 - 2.0 * c0_bits)
        mag = np.append(np.abs(rt[b, :K]), 0.0)

        acc = np.bitwise_xor.reduce(par[pad], axis=1)
        cost = mag[pad].sum(axis=1)
        if M:
            cost = cost + unpack_bits(acc, M).astype(np.float64) @ r0
        j = int(np.argmin(cost)) if cost.size else -1

        cbits[b, :K] = hard
        if j >= 0:
            l = active[j]
            best[b] = l
            cbits[b, idx[ptr[l] : ptr[l + 1]]] ^= 1
            if M:
                cbits[b, K:] = unpack_bits(c0 ^ acc[j], M)
        elif M:
            cbits[b, K:] = unpack_bits(c0, M)
    return best, cbits
