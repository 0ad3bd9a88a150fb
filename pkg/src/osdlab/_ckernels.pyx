# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled reprocessing kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np

from libc.math cimport fabs, INFINITY
from libc.stdint cimport uint8_t, uint64_t
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy, memset


cdef extern from *:
    int __builtin_ctz(unsigned int) nogil


def rref_batch(const uint8_t[:, ::1] G, const Py_ssize_t[:, ::1] orders):
    cdef Py_ssize_t K = G.shape[0], N = G.shape[1], B = orders.shape[0]
    cdef Py_ssize_t W = (N + 63) // 64
    cdef Py_ssize_t M = N - K
    cdef Py_ssize_t Wp = max((M + 63) // 64, 1)
    perms_arr = np.empty((B, N), dtype=np.intp)
    parity_arr = np.zeros((B, K, Wp), dtype=np.uint64)
    ranks_arr = np.empty(B, dtype=np.intp)
    cdef Py_ssize_t[:, ::1] perms = perms_arr
    cdef uint64_t[:, :, ::1] parity = parity_arr
    cdef Py_ssize_t[::1] ranks = ranks_arr

    cdef uint64_t* rows = <uint64_t*>malloc(max(K * W, 1) * sizeof(uint64_t))
    cdef uint64_t* tmp = <uint64_t*>malloc(W * sizeof(uint64_t))
    cdef Py_ssize_t* piv = <Py_ssize_t*>malloc(N * sizeof(Py_ssize_t))
    cdef Py_ssize_t* non = <Py_ssize_t*>malloc(N * sizeof(Py_ssize_t))
    if rows == NULL or tmp == NULL or piv == NULL or non == NULL:
        free(rows); free(tmp); free(piv); free(non)
        raise MemoryError()

    cdef Py_ssize_t b, i, j, p, r, w, wi, rank, npiv, nnon
    cdef uint64_t bit
    try:
        with nogil:
            for b in range(B):
                memset(rows, 0, K * W * sizeof(uint64_t))
                for i in range(K):
                    for p in range(N):
                        if G[i, orders[b, p]]:
                            rows[i * W + (p >> 6)] |= (<uint64_t>1) << (p & 63)
                rank = 0
                npiv = 0
                nnon = 0
                for p in range(N):
                    if rank == K:
                        non[nnon] = p
                        nnon += 1
                        continue
                    wi = p >> 6
                    bit = (<uint64_t>1) << (p & 63)
                    r = rank
                    while r < K and not (rows[r * W + wi] & bit):
                        r += 1
                    if r == K:
                        non[nnon] = p
                        nnon += 1
                        continue
                    if r != rank:
                        memcpy(tmp, rows + r * W, W * sizeof(uint64_t))
                        memcpy(rows + r * W, rows + rank * W, W * sizeof(uint64_t))
                        memcpy(rows + rank * W, tmp, W * sizeof(uint64_t))
                    for i in range(K):
                        if i != rank and (rows[i * W + wi] & bit):
                            for w in range(W):
                                rows[i * W + w] ^= rows[rank * W + w]
                    piv[npiv] = p
                    npiv += 1
                    rank += 1
                ranks[b] = rank
                for j in range(npiv):
                    perms[b, j] = orders[b, piv[j]]
                for j in range(nnon):
                    perms[b, npiv + j] = orders[b, non[j]]
                if rank == K:
                    for i in range(K):
                        for j in range(M):
                            p = non[j]
                            if (rows[i * W + (p >> 6)] >> (p & 63)) & 1:
                                parity[b, i, j >> 6] |= (<uint64_t>1) << (j & 63)
    finally:
        free(rows); free(tmp); free(piv); free(non)
    return perms_arr, parity_arr, ranks_arr


def reprocess_batch(const uint64_t[:, :, ::1] parity, const double[:, ::1] rt,
                    const Py_ssize_t[::1] ptr, const Py_ssize_t[::1] idx,
                    const uint8_t[::1] keep):
    cdef Py_ssize_t B = rt.shape[0], N = rt.shape[1]
    cdef Py_ssize_t K = parity.shape[1], Wp = parity.shape[2]
    cdef Py_ssize_t M = N - K
    cdef Py_ssize_t nb = (M + 7) // 8
    cdef Py_ssize_t L = ptr.shape[0] - 1
    best_arr = np.full(B, -1, dtype=np.intp)
    cbits_arr = np.empty((B, N), dtype=np.uint8)
    cdef Py_ssize_t[::1] best = best_arr
    cdef uint8_t[:, ::1] cbits = cbits_arr

    cdef double* tables = <double*>malloc(max(nb, 1) * 256 * sizeof(double))
    cdef double* r0 = <double*>malloc(max(nb, 1) * 8 * sizeof(double))
    cdef uint64_t* c0 = <uint64_t*>malloc(Wp * sizeof(uint64_t))
    cdef uint64_t* acc = <uint64_t*>malloc(Wp * sizeof(uint64_t))
    cdef uint64_t* bestacc = <uint64_t*>malloc(Wp * sizeof(uint64_t))
    if tables == NULL or r0 == NULL or c0 == NULL or acc == NULL or bestacc == NULL:
        free(tables); free(r0); free(c0); free(acc); free(bestacc)
        raise MemoryError()

    cdef Py_ssize_t b, i, j, l, q, t, w, bi
    cdef unsigned int v
    cdef double cost, bestcost
    cdef double* tab
    cdef uint64_t byte
    try:
        with nogil:
            for b in range(B):
                memset(c0, 0, Wp * sizeof(uint64_t))
                for i in range(K):
                    if rt[b, i] < 0:
                        for w in range(Wp):
                            c0[w] ^= parity[b, i, w]
                for j in range(nb * 8):
                    if j >= M:
                        r0[j] = 0.0
                    elif (c0[j >> 6] >> (j & 63)) & 1:
                        r0[j] = -rt[b, K + j]
                    else:
                        r0[j] = rt[b, K + j]
                for t in range(nb):
                    tab = tables + 256 * t
                    tab[0] = 0.0
                    for v in range(1, 256):
                        tab[v] = tab[v & (v - 1)] + r0[8 * t + __builtin_ctz(v)]

                bestcost = INFINITY
                bi = -1
                memset(bestacc, 0, Wp * sizeof(uint64_t))
                for l in range(L):
                    if not keep[l]:
                        continue
                    cost = 0.0
                    memset(acc, 0, Wp * sizeof(uint64_t))
                    for q in range(ptr[l], ptr[l + 1]):
                        i = idx[q]
                        cost += fabs(rt[b, i])
                        for w in range(Wp):
                            acc[w] ^= parity[b, i, w]
                    for t in range(nb):
                        byte = (acc[t >> 3] >> ((t & 7) * 8)) & 0xFF
                        cost += tables[256 * t + byte]
                    if cost < bestcost:
                        bestcost = cost
                        bi = l
                        memcpy(bestacc, acc, Wp * sizeof(uint64_t))
                best[b] = bi
                for i in range(K):
                    cbits[b, i] = 1 if rt[b, i] < 0 else 0
                if bi >= 0:
                    for q in range(ptr[bi], ptr[bi + 1]):
                        cbits[b, idx[q]] ^= 1
                for j in range(M):
                    cbits[b, K + j] = ((c0[j >> 6] ^ bestacc[j >> 6]) >> (j & 63)) & 1
    finally:
        free(tables); free(r0); free(c0); free(acc); free(bestacc)
    return best_arr, cbits_arr
