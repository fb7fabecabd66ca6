# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: packed Hamming scans, tie resolution, LGAP aggregates.

Every function mirrors one in ``_fallback.py`` and must return identical
values, including floating point results.
"""
import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def hamming_to_query(const uint64_t[:, ::1] words, const uint64_t[::1] q):
    cdef Py_ssize_t n = words.shape[0], nw = words.shape[1], i, j
    cdef int acc
    out = np.empty(n, dtype=np.int32)
    cdef int32_t[::1] o = out
    with nogil:
        for i in range(n):
            acc = 0
            for j in range(nw):
                acc += __builtin_popcountll(words[i, j] ^ q[j])
            o[i] = acc
    return out


def hamming_matrix(const uint64_t[:, ::1] a, const uint64_t[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], nw = a.shape[1], i, j, w
    cdef int acc
    out = np.empty((n, m), dtype=np.int32)
    cdef int32_t[:, ::1] o = out
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0
                for w in range(nw):
                    acc += __builtin_popcountll(a[i, w] ^ b[j, w])
                o[i, j] = acc
    return out


def resolve_extreme(const int32_t[::1] dist, const uint8_t[::1] rel, int width, bint best):
    """Relevance flags in rank order with ties put relevant-first (best) or last.

    Counting sort over distances 0..width.
    """
    cdef Py_ssize_t n = dist.shape[0], i
    cdef int d
    cdef int64_t pos = 0, nr, ni, t
    n_rel = np.zeros(width + 1, dtype=np.int64)
    n_all = np.zeros(width + 1, dtype=np.int64)
    cdef int64_t[::1] cr = n_rel, ca = n_all
    out = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] o = out
    with nogil:
        for i in range(n):
            ca[dist[i]] += 1
            if rel[i]:
                cr[dist[i]] += 1
        for d in range(width + 1):
            nr = cr[d]
            ni = ca[d] - nr
            if best:
                for t in range(nr):
                    o[pos + t] = 1
            else:
                for t in range(nr):
                    o[pos + ni + t] = 1
            pos += ca[d]
    return out


def ap_sorted(const uint8_t[::1] rel, Py_ssize_t K):
    """AP over the first K ranked flags; left-to-right summation."""
    cdef Py_ssize_t n = rel.shape[0], i
    cdef Py_ssize_t top = K if K < n else n
    cdef int64_t hits = 0
    cdef double s = 0.0
    with nogil:
        for i in range(top):
            if rel[i]:
                hits += 1
                s += <double>hits / <double>(i + 1)
    if hits == 0:
        return 0.0
    return s / <double>hits


def lgap_aggregates(const int32_t[::1] dist, const int64_t[::1] code_ids,
                    const uint8_t[::1] rel, Py_ssize_t n_codes, int r):
    """Per radius j in 0..r: retrieved count, relevant count, max per-code count."""
    cdef Py_ssize_t n = dist.shape[0], i
    cdef int j, d
    retrieved = np.zeros(r + 1, dtype=np.int64)
    relevant = np.zeros(r + 1, dtype=np.int64)
    maxcount = np.zeros(r + 1, dtype=np.int64)
    counts = np.zeros(n_codes, dtype=np.int64)
    cdef int64_t[::1] ret = retrieved, rv = relevant, mx = maxcount, c = counts
    with nogil:
        for i in range(n):
            d = dist[i]
            if d <= r:
                ret[d] += 1
                if rel[i]:
                    rv[d] += 1
                c[code_ids[i]] += 1
        # all entries sharing a code share its distance
        for i in range(n):
            d = dist[i]
            if d <= r and c[code_ids[i]] > mx[d]:
                mx[d] = c[code_ids[i]]
        for j in range(1, r + 1):
            ret[j] += ret[j - 1]
            rv[j] += rv[j - 1]
            if mx[j - 1] > mx[j]:
                mx[j] = mx[j - 1]
    return retrieved, relevant, maxcount
