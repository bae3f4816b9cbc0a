# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lane for the sampling kernels.

Mirrors ``_fallback`` operation-for-operation; see that module for the
output contract. Only the loops differ.
"""

import numpy as np

cimport numpy as cnp

IMPL = "ext"


def build_alias_arrays(weights):
    """Vose alias construction. Caller guarantees non-empty positive weights."""
    cdef cnp.float64_t[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i, s, l
    cdef double total = 0.0
    for i in range(n):
        total += w[i]
    cdef double scale = n / total

    scaled_arr = np.empty(n, dtype=np.float64)
    prob_arr = np.empty(n, dtype=np.float64)
    alias_arr = np.empty(n, dtype=np.int64)
    small_arr = np.empty(n, dtype=np.int64)
    large_arr = np.empty(n, dtype=np.int64)
    cdef cnp.float64_t[::1] scaled = scaled_arr
    cdef cnp.float64_t[::1] prob = prob_arr
    cdef cnp.int64_t[::1] alias = alias_arr
    cdef cnp.int64_t[::1] small = small_arr
    cdef cnp.int64_t[::1] large = large_arr
    cdef Py_ssize_t n_small = 0, n_large = 0

    for i in range(n):
        scaled[i] = w[i] * scale
    for i in range(n):
        if scaled[i] < 1.0:
            small[n_small] = i
            n_small += 1
        else:
            large[n_large] = i
            n_large += 1
    while n_small > 0 and n_large > 0:
        n_small -= 1
        s = small[n_small]
        n_large -= 1
        l = large[n_large]
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        if scaled[l] < 1.0:
            small[n_small] = l
            n_small += 1
        else:
            large[n_large] = l
            n_large += 1
    while n_large > 0:
        n_large -= 1
        i = large[n_large]
        prob[i] = 1.0
        alias[i] = i
    while n_small > 0:
        n_small -= 1
        i = small[n_small]
        prob[i] = 1.0
        alias[i] = i
    return prob_arr, alias_arr


def alias_draw(prob, alias, u):
    """Map 2k uniforms in [0,1) to k item indices (index pick, accept test)."""
    cdef cnp.float64_t[::1] p = np.ascontiguousarray(prob, dtype=np.float64)
    cdef cnp.int64_t[::1] a = np.ascontiguousarray(alias, dtype=np.int64)
    cdef cnp.float64_t[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t k = uu.shape[0] // 2
    out_arr = np.empty(k, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t i
    cdef cnp.int64_t j
    for i in range(k):
        j = <cnp.int64_t>(uu[2 * i] * n)
        if j > n - 1:
            j = n - 1
        if uu[2 * i + 1] < p[j]:
            out[i] = j
        else:
            out[i] = a[j]
    return out_arr


def membership(keys, sorted_keys):
    """Byte mask marking which keys occur in the sorted array."""
    cdef cnp.uint64_t[::1] k = np.ascontiguousarray(keys, dtype=np.uint64)
    cdef cnp.uint64_t[::1] hay = np.ascontiguousarray(sorted_keys, dtype=np.uint64)
    cdef Py_ssize_t nk = k.shape[0]
    cdef Py_ssize_t m = hay.shape[0]
    out_arr = np.zeros(nk, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out = out_arr
    cdef Py_ssize_t i, lo, hi, mid
    cdef cnp.uint64_t key
    if m == 0:
        return out_arr
    for i in range(nk):
        key = k[i]
        lo = 0
        hi = m
        while lo < hi:
            mid = (lo + hi) >> 1
            if hay[mid] < key:
                lo = mid + 1
            else:
                hi = mid
        if lo < m and hay[lo] == key:
            out[i] = 1
    return out_arr
