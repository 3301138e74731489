# cython: language_level=3
"""Compiled twins of the hot kernels in ``_purecore``.

Every function here must produce bit-identical output to its pure
NumPy counterpart: the integer mixing is exact unsigned 64-bit
arithmetic either way, and the float steps are single IEEE-754
operations with no reassociation.  Keep the two files in sync.
"""

import numpy as np

from libc.stdint cimport int64_t, uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9
cdef uint64_t MIX2 = 0x94D049BB133111EB

# exact powers of two: 2**-52 and 2**-53
cdef double TO_UNIT = 1.0 / 4503599627370496.0
cdef double HALF_ULP = 1.0 / 9007199254740992.0


def uniforms(key, start, count):
    """Counter-based uniform doubles in the open interval (0, 1).

    Same contract as the pure version: element ``i`` depends only on
    ``(key, start + i)``.
    """
    cdef uint64_t k = key
    cdef uint64_t s = start
    cdef Py_ssize_t n = count
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef uint64_t z
    for i in range(n):
        z = k + (s + <uint64_t> (i + 1)) * GOLDEN
        z = (z ^ (z >> 30)) * MIX1
        z = (z ^ (z >> 27)) * MIX2
        z = z ^ (z >> 31)
        out[i] = <double> (z >> 12) * TO_UNIT + HALF_ULP
    return out_arr


def alias_pick(prob, alias, u):
    """Map uniforms to categorical indices through an alias table.

    One-uniform variant: ``v = u * K`` supplies both the column and the
    coin flip, exactly as in the pure version.
    """
    cdef double[::1] p = prob
    cdef int64_t[::1] a = alias
    cdef double[::1] uu = u
    cdef Py_ssize_t k = p.shape[0]
    cdef Py_ssize_t n = uu.shape[0]
    out_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double v, f
    cdef int64_t j
    cdef double kd = <double> k
    for i in range(n):
        v = uu[i] * kd
        j = <int64_t> v
        f = v - <double> j
        if f < p[j]:
            out[i] = j
        else:
            out[i] = a[j]
    return out_arr


def count_codes(codes):
    """Count occurrences of each distinct code.

    Returns ``(unique_sorted, counts)`` as int64 arrays.
    """
    srt = np.sort(np.asarray(codes, dtype=np.int64))
    cdef int64_t[::1] s = srt
    cdef Py_ssize_t n = s.shape[0]
    if n == 0:
        return (
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
        )
    uniq_arr = np.empty(n, dtype=np.int64)
    counts_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] uniq = uniq_arr
    cdef int64_t[::1] counts = counts_arr
    cdef Py_ssize_t i, m = 0
    cdef int64_t cur = s[0]
    cdef int64_t c = 1
    for i in range(1, n):
        if s[i] == cur:
            c += 1
        else:
            uniq[m] = cur
            counts[m] = c
            m += 1
            cur = s[i]
            c = 1
    uniq[m] = cur
    counts[m] = c
    m += 1
    return uniq_arr[:m].copy(), counts_arr[:m].copy()
