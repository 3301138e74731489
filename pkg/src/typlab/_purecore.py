"""Pure-Python (numpy) implementations of the hot kernels.

The compiled extension in ``_core.pyx`` implements the same three
functions with identical integer and IEEE-754 arithmetic, so both
backends produce bit-identical outputs.  Keep the two files in sync.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)

_TO_UNIT = 2.0 ** -52
_HALF_ULP = 2.0 ** -53


def uniforms(key, start, count):
    """Counter-based uniform doubles in the open interval (0, 1).

    Output ``i`` depends only on ``(key, start + i)``: element ``j`` of a
    stream equals element ``j`` of any longer stream with the same key
    (prefix property).  The generator is the splitmix64 finalizer applied
    to ``key + (index + 1) * golden`` modulo 2**64.
    """
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + idx * _GOLDEN
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
        z = z ^ (z >> _S31)
    return (z >> _S12).astype(np.float64) * _TO_UNIT + _HALF_ULP


def alias_pick(prob, alias, u):
    """Map uniforms to categorical indices through an alias table.

    Uses the one-uniform variant: ``v = u * K`` supplies both the column
    ``floor(v)`` and the coin flip ``v - floor(v)``.
    """
    k = prob.shape[0]
    v = u * np.float64(k)
    j = v.astype(np.int64)
    f = v - j.astype(np.float64)
    return np.where(f < prob[j], j, alias[j])


def count_codes(codes):
    """Count occurrences of each distinct code.

    Returns ``(unique_sorted, counts)`` as int64 arrays.
    """
    uniq, counts = np.unique(codes, return_counts=True)
    return uniq.astype(np.int64), counts.astype(np.int64)
