"""Packing of symbol tuples into int64 codes for sorting and counting.

Symbols are nonnegative integers below 2**21, so a triple packs into
63 bits and a pair into 42.  Packed codes sort in lexicographic
(x, y, z) order.
"""

import numpy as np

SYMBOL_BITS = 21
MAX_SYMBOL = (1 << SYMBOL_BITS) - 1


def check_symbols(arr, name):
    a = np.asarray(arr)
    if a.size == 0:
        return np.asarray(arr, dtype=np.int64)
    if not np.issubdtype(a.dtype, np.integer):
        raise ValueError("%s must contain integers" % name)
    if a.min() < 0 or a.max() > MAX_SYMBOL:
        raise ValueError(
            "%s symbols must lie in [0, %d]" % (name, MAX_SYMBOL)
        )
    return a.astype(np.int64)


def encode2(a, b):
    return (np.asarray(a, dtype=np.int64) << SYMBOL_BITS) | np.asarray(
        b, dtype=np.int64
    )


def encode3(x, y, z):
    return (
        (np.asarray(x, dtype=np.int64) << (2 * SYMBOL_BITS))
        | (np.asarray(y, dtype=np.int64) << SYMBOL_BITS)
        | np.asarray(z, dtype=np.int64)
    )


def decode2(code):
    c = np.asarray(code, dtype=np.int64)
    return c >> SYMBOL_BITS, c & MAX_SYMBOL


def decode3(code):
    c = np.asarray(code, dtype=np.int64)
    return (
        c >> (2 * SYMBOL_BITS),
        (c >> SYMBOL_BITS) & MAX_SYMBOL,
        c & MAX_SYMBOL,
    )
