"""Backend selection and shared random-stream helpers.

At import time the compiled extension ``typlab._core`` is preferred; if
it is missing the numpy implementation in ``typlab._purecore`` is used.
Both expose the same three primitives (``uniforms``, ``alias_pick``,
``count_codes``) with bit-identical outputs.  The environment variable
``TYPLAB_BACKEND`` forces a choice: ``compiled`` or ``pure``.
"""

import math
import os

import numpy as np

from . import _purecore
from .errors import TyplabError

_MASK64 = (1 << 64) - 1
_GOLDEN_INT = 0x9E3779B97F4A7C15

# Lane constants: every sampling role inside one trial draws from its
# own key so streams never overlap.
LANE_SIDE = 0
LANE_COND = 1
LANE_JOINT = 2


def _load_backend():
    forced = os.environ.get("TYPLAB_BACKEND", "").strip().lower()
    if forced == "pure":
        return _purecore, "pure"
    try:
        from . import _core
    except ImportError:
        _core = None
    if forced == "compiled":
        if _core is None:
            raise TyplabError(
                "TYPLAB_BACKEND=compiled but the typlab._core extension "
                "is not built"
            )
        return _core, "compiled"
    if forced not in ("", "auto"):
        raise TyplabError(
            "TYPLAB_BACKEND must be 'compiled', 'pure', or 'auto', "
            "got %r" % forced
        )
    if _core is not None:
        return _core, "compiled"
    return _purecore, "pure"


_impl, BACKEND = _load_backend()

uniforms = _impl.uniforms
alias_pick = _impl.alias_pick
count_codes = _impl.count_codes


def backend_name():
    """Name of the active backend: ``compiled`` or ``pure``."""
    return BACKEND


def _finalize(z):
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_key(seed, stream_id, lane=0):
    """Derive the 64-bit key for one (seed, stream, lane) combination.

    Three finalizer rounds keep keys for nearby seeds, stream ids, and
    lanes statistically unrelated.
    """
    if seed < 0 or stream_id < 0 or lane < 0:
        raise ValueError("seed, stream_id, and lane must be nonnegative")
    k = _finalize((seed & _MASK64) + _GOLDEN_INT)
    k = _finalize(k ^ _finalize((stream_id & _MASK64) + 2 * _GOLDEN_INT))
    return _finalize(k + _finalize((lane & _MASK64) + 3 * _GOLDEN_INT))


def geometric_pick(inv_log1mp, u):
    """Map uniforms to geometric counts on {0, 1, 2, ...}.

    Inverse-CDF transform ``floor(log(u) / log(1 - p))`` with the
    reciprocal log precomputed.  This transform is shared by both
    backends on purpose: numpy's vectorized log can differ from the C
    library's in the last ulp, which could flip a floor boundary, so
    the compiled backend must not reimplement it.
    """
    return np.floor(np.log(u) * inv_log1mp).astype(np.int64)


def build_alias(probs):
    """Construct an alias table for a finite pmf.

    Returns ``(prob, alias)`` float64/int64 arrays of length K.  The
    split into small and large columns follows Vose's method; the
    construction is deterministic given the input order.
    """
    p = np.asarray(probs, dtype=np.float64)
    k = p.shape[0]
    if k == 0:
        raise ValueError("alias table needs at least one column")
    total = math.fsum(p.tolist())
    if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-9):
        raise ValueError("alias table input must sum to 1, got %r" % total)
    scaled = p * k
    prob = np.ones(k, dtype=np.float64)
    alias = np.arange(k, dtype=np.int64)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    scaled = scaled.tolist()
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    for i in large:
        prob[i] = 1.0
    for i in small:
        # only reachable through rounding; the column keeps itself
        prob[i] = 1.0
    return prob, alias
