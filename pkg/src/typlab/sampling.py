"""Seeded, reproducible sequence generation.

Every draw comes from a counter-based uniform stream keyed by
(seed, stream_id, lane), so trial outputs are identical across
platforms, worker counts, and scheduling orders.  Symbol i of a
sequence always consumes uniform i of its lane: outputs are prefix
stable in n.

Lanes separate sampling roles inside one trial: lane 0 draws the side
pair (or a single coordinate), lane 1 conditional or joint-pair draws,
lane 2 the conditional part of a factored pair.

Finite pmfs sample through alias tables built once per distribution;
geometric rows use the closed-form inverse CDF.  Power-law rows have
no exact O(1) sampler and are rejected rather than approximated.
"""

import weakref
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import UnsupportedSamplingError
from .model import (
    DiagJoint2,
    ExplicitJoint2,
    ExplicitPmf,
    FactoredJoint2,
    GeometricPmf,
    JointPmf2,
    Kernel,
    Pmf,
)

LANE_SIDE = backend.LANE_SIDE
LANE_COND = backend.LANE_COND
LANE_JOINT = backend.LANE_JOINT


@dataclass(frozen=True)
class RngStream:
    """Value-type handle for one trial's random streams."""

    seed: int
    stream_id: int

    def key(self, lane):
        return backend.derive_key(self.seed, self.stream_id, lane)

    def uniforms(self, lane, count, start=0):
        return backend.uniforms(self.key(lane), start, count)


_alias_cache = weakref.WeakKeyDictionary()


def _alias_tables(pmf):
    try:
        return _alias_cache[pmf]
    except KeyError:
        tables = backend.build_alias(pmf.probs)
        _alias_cache[pmf] = tables
        return tables


def _picker(pmf):
    """Map a pmf to a vectorized uniforms -> symbols transform."""
    if isinstance(pmf, ExplicitPmf):
        prob, alias = _alias_tables(pmf)
        support = pmf.support

        def pick(u):
            return support[backend.alias_pick(prob, alias, u)]

        return pick
    if isinstance(pmf, GeometricPmf):
        inv = pmf.inv_log1mp

        def pick(u):
            return backend.geometric_pick(inv, u)

        return pick
    raise UnsupportedSamplingError(
        "no exact sampler for %r distributions; only explicit tables "
        "and geometric rows can be drawn from" % (pmf.kind,)
    )


def sample_pmf(pmf, n, rng, lane=LANE_SIDE):
    """n i.i.d. draws from a single distribution."""
    if not isinstance(pmf, Pmf):
        raise TypeError("expected a Pmf")
    if n < 1:
        raise ValueError("n must be at least 1")
    return _picker(pmf)(rng.uniforms(lane, n))


class _PairAlias:
    """Alias sampler over the atoms of an explicit pair table."""

    def __init__(self, joint):
        self.prob, self.alias = backend.build_alias(joint.probs)
        self.first = joint.first
        self.second = joint.second

    def pick(self, u):
        idx = backend.alias_pick(self.prob, self.alias, u)
        return self.first[idx], self.second[idx]


def _pair_alias(joint):
    try:
        return _alias_cache[joint]
    except (KeyError, TypeError):
        sampler = _PairAlias(joint)
        try:
            _alias_cache[joint] = sampler
        except TypeError:
            pass
        return sampler


def _sample_pair(p2, n, rng, lane):
    if isinstance(p2, ExplicitJoint2):
        u = rng.uniforms(lane, n)
        return _pair_alias(p2).pick(u)
    if isinstance(p2, DiagJoint2):
        s = _picker(p2.base)(rng.uniforms(lane, n))
        return s, s.copy()
    if isinstance(p2, FactoredJoint2):
        second = _picker(p2.second_pmf)(rng.uniforms(lane, n))
        first = sample_conditional(p2.kernel, second, rng, lane=lane + 1)
        return first, second
    raise TypeError("expected a JointPmf2, got %s" % type(p2).__name__)


def sample_iid_pair(p_yz, n, rng):
    """n i.i.d. pair draws (y, z) from a pair law, on lane 0."""
    if not isinstance(p_yz, JointPmf2):
        raise TypeError("expected a JointPmf2")
    if n < 1:
        raise ValueError("n must be at least 1")
    return _sample_pair(p_yz, n, rng, LANE_SIDE)


def sample_joint_pair(p_xy, n, rng):
    """n i.i.d. pair draws (x, y), on lane 1 (lane 2 when factored).

    Uses different lanes than ``sample_iid_pair`` so one trial can draw
    a side sequence and an independent joint pair from one stream.
    """
    if not isinstance(p_xy, JointPmf2):
        raise TypeError("expected a JointPmf2")
    if n < 1:
        raise ValueError("n must be at least 1")
    return _sample_pair(p_xy, n, rng, LANE_COND)


def sample_conditional(kernel, y, rng, lane=LANE_COND):
    """Independent draws X_i ~ p(. | y_i) along a given y sequence.

    Symbol i consumes uniform i of the lane regardless of how the rows
    group, so the output is independent of the grouping order.
    """
    if not isinstance(kernel, Kernel):
        raise TypeError("expected a Kernel")
    y = np.asarray(y, dtype=np.int64)
    if y.size < 1:
        raise ValueError("y must hold at least one symbol")
    u = rng.uniforms(lane, y.size)
    x = np.empty(y.size, dtype=np.int64)
    for yv in np.unique(y):
        sel = y == yv
        x[sel] = _picker(kernel.row(int(yv)))(u[sel])
    return x
