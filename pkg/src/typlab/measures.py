"""Information measures in bits: entropy, divergence, variational
distance, their conditional row-wise forms, and the Pinsker gap.

Conventions: all logarithms are base 2; 0 log 0 = 0; a divergence is
+inf whenever the first argument puts mass where the second has none.
Sums over atoms use compensated summation so results do not depend on
atom order.

The first argument of a divergence-style measure must have finite
support (a table or an empirical type); the second argument may be any
model object exposing exact ``log2_mass`` / ``mass_vec`` functions,
including the infinite-support families.
"""

import math

import numpy as np

from ._codes import encode2, encode3
from .model import (
    DiagJoint2,
    ExplicitJoint2,
    ExplicitPmf,
    FactoredJoint2,
    JointPmf2,
    JointPmf3,
    MarkovTriple,
    PairModel,
    Pmf,
    SingleModel,
    _entropy_bits,
)

_LN2 = math.log(2.0)


def _atoms(q):
    """Coordinate arrays and probabilities of a finite-support law."""
    if hasattr(q, "coords") and hasattr(q, "probs"):
        return tuple(q.coords), np.asarray(q.probs, dtype=np.float64)
    if isinstance(q, ExplicitPmf):
        return (q.support,), q.probs
    if isinstance(q, ExplicitJoint2):
        return (q.first, q.second), q.probs
    if isinstance(q, Pmf):
        t = q.tabulate()
        if t.residual > 1e-9:
            raise ValueError(
                "truncation leaves residual %g; too coarse to treat as "
                "the finite-support argument" % t.residual
            )
        return (t.support,), t.probs
    if isinstance(q, (DiagJoint2, FactoredJoint2)):
        a, b, p, residual = q.tabulate()
        if residual > 1e-9:
            raise ValueError(
                "pair law truncation leaves residual %g; too coarse to "
                "treat as the finite-support argument" % residual
            )
        return (a, b), p
    if isinstance(q, JointPmf3):
        return (q.xs, q.ys, q.zs), q.probs
    raise TypeError(
        "expected a finite-support table or empirical type, got %s"
        % type(q).__name__
    )


def _log2_fn(p, arity):
    if callable(p) and not isinstance(p, type):
        return p
    if isinstance(p, (Pmf, JointPmf2, JointPmf3, MarkovTriple)):
        if isinstance(p, Pmf) and arity != 1:
            raise TypeError("single-coordinate law given %d coords" % arity)
        if isinstance(p, JointPmf2) and arity != 2:
            raise TypeError("pair law given %d coordinate arrays" % arity)
        if isinstance(p, (JointPmf3, MarkovTriple)) and arity != 3:
            raise TypeError("triple law given %d coordinate arrays" % arity)
        return p.log2_mass
    if isinstance(p, PairModel):
        if arity != 2:
            raise TypeError("pair model given %d coordinate arrays" % arity)
        return p.log2_mass
    if isinstance(p, SingleModel):
        if arity != 1:
            raise TypeError("single model given %d coordinate arrays" % arity)
        return p.log2_mass
    raise TypeError("cannot take log-masses from %s" % type(p).__name__)


def _mass_fn(p, arity):
    if isinstance(
        p, (Pmf, JointPmf2, JointPmf3, MarkovTriple)
    ) and hasattr(p, "mass_vec"):
        return p.mass_vec
    if callable(p) and not isinstance(p, type):
        return p
    raise TypeError("cannot take masses from %s" % type(p).__name__)


def entropy(dist):
    """Entropy in bits of a law or an empirical type."""
    if hasattr(dist, "entropy"):
        return float(dist.entropy())
    return _entropy_bits(np.asarray(dist, dtype=np.float64))


def kl_divergence(q, p):
    """D(q || p) in bits; +inf when q leaves the support of p."""
    coords, probs = _atoms(q)
    log2p = _log2_fn(p, len(coords))(*coords)
    live = probs > 0.0
    if not np.all(np.isfinite(log2p[live])):
        return math.inf
    qpos = probs[live]
    terms = qpos * (np.log2(qpos) - log2p[live])
    return math.fsum(terms.tolist())


def variational_distance(q, p):
    """V(q, p) = sum over atoms of |q - p|, in [0, 2].

    Exact for any second argument with total mass 1: the part of p
    living off the q-atoms contributes 1 minus the on-atom p mass.
    """
    coords, probs = _atoms(q)
    if hasattr(p, "coords") and hasattr(p, "probs"):
        # both sides empirical: merge atom sets exactly
        pcoords, pprobs = _atoms(p)
        if len(pcoords) != len(coords):
            raise TypeError("coordinate arity mismatch")
        qk = _encode_any(coords)
        pk = _encode_any(pcoords)
        keys = np.concatenate([qk, pk])
        vals = np.concatenate([probs, -pprobs])
        uniq, inv = np.unique(keys, return_inverse=True)
        diffs = []
        for g in range(uniq.size):
            diffs.append(abs(math.fsum(vals[inv == g].tolist())))
        return math.fsum(diffs)
    pmass = _mass_fn(p, len(coords))(*coords)
    on_atom = math.fsum(np.abs(probs - pmass).tolist())
    off_atom = 1.0 - math.fsum(pmass.tolist())
    return on_atom + max(off_atom, 0.0)


def _encode_any(coords):
    if len(coords) == 1:
        return np.asarray(coords[0], dtype=np.int64)
    if len(coords) == 2:
        return encode2(coords[0], coords[1])
    return encode3(coords[0], coords[1], coords[2])


def pinsker_gap(q, p):
    """sqrt(2 ln 2 * D(q||p)) - V(q, p); nonnegative by the inequality."""
    d = kl_divergence(q, p)
    if math.isinf(d):
        return math.inf
    return math.sqrt(2.0 * _LN2 * d) - variational_distance(q, p)


def _labels_of(dist):
    if hasattr(dist, "labels"):
        return tuple(dist.labels)
    if isinstance(dist, JointPmf3):
        return ("X", "Y", "Z")
    raise TypeError(
        "conditional measures need labeled coordinates, got %s"
        % type(dist).__name__
    )


def _split_given(dist, given):
    labels = _labels_of(dist)
    coords, probs = _atoms(dist)
    want = set(c for c in given.upper())
    if not want or not want.issubset(set(labels)):
        raise ValueError(
            "conditioning coords %r not among labels %r" % (given, labels)
        )
    given_idx = [i for i, lab in enumerate(labels) if lab in want]
    target_idx = [i for i, lab in enumerate(labels) if lab not in want]
    if not target_idx:
        raise ValueError("conditioning on every coordinate leaves no target")
    gkey = _encode_any(tuple(coords[i] for i in given_idx))
    return coords, probs, gkey, given_idx, target_idx


def _group_masses(gkey, probs):
    uniq, inv = np.unique(gkey, return_inverse=True)
    w = np.zeros(uniq.size, dtype=np.float64)
    for g in range(uniq.size):
        w[g] = math.fsum(probs[inv == g].tolist())
    return w[inv]


def conditional_entropy(dist, given):
    """Row-wise H(target | given) in bits, straight from the definition.

    For the chain law the exact closed form sum of p(y) H(row y) is
    used whenever the conditioning set contains Y, since the remaining
    coordinate X depends on (Y, Z) through Y alone.
    """
    if isinstance(dist, MarkovTriple):
        if set(given.upper()) == {"Y", "Z"}:
            # target is X alone and p(x | y, z) = p(x | y)
            t = dist.side.marginal_first().tabulate()
            return math.fsum(
                (py * dist.kernel.row(int(y)).entropy())
                for y, py in zip(t.support.tolist(), t.probs.tolist())
            )
        dist = dist.induced_joint()
    coords, probs, gkey, _, _ = _split_given(dist, given)
    wg = _group_masses(gkey, probs)
    live = probs > 0.0
    terms = -probs[live] * (np.log2(probs[live]) - np.log2(wg[live]))
    return math.fsum(terms.tolist())


def conditional_kl(q, p, given="YZ"):
    """Conditional divergence D(Q_{T|G} || P_{T|G} | Q_G) in bits.

    Weighted by the empirical conditioning law: sum over atoms of
    q(atom) [log2 q(t|g) - log2 p(t|g)].  For a chain-law second
    argument with conditioning on (Y, Z) or Y the rows p(x|y) are
    exact.
    """
    coords, probs, gkey, given_idx, target_idx = _split_given(q, given)
    labels = _labels_of(q)
    if isinstance(p, MarkovTriple):
        if set(given.upper()) != {"Y", "Z"} or len(labels) != 3:
            raise ValueError(
                "chain-law conditional divergence supports conditioning "
                "on YZ with target X, got %r" % given
            )
        xi = labels.index("X")
        yi = labels.index("Y")
        log2p_cond = p.kernel.log2_cond_mass(coords[xi], coords[yi])
    elif isinstance(p, JointPmf3) or isinstance(p, JointPmf2):
        plabels = _labels_of(p)
        gsub = "".join(plabels[i] for i in given_idx)
        pmarg = p.marginal(gsub)
        if len(given_idx) == 1:
            log2p_g = pmarg.log2_mass(coords[given_idx[0]])
        else:
            log2p_g = pmarg.log2_mass(*(coords[i] for i in given_idx))
        log2p_cond = _log2_fn(p, len(coords))(*coords) - log2p_g
    elif callable(p):
        log2p_cond = p(*coords)
    else:
        raise TypeError(
            "cannot take conditional log-masses from %s" % type(p).__name__
        )
    wg = _group_masses(gkey, probs)
    live = probs > 0.0
    if not np.all(np.isfinite(log2p_cond[live])):
        return math.inf
    qpos = probs[live]
    log2q_cond = np.log2(qpos) - np.log2(wg[live])
    terms = qpos * (log2q_cond - log2p_cond[live])
    return math.fsum(terms.tolist())
