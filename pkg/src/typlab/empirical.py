"""Sequences, occurrence counting, and empirical types.

An empirical type stores integer counts, never ratios: marginal
consistency is then exact integer arithmetic, and every downstream
score is a pure function of the type.  Probabilities are derived on
demand as counts / n.
"""

import math

import numpy as np

from . import backend
from ._codes import check_symbols, decode2, decode3, encode2, encode3
from .errors import SequenceFormatError
from .model import MarkovTriple

__all__ = [
    "SequenceTriple",
    "TypeView",
    "EmpiricalType",
    "empirical_type",
    "count_occurrences",
    "load_sequences",
    "write_sequences",
    "loglik_gap",
    "loglik_gap_decomposed",
]


class SequenceTriple:
    """Three aligned symbol sequences (x, y, z) of common length n."""

    def __init__(self, x, y, z):
        self.x = check_symbols(np.atleast_1d(np.asarray(x)), "x")
        self.y = check_symbols(np.atleast_1d(np.asarray(y)), "y")
        self.z = check_symbols(np.atleast_1d(np.asarray(z)), "z")
        if not (self.x.size == self.y.size == self.z.size):
            raise SequenceFormatError(
                "sequence lengths differ: x=%d y=%d z=%d"
                % (self.x.size, self.y.size, self.z.size)
            )
        if self.x.size == 0:
            raise SequenceFormatError("sequences must have length n >= 1")

    @property
    def n(self):
        return int(self.x.size)


class TypeView:
    """Empirical distribution of labeled coordinates, as counts."""

    def __init__(self, labels, coords, counts, n):
        self.labels = tuple(labels)
        self.coords = tuple(np.asarray(c, dtype=np.int64) for c in coords)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.n = int(n)
        if len(self.coords) != len(self.labels):
            raise ValueError("one coordinate array per label required")
        if any(c.shape != self.counts.shape for c in self.coords):
            raise ValueError("atom arrays must share one shape")
        if np.any(self.counts < 0) or self.counts.sum() != self.n:
            raise ValueError("counts must be nonnegative and sum to n")
        order = np.argsort(self._key_codes())
        self.coords = tuple(c[order] for c in self.coords)
        self.counts = self.counts[order]

    @property
    def probs(self):
        return self.counts / float(self.n)

    def entropy(self):
        """Entropy of the type in bits, from integer counts."""
        c = self.counts[self.counts > 0].astype(np.float64)
        return math.log2(self.n) - math.fsum(
            (c * np.log2(c)).tolist()
        ) / self.n

    def _key_codes(self):
        if len(self.coords) == 1:
            return self.coords[0]
        if len(self.coords) == 2:
            return encode2(*self.coords)
        return encode3(*self.coords)

    def marginal(self, coords):
        """Aggregate onto a label subset; counts merge exactly."""
        keep = [lab for lab in self.labels if lab in coords.upper()]
        if not keep or any(
            c not in self.labels for c in coords.upper()
        ):
            raise ValueError(
                "coords %r must name a subset of labels %r"
                % (coords, self.labels)
            )
        if len(keep) == len(self.labels):
            return self
        arrs = [self.coords[self.labels.index(lab)] for lab in keep]
        gcodes = arrs[0] if len(arrs) == 1 else encode2(arrs[0], arrs[1])
        uniq, inv = np.unique(gcodes, return_inverse=True)
        agg = np.zeros(uniq.size, dtype=np.int64)
        np.add.at(agg, inv, self.counts)
        if len(arrs) == 1:
            return TypeView((keep[0],), (uniq,), agg, self.n)
        a, b = decode2(uniq)
        return TypeView(tuple(keep), (a, b), agg, self.n)

    def __eq__(self, other):
        if not isinstance(other, TypeView):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.n == other.n
            and np.array_equal(self._key_codes(), other._key_codes())
            and np.array_equal(self.counts, other.counts)
        )

    def __hash__(self):
        return hash(
            (self.labels, self.n, self._key_codes().tobytes(),
             self.counts.tobytes())
        )


class EmpiricalType(TypeView):
    """Joint type of an (x, y, z) sequence triple with cached marginals."""

    def __init__(self, xs, ys, zs, counts, n):
        super().__init__(("X", "Y", "Z"), (xs, ys, zs), counts, n)
        self._marginals = {}

    @classmethod
    def from_sequences(cls, seqs):
        codes = encode3(seqs.x, seqs.y, seqs.z)
        uniq, counts = backend.count_codes(codes)
        xs, ys, zs = decode3(uniq)
        return cls(xs, ys, zs, counts, seqs.n)

    @classmethod
    def from_counts(cls, counts_map, n=None):
        """Build from a mapping (x, y, z) -> count."""
        if not counts_map:
            raise ValueError("counts map is empty")
        atoms = sorted(counts_map)
        xs = np.array([a[0] for a in atoms], dtype=np.int64)
        ys = np.array([a[1] for a in atoms], dtype=np.int64)
        zs = np.array([a[2] for a in atoms], dtype=np.int64)
        counts = np.array([counts_map[a] for a in atoms], dtype=np.int64)
        total = int(counts.sum())
        if n is None:
            n = total
        return cls(xs, ys, zs, counts, n)

    def count(self, x, y, z):
        code = int(encode3(np.int64(x), np.int64(y), np.int64(z)))
        codes = self._key_codes()
        i = np.searchsorted(codes, code)
        if i < codes.size and codes[i] == code:
            return int(self.counts[i])
        return 0

    def marginal(self, coords):
        """Type of a coordinate subset; results are cached."""
        key = "".join(c for c in "XYZ" if c in coords.upper())
        if not key or any(c not in "XYZ" for c in coords.upper()):
            raise ValueError("coords must name a subset of X, Y, Z")
        if key == "XYZ":
            return self
        if key not in self._marginals:
            self._marginals[key] = super().marginal(key)
        return self._marginals[key]


def empirical_type(seqs):
    """The joint type of a sequence triple."""
    return EmpiricalType.from_sequences(seqs)


def count_occurrences(seqs, triple):
    """Number of indices i with (x_i, y_i, z_i) equal to the triple."""
    x, y, z = triple
    return int(
        np.count_nonzero((seqs.x == x) & (seqs.y == y) & (seqs.z == z))
    )


def load_sequences(path):
    """Read a sequence file: one whitespace-separated "x y z" per line."""
    xs, ys, zs = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            fields = stripped.split()
            if len(fields) != 3:
                raise SequenceFormatError(
                    "%s line %d: expected 3 integers, got %d fields"
                    % (path, lineno, len(fields))
                )
            try:
                xs.append(int(fields[0]))
                ys.append(int(fields[1]))
                zs.append(int(fields[2]))
            except ValueError:
                raise SequenceFormatError(
                    "%s line %d: fields must be integers, got %r"
                    % (path, lineno, stripped)
                ) from None
    if not xs:
        raise SequenceFormatError("%s holds no sequence lines" % path)
    return SequenceTriple(xs, ys, zs)


def write_sequences(path, seqs):
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in zip(
            seqs.x.tolist(), seqs.y.tolist(), seqs.z.tolist()
        ):
            fh.write("%d %d %d\n" % (x, y, z))


def _as_type(seqs_or_type):
    if isinstance(seqs_or_type, EmpiricalType):
        return seqs_or_type
    return EmpiricalType.from_sequences(seqs_or_type)


def loglik_gap(seqs, triple):
    """Per-symbol log-likelihood gap of the conditional draws, in bits.

    With A_i = log2 p(x_i | y_i), returns the expectation term minus
    the observed term: n^-1 sum_y N(y) sum_x p(x|y) log2 p(x|y) minus
    n^-1 sum_i A_i.  A zero-probability observation flags the gap +inf.
    """
    if not isinstance(triple, MarkovTriple):
        raise TypeError("expected a MarkovTriple")
    a_i = triple.kernel.log2_cond_mass(seqs.x, seqs.y)
    if not np.all(np.isfinite(a_i)):
        return math.inf
    n = seqs.n
    observed = float(np.sum(a_i)) / n
    ytype = _as_type(seqs).marginal("Y")
    expectation = math.fsum(
        (cnt * -triple.kernel.row(int(y)).entropy())
        for y, cnt in zip(
            ytype.coords[0].tolist(), ytype.counts.tolist()
        )
    ) / n
    return expectation - observed


def loglik_gap_decomposed(seqs_or_type, triple):
    """The same gap through its conditional-type decomposition.

    Sums q(yz) [ D(Q_{X|yz} || P_{X|y}) + H(Q_{X|yz}) - H(P_{X|y}) ]
    over the observed (y, z) groups, each piece computed separately.
    Serves as an independent oracle for ``loglik_gap``.
    """
    if not isinstance(triple, MarkovTriple):
        raise TypeError("expected a MarkovTriple")
    etype = _as_type(seqs_or_type)
    xs, ys, zs = etype.coords
    counts = etype.counts.astype(np.float64)
    gkeys = encode2(ys, zs)
    uniq, inv = np.unique(gkeys, return_inverse=True)
    log2row = triple.kernel.log2_cond_mass(xs, ys)
    if not np.all(np.isfinite(log2row)):
        return math.inf
    group_terms = []
    for g in range(uniq.size):
        sel = (inv == g) & (etype.counts > 0)
        if not np.any(sel):
            continue
        c = counts[sel]
        c_g = math.fsum(c.tolist())
        q_cond = c / c_g
        log2q = np.log2(q_cond)
        div = math.fsum((q_cond * (log2q - log2row[sel])).tolist())
        h_cond = -math.fsum((q_cond * log2q).tolist())
        y = int(ys[np.argmax(sel)])
        h_row = triple.kernel.row(y).entropy()
        group_terms.append((c_g / etype.n) * (div + h_cond - h_row))
    return math.fsum(group_terms)
