"""Probability models over countable alphabets.

Single distributions (``Pmf``), two-coordinate joints (``JointPmf2``),
three-coordinate tables (``JointPmf3``), conditional kernels
(``Kernel``), and the Markov triple ``p(x, y, z) = p(x | y) p(y, z)``
(``MarkovTriple``).  Symbols are nonnegative integers.  All logarithms
are base 2; entropies are in bits and log-moments in bits squared.

Infinite-support families (geometric, power-law) keep exact mass and
log-mass formulas; tables only appear through explicit truncation with
a certified residual and an entropy tail bound.
"""

import json
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import zeta as _hurwitz_zeta

from ._codes import check_symbols, decode2, decode3, encode2, encode3
from .errors import (
    BoundViolationError,
    InvalidDistributionError,
    MissingKernelRowError,
    TruncationError,
)

Symbol = int

DEFAULT_TAIL_EPS = 1e-12
DEFAULT_LOG_MOMENT_CAP = 1e6
DEFAULT_TABLE_CAP = 1 << 22

_LN2 = math.log(2.0)


def _neg_inf_like(xs):
    return np.full(np.asarray(xs).shape, -math.inf, dtype=np.float64)


def _entropy_bits(probs):
    """Entropy of a prob array in bits; zero entries contribute zero."""
    p = np.asarray(probs, dtype=np.float64)
    pos = p[p > 0.0]
    if pos.size == 0:
        return 0.0
    return -math.fsum((pos * np.log2(pos)).tolist())


def _log_moment_bits(probs):
    """Sum of p * (log2 p)^2 over positive entries, in bits squared."""
    p = np.asarray(probs, dtype=np.float64)
    pos = p[p > 0.0]
    if pos.size == 0:
        return 0.0
    lg = np.log2(pos)
    return math.fsum((pos * lg * lg).tolist())


@dataclass(frozen=True)
class Truncation:
    """A finite table certified to carry all but ``residual`` mass.

    ``entropy_tail`` bounds the entropy contribution of the dropped
    atoms, so the true entropy lies in
    ``[table_entropy, table_entropy + entropy_tail]``.
    """

    support: np.ndarray
    probs: np.ndarray
    residual: float
    entropy_tail: float


class Pmf:
    """A probability mass function on the nonnegative integers."""

    kind = None

    def mass(self, x):
        raise NotImplementedError

    def mass_vec(self, xs):
        raise NotImplementedError

    def log2_mass(self, xs):
        raise NotImplementedError

    def entropy(self):
        raise NotImplementedError

    def log_moment(self):
        raise NotImplementedError

    def tabulate(self, tail_eps=DEFAULT_TAIL_EPS, cap=DEFAULT_TABLE_CAP):
        raise NotImplementedError

    def key(self):
        """Hashable identity used for row deduplication."""
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError

    @staticmethod
    def from_json(obj):
        if not isinstance(obj, dict):
            raise InvalidDistributionError(
                "distribution must be a JSON object, got %s"
                % type(obj).__name__
            )
        kind = obj.get("kind")
        if kind == "explicit":
            if "support" not in obj or "probs" not in obj:
                raise InvalidDistributionError(
                    "explicit distribution needs fields "
                    "'support' and 'probs'"
                )
            return ExplicitPmf(obj["support"], obj["probs"])
        if kind == "geometric":
            if "p" not in obj:
                raise InvalidDistributionError(
                    "geometric distribution needs field 'p'"
                )
            return GeometricPmf(obj["p"])
        if kind == "zipf":
            if "s" not in obj:
                raise InvalidDistributionError(
                    "zipf distribution needs field 's'"
                )
            return ZipfPmf(obj["s"])
        raise InvalidDistributionError(
            "field 'kind' must be 'explicit', 'geometric', or 'zipf', "
            "got %r" % (kind,)
        )

    def __eq__(self, other):
        return isinstance(other, Pmf) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


class ExplicitPmf(Pmf):
    """Finite-support table; stored sorted by symbol.

    Probabilities must be nonnegative and sum to 1 within 1e-12 unless a
    ``residual`` is declared, in which case table mass plus residual
    must reach 1 (tables produced by truncation use this form).
    """

    kind = "explicit"

    def __init__(self, support, probs, residual=0.0, entropy_tail=0.0):
        sup = check_symbols(support, "support")
        p = np.asarray(probs, dtype=np.float64)
        if sup.shape != p.shape or sup.ndim != 1:
            raise InvalidDistributionError(
                "fields 'support' and 'probs' must be 1-d and equal length"
            )
        if sup.size == 0:
            raise InvalidDistributionError("field 'support' is empty")
        if np.unique(sup).size != sup.size:
            raise InvalidDistributionError(
                "field 'support' contains duplicate symbols"
            )
        if not np.all(np.isfinite(p)) or np.any(p < 0.0):
            raise InvalidDistributionError(
                "field 'probs' must be finite and nonnegative"
            )
        total = math.fsum(p.tolist())
        tol = 1e-9 if residual else 1e-12
        if abs(total + residual - 1.0) > tol:
            raise InvalidDistributionError(
                "field 'probs' must sum to 1 within 1e-12, got %.17g"
                % (total + residual)
            )
        order = np.argsort(sup)
        self.support = sup[order]
        self.probs = p[order]
        self.residual = float(residual)
        self.entropy_tail = float(entropy_tail)
        with np.errstate(divide="ignore"):
            self._log2_probs = np.where(
                self.probs > 0.0, np.log2(np.maximum(self.probs, 1e-320)),
                -math.inf,
            )

    def mass(self, x):
        i = np.searchsorted(self.support, x)
        if i < self.support.size and self.support[i] == x:
            return float(self.probs[i])
        return 0.0

    def mass_vec(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        pos = np.searchsorted(self.support, xs).clip(0, self.support.size - 1)
        hit = self.support[pos] == xs
        out = np.zeros(xs.shape, dtype=np.float64)
        out[hit] = self.probs[pos[hit]]
        return out

    def log2_mass(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        pos = np.searchsorted(self.support, xs).clip(0, self.support.size - 1)
        hit = self.support[pos] == xs
        out = _neg_inf_like(xs)
        out[hit] = self._log2_probs[pos[hit]]
        return out

    def entropy(self):
        return _entropy_bits(self.probs)

    def log_moment(self):
        return _log_moment_bits(self.probs)

    def tabulate(self, tail_eps=DEFAULT_TAIL_EPS, cap=DEFAULT_TABLE_CAP):
        return Truncation(
            self.support, self.probs, self.residual, self.entropy_tail
        )

    def key(self):
        return ("explicit", self.support.tobytes(), self.probs.tobytes())

    def to_json(self):
        return {
            "kind": "explicit",
            "support": self.support.tolist(),
            "probs": self.probs.tolist(),
        }


class GeometricPmf(Pmf):
    """Geometric law p(k) = (1 - p)^k p on k = 0, 1, 2, ..."""

    kind = "geometric"

    def __init__(self, p):
        p = float(p)
        if not (0.0 < p < 1.0):
            raise InvalidDistributionError(
                "field 'p' must lie strictly between 0 and 1, got %r" % p
            )
        self.p = p
        self.r = 1.0 - p
        self._log2_p = math.log2(p)
        self._log2_r = math.log2(self.r)
        self.inv_log1mp = 1.0 / math.log1p(-p)

    def mass(self, x):
        if x < 0 or x != int(x):
            return 0.0
        return self.r ** int(x) * self.p

    def mass_vec(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        out = self.p * self.r ** xs.astype(np.float64)
        return np.where(xs >= 0, out, 0.0)

    def log2_mass(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        out = self._log2_p + xs.astype(np.float64) * self._log2_r
        return np.where(xs >= 0, out, -math.inf)

    def entropy(self):
        hb = -self.p * self._log2_p - self.r * self._log2_r
        return hb / self.p

    def log_moment(self):
        # E[(log2 p + K log2 r)^2] with E[K] = r/p, E[K^2] = r(1+r)/p^2
        a, b = self._log2_p, self._log2_r
        ek = self.r / self.p
        ek2 = self.r * (1.0 + self.r) / (self.p * self.p)
        return a * a + 2.0 * a * b * ek + b * b * ek2

    def tabulate(self, tail_eps=DEFAULT_TAIL_EPS, cap=DEFAULT_TABLE_CAP):
        k = math.ceil(math.log(tail_eps) / math.log(self.r))
        if k > cap:
            raise TruncationError(
                "geometric truncation to tail %g needs %d atoms, cap is %d"
                % (tail_eps, k, cap)
            )
        support = np.arange(k, dtype=np.int64)
        probs = self.p * self.r ** support.astype(np.float64)
        residual = self.r ** k
        # sum over k >= K of p r^k (-log2 p - k log2 r), closed form
        tail = (-self._log2_p) * residual + (-self._log2_r) * residual * (
            k * self.p + self.r
        ) / self.p
        return Truncation(support, probs, float(residual), float(tail))

    def key(self):
        return ("geometric", self.p)

    def to_json(self):
        return {"kind": "geometric", "p": self.p}


class ZipfPmf(Pmf):
    """Power law p(k) = k^(-s) / zeta(s) on k = 1, 2, 3, ..."""

    kind = "zipf"

    def __init__(self, s):
        s = float(s)
        if not (s > 1.0) or not math.isfinite(s):
            raise InvalidDistributionError(
                "field 's' must be a finite number greater than 1, "
                "got %r" % s
            )
        self.s = s
        with mpmath.workdps(30):
            z = mpmath.zeta(s)
            z1 = mpmath.zeta(s, 1, 1)
            z2 = mpmath.zeta(s, 1, 2)
            self._zeta = float(z)
            self._ln_zeta = float(mpmath.log(z))
            # H = log2 zeta + s * (-zeta') / (zeta ln 2)
            self._entropy = float(
                mpmath.log(z, 2) + s * (-z1) / (z * mpmath.log(2))
            )
            # E[(s ln k + ln zeta)^2] / ln^2 2 via zeta derivatives
            num = s * s * z2 + 2.0 * s * mpmath.log(z) * (-z1)
            num += z * mpmath.log(z) ** 2
            self._log_moment = float(num / (z * mpmath.log(2) ** 2))
        self._log2_zeta = self._ln_zeta / _LN2

    def mass(self, x):
        if x < 1 or x != int(x):
            return 0.0
        return float(x) ** (-self.s) / self._zeta

    def mass_vec(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        safe = np.maximum(xs, 1).astype(np.float64)
        return np.where(xs >= 1, safe ** (-self.s) / self._zeta, 0.0)

    def log2_mass(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        safe = np.maximum(xs, 1).astype(np.float64)
        out = -self.s * np.log2(safe) - self._log2_zeta
        return np.where(xs >= 1, out, -math.inf)

    def entropy(self):
        return self._entropy

    def log_moment(self):
        return self._log_moment

    def tabulate(self, tail_eps=DEFAULT_TAIL_EPS, cap=DEFAULT_TABLE_CAP):
        # integral bound: sum over k > K of k^-s <= K^(1-s) / (s-1)
        k = math.ceil(
            ((self.s - 1.0) * self._zeta * tail_eps) ** (-1.0 / (self.s - 1.0))
        )
        k = max(k, 2)
        if k > cap:
            raise TruncationError(
                "power-law truncation to tail %g needs %d atoms, cap is %d"
                % (tail_eps, k, cap)
            )
        support = np.arange(1, k + 1, dtype=np.int64)
        probs = support.astype(np.float64) ** (-self.s) / self._zeta
        residual = float(_hurwitz_zeta(self.s, k + 1)) / self._zeta
        s1 = self.s - 1.0
        int_log = k ** (-s1) * (s1 * math.log(k) + 1.0) / (s1 * s1)
        tail = (
            self.s * int_log + self._ln_zeta * residual * self._zeta
        ) / (self._zeta * _LN2)
        return Truncation(support, probs, residual, float(tail))

    def key(self):
        return ("zipf", self.s)

    def to_json(self):
        return {"kind": "zipf", "s": self.s}


class Kernel:
    """Conditional rows x given y: a map from symbol to ``Pmf``.

    ``default`` is the row used for symbols without an explicit entry.
    In JSON form rows are keyed by decimal symbol strings; the optional
    key ``"*"`` holds the default row.
    """

    def __init__(self, rows=None, default=None):
        rows = dict(rows or {})
        for y in rows:
            if not isinstance(y, int) or y < 0:
                raise InvalidDistributionError(
                    "kernel row keys must be nonnegative integers, "
                    "got %r" % (y,)
                )
            if not isinstance(rows[y], Pmf):
                raise InvalidDistributionError(
                    "kernel row %d is not a distribution" % y
                )
        if default is not None and not isinstance(default, Pmf):
            raise InvalidDistributionError(
                "kernel default row is not a distribution"
            )
        if not rows and default is None:
            raise InvalidDistributionError("kernel has no rows")
        self.rows = rows
        self.default = default

    def row(self, y):
        r = self.rows.get(int(y), self.default)
        if r is None:
            raise MissingKernelRowError(
                "kernel has no row for symbol %d and no default row" % y
            )
        return r

    def has_row(self, y):
        return int(y) in self.rows or self.default is not None

    def distinct_rows(self):
        seen = {}
        for r in self.rows.values():
            seen[r.key()] = r
        if self.default is not None:
            seen[self.default.key()] = self.default
        return list(seen.values())

    def is_homogeneous(self):
        return len(self.distinct_rows()) == 1

    def log_moment_sup(self):
        return max(r.log_moment() for r in self.distinct_rows())

    def row_entropy(self, y):
        return self.row(y).entropy()

    def log2_cond_mass(self, xs, ys):
        """Elementwise log2 p(x | y) for paired symbol arrays."""
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        if xs.shape != ys.shape:
            raise ValueError("x and y arrays must have equal shape")
        out = np.empty(xs.shape, dtype=np.float64)
        for y in np.unique(ys):
            sel = ys == y
            out[sel] = self.row(int(y)).log2_mass(xs[sel])
        return out

    def cond_mass_vec(self, xs, ys):
        """Elementwise p(x | y), exact per row formula."""
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        if xs.shape != ys.shape:
            raise ValueError("x and y arrays must have equal shape")
        out = np.empty(xs.shape, dtype=np.float64)
        for y in np.unique(ys):
            sel = ys == y
            out[sel] = self.row(int(y)).mass_vec(xs[sel])
        return out

    def to_json(self):
        obj = {str(y): r.to_json() for y, r in sorted(self.rows.items())}
        if self.default is not None:
            obj["*"] = self.default.to_json()
        return obj

    @staticmethod
    def from_json(obj):
        if not isinstance(obj, dict) or not obj:
            raise InvalidDistributionError(
                "field 'kernel' must be a nonempty JSON object"
            )
        rows = {}
        default = None
        for key, val in obj.items():
            if key == "*":
                default = Pmf.from_json(val)
                continue
            try:
                y = int(key)
                if y < 0:
                    raise ValueError
            except ValueError:
                raise InvalidDistributionError(
                    "kernel keys must be decimal symbols or '*', "
                    "got %r" % key
                ) from None
            rows[y] = Pmf.from_json(val)
        return Kernel(rows, default)


class JointPmf2:
    """A joint law on ordered symbol pairs."""

    kind = None
    labels = ("Y", "Z")

    def mass(self, a, b):
        raise NotImplementedError

    def log2_mass(self, a, b):
        raise NotImplementedError

    def entropy(self):
        raise NotImplementedError

    def marginal_first(self):
        raise NotImplementedError

    def marginal_second(self):
        raise NotImplementedError

    def tabulate(self, tail_eps=DEFAULT_TAIL_EPS, cap=DEFAULT_TABLE_CAP):
        """Return (first, second, probs, residual) arrays for the pair."""
        raise NotImplementedError

    def marginal(self, coords):
        want = "".join(sorted(coords.upper()))
        have = "".join(sorted(self.labels))
        if want == have:
            return self
        if want == self.labels[0]:
            return self.marginal_first()
        if want == self.labels[1]:
            return self.marginal_second()
        raise ValueError(
            "coords %r not drawn from pair labels %r" % (coords, self.labels)
        )

    def pair_model(self):
        return PairModel(
            labels=self.labels,
            log2_mass=self.log2_mass,
            entropy_both=self.entropy(),
            entropy_first=self.marginal_first().entropy(),
            entropy_second=self.marginal_second().entropy(),
        )

    @staticmethod
    def from_json(obj, labels=("Y", "Z")):
        if isinstance(obj, list):
            if not obj:
                raise InvalidDistributionError("field 'side' is empty")
            try:
                first = [row[0] for row in obj]
                second = [row[1] for row in obj]
                probs = [row[2] for row in obj]
            except (TypeError, IndexError):
                raise InvalidDistributionError(
                    "field 'side' entries must be [first, second, prob] "
                    "triples"
                ) from None
            return ExplicitJoint2(first, second, probs, labels=labels)
        if isinstance(obj, dict) and obj.get("kind") == "diag":
            if "base" not in obj:
                raise InvalidDistributionError(
                    "diag pair needs field 'base'"
                )
            return DiagJoint2(Pmf.from_json(obj["base"]), labels=labels)
        raise InvalidDistributionError(
            "field 'side' must be a list of [y, z, prob] triples or "
            "a {'kind': 'diag', 'base': ...} object"
        )


class ExplicitJoint2(JointPmf2):
    """Finite pair table, stored sorted by (first, second)."""

    kind = "explicit"

    def __init__(
        self,
        first,
        second,
        probs,
        residual=0.0,
        entropy_tail=0.0,
        labels=("Y", "Z"),
    ):
        a = check_symbols(first, "pair first")
        b = check_symbols(second, "pair second")
        p = np.asarray(probs, dtype=np.float64)
        if not (a.shape == b.shape == p.shape) or a.ndim != 1 or a.size == 0:
            raise InvalidDistributionError(
                "pair table arrays must be 1-d, nonempty, equal length"
            )
        if not np.all(np.isfinite(p)) or np.any(p < 0.0):
            raise InvalidDistributionError(
                "pair table probs must be finite and nonnegative"
            )
        codes = encode2(a, b)
        if np.unique(codes).size != codes.size:
            raise InvalidDistributionError(
                "pair table contains duplicate (first, second) atoms"
            )
        total = math.fsum(p.tolist())
        tol = 1e-9 if residual else 1e-12
        if abs(total + residual - 1.0) > tol:
            raise InvalidDistributionError(
                "pair table probs must sum to 1 within 1e-12, got %.17g"
                % (total + residual)
            )
        order = np.argsort(codes)
        self.first = a[order]
        self.second = b[order]
        self.probs = p[order]
        self._codes = codes[order]
        self.residual = float(residual)
        self.entropy_tail = float(entropy_tail)
        self.labels = tuple(labels)
        with np.errstate(divide="ignore"):
            self._log2_probs = np.where(
                self.probs > 0.0, np.log2(np.maximum(self.probs, 1e-320)),
                -math.inf,
            )

    def mass(self, a, b):
        code = int(encode2(np.int64(a), np.int64(b)))
        i = np.searchsorted(self._codes, code)
        if i < self._codes.size and self._codes[i] == code:
            return float(self.probs[i])
        return 0.0

    def mass_vec(self, a, b):
        codes = encode2(a, b)
        pos = np.searchsorted(self._codes, codes).clip(
            0, self._codes.size - 1
        )
        hit = self._codes[pos] == codes
        out = np.zeros(codes.shape, dtype=np.float64)
        out[hit] = self.probs[pos[hit]]
        return out

    def log2_mass(self, a, b):
        codes = encode2(a, b)
        pos = np.searchsorted(self._codes, codes).clip(
            0, self._codes.size - 1
        )
        hit = self._codes[pos] == codes
        out = _neg_inf_like(codes)
        out[hit] = self._log2_probs[pos[hit]]
        return out

    def entropy(self):
        return _entropy_bits(self.probs)

    def _aggregate(self, keys):
        uniq, inv = np.unique(keys, return_inverse=True)
        sums = np.zeros(uniq.size, dtype=np.float64)
        # fsum per group keeps marginals order-independent
        for g in range(uniq.size):
            sums[g] = math.fsum(self.probs[inv == g].tolist())
        return uniq, sums

    def marginal_first(self):
        sup, probs = self._aggregate(self.first)
        return ExplicitPmf(
            sup, probs, residual=self.residual,
            entropy_tail=self.entropy_tail,
        )

    def marginal_second(self):
        sup, probs = self._aggregate(self.second)
        return ExplicitPmf(
            sup, probs, residual=self.residual,
            entropy_tail=self.entropy_tail,
        )

    def tabulate(self, tail_eps=DEFAULT_TAIL_EPS, cap=DEFAULT_TABLE_CAP):
        return self.first, self.second, self.probs, self.residual

    def to_json(self):
        return [
            [int(a), int(b), float(p)]
            for a, b, p in zip(self.first, self.second, self.probs)
        ]


class DiagJoint2(JointPmf2):
    """Pair law concentrated on the diagonal: p(k, k) = base(k)."""

    kind = "diag"

    def __init__(self, base, labels=("Y", "Z")):
        if not isinstance(base, Pmf):
            raise InvalidDistributionError(
                "field 'base' is not a distribution"
            )
        self.base = base
        self.labels = tuple(labels)

    def mass(self, a, b):
        return self.base.mass(a) if a == b else 0.0

    def mass_vec(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return np.where(a == b, self.base.mass_vec(a), 0.0)

    def log2_mass(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return np.where(a == b, self.base.log2_mass(a), -math.inf)

    def entropy(self):
        return self.base.entropy()

    def marginal_first(self):
        return self.base

    def marginal_second(self):
        return self.base

    def tabulate(self, tail_eps=DEFAULT_TAIL_EPS, cap=DEFAULT_TABLE_CAP):
        t = self.base.tabulate(tail_eps, cap)
        return t.support, t.support, t.probs, t.residual

    def to_json(self):
        return {"kind": "diag", "base": self.base.to_json()}


class FactoredJoint2(JointPmf2):
    """Pair law p(a, b) = k(a | b) q(b) for a kernel and a base pmf.

    Used for joints of the form (X, Y) with X drawn through the
    conditional rows.  Built programmatically, not from JSON.
    """

    kind = "factored"

    def __init__(self, first_given_second, second, labels=("X", "Y")):
        if not isinstance(first_given_second, Kernel):
            raise InvalidDistributionError("expected a Kernel for the rows")
        if not isinstance(second, Pmf):
            raise InvalidDistributionError("expected a Pmf for the base")
        self.kernel = first_given_second
        self.second_pmf = second
        self.labels = tuple(labels)

    def mass(self, a, b):
        if not self.kernel.has_row(b):
            return 0.0
        return self.kernel.row(b).mass(a) * self.second_pmf.mass(b)

    def mass_vec(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        base = self.second_pmf.mass_vec(b)
        out = np.zeros(base.shape, dtype=np.float64)
        live = base > 0.0
        if np.any(live):
            out[live] = self.kernel.cond_mass_vec(a[live], b[live])
            out[live] *= base[live]
        return out

    def log2_mass(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        base = self.second_pmf.log2_mass(b)
        out = np.full(base.shape, -math.inf, dtype=np.float64)
        live = np.isfinite(base)
        if np.any(live):
            out[live] = self.kernel.log2_cond_mass(a[live], b[live])
            out[live] += base[live]
        return out

    def entropy(self):
        base_t = self.second_pmf.tabulate()
        rows_h = math.fsum(
            (pb * self.kernel.row(int(b)).entropy())
            for b, pb in zip(base_t.support.tolist(), base_t.probs.tolist())
        )
        return self.second_pmf.entropy() + rows_h

    def marginal_second(self):
        return self.second_pmf

    def marginal_first(self):
        if self.kernel.is_homogeneous():
            return self.kernel.distinct_rows()[0]
        a, _, p, residual = self.tabulate()
        uniq, inv = np.unique(a, return_inverse=True)
        sums = np.zeros(uniq.size, dtype=np.float64)
        for g in range(uniq.size):
            sums[g] = math.fsum(p[inv == g].tolist())
        # conservative entropy slack for the dropped tail
        tail_h = residual * (0.5 + self.kernel.log_moment_sup()) + residual
        return ExplicitPmf(
            uniq, sums, residual=residual, entropy_tail=tail_h
        )

    def tabulate(self, tail_eps=DEFAULT_TAIL_EPS, cap=DEFAULT_TABLE_CAP):
        base_t = self.second_pmf.tabulate(tail_eps, cap)
        firsts, seconds, probs = [], [], []
        residual = base_t.residual
        for b, pb in zip(base_t.support.tolist(), base_t.probs.tolist()):
            row_t = self.kernel.row(b).tabulate(tail_eps, cap)
            firsts.append(row_t.support)
            seconds.append(np.full(row_t.support.size, b, dtype=np.int64))
            probs.append(pb * row_t.probs)
            residual += pb * row_t.residual
        a = np.concatenate(firsts)
        b = np.concatenate(seconds)
        p = np.concatenate(probs)
        if a.size > cap:
            raise TruncationError(
                "pair tabulation produced %d atoms, cap is %d"
                % (a.size, cap)
            )
        return a, b, p, float(residual)

    def to_json(self):
        return {
            "kind": "factored",
            "kernel": self.kernel.to_json(),
            "second": self.second_pmf.to_json(),
        }


@dataclass(frozen=True)
class PairModel:
    """Scoring view of a pair law: exact log-masses plus entropies."""

    labels: tuple
    log2_mass: object
    entropy_both: float
    entropy_first: float
    entropy_second: float


@dataclass(frozen=True)
class SingleModel:
    """Scoring view of a single-coordinate law."""

    label: str
    log2_mass: object
    entropy: float


class JointPmf3:
    """Finite three-coordinate table, stored sorted by (x, y, z)."""

    def __init__(self, xs, ys, zs, probs, residual=0.0, entropy_tail=0.0):
        x = check_symbols(xs, "x")
        y = check_symbols(ys, "y")
        z = check_symbols(zs, "z")
        p = np.asarray(probs, dtype=np.float64)
        if not (x.shape == y.shape == z.shape == p.shape) or x.ndim != 1:
            raise InvalidDistributionError(
                "triple table arrays must be 1-d and equal length"
            )
        if not np.all(np.isfinite(p)) or np.any(p < 0.0):
            raise InvalidDistributionError(
                "triple table probs must be finite and nonnegative"
            )
        codes = encode3(x, y, z)
        if np.unique(codes).size != codes.size:
            raise InvalidDistributionError(
                "triple table contains duplicate atoms"
            )
        total = math.fsum(p.tolist())
        tol = 1e-9 if residual else 1e-12
        if abs(total + residual - 1.0) > tol:
            raise InvalidDistributionError(
                "triple table probs must sum to 1 within 1e-12, got %.17g"
                % (total + residual)
            )
        order = np.argsort(codes)
        self.xs = x[order]
        self.ys = y[order]
        self.zs = z[order]
        self.probs = p[order]
        self._codes = codes[order]
        self.residual = float(residual)
        self.entropy_tail = float(entropy_tail)
        self._h_cache = {}
        with np.errstate(divide="ignore"):
            self._log2_probs = np.where(
                self.probs > 0.0, np.log2(np.maximum(self.probs, 1e-320)),
                -math.inf,
            )

    def subset_entropy(self, coords):
        """Entropy of a coordinate subset, cached per table."""
        key = "".join(c for c in "XYZ" if c in coords.upper())
        if key not in self._h_cache:
            part = self if key == "XYZ" else self.marginal(key)
            self._h_cache[key] = part.entropy()
        return self._h_cache[key]

    def mass(self, x, y, z):
        code = int(encode3(np.int64(x), np.int64(y), np.int64(z)))
        i = np.searchsorted(self._codes, code)
        if i < self._codes.size and self._codes[i] == code:
            return float(self.probs[i])
        return 0.0

    def mass_vec(self, xs, ys, zs):
        codes = encode3(xs, ys, zs)
        pos = np.searchsorted(self._codes, codes).clip(
            0, self._codes.size - 1
        )
        hit = self._codes[pos] == codes
        out = np.zeros(codes.shape, dtype=np.float64)
        out[hit] = self.probs[pos[hit]]
        return out

    def log2_mass(self, xs, ys, zs):
        codes = encode3(xs, ys, zs)
        pos = np.searchsorted(self._codes, codes).clip(
            0, self._codes.size - 1
        )
        hit = self._codes[pos] == codes
        out = _neg_inf_like(codes)
        out[hit] = self._log2_probs[pos[hit]]
        return out

    def entropy(self):
        return _entropy_bits(self.probs)

    def _coord(self, label):
        return {"X": self.xs, "Y": self.ys, "Z": self.zs}[label]

    def marginal(self, coords):
        labels = [c for c in "XYZ" if c in coords.upper()]
        if not labels or any(c not in "XYZ" for c in coords.upper()):
            raise ValueError("coords must name a subset of X, Y, Z")
        if len(labels) == 3:
            return self
        if len(labels) == 1:
            keys = self._coord(labels[0])
            uniq, inv = np.unique(keys, return_inverse=True)
            sums = np.zeros(uniq.size, dtype=np.float64)
            for g in range(uniq.size):
                sums[g] = math.fsum(self.probs[inv == g].tolist())
            return ExplicitPmf(
                uniq, sums, residual=self.residual,
                entropy_tail=self.entropy_tail,
            )
        a = self._coord(labels[0])
        b = self._coord(labels[1])
        keys = encode2(a, b)
        uniq, inv = np.unique(keys, return_inverse=True)
        sums = np.zeros(uniq.size, dtype=np.float64)
        for g in range(uniq.size):
            sums[g] = math.fsum(self.probs[inv == g].tolist())
        ua, ub = decode2(uniq)
        return ExplicitJoint2(
            ua, ub, sums, residual=self.residual,
            entropy_tail=self.entropy_tail,
            labels=(labels[0], labels[1]),
        )


def marginalize(joint, coords):
    """Aggregate a joint table onto a subset of its coordinates.

    Marginalizing onto all coordinates returns the table unchanged.
    """
    if isinstance(joint, (JointPmf3, JointPmf2)):
        return joint.marginal(coords)
    raise TypeError(
        "marginalize expects a JointPmf3 or JointPmf2, got %s"
        % type(joint).__name__
    )


def check_log_moment_bound(kernel, cap=DEFAULT_LOG_MOMENT_CAP):
    """Supremum over rows of the second log-moment, in bits squared.

    Raises when any row diverges or the supremum exceeds ``cap``.
    """
    worst = 0.0
    for r in kernel.distinct_rows():
        m = r.log_moment()
        if not math.isfinite(m):
            raise BoundViolationError(
                "a kernel row has a divergent log-moment"
            )
        worst = max(worst, m)
    if worst > cap:
        raise BoundViolationError(
            "kernel log-moment %.6g exceeds the cap %.6g" % (worst, cap)
        )
    return worst


class MarkovTriple:
    """The chain law p(x, y, z) = p(x | y) p(y, z).

    Construction verifies that every side atom has a kernel row, that
    the row log-moments are uniformly bounded, and that the joint
    entropy is finite.  Pointwise log-masses are always computed from
    the factored form, never from a truncated table.
    """

    def __init__(
        self,
        side,
        kernel,
        tail_eps=DEFAULT_TAIL_EPS,
        log_moment_cap=DEFAULT_LOG_MOMENT_CAP,
        table_cap=DEFAULT_TABLE_CAP,
    ):
        if not isinstance(side, JointPmf2):
            raise InvalidDistributionError("field 'side' is not a pair law")
        if not isinstance(kernel, Kernel):
            raise InvalidDistributionError("field 'kernel' is not a kernel")
        self.side = side
        self.kernel = kernel
        self.tail_eps = float(tail_eps)
        self.table_cap = int(table_cap)
        self.C = check_log_moment_bound(kernel, log_moment_cap)
        ys, _, _, _ = side.tabulate(self.tail_eps, self.table_cap)
        for y in np.unique(ys).tolist():
            if not kernel.has_row(y):
                raise MissingKernelRowError(
                    "side atom y=%d has no kernel row and the kernel "
                    "has no default" % y
                )
        h_side = side.entropy()
        if not math.isfinite(h_side):
            raise InvalidDistributionError(
                "side entropy is not finite; the joint entropy must be"
            )
        self._induced = None
        self._entropies = None

    def log2_mass(self, xs, ys, zs):
        """Exact elementwise log2 p(x, y, z); never table-truncated."""
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        side = self.side.log2_mass(ys, zs)
        out = np.full(side.shape, -math.inf, dtype=np.float64)
        live = np.isfinite(side)
        # symbols with zero side mass may also lack kernel rows
        if np.any(live):
            out[live] = self.kernel.log2_cond_mass(xs[live], ys[live])
            out[live] += side[live]
        return out

    def mass(self, x, y, z):
        pyz = self.side.mass(y, z)
        if pyz == 0.0:
            return 0.0
        return self.kernel.row(y).mass(x) * pyz

    def mass_vec(self, xs, ys, zs):
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        side = self.side.mass_vec(ys, zs)
        out = np.zeros(side.shape, dtype=np.float64)
        live = side > 0.0
        if np.any(live):
            out[live] = self.kernel.cond_mass_vec(xs[live], ys[live])
            out[live] *= side[live]
        return out

    def induced_joint(self):
        """Truncated joint table with certified residual and tail bound."""
        if self._induced is not None:
            return self._induced
        ys, zs, pyz, side_res = self.side.tabulate(
            self.tail_eps, self.table_cap
        )
        xs_parts, ys_parts, zs_parts, p_parts = [], [], [], []
        residual = side_res
        tail_h = getattr(self.side, "entropy_tail", 0.0)
        tail_h += side_res * (0.5 + self.C)
        row_cache = {}
        for y, z, p in zip(ys.tolist(), zs.tolist(), pyz.tolist()):
            if y not in row_cache:
                row_cache[y] = self.kernel.row(y).tabulate(
                    self.tail_eps, self.table_cap
                )
            t = row_cache[y]
            xs_parts.append(t.support)
            ys_parts.append(np.full(t.support.size, y, dtype=np.int64))
            zs_parts.append(np.full(t.support.size, z, dtype=np.int64))
            p_parts.append(p * t.probs)
            residual += p * t.residual
            tail_h += p * (t.entropy_tail + t.residual)
        x_all = np.concatenate(xs_parts)
        if x_all.size > self.table_cap:
            raise TruncationError(
                "induced joint has %d atoms, cap is %d"
                % (x_all.size, self.table_cap)
            )
        self._induced = JointPmf3(
            x_all,
            np.concatenate(ys_parts),
            np.concatenate(zs_parts),
            np.concatenate(p_parts),
            residual=float(residual),
            entropy_tail=float(tail_h),
        )
        return self._induced

    def entropy(self, coords="XYZ"):
        """Entropy of the named coordinate subset, in bits."""
        if self._entropies is None:
            self._entropies = {}
        key = "".join(c for c in "XYZ" if c in coords.upper())
        if not key:
            raise ValueError("coords must name a subset of X, Y, Z")
        if key not in self._entropies:
            if key == "YZ":
                value = self.side.entropy()
            elif key == "Y":
                value = self.side.marginal_first().entropy()
            elif key == "Z":
                value = self.side.marginal_second().entropy()
            elif key == "XYZ":
                value = self.induced_joint().entropy()
            else:
                value = self.induced_joint().marginal(key).entropy()
            self._entropies[key] = value
        return self._entropies[key]

    def subset_log2_mass(self, coords):
        """Log-mass function for a coordinate subset.

        XYZ, YZ, XY, Y, Z, and X-for-homogeneous-kernels are exact;
        XZ and heterogeneous X fall back to the truncated table, whose
        masses are within the declared residual of the true values.
        """
        key = "".join(c for c in "XYZ" if c in coords.upper())
        if key == "XYZ":
            return self.log2_mass
        if key == "YZ":
            return self.side.log2_mass
        if key == "XY":
            p_y = self.side.marginal_first()

            def f(xs, ys):
                return self.kernel.log2_cond_mass(xs, ys) + p_y.log2_mass(ys)

            return f
        if key == "Y":
            return self.side.marginal_first().log2_mass
        if key == "Z":
            return self.side.marginal_second().log2_mass
        if key == "X":
            if self.kernel.is_homogeneous():
                return self.kernel.distinct_rows()[0].log2_mass
            return self.induced_joint().marginal("X").log2_mass
        if key == "XZ":
            table = self.induced_joint().marginal("XZ")
            return table.log2_mass
        raise ValueError("coords must name a subset of X, Y, Z")

    def pair_model(self, coords):
        key = "".join(c for c in "XYZ" if c in coords.upper())
        if key not in ("XY", "YZ", "XZ"):
            raise ValueError("pair coords must be XY, YZ, or XZ")
        return PairModel(
            labels=(key[0], key[1]),
            log2_mass=self.subset_log2_mass(key),
            entropy_both=self.entropy(key),
            entropy_first=self.entropy(key[0]),
            entropy_second=self.entropy(key[1]),
        )

    def single_model(self, coord):
        key = coord.upper()
        if key not in ("X", "Y", "Z"):
            raise ValueError("single coord must be X, Y, or Z")
        return SingleModel(
            label=key,
            log2_mass=self.subset_log2_mass(key),
            entropy=self.entropy(key),
        )

    def xy_joint(self):
        """The (X, Y) pair law, factored through the kernel."""
        return FactoredJoint2(
            self.kernel, self.side.marginal_first(), labels=("X", "Y")
        )

    def to_json(self):
        return {"side": self.side.to_json(), "kernel": self.kernel.to_json()}

    @staticmethod
    def from_json(obj):
        if not isinstance(obj, dict):
            raise InvalidDistributionError(
                "model file must hold a JSON object"
            )
        if "side" not in obj:
            if "kind" in obj:
                raise InvalidDistributionError(
                    "this file holds a plain law; the command wants a "
                    "chain model with 'side' and 'kernel' fields"
                )
            raise InvalidDistributionError("model is missing field 'side'")
        if "kernel" not in obj:
            raise InvalidDistributionError("model is missing field 'kernel'")
        side = JointPmf2.from_json(obj["side"])
        kernel = Kernel.from_json(obj["kernel"])
        kwargs = {}
        if "tail_eps" in obj:
            kwargs["tail_eps"] = float(obj["tail_eps"])
        if "log_moment_cap" in obj:
            kwargs["log_moment_cap"] = float(obj["log_moment_cap"])
        return MarkovTriple(side, kernel, **kwargs)


def induced_joint(triple):
    """Truncated table for the full chain law; see MarkovTriple."""
    return triple.induced_joint()


def mass(triple, x, y, z):
    """Exact pointwise mass p(x | y) p(y, z), defined for any symbols."""
    return triple.mass(x, y, z)


def load_pmf(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidDistributionError(
                "%s is not valid JSON: %s" % (path, exc)
            ) from None
    if isinstance(obj, dict) and ("side" in obj or "kernel" in obj):
        raise InvalidDistributionError(
            "%s holds a chain model (side law plus kernel); "
            "this command wants a plain law file" % path
        )
    return Pmf.from_json(obj)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidDistributionError(
                "%s is not valid JSON: %s" % (path, exc)
            ) from None
    return MarkovTriple.from_json(obj)
