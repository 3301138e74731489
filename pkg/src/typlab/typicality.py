"""Unified typicality scores, membership predicates, and baselines.

The full three-variable score sums one divergence and seven absolute
entropy differences, one per nonempty coordinate subset.  The marginal
variants drop every term naming an excluded coordinate: four terms for
a pair, two for a single coordinate.  The two-term shortcut keeps only
the divergence and the joint entropy difference, and the weak-style
baseline takes the maximum per-subset log-likelihood deviation.

Membership at a threshold uses <=, so the boundary is inside the set.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .empirical import EmpiricalType, SequenceTriple, TypeView
from .errors import TyplabError
from .measures import kl_divergence
from .model import JointPmf2, JointPmf3, MarkovTriple, PairModel, Pmf, SingleModel

SUBSETS3 = ("XYZ", "XY", "YZ", "XZ", "X", "Y", "Z")


@dataclass
class TypicalityReport:
    """Itemized score: one divergence plus labeled entropy terms.

    ``total`` is always the plain sum of the itemized terms.  When a
    threshold was applied, ``member`` records the <= comparison;
    otherwise ``threshold`` and ``member`` are None.
    """

    variant: str
    divergence_term: float
    entropy_terms: list = field(default_factory=list)
    total: float = 0.0
    threshold: float = None
    member: bool = None

    def to_json(self):
        terms = {"D": self.divergence_term}
        for label, value in self.entropy_terms:
            terms[label] = value
        return {
            "variant": self.variant,
            "total": self.total,
            "threshold": self.threshold,
            "member": self.member,
            "terms": terms,
        }


@dataclass
class WeakReport:
    """Per-subset log-likelihood deviations; total is their maximum."""

    variant: str
    subset_terms: list = field(default_factory=list)
    total: float = 0.0
    threshold: float = None
    member: bool = None

    def to_json(self):
        return {
            "variant": self.variant,
            "total": self.total,
            "threshold": self.threshold,
            "member": self.member,
            "terms": {label: value for label, value in self.subset_terms},
        }


def _model_subset_entropy(p, coords):
    if isinstance(p, MarkovTriple):
        return p.entropy(coords)
    if isinstance(p, JointPmf3):
        return p.subset_entropy(coords)
    raise TypeError(
        "expected a MarkovTriple or JointPmf3, got %s" % type(p).__name__
    )


def _finish(report, threshold):
    if threshold is not None:
        if not threshold > 0.0:
            raise ValueError("threshold must be positive")
        report.threshold = float(threshold)
        report.member = bool(report.total <= threshold)
    return report


def unified_score3(etype, p, threshold=None):
    """Eight-term score of a joint type against a three-variable law."""
    if not isinstance(etype, EmpiricalType):
        raise TypeError("expected an EmpiricalType")
    div = kl_divergence(etype, p)
    terms = []
    for coords in SUBSETS3:
        part = etype if coords == "XYZ" else etype.marginal(coords)
        dh = abs(part.entropy() - _model_subset_entropy(p, coords))
        terms.append((coords, dh))
    total = math.fsum([div] + [v for _, v in terms])
    return _finish(
        TypicalityReport("unified3", div, terms, total), threshold
    )


def _pair_model_of(p):
    if isinstance(p, PairModel):
        return p
    if isinstance(p, JointPmf2):
        return p.pair_model()
    raise TypeError(
        "expected a JointPmf2 or PairModel, got %s" % type(p).__name__
    )


def unified_score2(ptype, p, threshold=None):
    """Four-term score of a pair type: every X-naming term is dropped."""
    if not (isinstance(ptype, TypeView) and len(ptype.labels) == 2):
        raise TypeError("expected a two-coordinate type")
    model = _pair_model_of(p)
    if tuple(model.labels) != tuple(ptype.labels):
        raise ValueError(
            "type labels %r do not match model labels %r"
            % (ptype.labels, model.labels)
        )
    div = kl_divergence(ptype, model.log2_mass)
    both = "".join(ptype.labels)
    terms = [
        (both, abs(ptype.entropy() - model.entropy_both)),
        (
            ptype.labels[0],
            abs(
                ptype.marginal(ptype.labels[0]).entropy()
                - model.entropy_first
            ),
        ),
        (
            ptype.labels[1],
            abs(
                ptype.marginal(ptype.labels[1]).entropy()
                - model.entropy_second
            ),
        ),
    ]
    total = math.fsum([div] + [v for _, v in terms])
    return _finish(
        TypicalityReport("unified2", div, terms, total), threshold
    )


def unified_score1(stype, p, threshold=None):
    """Two-term score of a single-coordinate type."""
    if not (isinstance(stype, TypeView) and len(stype.labels) == 1):
        raise TypeError("expected a one-coordinate type")
    if isinstance(p, SingleModel):
        log2_mass, h = p.log2_mass, p.entropy
    elif isinstance(p, Pmf):
        log2_mass, h = p.log2_mass, p.entropy()
    else:
        raise TypeError(
            "expected a Pmf or SingleModel, got %s" % type(p).__name__
        )
    div = kl_divergence(stype, log2_mass)
    terms = [(stype.labels[0], abs(stype.entropy() - h))]
    total = math.fsum([div] + [v for _, v in terms])
    return _finish(
        TypicalityReport("unified1", div, terms, total), threshold
    )


def two_term_score(etype, p):
    """Divergence plus joint entropy difference, nothing else."""
    if not isinstance(etype, EmpiricalType):
        raise TypeError("expected an EmpiricalType")
    div = kl_divergence(etype, p)
    dh = abs(etype.entropy() - _model_subset_entropy(p, "XYZ"))
    return math.fsum([div, dh])


def two_term_report(etype, p, threshold=None):
    div = kl_divergence(etype, p)
    dh = abs(etype.entropy() - _model_subset_entropy(p, "XYZ"))
    total = math.fsum([div, dh])
    return _finish(
        TypicalityReport("two_term", div, [("XYZ", dh)], total), threshold
    )


def _subset_log2_fn(p, coords):
    if isinstance(p, MarkovTriple):
        return p.subset_log2_mass(coords)
    if isinstance(p, JointPmf3):
        part = p if coords == "XYZ" else p.marginal(coords)
        return part.log2_mass
    raise TypeError(
        "expected a MarkovTriple or JointPmf3, got %s" % type(p).__name__
    )


def weak_report(etype, p, threshold=None):
    """Per-subset |−n⁻¹ log2 p(subsequence) − H(P_S)| deviations.

    Computed from the type: the log-likelihood of the observed subset
    subsequence is the q-weighted sum of subset log-masses.
    """
    if not isinstance(etype, EmpiricalType):
        raise TypeError("expected an EmpiricalType")
    terms = []
    for coords in SUBSETS3:
        part = etype if coords == "XYZ" else etype.marginal(coords)
        log2p = _subset_log2_fn(p, coords)(*part.coords)
        live = part.counts > 0
        if not np.all(np.isfinite(log2p[live])):
            terms.append((coords, math.inf))
            continue
        qs = part.counts[live] / float(part.n)
        avg = -math.fsum((qs * log2p[live]).tolist())
        terms.append(
            (coords, abs(avg - _model_subset_entropy(p, coords)))
        )
    total = max(v for _, v in terms)
    report = WeakReport("weak", terms, total)
    if threshold is not None:
        if not threshold > 0.0:
            raise ValueError("threshold must be positive")
        report.threshold = float(threshold)
        report.member = bool(total <= threshold)
    return report


def weak_score(etype, p):
    """Maximum of the seven per-subset deviations."""
    return weak_report(etype, p).total


def _coerce_type3(obj):
    if isinstance(obj, SequenceTriple):
        return EmpiricalType.from_sequences(obj)
    if isinstance(obj, EmpiricalType):
        return obj
    raise TypeError(
        "expected a SequenceTriple or EmpiricalType, got %s"
        % type(obj).__name__
    )


def is_typical(obj, p, threshold, variant="unified3"):
    """Membership test at a threshold; returns (member, report)."""
    if variant == "unified3":
        report = unified_score3(_coerce_type3(obj), p, threshold)
    elif variant == "two_term":
        report = two_term_report(_coerce_type3(obj), p, threshold)
    elif variant == "weak":
        report = weak_report(_coerce_type3(obj), p, threshold)
    elif variant == "unified2":
        if isinstance(obj, (SequenceTriple, EmpiricalType)):
            model = _pair_model_of(p)
            obj = _coerce_type3(obj).marginal("".join(model.labels))
        report = unified_score2(obj, p, threshold)
    elif variant == "unified1":
        if isinstance(obj, (SequenceTriple, EmpiricalType)):
            if not isinstance(p, SingleModel):
                raise TypeError(
                    "a labeled SingleModel is needed to pick the "
                    "coordinate out of a sequence triple"
                )
            obj = _coerce_type3(obj).marginal(p.label)
        report = unified_score1(obj, p, threshold)
    else:
        raise TyplabError(
            "variant must be one of unified3, unified2, unified1, "
            "two_term, weak; got %r" % variant
        )
    return report.member, report


def consistency_check(seqs, p, gamma):
    """True unless joint membership fails to project to a marginal set.

    Membership in the three-variable set at gamma must imply
    membership in each pair set at the same gamma.
    """
    etype = _coerce_type3(seqs)
    member3, _ = is_typical(etype, p, gamma, "unified3")
    if not member3:
        return True
    for coords in ("XY", "YZ", "XZ"):
        member2, _ = is_typical(
            etype.marginal(coords), p.pair_model(coords), gamma, "unified2"
        )
        if not member2:
            return False
    return True
