"""Unified typicality over countable alphabets.

Scores empirical types against product-form Markov chain laws, with
exact information measures, seeded Monte Carlo harnesses, and a small
CLI.  The hot sampling kernels run on a compiled backend when the
extension built, with a pure NumPy fallback that produces identical
bits; ``typlab.backend.backend_name()`` reports which one is active.
"""

from .backend import backend_name
from .empirical import (
    EmpiricalType,
    SequenceTriple,
    empirical_type,
    load_sequences,
    loglik_gap,
    loglik_gap_decomposed,
    write_sequences,
)
from .errors import (
    BoundViolationError,
    InvalidDistributionError,
    MissingKernelRowError,
    SequenceFormatError,
    TruncationError,
    TyplabError,
    UnsupportedSamplingError,
)
from .experiments import (
    ExperimentConfig,
    SweepResult,
    SweepRow,
    TrialRecord,
    check_lemma4,
    run_config,
    run_corollary1,
    run_lemma2,
    run_lemma3,
    run_lemma5,
    run_semicontinuity,
    run_theorem1,
    shortcut_family,
    wilson_interval,
    write_sweep_csv,
)
from .fixtures import fixture_path, load_fixture
from .measures import (
    conditional_entropy,
    conditional_kl,
    entropy,
    kl_divergence,
    pinsker_gap,
    variational_distance,
)
from .model import (
    DiagJoint2,
    ExplicitJoint2,
    ExplicitPmf,
    FactoredJoint2,
    GeometricPmf,
    JointPmf2,
    JointPmf3,
    Kernel,
    MarkovTriple,
    Pmf,
    ZipfPmf,
    check_log_moment_bound,
    induced_joint,
    load_model,
    load_pmf,
    marginalize,
)
from .sampling import (
    RngStream,
    sample_conditional,
    sample_iid_pair,
    sample_joint_pair,
    sample_pmf,
)
from .typicality import (
    TypicalityReport,
    WeakReport,
    consistency_check,
    is_typical,
    two_term_score,
    unified_score1,
    unified_score2,
    unified_score3,
    weak_score,
)

__version__ = "0.1.0"

__all__ = [
    "BoundViolationError",
    "DiagJoint2",
    "EmpiricalType",
    "ExperimentConfig",
    "ExplicitJoint2",
    "ExplicitPmf",
    "FactoredJoint2",
    "GeometricPmf",
    "InvalidDistributionError",
    "JointPmf2",
    "JointPmf3",
    "Kernel",
    "MarkovTriple",
    "MissingKernelRowError",
    "Pmf",
    "RngStream",
    "SequenceFormatError",
    "SequenceTriple",
    "SweepResult",
    "SweepRow",
    "TrialRecord",
    "TruncationError",
    "TypicalityReport",
    "TyplabError",
    "UnsupportedSamplingError",
    "WeakReport",
    "ZipfPmf",
    "backend_name",
    "check_lemma4",
    "check_log_moment_bound",
    "conditional_entropy",
    "conditional_kl",
    "consistency_check",
    "empirical_type",
    "entropy",
    "fixture_path",
    "induced_joint",
    "is_typical",
    "kl_divergence",
    "load_fixture",
    "load_model",
    "load_pmf",
    "load_sequences",
    "loglik_gap",
    "loglik_gap_decomposed",
    "marginalize",
    "pinsker_gap",
    "run_config",
    "run_corollary1",
    "run_lemma2",
    "run_lemma3",
    "run_lemma5",
    "run_semicontinuity",
    "run_theorem1",
    "sample_conditional",
    "sample_iid_pair",
    "sample_joint_pair",
    "sample_pmf",
    "shortcut_family",
    "two_term_score",
    "unified_score1",
    "unified_score2",
    "unified_score3",
    "variational_distance",
    "weak_score",
    "wilson_interval",
    "write_sequences",
    "write_sweep_csv",
]
