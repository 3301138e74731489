"""Monte Carlo and deterministic harnesses for the chain-law claims.

Each runner draws per-trial sequences from counter-based streams keyed
by the trial index, so a sweep is a pure function of its configuration
and seed: reruns, worker counts, and scheduling cannot change a byte
of the output.

Conditioning is by rejection: candidate (y, z) pairs are drawn from
the side law and filtered through the marginal typicality gate.  The
conditional-acceptance runner also draws its pairs jointly; the (x, y)
part then follows the product law of the pair exactly, while the
conditioning event keeps positive probability for correlated sides.
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .empirical import (
    EmpiricalType,
    SequenceTriple,
    loglik_gap,
    loglik_gap_decomposed,
)
from .errors import TyplabError
from .measures import (
    conditional_entropy,
    conditional_kl,
    variational_distance,
)
from .model import (
    DEFAULT_TABLE_CAP,
    ExplicitJoint2,
    JointPmf3,
    MarkovTriple,
    load_model,
)
from .sampling import RngStream, sample_conditional, sample_iid_pair
from .typicality import (
    two_term_score,
    unified_score1,
    unified_score2,
    unified_score3,
)

_LN2 = math.log(2.0)

VARIANTS = (
    "theorem1",
    "corollary1",
    "lemma2",
    "lemma3",
    "lemma5",
    "shortcut",
    "semicontinuity",
)

CSV_HEADER = (
    "variant,n,gamma,eta,trials,accepted,successes,rate,ci_low,ci_high,seed"
)


def wilson_interval(successes, trials, z=1.96):
    """Wilson 95% score interval; (0, 1) when there are no trials."""
    if trials == 0:
        return 0.0, 1.0
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(
            phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials)
        )
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class ExperimentConfig:
    """One sweep: a model reference, grids, thresholds, and a seed.

    ``gamma`` is the membership threshold; for the concentration
    variants it plays the epsilon role.  When ``eta`` is None the
    variant default applies: gamma / 2 for the acceptance gates, and
    the gamma**2 / 32 preset for the concentration runs.
    """

    model: object
    n_grid: list
    gamma: float
    trials: int
    seed: int
    variant: str
    eta: float = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise TyplabError(
                "field 'variant' must be one of %s, got %r"
                % (", ".join(VARIANTS), self.variant)
            )
        self.n_grid = [int(n) for n in self.n_grid]
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise TyplabError(
                "field 'n_grid' must be a nonempty list of positive "
                "integers"
            )
        if any(
            self.n_grid[i] >= self.n_grid[i + 1]
            for i in range(len(self.n_grid) - 1)
        ):
            raise TyplabError("field 'n_grid' must be strictly increasing")
        if not self.gamma > 0.0:
            raise TyplabError("field 'gamma' must be positive")
        if self.eta is not None and not self.eta > 0.0:
            raise TyplabError("field 'eta' must be positive when given")
        if int(self.trials) < 1:
            raise TyplabError("field 'trials' must be at least 1")
        self.trials = int(self.trials)
        self.seed = int(self.seed)
        if self.seed < 0:
            raise TyplabError("field 'seed' must be nonnegative")

    def resolved_eta(self):
        if self.eta is not None:
            return float(self.eta)
        if self.variant in ("lemma2", "lemma5"):
            return self.gamma * self.gamma / 32.0
        return self.gamma / 2.0

    def resolved_model(self):
        if isinstance(self.model, MarkovTriple):
            return self.model
        return load_model(self.model)

    def to_json(self):
        return {
            "model": self.model
            if isinstance(self.model, str)
            else self.model.to_json(),
            "n_grid": list(self.n_grid),
            "gamma": self.gamma,
            "eta": self.eta,
            "trials": self.trials,
            "seed": self.seed,
            "variant": self.variant,
        }

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise TyplabError("config must be a JSON object")
        missing = [
            key
            for key in ("model", "n_grid", "gamma", "trials", "seed",
                        "variant")
            if key not in obj
        ]
        if missing:
            raise TyplabError(
                "config is missing field%s %s"
                % ("s" if len(missing) > 1 else "", ", ".join(missing))
            )
        model = obj["model"]
        if isinstance(model, dict):
            model = MarkovTriple.from_json(model)
        return cls(
            model=model,
            n_grid=obj["n_grid"],
            gamma=float(obj["gamma"]),
            eta=None if obj.get("eta") is None else float(obj["eta"]),
            trials=obj["trials"],
            seed=obj["seed"],
            variant=obj["variant"],
        )

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise TyplabError(
                    "%s is not valid JSON: %s" % (path, exc)
                ) from None
        return cls.from_json(obj)


@dataclass
class TrialRecord:
    """Outcome of one trial; success is meaningful only if accepted."""

    variant: str
    n: int
    gamma: float
    eta: float
    trial_id: int
    conditioning_accepted: bool
    success: bool
    score_total: float
    seed: int
    stream_id: int


@dataclass
class SweepRow:
    """One aggregated line of the output CSV."""

    variant: str
    n: int
    gamma: float
    eta: float
    trials: int
    accepted: int
    successes: int
    rate: float
    ci_low: float
    ci_high: float
    seed: int
    flagged: bool = False

    def csv_fields(self):
        return [
            self.variant,
            repr(self.n),
            repr(self.gamma),
            repr(self.eta),
            repr(self.trials),
            repr(self.accepted),
            repr(self.successes),
            repr(self.rate),
            repr(self.ci_low),
            repr(self.ci_high),
            repr(self.seed),
        ]

    def to_json(self):
        return {
            "variant": self.variant,
            "n": self.n,
            "gamma": self.gamma,
            "eta": self.eta,
            "trials": self.trials,
            "accepted": self.accepted,
            "successes": self.successes,
            "rate": self.rate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "seed": self.seed,
            "flagged": self.flagged,
        }


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    records: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def flagged(self):
        return any(row.flagged for row in self.rows)


def worker_count():
    """Worker cap from TYPLAB_WORKERS, defaulting to the CPU count."""
    raw = os.environ.get("TYPLAB_WORKERS", "").strip()
    if raw:
        try:
            workers = int(raw)
            if workers < 1:
                raise ValueError
        except ValueError:
            raise TyplabError(
                "TYPLAB_WORKERS must be a positive integer, got %r" % raw
            ) from None
        return workers
    return min(os.cpu_count() or 1, 8)


def _map_trials(fn, args_list):
    """Run trials across workers; results keep submission order."""
    workers = worker_count()
    if workers == 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))


def _aggregate(variant, config, eta, per_n_outcomes):
    """Fold per-trial outcomes into sorted rows plus flags."""
    rows = []
    for n in config.n_grid:
        outcomes = per_n_outcomes[n]
        accepted = sum(1 for acc, _ in outcomes if acc)
        successes = sum(1 for acc, suc in outcomes if acc and suc)
        if accepted:
            rate = successes / accepted
            flagged = False
        else:
            rate = 0.0
            flagged = True
        lo, hi = wilson_interval(successes, accepted)
        rows.append(
            SweepRow(
                variant=variant,
                n=n,
                gamma=config.gamma,
                eta=eta,
                trials=config.trials,
                accepted=accepted,
                successes=successes,
                rate=rate,
                ci_low=lo,
                ci_high=hi,
                seed=config.seed,
                flagged=flagged,
            )
        )
    return rows


def _observed_row_entropy(triple, ytype):
    return math.fsum(
        (cnt / ytype.n) * triple.kernel.row(int(y)).entropy()
        for y, cnt in zip(ytype.coords[0].tolist(), ytype.counts.tolist())
    )


def run_theorem1(config, rng=None):
    """Acceptance-gated success rates for the joint typicality claim.

    Per trial: draw (y, z) i.i.d. from the side law, accept when the
    pair is eta-typical, then draw X through the kernel and test the
    triple at gamma.  Also replays the projection property on every
    member triple and evaluates the side-entropy bound pair on every
    accepted trial (see diagnostics).
    """
    triple = config.resolved_model()
    eta = config.resolved_eta()
    seed = config.seed if rng is None else int(rng)
    side_model = triple.pair_model("YZ")
    rhs = (0.5 + triple.C) * math.sqrt(2.0 * eta * _LN2)
    e_row_h = conditional_entropy(triple, "YZ")
    gamma = config.gamma
    pair_models = {k: triple.pair_model(k) for k in ("XY", "YZ", "XZ")}

    def one(args):
        n, trial = args
        stream = RngStream(seed, trial)
        y, z = sample_iid_pair(triple.side, n, stream)
        pair_type = EmpiricalType.from_sequences(
            SequenceTriple(np.zeros(n, dtype=np.int64), y, z)
        ).marginal("YZ")
        rep2 = unified_score2(pair_type, side_model)
        accepted = rep2.total <= eta
        if not accepted:
            record = TrialRecord(
                config.variant, n, gamma, eta, trial, False, False,
                rep2.total, seed, trial,
            )
            return record, None
        x = sample_conditional(triple.kernel, y, stream)
        etype = EmpiricalType.from_sequences(SequenceTriple(x, y, z))
        rep3 = unified_score3(etype, triple)
        success = rep3.total <= gamma
        projection_ok = True
        if success:
            for coords, model in pair_models.items():
                sub = unified_score2(etype.marginal(coords), model)
                if sub.total > gamma:
                    projection_ok = False
        lhs = abs(
            _observed_row_entropy(triple, etype.marginal("Y")) - e_row_h
        )
        record = TrialRecord(
            config.variant, n, gamma, eta, trial, True, success,
            rep3.total, seed, trial,
        )
        return record, (projection_ok, lhs)

    records = []
    per_n = {}
    diagnostics = {
        "projection_violations": 0,
        "side_entropy_pairs": [],
        "side_entropy_rhs": rhs,
    }
    for n in config.n_grid:
        results = _map_trials(
            one, [(n, t) for t in range(config.trials)]
        )
        outcomes = []
        for record, extra in results:
            records.append(record)
            outcomes.append(
                (record.conditioning_accepted, record.success)
            )
            if extra is not None:
                projection_ok, lhs = extra
                if not projection_ok:
                    diagnostics["projection_violations"] += 1
                diagnostics["side_entropy_pairs"].append(
                    (n, record.trial_id, lhs, rhs)
                )
        per_n[n] = outcomes
    rows = _aggregate(config.variant, config, eta, per_n)
    return SweepResult(rows=rows, records=records, diagnostics=diagnostics)


def run_corollary1(config, rng=None):
    """Conditional success rates for the pair projection claim.

    Pairs are drawn jointly from the side law so the conditioning
    event keeps positive probability; the (x, y) part still follows
    the product pair law exactly.  A trial is accepted when z is
    eta-typical and (y, z) is eta-typical; success is the (x, z) pair
    test at gamma.  The diagnostics count trials whose full triple was
    gamma-typical: successes can never undercut that count.
    """
    triple = config.resolved_model()
    eta = config.resolved_eta()
    seed = config.seed if rng is None else int(rng)
    gamma = config.gamma
    side_model = triple.pair_model("YZ")
    z_model = triple.single_model("Z")
    xz_model = triple.pair_model("XZ")

    def one(args):
        n, trial = args
        stream = RngStream(seed, trial)
        y, z = sample_iid_pair(triple.side, n, stream)
        x = sample_conditional(triple.kernel, y, stream)
        etype = EmpiricalType.from_sequences(SequenceTriple(x, y, z))
        rep1 = unified_score1(etype.marginal("Z"), z_model)
        rep2 = unified_score2(etype.marginal("YZ"), side_model)
        accepted = rep1.total <= eta and rep2.total <= eta
        if not accepted:
            record = TrialRecord(
                config.variant, n, gamma, eta, trial, False, False,
                max(rep1.total, rep2.total), seed, trial,
            )
            return record, None
        repxz = unified_score2(etype.marginal("XZ"), xz_model)
        success = repxz.total <= gamma
        rep3 = unified_score3(etype, triple)
        record = TrialRecord(
            config.variant, n, gamma, eta, trial, True, success,
            repxz.total, seed, trial,
        )
        return record, bool(rep3.total <= gamma)

    records = []
    per_n = {}
    diagnostics = {"triple_typical": {n: 0 for n in config.n_grid}}
    for n in config.n_grid:
        results = _map_trials(
            one, [(n, t) for t in range(config.trials)]
        )
        outcomes = []
        for record, triple_ok in results:
            records.append(record)
            outcomes.append(
                (record.conditioning_accepted, record.success)
            )
            if triple_ok:
                diagnostics["triple_typical"][n] += 1
        per_n[n] = outcomes
    rows = _aggregate(config.variant, config, eta, per_n)
    return SweepResult(rows=rows, records=records, diagnostics=diagnostics)


def run_lemma2(config, rng=None):
    """Concentration of the joint type around the chain law.

    gamma plays the epsilon role; default eta is the epsilon**2 / 32
    preset.  Success means the variational distance between the joint
    type and the exact chain law stays within epsilon.
    """
    triple = config.resolved_model()
    eps = config.gamma
    eta = config.resolved_eta()
    seed = config.seed if rng is None else int(rng)
    side_model = triple.pair_model("YZ")

    def one(args):
        n, trial = args
        stream = RngStream(seed, trial)
        y, z = sample_iid_pair(triple.side, n, stream)
        pair_type = EmpiricalType.from_sequences(
            SequenceTriple(np.zeros(n, dtype=np.int64), y, z)
        ).marginal("YZ")
        rep2 = unified_score2(pair_type, side_model)
        accepted = rep2.total <= eta
        if not accepted:
            return TrialRecord(
                config.variant, n, eps, eta, trial, False, False,
                rep2.total, seed, trial,
            )
        x = sample_conditional(triple.kernel, y, stream)
        etype = EmpiricalType.from_sequences(SequenceTriple(x, y, z))
        v = variational_distance(etype, triple)
        return TrialRecord(
            config.variant, n, eps, eta, trial, True, v <= eps, v,
            seed, trial,
        )

    records = []
    per_n = {}
    for n in config.n_grid:
        results = _map_trials(one, [(n, t) for t in range(config.trials)])
        records.extend(results)
        per_n[n] = [
            (r.conditioning_accepted, r.success) for r in results
        ]
    rows = _aggregate(config.variant, config, eta, per_n)
    return SweepResult(rows=rows, records=records)


def run_lemma5(config, rng=None):
    """Both conditional-law indicator events, reported separately.

    Success in the per-trial record is their conjunction; the rows
    split the rate per event with variant suffixes -div and -ent.
    """
    triple = config.resolved_model()
    eps = config.gamma
    eta = config.resolved_eta()
    seed = config.seed if rng is None else int(rng)
    side_model = triple.pair_model("YZ")
    h_cond_model = conditional_entropy(triple, "YZ")

    def one(args):
        n, trial = args
        stream = RngStream(seed, trial)
        y, z = sample_iid_pair(triple.side, n, stream)
        pair_type = EmpiricalType.from_sequences(
            SequenceTriple(np.zeros(n, dtype=np.int64), y, z)
        ).marginal("YZ")
        rep2 = unified_score2(pair_type, side_model)
        accepted = rep2.total <= eta
        if not accepted:
            record = TrialRecord(
                config.variant, n, eps, eta, trial, False, False,
                rep2.total, seed, trial,
            )
            return record, None
        x = sample_conditional(triple.kernel, y, stream)
        etype = EmpiricalType.from_sequences(SequenceTriple(x, y, z))
        div = conditional_kl(etype, triple, "YZ")
        dh = abs(conditional_entropy(etype, "YZ") - h_cond_model)
        record = TrialRecord(
            config.variant, n, eps, eta, trial, True,
            div <= eps and dh <= eps, max(div, dh), seed, trial,
        )
        return record, (div <= eps, dh <= eps)

    records = []
    rows = []
    for n in config.n_grid:
        results = _map_trials(one, [(n, t) for t in range(config.trials)])
        accepted = 0
        div_ok = 0
        ent_ok = 0
        for record, events in results:
            records.append(record)
            if record.conditioning_accepted:
                accepted += 1
                div_ok += events[0]
                ent_ok += events[1]
        for suffix, wins in (("-div", div_ok), ("-ent", ent_ok)):
            lo, hi = wilson_interval(wins, accepted)
            rows.append(
                SweepRow(
                    variant=config.variant + suffix,
                    n=n,
                    gamma=eps,
                    eta=eta,
                    trials=config.trials,
                    accepted=accepted,
                    successes=wins,
                    rate=(wins / accepted) if accepted else 0.0,
                    ci_low=lo,
                    ci_high=hi,
                    seed=config.seed,
                    flagged=accepted == 0,
                )
            )
    return SweepResult(rows=rows, records=records)


def run_lemma3(config, rng=None):
    """Log-likelihood gap identity on sampled data, both forms.

    No acceptance gate: the identity holds for arbitrary conditioning
    sequences.  Success means the two independently computed forms
    agree within 1e-9.
    """
    triple = config.resolved_model()
    eta = config.resolved_eta()
    seed = config.seed if rng is None else int(rng)
    tol = 1e-9

    def one(args):
        n, trial = args
        stream = RngStream(seed, trial)
        y, z = sample_iid_pair(triple.side, n, stream)
        x = sample_conditional(triple.kernel, y, stream)
        seqs = SequenceTriple(x, y, z)
        direct = loglik_gap(seqs, triple)
        decomposed = loglik_gap_decomposed(seqs, triple)
        if math.isinf(direct) or math.isinf(decomposed):
            diff = 0.0 if direct == decomposed else math.inf
        else:
            diff = abs(direct - decomposed)
        return TrialRecord(
            config.variant, n, config.gamma, eta, trial, True,
            diff <= tol, diff, seed, trial,
        )

    records = []
    per_n = {}
    for n in config.n_grid:
        results = _map_trials(one, [(n, t) for t in range(config.trials)])
        records.extend(results)
        per_n[n] = [(True, r.success) for r in results]
    rows = _aggregate(config.variant, config, eta, per_n)
    return SweepResult(rows=rows, records=records)


def check_lemma4(y, z, model, eta):
    """Side-entropy deviation against its eta bound, for one pair.

    The pair must be eta-typical (that is the bound's hypothesis).
    Returns (lhs, rhs) with lhs the absolute q-versus-p weighted
    row-entropy difference and rhs = (0.5 + C) sqrt(2 eta ln 2).
    """
    if not isinstance(model, MarkovTriple):
        raise TypeError("expected a MarkovTriple")
    y = np.asarray(y, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    pair_type = EmpiricalType.from_sequences(
        SequenceTriple(np.zeros(y.size, dtype=np.int64), y, z)
    ).marginal("YZ")
    rep = unified_score2(pair_type, model.pair_model("YZ"))
    if rep.total > eta:
        raise TyplabError(
            "the (y, z) pair is not eta-typical (score %.6g > %.6g); "
            "the bound assumes typical conditioning" % (rep.total, eta)
        )
    ytype = pair_type.marginal("Y")
    lhs = abs(
        _observed_row_entropy(model, ytype)
        - conditional_entropy(model, "YZ")
    )
    rhs = (0.5 + model.C) * math.sqrt(2.0 * eta * _LN2)
    return lhs, rhs


@dataclass
class SemiRow:
    """One grid point of the semicontinuity demonstration."""

    m: int
    single_v: float
    single_h: float
    single_h_limit: float
    pair_v: float
    pair_joint_dh: float
    pair_marginal_dh: float

    def to_json(self):
        return {
            "m": self.m,
            "single_v": self.single_v,
            "single_h": self.single_h,
            "single_h_limit": self.single_h_limit,
            "pair_v": self.pair_v,
            "pair_joint_dh": self.pair_joint_dh,
            "pair_marginal_dh": self.pair_marginal_dh,
        }


def _h_binary(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def semicontinuity_single(m):
    """Closed forms for the point-mass family member at index m.

    The law keeps 1 - 1/m at zero and spreads 1/m uniformly over 2**m
    fresh symbols: variational distance to the point mass is 2/m while
    the entropy stays near 1 bit.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    return 2.0 / m, _h_binary(1.0 / m) + 1.0


def semicontinuity_pair(m, table_cap=DEFAULT_TABLE_CAP):
    """Tabulated two-variable family member at index m.

    Starts from the uniform pair on {0,1}^2 and moves 1/m of mass onto
    a fresh slab of m atoms sharing one first coordinate, so both the
    variational distance and the joint entropy difference vanish while
    the second-coordinate marginal entropy difference also vanishes.
    Returns (V, joint dH, marginal dH).
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if m + 4 > table_cap:
        raise TyplabError(
            "pair family at m=%d needs %d atoms, cap is %d"
            % (m, m + 4, table_cap)
        )
    keep = (1.0 - 1.0 / m) / 4.0
    slab = 1.0 / (m * float(m))
    first = np.concatenate(
        [
            np.array([0, 0, 1, 1], dtype=np.int64),
            np.full(m, 2, dtype=np.int64),
        ]
    )
    second = np.concatenate(
        [
            np.array([0, 1, 0, 1], dtype=np.int64),
            np.arange(2, m + 2, dtype=np.int64),
        ]
    )
    probs = np.concatenate(
        [np.full(4, keep), np.full(m, slab)]
    )
    perturbed = ExplicitJoint2(first, second, probs, labels=("A", "B"))
    base = ExplicitJoint2(
        [0, 0, 1, 1], [0, 1, 0, 1], [0.25] * 4, labels=("A", "B")
    )
    v = variational_distance(perturbed, base)
    joint_dh = abs(perturbed.entropy() - base.entropy())
    marginal_dh = abs(
        perturbed.marginal_second().entropy()
        - base.marginal_second().entropy()
    )
    return v, joint_dh, marginal_dh


def run_semicontinuity(m_grid=None):
    """Both families over the grid; see the row type for the columns."""
    if m_grid is None:
        m_grid = [2 ** k for k in range(1, 15)]
    m_grid = [int(m) for m in m_grid]
    if not m_grid or any(
        m_grid[i] >= m_grid[i + 1] for i in range(len(m_grid) - 1)
    ):
        raise TyplabError("m_grid must be strictly increasing")
    if m_grid[0] < 2:
        raise TyplabError("m_grid entries must be at least 2")
    rows = []
    for m in m_grid:
        v1, h1 = semicontinuity_single(m)
        v2, joint_dh, marg_dh = semicontinuity_pair(m)
        rows.append(
            SemiRow(
                m=m,
                single_v=v1,
                single_h=h1,
                single_h_limit=0.0,
                pair_v=v2,
                pair_joint_dh=joint_dh,
                pair_marginal_dh=marg_dh,
            )
        )
    return rows


def _quantize(probs, denom):
    """Largest-remainder rounding of a prob vector to counts / denom."""
    scaled = probs * denom
    counts = np.floor(scaled).astype(np.int64)
    short = denom - int(counts.sum())
    if short:
        order = np.argsort(-(scaled - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def shortcut_family(
    seed=20240811, t_grid=(0.1, 0.05, 0.01), n_directions=64,
    denom=10 ** 6,
):
    """Perturbation families pinned to two-term score levels.

    Around the uniform law on {0,1}^3, random zero-sum directions are
    scaled so the quantized type's two-term score lands at (or just
    under) each level t; the full eight-term score is then recorded.
    At the uniform center every entropy term is second order, so the
    eight-term total stays within a small constant multiple of t.
    Returns one row per t with the worst direction's scores.
    """
    base = np.full(8, 0.125)
    xs = np.array([a >> 2 for a in range(8)], dtype=np.int64)
    ys = np.array([(a >> 1) & 1 for a in range(8)], dtype=np.int64)
    zs = np.array([a & 1 for a in range(8)], dtype=np.int64)
    table = JointPmf3(xs, ys, zs, base)

    def exact_two_term(q):
        live = q > 0.0
        d = float(np.sum(q[live] * (np.log2(q[live]) - np.log2(0.125))))
        hq = float(-np.sum(q[live] * np.log2(q[live])))
        return d + abs(hq - 3.0)

    directions = []
    for i in range(n_directions):
        u = backend.uniforms(backend.derive_key(seed, i, 0), 0, 8) - 0.5
        u -= u.mean()
        norm = np.abs(u).max()
        if norm < 1e-3:
            continue
        directions.append(u / norm)

    rows = []
    for t in t_grid:
        worst_total = -1.0
        worst = None
        for i, d in enumerate(directions):
            lam_max = 0.9 * float(
                np.min(base[d < 0.0] / -d[d < 0.0])
            )
            target = min(0.99 * t, exact_two_term(base + lam_max * d))
            lo, hi = 0.0, lam_max
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if exact_two_term(base + mid * d) < target:
                    lo = mid
                else:
                    hi = mid
            lam = lo
            for _ in range(50):
                counts = _quantize(base + lam * d, denom)
                etype = EmpiricalType(xs, ys, zs, counts, denom)
                two = two_term_score(etype, table)
                if two <= t:
                    break
                lam *= 0.97
            else:
                raise TyplabError(
                    "could not pin the two-term score under %g" % t
                )
            total = unified_score3(etype, table).total
            if total > worst_total:
                worst_total = total
                worst = {
                    "t": t,
                    "direction": i,
                    "two_term": two,
                    "max_total": total,
                }
        rows.append(worst)
    return rows


def write_sweep_csv(results, path):
    """Write aggregated rows as CSV; byte-identical across reruns.

    Accepts one sweep result, a list of them, or a bare row list.
    Refuses empty input before touching the file.
    """
    rows = []
    if isinstance(results, SweepResult):
        rows = list(results.rows)
    elif isinstance(results, (list, tuple)):
        for item in results:
            if isinstance(item, SweepResult):
                rows.extend(item.rows)
            elif isinstance(item, SweepRow):
                rows.append(item)
            else:
                raise TypeError(
                    "expected sweep results or rows, got %s"
                    % type(item).__name__
                )
    else:
        raise TypeError(
            "expected sweep results or rows, got %s"
            % type(results).__name__
        )
    if not rows:
        raise ValueError("no rows to write")
    rows = sorted(rows, key=lambda r: (r.variant, r.n))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for row in rows:
        writer.writerow(row.csv_fields())
    data = buf.getvalue()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)
    return data


RUNNERS = {
    "theorem1": run_theorem1,
    "corollary1": run_corollary1,
    "lemma2": run_lemma2,
    "lemma3": run_lemma3,
    "lemma5": run_lemma5,
}


def run_config(config, rng=None):
    """Dispatch a rate-style sweep by its variant name."""
    if config.variant not in RUNNERS:
        raise TyplabError(
            "variant %r has a dedicated runner; use it directly"
            % config.variant
        )
    return RUNNERS[config.variant](config, rng)
