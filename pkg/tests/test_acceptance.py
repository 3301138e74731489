"""Full-scale acceptance gate.

One test per shipped guarantee, in a fixed order; `pytest -v` gives the
pass/fail line for each. Seeds, tolerances, and runtime ceilings are
frozen here on purpose: a change that moves any of these numbers is a
behavior change, not a refactor.
"""

import math
import os
import time

import numpy as np
import pytest

from typlab.empirical import (
    EmpiricalType,
    SequenceTriple,
    loglik_gap,
    loglik_gap_decomposed,
)
from typlab.experiments import (
    ExperimentConfig,
    run_corollary1,
    run_lemma2,
    run_lemma5,
    run_semicontinuity,
    run_theorem1,
    shortcut_family,
    write_sweep_csv,
)
from typlab.fixtures import load_fixture
from typlab.measures import (
    conditional_entropy,
    conditional_kl,
    kl_divergence,
    pinsker_gap,
)
from typlab.model import (
    ExplicitJoint2,
    ExplicitPmf,
    JointPmf3,
    Kernel,
    MarkovTriple,
)
from typlab.sampling import RngStream, sample_conditional, sample_iid_pair
from typlab.typicality import unified_score1, unified_score2, unified_score3

GAMMA = 0.25
ETA = 0.05
TRIALS = 1000
SEED = 7
N_GRID = [100, 1000, 10000]


def bsc_config(variant="theorem1", eta=ETA, n_grid=None):
    return ExperimentConfig(
        model=load_fixture("bsc_chain"),
        n_grid=N_GRID if n_grid is None else n_grid,
        gamma=GAMMA, trials=TRIALS, seed=SEED, eta=eta, variant=variant,
    )


@pytest.fixture(scope="module")
def bsc_sweep(tmp_path_factory):
    """The reference joint-typicality run, shared by three gates."""
    prev = os.environ.get("TYPLAB_WORKERS")
    os.environ["TYPLAB_WORKERS"] = "4"
    try:
        result = run_theorem1(bsc_config())
        path = tmp_path_factory.mktemp("sweep") / "bsc.csv"
        write_sweep_csv(result, path)
        blob = path.read_bytes()
    finally:
        if prev is None:
            os.environ.pop("TYPLAB_WORKERS", None)
        else:
            os.environ["TYPLAB_WORKERS"] = prev
    return result, blob


def interval_trend_ok(rows):
    """Nondecreasing up to interval overlap: only a later interval
    falling entirely below an earlier one counts as a violation."""
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if rows[j].ci_high < rows[i].ci_low:
                return False
    return True


def test_01_pinsker_gap_never_negative_at_scale():
    started = time.perf_counter()
    rng = np.random.default_rng(20240811)
    support = np.arange(50)
    total = 100_000
    chunk = 10_000
    violations = 0
    for _ in range(total // chunk):
        ks = rng.integers(2, 51, size=chunk)
        raw = rng.random((chunk, 2, 50)) + 1e-12
        for i in range(chunk):
            k = int(ks[i])
            a = raw[i, 0, :k]
            b = raw[i, 1, :k]
            q = ExplicitPmf(support[:k], a / a.sum())
            p = ExplicitPmf(support[:k], b / b.sum())
            if pinsker_gap(q, p) < 0.0:
                violations += 1
    elapsed = time.perf_counter() - started
    assert violations == 0
    assert elapsed < 10.0, "took %.1fs" % elapsed


def test_02_entropy_and_divergence_chain_identities():
    started = time.perf_counter()
    rng = np.random.default_rng(31337)
    grids = {}
    worst = 0.0
    for _ in range(10_000):
        shape = tuple(int(v) for v in rng.integers(2, 9, size=3))
        if shape not in grids:
            xs, ys, zs = np.meshgrid(
                np.arange(shape[0]), np.arange(shape[1]),
                np.arange(shape[2]), indexing="ij",
            )
            grids[shape] = (xs.ravel(), ys.ravel(), zs.ravel())
        xs, ys, zs = grids[shape]
        pa = rng.random(xs.size) + 1e-9
        pb = rng.random(xs.size) + 1e-9
        q = JointPmf3(xs, ys, zs, pa / pa.sum())
        p = JointPmf3(xs, ys, zs, pb / pb.sum())
        h_err = abs(
            q.subset_entropy("XYZ") - q.subset_entropy("YZ")
            - conditional_entropy(q, "YZ")
        )
        d_err = abs(
            kl_divergence(q, p)
            - kl_divergence(q.marginal("YZ"), p.marginal("YZ"))
            - conditional_kl(q, p, "YZ")
        )
        worst = max(worst, h_err, d_err)
    elapsed = time.perf_counter() - started
    assert worst <= 1e-9
    assert elapsed < 10.0, "took %.1fs" % elapsed


def test_03_likelihood_gap_forms_agree_at_scale():
    models = [
        load_fixture("bsc_chain"),
        load_fixture("deterministic_chain"),
        load_fixture("geometric_chain"),
    ]
    disagreements = 0
    for i in range(10_000):
        stream = RngStream(42, i)
        m = models[i % 3]
        if i % 1000 == 0:
            n = 10_000
        else:
            u = stream.uniforms(7, 1)[0]
            n = int(round(10 ** (1 + 3 * u)))
        y, z = sample_iid_pair(m.side, n, stream)
        if i % 4 == 3:
            # adversarial conditioning: constant pair, never typical
            y = np.zeros(n, dtype=np.int64)
            z = np.zeros(n, dtype=np.int64)
        x = sample_conditional(m.kernel, y, stream)
        if i % 7 == 6:
            # push symbols off narrow rows; both forms must go infinite
            x = x + 1
        s = SequenceTriple(x, y, z)
        a = loglik_gap(s, m)
        b = loglik_gap_decomposed(s, m)
        if not (a == b or abs(a - b) <= 1e-9):
            disagreements += 1
    assert disagreements == 0


def test_04_joint_membership_projects_to_marginals_exhaustively():
    started = time.perf_counter()
    side = ExplicitJoint2([0, 0, 1, 1], [0, 1, 0, 1], [0.25] * 4)
    mixed = MarkovTriple(side, Kernel({
        0: ExplicitPmf([0, 1], [0.5, 0.5]),
        1: ExplicitPmf([0, 1], [0.9, 0.1]),
    }))
    models = [load_fixture("bsc_chain"), mixed]
    pair_models = [
        {c: m.pair_model(c) for c in ("XY", "YZ", "XZ")} for m in models
    ]
    single_models = [
        {c: m.single_model(c) for c in "XYZ"} for m in models
    ]
    cells = [((a >> 2) & 1, (a >> 1) & 1, a & 1) for a in range(8)]

    def compositions(n, k):
        if k == 1:
            yield (n,)
            return
        for head in range(n + 1):
            for rest in compositions(n - head, k - 1):
                yield (head,) + rest

    types_seen = 0
    violations = 0
    for n in range(1, 7):
        for comp in compositions(n, 8):
            types_seen += 1
            cmap = {cells[j]: c for j, c in enumerate(comp) if c}
            etype = EmpiricalType.from_counts(cmap, n=n)
            for mi in range(len(models)):
                total3 = unified_score3(etype, models[mi]).total
                if total3 > 1.0:
                    continue  # not a member at any tested level
                subs = [
                    unified_score2(etype.marginal(c), pair_models[mi][c]).total
                    for c in ("XY", "YZ", "XZ")
                ] + [
                    unified_score1(etype.marginal(c), single_models[mi][c]).total
                    for c in "XYZ"
                ]
                for gamma in (0.1, 0.5, 1.0):
                    if total3 <= gamma and any(s > gamma for s in subs):
                        violations += 1
    elapsed = time.perf_counter() - started
    assert types_seen == 3002  # every length-1..6 binary triple type once
    assert violations == 0
    assert elapsed < 60.0, "took %.1fs" % elapsed


def test_05_acceptance_rate_climbs_with_sequence_length(bsc_sweep):
    started = time.perf_counter()
    result, _ = bsc_sweep
    rows = result.rows
    assert [r.n for r in rows] == N_GRID
    assert interval_trend_ok(rows)
    assert rows[-1].ci_low >= 0.75
    # countable alphabet: the same sweep must complete and improve
    geo = ExperimentConfig(
        model=load_fixture("geometric_chain"), n_grid=N_GRID,
        gamma=GAMMA, trials=TRIALS, seed=SEED, eta=ETA, variant="theorem1",
    )
    geo_rows = run_theorem1(geo).rows
    assert geo_rows[-1].rate > geo_rows[0].rate
    elapsed = time.perf_counter() - started
    assert elapsed < 300.0, "took %.1fs" % elapsed


def test_06_conditional_pair_success_rate_at_large_n():
    result = run_corollary1(bsc_config(variant="corollary1"))
    rows = result.rows
    assert interval_trend_ok(rows)
    last = rows[-1]
    assert last.n == 10_000
    assert last.ci_low >= 0.75
    # success can never undercut the fully typical trial count
    for row in rows:
        assert row.successes >= result.diagnostics["triple_typical"][row.n]


def test_07_concentration_rates_meet_tolerance():
    eps = 0.25
    for variant, runner in (("lemma2", run_lemma2), ("lemma5", run_lemma5)):
        cfg = ExperimentConfig(
            model=load_fixture("bsc_chain"), n_grid=[10_000], gamma=eps,
            trials=TRIALS, seed=SEED, variant=variant,
        )
        assert cfg.resolved_eta() == pytest.approx(eps * eps / 32)
        for row in runner(cfg).rows:
            assert row.accepted > 0
            assert row.ci_low >= 1 - eps, row


def test_08_row_entropy_bound_holds_on_accepted_pairs(bsc_sweep):
    result, _ = bsc_sweep
    pairs = result.diagnostics["side_entropy_pairs"]
    accepted_total = sum(r.accepted for r in result.rows)
    assert len(pairs) == accepted_total
    assert all(lhs <= rhs for _, _, lhs, rhs in pairs)
    assert result.diagnostics["projection_violations"] == 0
    model = load_fixture("bsc_chain")
    ceiling = 0.5 + model.C
    for row in model.kernel.distinct_rows():
        assert row.entropy() <= ceiling


def test_09_two_term_score_controls_eight_term_score():
    rows = shortcut_family()  # frozen seed and level grid
    assert [r["t"] for r in rows] == [0.1, 0.05, 0.01]
    for row in rows:
        assert row["two_term"] <= row["t"]
    totals = [r["max_total"] for r in rows]
    assert totals[0] >= totals[1] >= totals[2]
    assert totals[2] <= 10 * 0.01


def test_10_entropy_jump_under_variational_convergence():
    rows = run_semicontinuity()
    by_m = {r.m: r for r in rows}
    assert by_m[2].single_h == pytest.approx(2.0, abs=1e-9)
    assert by_m[1024].single_v <= 0.002
    assert by_m[1024].single_h >= 0.99
    # entropies stay a bit above the limit law's zero entropy throughout
    assert all(r.single_h > 0.99 for r in rows)
    assert all(r.single_h_limit == 0.0 for r in rows)
    largest = rows[-1]
    assert largest.m == 16384
    assert largest.pair_marginal_dh < 0.01
    assert largest.pair_joint_dh < 0.01


def test_11_csv_bytes_identical_across_worker_counts(
    bsc_sweep, tmp_path, monkeypatch
):
    _, blob_four_workers = bsc_sweep
    monkeypatch.setenv("TYPLAB_WORKERS", "1")
    serial = run_theorem1(bsc_config())
    path = tmp_path / "serial.csv"
    write_sweep_csv(serial, path)
    assert path.read_bytes() == blob_four_workers
