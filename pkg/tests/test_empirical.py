"""Empirical types, occurrence counts, sequence IO, likelihood gaps."""

import math

import numpy as np
import pytest

from typlab.empirical import (
    EmpiricalType,
    SequenceTriple,
    count_occurrences,
    empirical_type,
    load_sequences,
    loglik_gap,
    loglik_gap_decomposed,
    write_sequences,
)
from typlab.errors import SequenceFormatError
from typlab.model import (
    DiagJoint2,
    ExplicitJoint2,
    ExplicitPmf,
    GeometricPmf,
    Kernel,
    MarkovTriple,
)
from typlab.sampling import RngStream, sample_conditional, sample_iid_pair


def h_b(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bsc_triple():
    side = ExplicitJoint2([0, 0, 1, 1], [0, 1, 0, 1],
                          [0.45, 0.05, 0.05, 0.45])
    kernel = Kernel({0: ExplicitPmf([0, 1], [0.8, 0.2]),
                     1: ExplicitPmf([0, 1], [0.2, 0.8])})
    return MarkovTriple(side, kernel)


def test_sequence_triple_checks_lengths():
    with pytest.raises(ValueError):
        SequenceTriple([0, 1], [0], [0, 1])
    s = SequenceTriple([0, 1], [1, 0], [1, 1])
    assert s.n == 2


def test_type_counts_and_probs():
    s = SequenceTriple([0, 0, 1, 0], [1, 1, 0, 1], [0, 0, 1, 0])
    t = empirical_type(s)
    assert t.n == 4
    assert t.count(0, 1, 0) == 3
    assert t.count(1, 0, 1) == 1
    assert t.count(1, 1, 1) == 0
    assert t.probs.sum() == pytest.approx(1.0)


def test_type_marginals_and_entropy():
    s = SequenceTriple([0, 0, 1, 1], [0, 1, 0, 1], [0, 0, 0, 0])
    t = empirical_type(s)
    assert t.entropy() == pytest.approx(2.0)
    m = t.marginal("XY")
    assert m.labels == ("X", "Y")
    assert m.entropy() == pytest.approx(2.0)
    assert t.marginal("Z").entropy() == 0.0
    assert t.marginal("X").entropy() == pytest.approx(1.0)


def test_marginal_consistency_random_sequences():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 200))
        s = SequenceTriple(rng.integers(0, 4, n), rng.integers(0, 3, n),
                           rng.integers(0, 5, n))
        t = empirical_type(s)
        # marginalizing the type equals the type of the projected sequences
        xy = t.marginal("XY")
        assert xy.counts.sum() == n
        for x, y, c in zip(xy.coords[0], xy.coords[1], xy.counts):
            direct = int(np.sum((s.x == x) & (s.y == y)))
            assert direct == c


def test_count_occurrences_matches_type():
    t = bsc_triple()
    rng = RngStream(99, 0)
    ys, zs = sample_iid_pair(t.side, 500, rng)
    xs = sample_conditional(t.kernel, ys, rng)
    s = SequenceTriple(xs, ys, zs)
    et = empirical_type(s)
    total = 0
    for x in (0, 1):
        for y in (0, 1):
            for z in (0, 1):
                cnt = count_occurrences(s, (x, y, z))
                assert et.count(x, y, z) == cnt
                total += cnt
    assert total == 500


def test_sequence_file_round_trip(tmp_path):
    s = SequenceTriple([5, 0, 12], [1, 1, 0], [0, 3, 3])
    path = tmp_path / "seqs.txt"
    write_sequences(path, s)
    back = load_sequences(path)
    assert np.array_equal(back.x, s.x)
    assert np.array_equal(back.y, s.y)
    assert np.array_equal(back.z, s.z)


def test_sequence_file_errors_carry_path_and_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 1 2\n3 4\n")
    with pytest.raises(SequenceFormatError, match="line 2"):
        load_sequences(path)
    path.write_text("0 one 2\n")
    with pytest.raises(SequenceFormatError, match="line 1"):
        load_sequences(path)
    path.write_text("\n\n")
    with pytest.raises(SequenceFormatError, match="no sequence"):
        load_sequences(path)


def test_loglik_gap_anchor_value():
    # constant y=0, x=0 against a Bernoulli(1/4) row:
    # expectation term is -h(1/4), observed term is log2(3/4)
    side = DiagJoint2(ExplicitPmf([0, 1], [0.5, 0.5]))
    kernel = Kernel(default=ExplicitPmf([0, 1], [0.75, 0.25]))
    t = MarkovTriple(side, kernel)
    n = 40
    s = SequenceTriple([0] * n, [0] * n, [0] * n)
    want = -h_b(0.25) - math.log2(0.75)
    assert loglik_gap(s, t) == pytest.approx(want, abs=1e-12)
    assert loglik_gap_decomposed(s, t) == pytest.approx(want, abs=1e-12)


def test_loglik_gap_infinite_when_row_excludes_symbol():
    side = DiagJoint2(ExplicitPmf([0], [1.0]))
    kernel = Kernel({0: ExplicitPmf([0], [1.0])})
    t = MarkovTriple(side, kernel)
    s = SequenceTriple([1, 0], [0, 0], [0, 0])
    assert loglik_gap(s, t) == math.inf
    assert loglik_gap_decomposed(s, t) == math.inf


def test_gap_forms_agree_on_sampled_sequences():
    t = bsc_triple()
    for trial in range(40):
        rng = RngStream(20240811, trial)
        n = 50 + 13 * trial
        ys, zs = sample_iid_pair(t.side, n, rng)
        xs = sample_conditional(t.kernel, ys, rng)
        s = SequenceTriple(xs, ys, zs)
        a = loglik_gap(s, t)
        b = loglik_gap_decomposed(s, t)
        assert abs(a - b) <= 1e-9


def test_gap_forms_agree_on_constant_side_pair():
    # a single (y, z) cell exercises the grouped path with one group
    t = bsc_triple()
    rng = RngStream(5, 1)
    n = 200
    xs = sample_conditional(t.kernel, np.zeros(n, dtype=np.int64), rng)
    s = SequenceTriple(xs, [0] * n, [1] * n)
    assert loglik_gap(s, t) == pytest.approx(
        loglik_gap_decomposed(s, t), abs=1e-12
    )


def test_gap_decomposed_accepts_prebuilt_type():
    t = bsc_triple()
    s = SequenceTriple([0, 1, 1, 0], [0, 0, 1, 1], [0, 1, 1, 0])
    et = empirical_type(s)
    assert loglik_gap_decomposed(et, t) == pytest.approx(
        loglik_gap_decomposed(s, t), abs=0
    )


def test_type_from_counts_with_zero_rows():
    et = EmpiricalType.from_counts({(0, 0, 0): 4, (1, 0, 0): 0}, n=4)
    assert et.count(1, 0, 0) == 0
    assert et.entropy() == pytest.approx(0.0)
    t = bsc_triple()
    # zero-count atoms must not poison the grouped gap
    assert np.isfinite(loglik_gap_decomposed(et, t))


def test_geometric_sequences_round_trip_and_type():
    side = DiagJoint2(GeometricPmf(0.5))
    t = MarkovTriple(side, Kernel(default=GeometricPmf(0.5)))
    rng = RngStream(0, 0)
    ys, zs = sample_iid_pair(t.side, 1000, rng)
    xs = sample_conditional(t.kernel, ys, rng)
    s = SequenceTriple(xs, ys, zs)
    et = empirical_type(s)
    assert np.array_equal(ys, zs)
    assert et.marginal("Y").entropy() == pytest.approx(2.0, abs=0.2)
