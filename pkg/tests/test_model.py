"""Distribution objects: validation, closed forms, truncation, JSON."""

import json
import math

import mpmath
import numpy as np
import pytest

from typlab.errors import (
    BoundViolationError,
    InvalidDistributionError,
    MissingKernelRowError,
)
from typlab.model import (
    DiagJoint2,
    ExplicitJoint2,
    ExplicitPmf,
    FactoredJoint2,
    GeometricPmf,
    JointPmf3,
    Kernel,
    MarkovTriple,
    Pmf,
    ZipfPmf,
    check_log_moment_bound,
    check_symbols,
    decode3,
    encode2,
    encode3,
    load_model,
    marginalize,
)


def h_b(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bsc_triple():
    side = ExplicitJoint2(
        [0, 0, 1, 1], [0, 1, 0, 1], [0.45, 0.05, 0.05, 0.45]
    )
    kernel = Kernel({0: ExplicitPmf([0, 1], [0.8, 0.2]),
                     1: ExplicitPmf([0, 1], [0.2, 0.8])})
    return MarkovTriple(side, kernel)


# ---------------------------------------------------------------- validation


def test_explicit_pmf_rejects_bad_mass():
    with pytest.raises(InvalidDistributionError, match="probs"):
        ExplicitPmf([0, 1], [0.6, 0.5])
    with pytest.raises(InvalidDistributionError, match="support"):
        ExplicitPmf([0, 0], [0.5, 0.5])
    with pytest.raises(InvalidDistributionError, match="nonnegative"):
        ExplicitPmf([0, 1], [-0.1, 1.1])
    with pytest.raises(InvalidDistributionError, match="empty"):
        ExplicitPmf([], [])


def test_parameter_range_errors_name_the_field():
    with pytest.raises(InvalidDistributionError, match="'p'"):
        GeometricPmf(0.0)
    with pytest.raises(InvalidDistributionError, match="'p'"):
        GeometricPmf(1.0)
    with pytest.raises(InvalidDistributionError, match="'s'"):
        ZipfPmf(1.0)


def test_check_symbols_validates_dtype_and_range():
    out = check_symbols([3, 1, 2], "xs")
    assert out.dtype == np.int64 and out.tolist() == [3, 1, 2]
    with pytest.raises(ValueError, match="ys"):
        check_symbols(np.array([0.5]), "ys")
    with pytest.raises(ValueError, match="ys"):
        check_symbols(np.array([-1]), "ys")


def test_encode3_round_trips():
    rng = np.random.default_rng(0)
    xs = rng.integers(0, 2**21, size=1000)
    ys = rng.integers(0, 2**21, size=1000)
    zs = rng.integers(0, 2**21, size=1000)
    codes = encode3(xs, ys, zs)
    assert codes.dtype == np.int64
    bx, by, bz = decode3(codes)
    assert np.array_equal(bx, xs)
    assert np.array_equal(by, ys)
    assert np.array_equal(bz, zs)
    # pair encoding is injective on the same range
    c2 = encode2(xs, ys)
    assert len(set(c2.tolist())) == len(set(zip(xs.tolist(), ys.tolist())))


# --------------------------------------------------------------- closed forms


def test_geometric_entropy_and_log_moment_match_series():
    p = 0.37
    g = GeometricPmf(p)
    # stop before (1-p)^k underflows; the rest is ~1e-240
    ks = np.arange(1200)
    probs = p * (1 - p) ** ks
    logs = np.log2(probs)
    assert g.entropy() == pytest.approx(-(probs * logs).sum(), abs=1e-10)
    assert g.entropy() == pytest.approx(h_b(p) / p, abs=1e-12)
    assert g.log_moment() == pytest.approx((probs * logs**2).sum(), abs=1e-9)


def test_geometric_half_has_two_bits():
    assert GeometricPmf(0.5).entropy() == pytest.approx(2.0, abs=1e-12)
    assert GeometricPmf(0.5).log_moment() == pytest.approx(6.0, abs=1e-12)


def _zipf_series_bracket(s, weight, n_head):
    """Partial sum plus integral tail for sum_k (k^-s/zeta)*weight(log2 k^-s/zeta).

    The integrand is positive and decreasing past n_head, so the true
    value lies within f(n_head) of head + integral.
    """
    with mpmath.workdps(30):
        zeta = mpmath.zeta(s)
        lg = lambda x: mpmath.log(x, 2)
        f = lambda x: (x**-s / zeta) * weight(-s * lg(x) - lg(zeta))
        head = mpmath.fsum(f(k) for k in range(1, n_head + 1))
        tail = mpmath.quad(f, [n_head, mpmath.inf])
        return float(head + tail), float(f(n_head))


def test_zipf_entropy_matches_direct_summation():
    z = ZipfPmf(2.5)
    mid, slack = _zipf_series_bracket(2.5, lambda t: -t, 20000)
    assert abs(z.entropy() - mid) <= slack + 1e-9


def test_zipf_log_moment_matches_direct_summation():
    z = ZipfPmf(3.0)
    mid, slack = _zipf_series_bracket(3.0, lambda t: t * t, 20000)
    assert abs(z.log_moment() - mid) <= slack + 1e-8


def test_mass_vec_agrees_with_scalar_mass():
    for pmf in (ExplicitPmf([2, 5], [0.3, 0.7]), GeometricPmf(0.4), ZipfPmf(2.0)):
        pts = np.array([0, 1, 2, 5, 99])
        vec = pmf.mass_vec(pts)
        for pt, v in zip(pts.tolist(), vec.tolist()):
            assert v == pytest.approx(pmf.mass(pt), abs=0)


# ----------------------------------------------------------------- truncation


def test_truncation_accounts_for_residual_and_tail_entropy():
    g = GeometricPmf(0.3)
    t = g.tabulate(tail_eps=1e-8)
    assert t.residual <= 1e-8
    assert t.probs.sum() + t.residual == pytest.approx(1.0, abs=1e-12)
    # tail entropy bound dominates the true dropped contribution
    ks = np.arange(t.support[-1] + 1, t.support[-1] + 800)
    tail = 0.3 * 0.7**ks
    dropped = -(tail * np.log2(tail)).sum()
    assert t.entropy_tail >= dropped - 1e-12
    head = -(t.probs * np.log2(t.probs)).sum()
    assert abs(g.entropy() - head) <= t.entropy_tail + 1e-10


def test_zipf_truncation_residual():
    t = ZipfPmf(2.0).tabulate(tail_eps=1e-4)
    assert 0 < t.residual <= 1e-4
    assert t.support[0] == 1


# -------------------------------------------------------------------- kernels


def test_kernel_rows_and_default():
    k = Kernel({0: ExplicitPmf([0], [1.0])}, default=GeometricPmf(0.5))
    assert k.has_row(0) and k.has_row(77)
    assert k.row(77).kind == "geometric"
    assert not k.is_homogeneous()
    assert len(k.distinct_rows()) == 2
    bare = Kernel({1: ExplicitPmf([0], [1.0])})
    with pytest.raises(MissingKernelRowError, match="symbol 0"):
        bare.row(0)


def test_kernel_homogeneous_detection():
    k = Kernel(default=GeometricPmf(0.5))
    assert k.is_homogeneous()
    assert len(k.distinct_rows()) == 1
    same = Kernel({0: GeometricPmf(0.5), 1: GeometricPmf(0.5)})
    assert same.is_homogeneous()


def test_kernel_log_moment_sup_is_worst_row():
    k = Kernel({0: ExplicitPmf([0, 1], [0.5, 0.5]),
                1: GeometricPmf(0.5)})
    assert k.log_moment_sup() == pytest.approx(6.0, abs=1e-12)


def test_log_moment_cap_violation():
    k = Kernel(default=GeometricPmf(0.5))
    assert check_log_moment_bound(k, cap=6.0) == pytest.approx(6.0)
    with pytest.raises(BoundViolationError):
        check_log_moment_bound(k, cap=5.9)


# ---------------------------------------------------------------- pair joints


def test_explicit_joint_marginals_and_entropy():
    j = ExplicitJoint2([0, 0, 1], [0, 1, 1], [0.2, 0.3, 0.5])
    my = j.marginal_first()
    mz = j.marginal_second()
    assert my.mass(0) == pytest.approx(0.5)
    assert mz.mass(1) == pytest.approx(0.8)
    direct = -(0.2 * math.log2(0.2) + 0.3 * math.log2(0.3)
               + 0.5 * math.log2(0.5))
    assert j.entropy() == pytest.approx(direct, abs=1e-12)


def test_diag_joint_copies_base_law():
    d = DiagJoint2(GeometricPmf(0.5))
    assert d.mass(3, 3) == pytest.approx(0.5**4)
    assert d.mass(3, 4) == 0.0
    assert d.entropy() == pytest.approx(2.0, abs=1e-12)
    assert d.marginal_first().entropy() == pytest.approx(2.0, abs=1e-12)


def test_factored_joint_mass_and_entropy():
    base = ExplicitPmf([0, 1], [0.5, 0.5])
    k = Kernel({0: ExplicitPmf([0, 1], [0.9, 0.1]),
                1: ExplicitPmf([0, 1], [0.1, 0.9])})
    f = FactoredJoint2(k, base, labels=("X", "Y"))
    assert f.mass(0, 1) == pytest.approx(0.05)
    assert f.entropy() == pytest.approx(1 + h_b(0.1), abs=1e-12)
    assert f.marginal_second().mass(1) == pytest.approx(0.5)


# --------------------------------------------------------------- markov triple


def test_bsc_triple_entropies_match_hand_values():
    t = bsc_triple()
    assert t.entropy("YZ") == pytest.approx(1 + h_b(0.1), abs=1e-12)
    assert t.entropy("Y") == pytest.approx(1.0, abs=1e-12)
    assert t.entropy("Z") == pytest.approx(1.0, abs=1e-12)
    assert t.entropy("X") == pytest.approx(1.0, abs=1e-12)
    assert t.entropy("XY") == pytest.approx(1 + h_b(0.2), abs=1e-12)
    # X xor Z is Bernoulli(0.9*0.2 + 0.1*0.8) given either chain leg flips
    assert t.entropy("XZ") == pytest.approx(1 + h_b(0.26), abs=1e-12)
    assert t.entropy("XYZ") == pytest.approx(
        1 + h_b(0.1) + h_b(0.2), abs=1e-12
    )


def test_triple_mass_matches_factorization():
    t = bsc_triple()
    assert t.mass(0, 1, 0) == pytest.approx(0.05 * 0.2)
    assert t.log2_mass(1, 0, 0) == pytest.approx(math.log2(0.45 * 0.2))
    xs = np.array([0, 1, 0])
    ys = np.array([0, 0, 1])
    zs = np.array([0, 0, 1])
    vec = t.mass_vec(xs, ys, zs)
    assert vec.tolist() == pytest.approx(
        [0.45 * 0.8, 0.45 * 0.2, 0.45 * 0.2]
    )


def test_subset_log2_mass_sums_pointwise_logs():
    t = bsc_triple()
    rng = np.random.default_rng(1)
    xs = rng.integers(0, 2, size=64)
    ys = rng.integers(0, 2, size=64)
    zs = rng.integers(0, 2, size=64)
    by = {"X": xs, "Y": ys, "Z": zs}
    joint = t.induced_joint()
    for coords in ("XYZ", "XY", "YZ", "XZ", "X", "Y", "Z"):
        total = t.subset_log2_mass(coords)(*[by[c] for c in coords]).sum()
        marg = marginalize(joint, coords) if len(coords) < 3 else joint
        direct = sum(
            math.log2(marg.mass(*pt))
            for pt in zip(*[by[c].tolist() for c in coords])
        )
        assert total == pytest.approx(direct, abs=1e-9), coords


def test_induced_joint_subset_entropies_match_triple():
    t = bsc_triple()
    j = t.induced_joint()
    for coords in ("XYZ", "XY", "YZ", "XZ", "X", "Y", "Z"):
        assert j.subset_entropy(coords) == pytest.approx(
            t.entropy(coords), abs=1e-9
        )


def test_triple_requires_kernel_coverage():
    side = ExplicitJoint2([0, 1], [0, 1], [0.5, 0.5])
    kernel = Kernel({0: ExplicitPmf([0], [1.0])})
    with pytest.raises(MissingKernelRowError):
        MarkovTriple(side, kernel)


def test_triple_enforces_log_moment_cap():
    side = DiagJoint2(ExplicitPmf([0, 1], [0.5, 0.5]))
    kernel = Kernel(default=GeometricPmf(0.5))
    with pytest.raises(BoundViolationError):
        MarkovTriple(side, kernel, log_moment_cap=1.0)


def test_homogeneous_kernel_makes_x_independent():
    side = DiagJoint2(GeometricPmf(0.5))
    t = MarkovTriple(side, Kernel(default=GeometricPmf(0.5)))
    assert t.entropy("X") == pytest.approx(2.0, abs=1e-10)
    assert t.entropy("XZ") == pytest.approx(4.0, abs=1e-10)
    assert t.entropy("XYZ") == pytest.approx(4.0, abs=1e-10)


# ----------------------------------------------------------------------- json


def test_pmf_json_round_trip():
    for pmf in (ExplicitPmf([1, 4], [0.25, 0.75]), GeometricPmf(0.37),
                ZipfPmf(2.5)):
        back = Pmf.from_json(json.loads(json.dumps(pmf.to_json())))
        assert back.key() == pmf.key()


def test_triple_json_round_trip(tmp_path):
    t = bsc_triple()
    path = tmp_path / "chain.json"
    path.write_text(json.dumps(t.to_json()))
    back = load_model(path)
    assert back.entropy("XYZ") == pytest.approx(t.entropy("XYZ"), abs=1e-12)
    assert back.mass(0, 1, 1) == pytest.approx(t.mass(0, 1, 1), abs=0)


def test_kernel_json_keeps_default_row():
    k = Kernel({2: ExplicitPmf([0], [1.0])}, default=GeometricPmf(0.25))
    back = Kernel.from_json(k.to_json())
    assert back.row(5).key() == GeometricPmf(0.25).key()
    assert back.row(2).kind == "explicit"


def test_joint3_marginal_labels():
    xs = [0, 0, 1]
    ys = [0, 1, 1]
    zs = [1, 0, 0]
    j = JointPmf3(xs, ys, zs, [0.5, 0.25, 0.25])
    xz = j.marginal("XZ")
    assert xz.labels == ("X", "Z")
    assert xz.mass(0, 1) == pytest.approx(0.5)
    x = j.marginal("X")
    assert x.mass(0) == pytest.approx(0.75)
