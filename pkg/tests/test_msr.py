import math

import numpy as np
import pytest
from scipy.integrate import quad

from msrlab import msr, symcore
from msrlab.blocks import build_block, function_rep
from msrlab.errors import HypothesisError, InputError, NotInBlockError, NotPositiveError
from msrlab.msr import (
    antitone_inverse_check,
    counterexample_search,
    denman_beavers,
    fubini_check,
    make_rule,
    msr_check,
    regularization_bound,
    regularized_sqrt,
    resolvent_complement,
    resolvent_monotone_check,
    resolvent_term,
    sqrt_integral,
    state_integral_identity,
)
from msrlab.rng import SplitMix64
from msrlab.states import State

A_PAIR = np.array([[1.0, 1.0], [1.0, 1.0]])
B_PAIR = np.array([[2.0, 1.0], [1.0, 1.0]])


def sqrt2_oracle(m):
    m = np.asarray(m, dtype=float)
    s = math.sqrt(max(np.linalg.det(m), 0.0))
    return (m + s * np.eye(2)) / math.sqrt(np.trace(m) + 2 * s)


def min_eig2(m):
    (p, q), (_, r) = m
    return (p + r) / 2 - math.sqrt((p - r) ** 2 / 4 + q * q)


def inv2(m):
    (p, q), (_, r) = m
    det = p * r - q * q
    return np.array([[r, -q], [-q, p]]) / det


@pytest.fixture(scope="module")
def rule128():
    return make_rule(128)


@pytest.fixture(scope="module")
def rule256():
    return make_rule(256)


# quadrature ----------------------------------------------------------------

def test_rule_structure(rule128):
    assert rule128.node_count == 128
    assert np.all(np.diff(rule128.nodes) > 0) and np.all(rule128.weights > 0)
    assert rule128.certified_tol <= 1e-12


def test_measure_identity_by_adaptive_quadrature():
    # independent check of sqrt(t) = (1/pi) int t/(lam+t) lam^-1/2 dlam
    for t in (0.01, 1.0, 4.0, 100.0):
        val, _ = quad(lambda lam: t / (lam + t) / math.sqrt(lam) / math.pi, 0, np.inf, limit=200)
        assert val == pytest.approx(math.sqrt(t), abs=1e-8)


def test_rule_examples(rule128):
    assert abs(float(np.sum(rule128.weights / (rule128.nodes + 1.0))) - 1.0) <= 1e-10
    assert abs(float(rule128.scalar_sqrt(4.0)) - 2.0) <= 1e-9
    e8 = float(make_rule(8).scalar_error(0.01))
    e128 = float(rule128.scalar_error(0.01))
    assert e8 > e128
    # frozen from the run above: N=8 is visibly inaccurate
    assert 1e-4 < e8 < 1e-3


def test_rule_rejects_small_n():
    for bad in (0, 1, 2.5):
        with pytest.raises(InputError):
            make_rule(bad)


# resolvent -----------------------------------------------------------------

def test_resolvent_examples():
    assert resolvent_term([[1.0]], 1.0)[0, 0] == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(resolvent_term(np.diag([4.0, 1.0]), 2.0), np.diag([2 / 3, 1 / 3]), atol=1e-15)
    a = np.array([[2.0, 1.0], [1.0, 1.0]])
    direct = a @ inv2(a + np.eye(2))
    other = np.eye(2) - inv2(a + np.eye(2))
    assert np.max(np.abs(direct - other)) <= 1e-15
    assert np.max(np.abs(resolvent_term(a, 1.0) - direct)) <= 1e-15
    assert np.max(np.abs(resolvent_term(a, 1.0) - resolvent_complement(a, 1.0))) <= 1e-10


def test_resolvent_is_a_contraction():
    rng = SplitMix64(5)
    for _ in range(50):
        n = 2 + rng.integers(6)
        m = rng.uniform(-1, 1, size=(n, n))
        a = m.T @ m
        for lam in msr.RESOLVENT_LAMBDAS:
            r = resolvent_term(a, lam)
            assert symcore.min_eig(r) >= -1e-12
            assert symcore.min_eig(np.eye(n) - r) >= -1e-12
            assert np.max(np.abs(r - resolvent_complement(a, lam))) <= 1e-10 * max(1.0, lam)


def test_resolvent_errors():
    with pytest.raises(InputError):
        resolvent_term(np.eye(2), 0.0)
    with pytest.raises(NotPositiveError):
        resolvent_term(np.diag([1.0, -1.0]), 1.0)


# integral square root --------------------------------------------------------

def test_sqrt_integral_examples(rule128):
    assert np.max(np.abs(sqrt_integral(np.eye(3), rule128) - np.eye(3))) <= 1e-10
    assert np.max(np.abs(sqrt_integral(np.diag([4.0, 9.0]), rule128) - np.diag([2.0, 3.0]))) <= 1e-8
    m = [[2.0, 1.0], [1.0, 1.0]]
    assert np.max(np.abs(sqrt_integral(m, rule128) - sqrt2_oracle(m))) <= 1e-8


def test_sqrt_integral_metadata(rule128):
    root, info = sqrt_integral(np.diag([4.0, 9.0]), rule128, full_output=True)
    assert not info.regularized and info.node_count == 128
    assert info.oracle_gap <= 1e-8 and info.error_estimate <= 1e-8
    root, info = sqrt_integral(np.diag([1.0, 0.0]), rule128, full_output=True)
    assert info.regularized and info.shift == 1e-12
    assert symcore.is_psd(root)
    with pytest.raises(NotPositiveError):
        sqrt_integral(np.diag([1.0, -1.0]), rule128)


def test_sqrt_integral_agrees_with_spectral(rule256):
    rng = SplitMix64(6)
    for _ in range(100):
        n = 2 + rng.integers(7)
        m = rng.uniform(-1, 1, size=(n, n))
        a = m.T @ m + 1e-3 * np.eye(n)
        gap = symcore.order_unit_norm(sqrt_integral(a, rule256) - symcore.sqrt_spectral(a))
        assert gap <= 1e-7 * max(1.0, math.sqrt(symcore.order_unit_norm(a)))


# regularization --------------------------------------------------------------

def test_regularized_sqrt_examples():
    assert np.allclose(regularized_sqrt(np.zeros((3, 3)), 4), 0.5 * np.eye(3), atol=1e-15)
    assert regularized_sqrt([[3.0]], 1)[0, 0] == 2.0
    rng = SplitMix64(7)
    for _ in range(20):
        n = 2 + rng.integers(5)
        m = rng.uniform(-1, 1, size=(1, n))
        a = m.T @ m
        root = symcore.sqrt_spectral(a)
        d10 = regularized_sqrt(a, 10) - root
        d100 = regularized_sqrt(a, 100) - root
        assert symcore.min_eig(d100) >= -1e-12 and symcore.min_eig(d10 - d100) >= -1e-12
        assert symcore.order_unit_norm(d100) < symcore.order_unit_norm(d10)
        assert symcore.invertibility_margin(regularized_sqrt(a, 100)) > 0


def test_regularization_bound_examples():
    lhs, rhs = regularization_bound(np.zeros((2, 2)), 4)
    assert lhs == 0.5 and rhs == 0.5
    lhs, rhs = regularization_bound([[3.0]], 1)
    assert lhs == pytest.approx(2 - math.sqrt(3), abs=1e-15)
    assert rhs == 0.5


def test_regularization_rate():
    rng = SplitMix64(8)
    ns = np.array([1, 10, 100, 10_000])
    for _ in range(20):
        n = 2 + rng.integers(5)
        m = rng.uniform(-1, 1, size=(1 + rng.integers(n), n))
        a = m.T @ m
        pairs = [regularization_bound(a, k) for k in ns]
        assert all(lhs <= rhs + 1e-10 for lhs, rhs in pairs)
        slope = np.polyfit(np.log(ns), np.log([lhs for lhs, _ in pairs]), 1)[0]
        assert slope <= -0.49


# order checks --------------------------------------------------------------

def test_resolvent_monotone_examples():
    r = resolvent_monotone_check([[1.0]], [[2.0]], 1.0)
    assert r.verdict and r.margin == pytest.approx(2 / 3 - 1 / 2, abs=1e-15)
    diff = B_PAIR @ inv2(B_PAIR + np.eye(2)) - A_PAIR @ inv2(A_PAIR + np.eye(2))
    r = resolvent_monotone_check(A_PAIR, B_PAIR, 1.0)
    assert r.verdict and r.margin == pytest.approx(min_eig2(diff), abs=1e-14)
    assert resolvent_monotone_check(B_PAIR, B_PAIR, 0.5).margin == 0.0


def test_resolvent_chain_margins_match_single_checks():
    # scalar oracle: 2/(lam+2) - 1/(lam+1)
    lams = (0.5, 1.0, 4.0)
    got = msr.resolvent_chain_margins([[1.0]], [[2.0]], lams)
    assert np.allclose(got, [2 / (l + 2) - 1 / (l + 1) for l in lams], atol=1e-15)
    got = msr.resolvent_chain_margins(A_PAIR, B_PAIR)
    ref = [resolvent_monotone_check(A_PAIR, B_PAIR, l).margin for l in msr.RESOLVENT_LAMBDAS]
    assert np.allclose(got, ref, atol=1e-14)
    with pytest.raises(HypothesisError):
        msr.resolvent_chain_margins(B_PAIR, A_PAIR)


def test_order_checks_reject_bad_hypotheses():
    with pytest.raises(HypothesisError):
        resolvent_monotone_check(B_PAIR, A_PAIR, 1.0)
    with pytest.raises(HypothesisError):
        msr_check(np.diag([1.0, -1.0]), np.eye(2))
    with pytest.raises(HypothesisError):
        antitone_inverse_check(A_PAIR, B_PAIR)


def test_antitone_inverse_examples():
    b = np.array([[2.0, 1.0], [1.0, 2.0]])
    expected = np.eye(2) - inv2(b)
    assert np.allclose(expected, np.ones((2, 2)) / 3, atol=1e-15)
    r = antitone_inverse_check(np.eye(2), b)
    assert r.verdict and r.margin == pytest.approx(0.0, abs=1e-15)
    r = antitone_inverse_check([[1.0]], [[2.0]])
    assert r.verdict and r.margin == 0.5
    assert antitone_inverse_check(np.eye(2), np.eye(2)).margin == 0.0


# MSR -----------------------------------------------------------------------

def test_msr_check_closed_form_pair():
    expected = min_eig2(sqrt2_oracle(B_PAIR) - A_PAIR / math.sqrt(2))
    assert expected == pytest.approx(0.0680796, abs=1e-7)
    # a is singular: the integral route runs on a + 1e-12, and the ladder converges like n^-1/2
    tolerance = {"spectral": 1e-12, "integral": 1e-8, "regularized": 1e-3}
    for method in msr.METHODS:
        r = msr_check(A_PAIR, B_PAIR, method)
        assert r.verdict and r.hypothesis_ok and r.method == method
        assert r.sqrt_margin == pytest.approx(expected, abs=tolerance[method])
    assert msr_check(A_PAIR, B_PAIR, "integral").regularized


def test_msr_check_trivial_cases():
    rng = SplitMix64(9)
    m = rng.uniform(-1, 1, size=(4, 4))
    b = m.T @ m
    r = msr_check(np.zeros((4, 4)), b)
    assert r.verdict and r.sqrt_margin >= -1e-12
    r = msr_check(b, b, "integral")
    assert r.sqrt_margin == pytest.approx(0.0, abs=1e-12)


def test_msr_check_reports_resolvent_margins():
    r = msr_check(A_PAIR, B_PAIR, resolvent_lambdas=msr.RESOLVENT_LAMBDAS)
    assert set(r.resolvent_margins) == set(msr.RESOLVENT_LAMBDAS)
    assert all(m >= -1e-12 for m in r.resolvent_margins.values())


def test_msr_check_regularized_ladder_settles():
    r = msr_check(A_PAIR + np.eye(2), B_PAIR + np.eye(2), "regularized")
    assert len(r.ladder) >= 2
    assert abs(r.ladder[-1][1] - r.ladder[-2][1]) < 1e-10 or r.ladder[-1][0] == 10**6


def test_msr_check_unknown_method():
    with pytest.raises(InputError):
        msr_check(A_PAIR, B_PAIR, "magic")


def test_commuting_case_reduces_to_scalars():
    rng = SplitMix64(10)
    for _ in range(50):
        n = 2 + rng.integers(6)
        a = np.diag(rng.uniform(0, 1, size=(n,)))
        b = a + np.diag(rng.uniform(0, 1, size=(n,)))
        block = build_block([a, b])
        fa, fb = function_rep(block, a), function_rep(block, b)
        expected = float(np.min(np.sqrt(fb) - np.sqrt(fa)))
        assert abs(msr_check(a, b).sqrt_margin - expected) <= 1e-10


# state integral / Fubini ----------------------------------------------------

def test_state_integral_examples(rule128):
    lhs, rhs, gap = state_integral_identity(State.vector([1.0, 0.0]), np.diag([4.0, 1.0]), rule128)
    assert lhs == 2.0 and gap <= 1e-8
    lhs, rhs, gap = state_integral_identity(State.maximally_mixed(2), np.eye(2), rule128)
    assert lhs == 1.0 and gap <= 1e-10
    rng = SplitMix64(11)
    a = np.array([[2.0, 1.0], [1.0, 1.0]])
    omega = State.random(2, rng)
    lhs, rhs, gap = state_integral_identity(omega, a, rule128)
    assert lhs == pytest.approx(float(np.sum(omega.rho * sqrt2_oracle(a))), abs=1e-14)
    assert gap <= 1e-8


def test_state_integral_requires_invertible(rule128):
    with pytest.raises(HypothesisError):
        state_integral_identity(State.maximally_mixed(2), np.diag([1.0, 0.0]), rule128)


def test_fubini_examples(rule128):
    rng = SplitMix64(12)
    m = rng.uniform(-1, 1, size=(4, 4))
    a = m.T @ m + 0.1 * np.eye(4)
    omega = State.random(4, rng)
    assert fubini_check(omega, a, build_block([a]), rule128) <= 1e-12

    eye_block = build_block([np.eye(3)])
    assert fubini_check(State.maximally_mixed(3), np.eye(3), eye_block, rule128) == 0.0

    f = np.logspace(-3, 3, 6)
    spread = np.diag(f)
    assert fubini_check(State.maximally_mixed(6), spread, build_block([spread]), make_rule(512)) <= 1e-10


def test_fubini_rejects_outsider(rule128):
    block = build_block([np.diag([1.0, 2.0])])
    with pytest.raises(NotInBlockError):
        fubini_check(State.maximally_mixed(2), B_PAIR, block, rule128)


def test_state_resolvent_resolvent_formula():
    rng = SplitMix64(13)
    for n in (2, 5, 8):
        m = rng.uniform(-1, 1, size=(n, n))
        a = m.T @ m + 0.01 * np.eye(n)
        block = build_block([a])
        omega = State.random(n, rng)
        for lam in (0.1, 1.0, 10.0):
            assert msr.state_resolvent_gap(omega, a, block, lam) <= 1e-9


# negative control -----------------------------------------------------------

def test_square_counterexample_pair():
    diff = B_PAIR @ B_PAIR - A_PAIR @ A_PAIR
    assert np.array_equal(diff, [[3.0, 1.0], [1.0, 0.0]])
    assert np.linalg.det(diff) == pytest.approx(-1.0, abs=1e-14)
    margin, threshold = msr.monotonicity_margin(np.square, A_PAIR, B_PAIR)
    assert margin == pytest.approx(min_eig2(diff), abs=1e-14) and margin < threshold


def test_counterexample_search():
    found = counterexample_search("square", 2, 1000, seed=42)
    assert len(found) >= 1
    for v in found[:5]:
        assert symcore.loewner_leq(v.a, v.b).verdict
        assert symcore.min_eig(v.b @ v.b - v.a @ v.a) == pytest.approx(v.margin, abs=1e-12)
    assert counterexample_search("square", 3, 300, seed=1, commuting=True) == []
    assert counterexample_search("sqrt", 4, 500, seed=42) == []
    assert len(counterexample_search("cube", 2, 300, seed=5)) >= 1
    with pytest.raises(InputError):
        counterexample_search("log", 2, 10, seed=1)


# Denman-Beavers --------------------------------------------------------------

def test_denman_beavers():
    x, iters = denman_beavers(np.diag([4.0, 9.0]))
    assert iters <= 20
    assert np.max(np.abs(x @ x - np.diag([4.0, 9.0]))) <= 1e-12 * 9
    assert np.allclose(x, np.diag([2.0, 3.0]), atol=1e-12)
