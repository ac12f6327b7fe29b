import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrational import cnp, qcore
from qrational.exceptions import ValidationError


def brute_log_convex(a):
    """Oracle: first n with a_n^2 > a_{n-1} a_{n+1} in exact-ish long float, else None."""
    for n in range(1, len(a) - 1):
        if a[n] ** 2 > a[n - 1] * a[n + 1] * (1 + 1e-12):
            return n
    return None


def test_coeffseq_validation():
    with pytest.raises(ValidationError):
        cnp.CoeffSeq([1.0, -0.5, 0.2])
    with pytest.raises(ValidationError):
        cnp.kaluza_check([1.0, 0.5])
    assert cnp.CoeffSeq([1.0, 0.5, 0.3]).normalized
    assert not cnp.CoeffSeq([2.0, 0.5, 0.3]).normalized


def test_dirichlet_pass():
    v = cnp.kaluza_check(cnp.dirichlet(200))
    assert v.passed and v.first_violation_index is None


def test_eq_coeffs_fail_at_one():
    v = cnp.kaluza_check(cnp.eq_coeffs(0.5, 30))
    assert not v.passed and v.first_violation_index == 1


@pytest.mark.parametrize("q", np.round(np.arange(0.1, 1.0, 0.1), 1))
def test_q_dirichlet_pass(q):
    assert cnp.kaluza_check(cnp.q_dirichlet(q, 200)).passed


def test_q_dirichlet_is_not_normalized():
    seq = cnp.q_dirichlet(0.5, 10)
    assert seq.start_index == 1 and not seq.normalized
    with pytest.raises(ValidationError):
        cnp.reciprocal_nonneg_check(seq)


@pytest.mark.parametrize("q,r", [(0.3, 0.5), (0.7, 0.5), (0.5, 1.0)])
def test_q_gamma_kernel_against_product_formula(q, r):
    # Gamma_q(n+r)/Gamma_q(r) = prod_{i<n} (1 - q^(r+i))/(1 - q)
    seq = cnp.q_gamma_kernel(q, r, 25)
    for n in range(26):
        num = math.prod((1 - q ** (r + i)) / (1 - q) for i in range(n))
        assert seq.values[n] == pytest.approx(num / qcore.q_factorial(n, q), rel=1e-12)


def test_q_gamma_kernel_r1_is_constant():
    np.testing.assert_allclose(cnp.q_gamma_kernel(0.4, 1.0, 20).values, 1.0, rtol=1e-12)


def test_q_gamma_rejects_pole():
    with pytest.raises(ValidationError):
        cnp.q_gamma_kernel(0.5, 0.0, 10)


def test_hardy_sobolev_classical():
    assert cnp.kaluza_check(cnp.hardy_sobolev_classical(0.5, 100)).passed
    v = cnp.kaluza_check(cnp.hardy_sobolev_classical(1.0, 100))
    assert not v.passed and v.first_violation_index == 1


def test_hardy_sobolev_full_order_two_fails():
    assert not cnp.kaluza_check(cnp.hardy_sobolev_full(2, 40)).passed
    np.testing.assert_allclose(cnp.hardy_sobolev_full(1, 20).values,
                               cnp.hardy_sobolev_classical(1.0, 20).values)


def test_q_hardy_sobolev_threshold_is_monotone_split():
    t = cnp.q_hardy_sobolev_threshold(0.5, 100)
    assert np.isfinite(t) and t > 0
    assert cnp.kaluza_check(cnp.q_hardy_sobolev(0.5, 0.99 * t, 100)).passed
    assert not cnp.kaluza_check(cnp.q_hardy_sobolev(0.5, 1.01 * t, 100)).passed


def test_partition_closed_form():
    seq = cnp.partition_seq([0.0, 1.0], 10)
    n = np.arange(11)
    np.testing.assert_allclose(seq.values, (1 + np.exp(n)) / 2, rtol=1e-13)
    assert cnp.kaluza_check(seq).passed


@given(st.lists(st.floats(0, 3), min_size=1, max_size=6), st.integers(3, 40))
def test_partition_always_passes(E, nmax):
    assert cnp.kaluza_check(cnp.partition_seq(E, nmax)).passed


@given(st.lists(st.floats(0.01, 10), min_size=3, max_size=30))
def test_kaluza_matches_brute_force(vals):
    a = np.array(vals)
    v = cnp.kaluza_check(a)
    assert v.first_violation_index == brute_log_convex(a)


@given(st.lists(st.floats(0.1, 2), min_size=3, max_size=25))
def test_kaluza_implies_nonnegative_reciprocal(tail):
    # turn arbitrary data into a log-convex normalized sequence: a_n = exp(c_n), c convex
    steps = np.cumsum(np.sort(np.log(tail)))
    a = np.exp(np.concatenate([[0.0], steps]) - 0)
    seq = cnp.CoeffSeq(a / a[0])
    assert cnp.kaluza_check(seq).passed
    assert cnp.reciprocal_nonneg_check(seq).passed


def test_reciprocal_detects_negative():
    v = cnp.reciprocal_nonneg_check(cnp.eq_coeffs(0.5, 30))
    assert not v.passed and v.first_negative_index is not None


def test_hadamard_and_power_keep_log_convexity():
    a, b = cnp.dirichlet(50), cnp.partition_seq([0.2, 1.5], 50)
    assert cnp.kaluza_check(cnp.hadamard(a, b)).passed
    assert cnp.kaluza_check(cnp.power(a, 2.5)).passed


def test_kaluza_continuous():
    f, f1, f2 = cnp.partition_function([0.0, 0.7, 2.0])
    grid = np.linspace(0, 3, 31)
    assert cnp.kaluza_continuous(f, grid, f1, f2).passed
    assert cnp.kaluza_continuous(f, grid).passed
    assert not cnp.kaluza_continuous(lambda x: 1 + x ** 0.5, np.linspace(0.5, 3, 10)).passed


def test_kaluza_handles_huge_coefficients():
    seq = cnp.partition_seq([0.0, 5.0], 120)  # a_n ~ exp(5n) overflows when squared
    assert np.isfinite(np.log(seq.values)).all()
    assert cnp.kaluza_check(seq).passed


def test_reciprocal_of_exact_geometric_series():
    # 1 / sum (e z)^n = 1 - e z: b_1 = e and b_n = 0 beyond, despite a_n = e^n
    v = cnp.reciprocal_nonneg_check(cnp.partition_seq([1.0], 60), 50)
    assert v.passed
    assert v.b[0] == pytest.approx(math.e)
    assert np.max(np.abs(v.b[1:10])) < 1e-9
