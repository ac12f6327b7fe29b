import numpy as np
import pytest
from scipy.linalg import solve_discrete_lyapunov

from qrational import kernels, qcore
from qrational.exceptions import DomainError, SingularityError, ValidationError


def random_disk(rng, n, r=0.95):
    return r * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def test_blaschke_basics():
    assert kernels.blaschke(0.3, 0.3) == 0
    assert abs(kernels.blaschke(0.3 + 0.2j, np.exp(0.7j))) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        kernels.blaschke(1.0, 0.1)
    assert kernels.blaschke_q(0.2, 0.5, 1.0) == pytest.approx(kernels.blaschke(0.2, np.sqrt(0.5)))


def test_blaschke_identities(rng):
    zs, ws = random_disk(rng, 30), random_disk(rng, 30)
    for z, w in zip(zs, ws):
        assert kernels.blaschke_kernel_residual(0.4 - 0.3j, z, w) < 1e-12
        assert kernels.blaschke_q_kernel_residual(0.4 - 0.3j, 0.6, z, w) < 1e-12
        for j in range(4):
            assert kernels.per_factor_identity_residual(0.5j, 0.6, j, z, w) < 1e-12


def test_per_factor_product_reproduces_eq_ratio():
    # product over factors of the left side equals E_q(z conj a) E_q(conj(w) a) / E_q(|a|^2)
    a, q, z, w = 0.6 + 0.3j, 0.5, 0.4 - 0.2j, -0.3 + 0.5j
    prod = 1.0 + 0j
    for j in range(200):
        c = (1 - q) * q ** j
        prod *= (1 - c * abs(a) ** 2) / ((1 - c * z * np.conj(a)) * (1 - c * np.conj(w) * a))
    ref = (qcore.eq_eval_product(z, np.conj(a), q) * qcore.eq_eval_product(np.conj(w), a, q)
           / qcore.eq_eval_product(a, np.conj(a), q))
    assert prod == pytest.approx(ref, rel=1e-12)


def test_disk_grid():
    g = kernels.disk_grid(2.0, 50)
    assert g.shape == (50,) and np.all(np.abs(g) < 0.95 * 2.0 + 1e-12)
    assert len(set(np.round(g, 12))) == 50


def test_gram_check_szego_and_negative():
    pts = kernels.disk_grid(1.0, 20)
    ok = kernels.gram_check(lambda z, w: 1 / (1 - z * np.conj(w)), pts)
    assert ok.passed and ok.min_eig > 0
    bad = kernels.gram_check(lambda z, w: -1 / (1 - z * np.conj(w)), pts)
    assert not bad.passed
    with pytest.raises(ValidationError):
        kernels.gram_check(lambda z, w: 1.0, [0.1, 0.1])


@pytest.mark.parametrize("s,q,expected", [
    (lambda z: kernels.blaschke_q(0.2, 0.5, z), 0.5, True),
    (lambda z: kernels.blaschke_q(0.6j, 0.3, z), 0.3, True),
    (lambda z: 0.9, 0.5, True),
    (lambda z: -1.0, 0.7, True),
    (lambda z: z, 0.5, False),
    (lambda z: 1.01, 0.0, False),
])
def test_multiplier_verdicts(s, q, expected):
    assert kernels.schur_multiplier_check_q(s, q).passed is expected


def test_classical_schur_check():
    assert kernels.classical_schur_check(lambda z: z ** 3).passed
    assert not kernels.classical_schur_check(lambda z: 2 * z).passed


@pytest.mark.parametrize("k,k_end", [(0, None), (2, None), (1, 4)])
def test_shifted_schur_check(k, k_end):
    S = lambda z: kernels.blaschke(0.3 - 0.1j, z)
    assert kernels.shifted_schur_check(S, 0.5, k, k_end=k_end).passed


def test_stein_against_scipy(rng):
    N = 4
    A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    A *= 0.8 / np.max(np.abs(np.linalg.eigvals(A)))
    C = rng.standard_normal((2, N)) + 1j * rng.standard_normal((2, N))
    J = np.diag([1.0, -1.0])
    P = kernels.stein_solve(J, C, A)
    ref = solve_discrete_lyapunov(A.conj().T, C.conj().T @ J @ C)
    np.testing.assert_allclose(P, ref, atol=1e-10)
    assert kernels.stein_residual(P, J, C, A) < 1e-10


def test_stein_singular():
    with pytest.raises(SingularityError):
        kernels.stein_solve(np.eye(1), [[1.0]], [[1.0]])


def test_signature():
    assert kernels.is_signature(np.diag([1, -1]))
    assert not kernels.is_signature(2 * np.eye(2))


def test_blaschke_theta_is_normalized_factor(rng):
    a, z0 = 0.3 + 0.4j, np.exp(0.5j)
    td = kernels.blaschke_theta_data(a, z0)
    assert td.P[0, 0] == pytest.approx(1 / (1 - abs(a) ** 2))
    assert td.positive
    for z in random_disk(rng, 10):
        val = kernels.theta_eval(td, z)[0, 0]
        assert val == pytest.approx(kernels.blaschke(a, z) / kernels.blaschke(a, z0), abs=1e-13)


def test_theta_identities_matrix_case(rng):
    N = 3
    A = np.diag([0.3, -0.5j, 0.1 + 0.4j]) + 0.2 * np.eye(N, k=1)
    C = rng.standard_normal((2, N)) + 1j * rng.standard_normal((2, N))
    J = np.diag([1.0, -1.0])
    td = kernels.ThetaData(J, C, A, np.exp(0.3j))
    zs, ws = random_disk(rng, 10, 0.9), random_disk(rng, 10, 0.9)
    assert max(kernels.theta_kernel_residual(td, z, w) for z, w in zip(zs, ws)) < 1e-10
    assert kernels.j_unitarity_residual(td) < 1e-9


def test_theta_data_validation():
    with pytest.raises(ValidationError):
        kernels.ThetaData(2 * np.eye(1), [[1.0]], [[0.5]])
    with pytest.raises(ValidationError):
        kernels.ThetaData(np.eye(1), [[1.0]], [[0.5]], z0=0.5)
    with pytest.raises(ValidationError):
        kernels.ThetaData(np.eye(1), [[1.0, 0.0]], np.diag([0.5, 0.2]))


def test_theta_q_kernel_positive():
    td = kernels.blaschke_theta_data(0.5)
    assert kernels.theta_q_kernel_check(td, 0.5).passed
