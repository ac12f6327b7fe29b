import numpy as np
import pytest

from qrational import interp, kernels
from qrational.exceptions import DegenerateProblemError, ValidationError


def classical_pick(z, s):
    """Oracle: (1 - s_i conj s_j) / (1 - z_i conj z_j)."""
    z, s = np.asarray(z), np.asarray(s)
    return (1 - np.outer(s, s.conj())) / (1 - np.outer(z, z.conj()))


def random_nodes(rng, m, r=0.9):
    return r * np.sqrt(rng.uniform(size=m)) * np.exp(2j * np.pi * rng.uniform(size=m))


def test_pick_matrix_matches_classical(rng):
    z = random_nodes(rng, 4)
    s = 0.7 * random_nodes(rng, 4, 1.0)
    G = interp.pick_matrix(interp.PickProblem.from_values(z, s))
    np.testing.assert_allclose(G, classical_pick(z, s), atol=1e-14)


def test_single_node_unsolvable():
    res = interp.solve(interp.PickProblem.from_values([0.3], [1.2]))
    assert res.status == "unsolvable" and res.central is None


def test_one_point_at_origin_is_constant():
    S = interp.central_solution(interp.PickProblem.from_values([0.0], [0.4 - 0.2j]))
    for z in [0.0, 0.5, -0.3j]:
        assert S(z)[0, 0] == pytest.approx(0.4 - 0.2j)


def test_degenerate_problem():
    # values of a Blaschke factor: G is singular
    z = [0.1, 0.5j]
    s = [kernels.blaschke(0.3, w) for w in z]
    p = interp.PickProblem.from_values(z, s)
    assert interp.pick_status(p) == "degenerate"
    with pytest.raises(DegenerateProblemError):
        interp.theta_build(p)


def test_duplicate_nodes_rejected():
    with pytest.raises(ValidationError):
        interp.pick_matrix(interp.PickProblem.from_values([0.2, 0.2], [0.1, 0.3]))


def test_node_outside_ball_rejected():
    with pytest.raises(ValidationError):
        interp.PickProblem([1.0], [1.0], [0.0])


@pytest.mark.parametrize("method", ["schur", "colligation"])
def test_scalar_methods_interpolate(rng, method):
    z = random_nodes(rng, 4)
    s = [0.8 * kernels.blaschke(0.2, w) * w for w in z]
    p = interp.PickProblem.from_values(z, s)
    S = interp.central_solution(p, method=method)
    for w, v in zip(z, s):
        assert S(w)[0, 0] == pytest.approx(v, abs=1e-10)
    assert interp.verify_solution(S, p).passed


def test_schur_and_colligation_both_satisfy_constraints(rng):
    z = random_nodes(rng, 3)
    s = 0.5 * random_nodes(rng, 3, 1.0)
    p = interp.PickProblem.from_values(z, s)
    if interp.pick_status(p) != "solvable":
        pytest.skip("random draw not strictly solvable")
    for method in ("schur", "colligation"):
        th = interp.theta_build(p, method=method)
        S = th.solution()
        assert interp.verify_solution(S, p).passed
        if method == "colligation":
            assert th.identity_residual_ < 1e-10


def test_schur_free_parameter_gives_other_solutions(rng):
    z = random_nodes(rng, 3)
    s = [0.6 * w ** 2 for w in z]
    p = interp.PickProblem.from_values(z, s)
    th = interp.theta_build(p)
    S0, S1 = th.solution(), th.solution(0.5)
    assert interp.verify_solution(S1, p).passed
    assert abs(S0(0.95)[0, 0] - S1(0.95)[0, 0]) > 1e-6


def test_ball_problem_from_row_contraction(rng):
    # S(z) = <z, c> with |c| < 1 is a contractive multiplier on the ball
    N, c = 2, np.array([0.5, 0.3j])
    nodes = interp.ball_grid(N, 4, 0.8, seed=3)
    vals = nodes @ c
    p = interp.PickProblem.from_values(nodes, vals)
    res = interp.solve(p)
    assert res.status == "solvable"
    assert res.identity_residual < 1e-10
    assert res.verification.passed


def test_tangential_matrix_problem(rng):
    N, p_dim, q_dim = 3, 2, 2
    K = np.array([[0.3, 0.1], [0.0, -0.2j]])
    S_true = lambda w: (w[0] + 0.5 * w[1]) * K
    nodes = interp.ball_grid(N, 3, 0.7, seed=1)
    xi = rng.standard_normal((3, p_dim)) + 1j * rng.standard_normal((3, p_dim))
    eta = np.array([S_true(w).conj().T @ x for w, x in zip(nodes, xi)])
    prob = interp.PickProblem(nodes, xi, eta)
    res = interp.solve(prob)
    assert res.status == "solvable" and res.verification.passed
    assert res.central(nodes[0]).shape == (p_dim, q_dim)


def test_linear_fractional_identity():
    # Theta = [[I, 0], [0, 1]] with a 2-column left block: S = t11 sigma
    T = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    sig = np.array([[0.2], [0.1]])
    np.testing.assert_allclose(interp.linear_fractional(T, sig, 1), [[0.2]])
