"""Tangential Nevanlinna-Pick interpolation for Schur multipliers of the Drury-Arveson space.

Problem: given nodes ``w_j`` in the unit ball of ``C^N`` and vectors
``xi_j`` in ``C^p``, ``eta_j`` in ``C^qd``, find a contractive multiplier ``S``
(``p x qd``-valued) with ``S(w_j)^* xi_j = eta_j``.  The kernel is
``k(z, w) = 1 / (1 - <z, w>)``.

A solution exists iff the Pick matrix
``G_jl = (xi_j^* xi_l - eta_j^* eta_l) k(w_j, w_l)`` is positive semidefinite.
When ``G > 0`` all solutions are a linear fractional transform of a J-inner
function ``Theta``; the "central" solution takes the free parameter ``0``.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._validation import COND_LIMIT, as_matrix, check_tol, condition_number
from .exceptions import (
    DegenerateProblemError, DimensionError, IdentityResidualWarning, SingularityError,
    ValidationError,
)

PSD_TOL = 1e-9
IDENTITY_TOL = 1e-8


def ball_grid(N, n=40, radius=0.95, seed=0):
    """Deterministic pseudo-random points in the ball ``{|z| < radius}`` of ``C^N``.

    For ``N = 1`` this is the sunflower disk grid.
    """
    if N == 1:
        return kernels.disk_grid(1.0, n, radius).reshape(-1, 1)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1 / (2 * N))
    return x * r


def _as_rows(x, name, m=None):
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a list of vectors")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    if m is not None and arr.shape[0] != m:
        raise DimensionError(f"{name} has {arr.shape[0]} rows, expected {m}")
    return arr


@dataclass(frozen=True)
class PickProblem:
    """Tangential interpolation data; use :meth:`from_values` for full matrix targets.

    ``nodes`` has shape ``(m, N)`` (a flat list means ``N = 1``), ``xi`` has
    shape ``(m, p)`` and ``eta`` shape ``(m, qd)``.
    """

    nodes: np.ndarray
    xi: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        nodes = _as_rows(self.nodes, "nodes")
        m = nodes.shape[0]
        xi = _as_rows(self.xi, "xi", m)
        eta = _as_rows(self.eta, "eta", m)
        if np.any(np.linalg.norm(nodes, axis=1) >= 1):
            raise ValidationError("every node must lie in the open unit ball")
        for name, val in (("nodes", nodes), ("xi", xi), ("eta", eta)):
            val.flags.writeable = False
            object.__setattr__(self, name, val)

    @classmethod
    def from_values(cls, nodes, values):
        """Full-value problem ``S(w_j) = S_j``, recast as ``p`` tangential constraints per node."""
        nodes = _as_rows(nodes, "nodes")
        S = np.asarray(values, dtype=complex)
        if S.ndim == 1:
            S = S.reshape(-1, 1, 1)
        if S.ndim != 3 or S.shape[0] != nodes.shape[0]:
            raise DimensionError("values must be a list of p x qd matrices, one per node")
        p = S.shape[1]
        rows_w, rows_xi, rows_eta = [], [], []
        for w, Sj in zip(nodes, S):
            for i in range(p):
                rows_w.append(w)
                rows_xi.append(np.eye(p)[i])
                rows_eta.append(Sj.conj().T[:, i])
        return cls(np.array(rows_w), np.array(rows_xi), np.array(rows_eta))

    @property
    def ball_dim(self):
        return self.nodes.shape[1]

    @property
    def m(self):
        return self.nodes.shape[0]

    @property
    def p(self):
        return self.xi.shape[1]

    @property
    def qd(self):
        return self.eta.shape[1]

    @property
    def is_scalar_disk(self):
        """N = 1, scalar data, every ``xi_j`` nonzero: the classical Schur algorithm applies."""
        return (self.ball_dim == 1 and self.p == 1 and self.qd == 1
                and bool(np.all(np.abs(self.xi) > 0)))

    def targets(self):
        """Scalar values ``s_j = conj(eta_j / xi_j)`` (scalar disk problems only)."""
        if not self.is_scalar_disk:
            raise ValidationError("targets() needs a scalar problem on the disk")
        return np.conj(self.eta[:, 0] / self.xi[:, 0])


def _check_distinct(problem):
    """Nodes may repeat only when their constraints come from a full-value target."""
    X = np.hstack([problem.nodes, problem.xi])
    keys = {tuple(np.round(r, 14)) for r in X}
    if len(keys) != problem.m:
        raise ValidationError("coincident interpolation constraints")


def pick_matrix(problem):
    """``G_jl = (xi_j^* xi_l - eta_j^* eta_l) / (1 - <w_j, w_l>)``."""
    _check_distinct(problem)
    W = problem.nodes
    inner = W @ W.conj().T
    num = problem.xi.conj() @ problem.xi.T - problem.eta.conj() @ problem.eta.T
    G = num / (1 - inner)
    return (G + G.conj().T) / 2


def pick_spectrum(problem):
    eig = np.linalg.eigvalsh(pick_matrix(problem))
    return float(eig[0]), float(eig[-1])


def pick_status(problem, tol=PSD_TOL):
    """``"solvable"`` (G > 0), ``"degenerate"`` (singular G >= 0) or ``"unsolvable"``."""
    lo, hi = pick_spectrum(problem)
    thresh = tol * (1 + max(hi, 0.0))
    if lo > thresh:
        return "solvable"
    if lo >= -thresh:
        return "degenerate"
    return "unsolvable"


def solvable(problem, tol=PSD_TOL):
    """True iff the Pick matrix is positive semidefinite within ``tol``."""
    return pick_status(problem, tol) != "unsolvable"


def _require_definite(problem, tol):
    status = pick_status(problem, tol)
    if status == "unsolvable":
        raise ValidationError("Pick matrix is not positive semidefinite: no solution")
    if status == "degenerate":
        raise DegenerateProblemError(
            "degenerate: Pick matrix is singular (unique or boundary solution); not solved")


def _as_point(lam, N):
    lam = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    if lam.size != N:
        raise DimensionError(f"point must have {N} coordinates")
    return lam


def linear_fractional(theta_value, sigma_value, p):
    """``(t11 sigma + t12)(t21 sigma + t22)^{-1}`` for a ``Theta`` value split after row ``p``.

    The column split is read off ``sigma_value``: its number of rows is the
    width of the first block column.
    """
    T = np.asarray(theta_value)
    sig = as_matrix(sigma_value, "sigma")
    k = sig.shape[0]
    if sig.shape[1] != T.shape[1] - k:
        raise DimensionError(f"sigma must be {k} x {T.shape[1] - k}")
    t11, t12 = T[:p, :k], T[:p, k:]
    t21, t22 = T[p:, :k], T[p:, k:]
    den = t21 @ sig + t22
    if condition_number(den) > COND_LIMIT:
        raise SingularityError("denominator of the linear fractional map is singular")
    return (t11 @ sig + t12) @ np.linalg.inv(den)


class ColligationTheta:
    """J-inner function built from a unitary completion (in an indefinite metric) of the interpolation data.

    With ``A_i = diag(conj(w_j^(i)))``, ``C`` with columns ``[xi_j; eta_j]`` and
    ``J = diag(I_p, -I_qd)`` the Pick matrix solves
    ``G - sum_i A_i^* G A_i = C^* J C``.  A basis ``[B; D]`` of the
    ``diag(I_N kron G, J)``-orthogonal complement of ``[A_1; ...; A_N; C]``,
    normalized to signature ``bold J = diag(I_{(N-1)m+p}, -I_qd)``, gives

        Theta(lam) = D + C (I - sum_i lam_i A_i)^{-1} [lam_1 I, ..., lam_N I] B,

    which satisfies
    ``J - Theta(lam) bold J Theta(mu)^* = (1 - <lam, mu>) F(lam) G^{-1} F(mu)^*``
    with ``F(lam) = C (I - sum_i lam_i A_i)^{-1}``.
    """

    def __init__(self, problem, tol=PSD_TOL):
        _require_definite(problem, tol)
        self.problem = problem
        N, m, p, qd = problem.ball_dim, problem.m, problem.p, problem.qd
        G = pick_matrix(problem)
        self.G = G
        self.Ginv = np.linalg.inv(G)
        self.C = np.vstack([problem.xi.T, problem.eta.T])
        self.Jsig = np.diag(np.concatenate([np.ones(p), -np.ones(qd)]))
        self.diags = problem.nodes.conj().T  # row i: diagonal of A_i
        V = np.vstack([np.diag(self.diags[i]) for i in range(N)] + [self.C])
        gram = np.block([
            [np.kron(np.eye(N), G), np.zeros((N * m, p + qd))],
            [np.zeros((p + qd, N * m)), self.Jsig],
        ])
        _, s, Vh = np.linalg.svd(V.conj().T @ gram)
        K0 = Vh[m:].conj().T
        H = K0.conj().T @ gram @ K0
        lam, Q = np.linalg.eigh((H + H.conj().T) / 2)
        order = np.argsort(-lam, kind="stable")
        lam, Q = lam[order], Q[:, order]
        n_pos = (N - 1) * m + p
        if np.count_nonzero(lam > 0) != n_pos:
            raise SingularityError("completion has unexpected inertia")
        W = K0 @ Q / np.sqrt(np.abs(lam))
        self.B = W[:N * m]
        self.D = W[N * m:]
        self.signature = np.diag(np.sign(lam))
        self.n_left = n_pos

    def F(self, lam):
        lam = _as_point(lam, self.problem.ball_dim)
        den = 1 - lam @ self.diags
        if np.any(np.abs(den) < 1e-14):
            raise SingularityError("point outside the domain of Theta")
        return self.C / den

    def __call__(self, lam):
        lam = _as_point(lam, self.problem.ball_dim)
        m = self.problem.m
        ZB = sum(lam[i] * self.B[i * m:(i + 1) * m] for i in range(lam.size))
        return self.D + self.F(lam) @ ZB

    def identity_residual(self, lam, mu):
        lam = _as_point(lam, self.problem.ball_dim)
        mu = _as_point(mu, self.problem.ball_dim)
        Tl, Tm = self(lam), self(mu)
        lhs = self.Jsig - Tl @ self.signature @ Tm.conj().T
        rhs = (1 - lam @ mu.conj()) * self.F(lam) @ self.Ginv @ self.F(mu).conj().T
        return float(np.max(np.abs(lhs - rhs)))

    def solution(self, sigma=None):
        """Solution for a constant free parameter ``sigma`` (``((N-1)m + p) x qd``, default 0)."""
        p, qd = self.problem.p, self.problem.qd
        sig = (np.zeros((self.n_left, qd)) if sigma is None
               else as_matrix(sigma, "sigma", (self.n_left, qd)))
        return lambda lam: linear_fractional(self(lam), sig, p)


class SchurTheta:
    """Classical Schur-algorithm coefficient matrix for scalar disk problems.

    ``gamma_k`` are the Schur parameters obtained by peeling off one node at a
    time, ``Theta(z) = prod_k H(gamma_k) diag(b_k(z), 1) / sqrt(1 - |gamma_k|^2)``
    with ``H(g) = [[1, g], [conj g, 1]]`` and ``b_k`` the Blaschke factor at
    node ``k``.
    """

    def __init__(self, problem, tol=PSD_TOL):
        if not problem.is_scalar_disk:
            raise ValidationError("SchurTheta needs a scalar problem on the disk")
        _require_definite(problem, tol)
        self.problem = problem
        self.nodes = problem.nodes[:, 0]
        v = problem.targets().astype(complex)
        gammas = []
        for k in range(problem.m):
            g = v[k]
            if abs(g) >= 1:
                raise SingularityError("Schur parameter of modulus >= 1 despite G > 0")
            gammas.append(g)
            for j in range(k + 1, problem.m):
                b = kernels.blaschke(self.nodes[k], self.nodes[j])
                v[j] = (v[j] - g) / (b * (1 - np.conj(g) * v[j]))
        self.gammas = np.array(gammas)
        self.Jsig = np.diag([1.0, -1.0])
        self.signature = self.Jsig
        self.n_left = 1

    def __call__(self, z):
        z = complex(_as_point(z, 1)[0])
        T = np.eye(2, dtype=complex)
        for a, g in zip(self.nodes, self.gammas):
            H = np.array([[1, g], [np.conj(g), 1]]) / np.sqrt(1 - abs(g) ** 2)
            T = T @ H @ np.diag([kernels.blaschke(a, z), 1])
        return T

    def solution(self, sigma=None):
        """Solution for a constant parameter ``sigma`` with ``|sigma| <= 1`` (default 0)."""
        s0 = 0.0 if sigma is None else complex(np.asarray(sigma).ravel()[0])

        def S(z):
            z = complex(_as_point(z, 1)[0])
            x = s0
            for a, g in zip(self.nodes[::-1], self.gammas[::-1]):
                bx = kernels.blaschke(a, z) * x
                x = (bx + g) / (1 + np.conj(g) * bx)
            return np.array([[x]])
        return S


def theta_build(problem, tol=PSD_TOL, method="auto", check_pairs=10, seed=0):
    """Build ``Theta`` for a problem with positive definite Pick matrix.

    ``method="auto"`` uses the Schur algorithm for scalar disk problems and the
    colligation construction otherwise.  For the colligation the fundamental
    identity is sampled at ``check_pairs`` point pairs; its worst residual is
    stored as ``identity_residual_`` and a warning is issued above ``1e-8``.
    """
    if method not in ("auto", "schur", "colligation"):
        raise ValidationError(f"unknown method {method!r}")
    if method == "schur" or (method == "auto" and problem.is_scalar_disk):
        theta = SchurTheta(problem, tol)
        theta.identity_residual_ = None
        return theta
    theta = ColligationTheta(problem, tol)
    pts = ball_grid(problem.ball_dim, 2 * check_pairs, 0.9, seed)
    res = max(theta.identity_residual(pts[2 * i], pts[2 * i + 1]) for i in range(check_pairs))
    theta.identity_residual_ = res
    if res > IDENTITY_TOL:
        warnings.warn(f"fundamental identity residual {res:.3e}", IdentityResidualWarning,
                      stacklevel=2)
    return theta


def central_solution(problem, tol=PSD_TOL, method="auto"):
    """Solution with free parameter 0, as a callable returning ``p x qd`` matrices."""
    return theta_build(problem, tol, method).solution()


@dataclass(frozen=True)
class SolutionReport:
    residuals: np.ndarray
    max_residual: float
    gram_min_eig: float
    gram_max_eig: float
    interpolates: bool
    contractive: bool

    @property
    def passed(self):
        return self.interpolates and self.contractive

    def report(self):
        return {"pass": self.passed, "max_residual": self.max_residual,
                "residuals": [float(r) for r in self.residuals],
                "gram_min_eig": self.gram_min_eig, "interpolates": self.interpolates,
                "contractive": self.contractive}


def verify_solution(S, problem, grid=None, tol=1e-8):
    """A posteriori check of a candidate solution ``S``.

    Reports ``|S(w_j)^* xi_j - eta_j|`` per constraint and a Gram test of
    ``(I - S(z) S(w)^*) / (1 - <z, w>)`` on a grid in the ball.
    """
    tol = check_tol(tol)
    N = problem.ball_dim
    res = []
    for w, xi, eta in zip(problem.nodes, problem.xi, problem.eta):
        val = as_matrix(S(w), "S value", (problem.p, problem.qd))
        res.append(float(np.linalg.norm(val.conj().T @ xi - eta)))
    res = np.array(res)
    pts = ball_grid(N) if grid is None else _as_rows(grid, "grid")
    if pts.shape[1] != N:
        raise DimensionError(f"grid points must have {N} coordinates")
    vals = [as_matrix(S(z), "S value") for z in pts]
    blocks = [[(np.eye(problem.p) - vals[i] @ vals[j].conj().T) / (1 - pts[i] @ pts[j].conj())
               for j in range(len(pts))] for i in range(len(pts))]
    G = np.block(blocks)
    eig = np.linalg.eigvalsh((G + G.conj().T) / 2)
    lo, hi = float(eig[0]), float(eig[-1])
    return SolutionReport(res, float(res.max()), lo, hi, bool(res.max() <= tol),
                          bool(lo >= -tol * (1 + max(hi, 0.0))))


@dataclass
class PickResult:
    G: np.ndarray
    min_eig: float
    max_eig: float
    status: str
    theta: object = None
    central: object = None
    identity_residual: float = None
    verification: SolutionReport = None

    @property
    def solvable(self):
        return self.status != "unsolvable"


def solve(problem, tol=PSD_TOL, method="auto", verify=True):
    """Full pipeline: Pick test, ``Theta``, central solution and a posteriori verification."""
    G = pick_matrix(problem)
    eig = np.linalg.eigvalsh(G)
    status = pick_status(problem, tol)
    result = PickResult(G, float(eig[0]), float(eig[-1]), status)
    if status != "solvable":
        return result
    theta = theta_build(problem, tol, method)
    result.theta = theta
    result.identity_residual = theta.identity_residual_
    result.central = theta.solution()
    if verify:
        result.verification = verify_solution(result.central, problem)
    return result
