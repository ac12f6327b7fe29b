"""Blaschke factors, Stein-equation J-inner functions and sampled positivity checks.

Positivity of a kernel is only ever certified on a finite point set: a failed
Gram check refutes positive definiteness, a passed one is evidence, not proof.
"""
from dataclasses import dataclass

import numpy as np

from . import qcore
from ._validation import COND_LIMIT, as_matrix, as_points, check_q, check_tol, condition_number
from .exceptions import DimensionError, DomainError, SingularityError, ValidationError
from .statespace import is_observable

GRID_SIZE = 40
GRID_SHRINK = 0.95
_GOLDEN_ANGLE = np.pi * (3 - np.sqrt(5))


# ------------------------------------------------------------ Blaschke

def _check_disk(a):
    a = complex(a)
    if abs(a) >= 1:
        raise DomainError(f"|a| = {abs(a):.6g} must be < 1")
    return a


def blaschke(a, z):
    """Blaschke factor ``(z - a) / (1 - z conj(a))``."""
    a, z = _check_disk(a), complex(z)
    den = 1 - z * a.conjugate()
    if abs(den) < 1e-14:
        raise SingularityError(f"z = {z} is the pole of the Blaschke factor")
    return (z - a) / den


def blaschke_q(a, q, z):
    """q-scaled Blaschke factor ``b_a(sqrt(1-q) z)``."""
    q = check_q(q)
    return blaschke(a, np.sqrt(1 - q) * complex(z))


def blaschke_kernel_residual(a, z, w):
    """Residual of ``(1 - b(z) conj b(w)) / (1 - z conj w) = (1-|a|^2) / ((1 - z conj a)(1 - conj(w) a))``."""
    a, z, w = _check_disk(a), complex(z), complex(w)
    lhs = (1 - blaschke(a, z) * blaschke(a, w).conjugate()) / (1 - z * w.conjugate())
    rhs = (1 - abs(a) ** 2) / ((1 - z * a.conjugate()) * (1 - w.conjugate() * a))
    return abs(lhs - rhs)


def blaschke_q_kernel_residual(a, q, z, w):
    """Residual of the rescaled identity, with ``1 - (1-q) z conj w`` in the denominator."""
    q = check_q(q)
    a, z, w = _check_disk(a), complex(z), complex(w)
    s = np.sqrt(1 - q)
    lhs = ((1 - blaschke_q(a, q, z) * blaschke_q(a, q, w).conjugate())
           / (1 - (1 - q) * z * w.conjugate()))
    rhs = (1 - abs(a) ** 2) / ((1 - s * z * a.conjugate()) * (1 - s * w.conjugate() * a))
    return abs(lhs - rhs)


def per_factor_identity_residual(a, q, j, z, w):
    """Residual of the factor-``j`` identity behind the product form of ``E_q(z a) E_q(conj(w a)) / E_q(|a|^2)``.

    The left side is ``(1 - c z conj a)^{-1} (1 - c conj(w) a)^{-1} (1 - c |a|^2)``
    with ``c = (1-q) q**j``; the right side is the Blaschke kernel of ``b_v`` at
    ``u = s z``, ``u' = s w`` with ``v = s a`` and ``s = sqrt(1-q) q**(j/2)``.
    """
    q = check_q(q)
    a, z, w = complex(a), complex(z), complex(w)
    j = int(j)
    if j < 0:
        raise ValidationError("j must be nonnegative")
    s = np.sqrt(1 - q) * q ** (j / 2)
    c = s * s
    v, u, uw = s * a, s * z, s * w
    if abs(v) >= 1:
        raise DomainError("scaled zero must lie in the unit disk")
    den_l = (1 - c * z * a.conjugate()) * (1 - c * w.conjugate() * a)
    if abs(den_l) < 1e-14 or abs(1 - u * uw.conjugate()) < 1e-14:
        raise SingularityError("arguments too close to a pole")
    lhs = (1 - c * abs(a) ** 2) / den_l
    rhs = (1 - blaschke(v, u) * blaschke(v, uw).conjugate()) / (1 - u * uw.conjugate())
    rhs2 = ((1 - blaschke(v, u) * blaschke(v, uw).conjugate())
            / (1 - z * w.conjugate() * (1 - q) * q ** j))
    return max(abs(lhs - rhs), abs(rhs - rhs2))


# --------------------------------------------------------- Gram checks

def disk_grid(radius, n=GRID_SIZE, shrink=GRID_SHRINK):
    """``n`` quasi-uniform points (sunflower spiral) in the disk of radius ``shrink * radius``."""
    n = int(n)
    if n < 1:
        raise ValidationError("grid size must be positive")
    k = np.arange(n)
    r = shrink * radius * np.sqrt((k + 0.5) / n)
    return r * np.exp(1j * _GOLDEN_ANGLE * k)


@dataclass(frozen=True)
class SampledGram:
    """Gram matrix of a kernel on a finite point set."""

    points: np.ndarray
    gram: np.ndarray
    min_eig: float
    max_eig: float
    tol: float

    @property
    def passed(self):
        return bool(self.min_eig >= -self.tol * (1 + max(self.max_eig, 0.0)))

    def report(self):
        return {"pass": self.passed, "min_eig": self.min_eig, "max_eig": self.max_eig,
                "points_used": int(len(self.points))}


def gram_check(kernel, points, tol=1e-9):
    """Assemble the (block) Gram matrix ``[k(z_i, z_j)]`` and inspect its spectrum.

    ``kernel(z, w)`` may return a scalar or a square matrix.  The Gram matrix
    is Hermitized before its eigenvalues are computed.
    """
    tol = check_tol(tol)
    pts = list(points)
    if not pts:
        raise ValidationError("no sample points")
    keys = [tuple(np.atleast_1d(np.asarray(p, dtype=complex))) for p in pts]
    if len(set(keys)) != len(keys):
        raise ValidationError("sample points must be distinct")
    n = len(pts)
    blocks = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            try:
                blocks[i][j] = as_matrix(kernel(pts[i], pts[j]), "kernel value")
            except (ArithmeticError, ValueError, SingularityError) as exc:
                raise type(exc)(f"kernel evaluation failed at points ({i}, {j}): {exc}") from exc
    G = np.block(blocks)
    G = (G + G.conj().T) / 2
    eig = np.linalg.eigvalsh(G)
    return SampledGram(np.asarray(pts), G, float(eig[0]), float(eig[-1]), tol)


def _as_value(x):
    return as_matrix(x, "function value")


def _szego_multiplier_kernel(sigma):
    def kernel(z, w):
        sz, sw = _as_value(sigma(z)), _as_value(sigma(w))
        return (np.eye(sz.shape[0]) - sz @ sw.conj().T) / (1 - z * np.conj(w))
    return kernel


@dataclass(frozen=True)
class MultiplierVerdict:
    passed: bool
    min_eig: float
    max_eig: float
    sup_abs: float
    points_used: int

    def report(self):
        return {"pass": self.passed, "min_eig": self.min_eig, "max_eig": self.max_eig,
                "sup_abs": self.sup_abs, "points_used": self.points_used}


def _verdict(gram, values):
    sup = max(float(np.linalg.norm(_as_value(v), 2)) for v in values)
    return MultiplierVerdict(gram.passed, gram.min_eig, gram.max_eig, sup, len(gram.points))


def schur_multiplier_check_q(s, q, grid=None, tol=1e-9):
    """Sampled test that ``s`` is a Schur multiplier of the q-deformed Hardy space.

    ``s`` qualifies when ``sigma(z) = s(z / sqrt(1-q))`` is a Schur function of
    the unit disk, which is tested through the Gram matrix of
    ``(I - sigma(z) sigma(w)^*) / (1 - z conj w)`` on unit-disk points.
    """
    q = check_q(q)
    pts = disk_grid(1.0) if grid is None else as_points(grid, "grid")
    if np.any(np.abs(pts) >= 1):
        raise ValidationError("grid points must lie in the open unit disk")
    scale = 1 / np.sqrt(1 - q)
    sigma = lambda z: s(z * scale)
    gram = gram_check(_szego_multiplier_kernel(sigma), pts, tol)
    return _verdict(gram, [sigma(z) for z in pts])


def classical_schur_check(s, grid=None, tol=1e-9):
    """Classical Schur test: Gram of ``(1 - s(z) conj s(w)) / (1 - z conj w)``."""
    return schur_multiplier_check_q(s, 0.0, grid, tol)


def shifted_schur_check(S, q, k, grid=None, tol=1e-9, k_end=None):
    """Gram test of ``(I - S_k(z) S_k(w)^*) E_q(z conj w)`` with ``S_k(z) = S(sqrt(1-q) q**(k/2) z)``.

    With ``k_end`` given, ``S_k`` is replaced by the product of the shifts
    ``k, k+1, ..., k_end``.  Points live in the disk of radius ``1/sqrt(1-q)``.
    """
    q = check_q(q)
    k = int(k)
    k_end = k if k_end is None else int(k_end)
    if k < 0 or k_end < k:
        raise ValidationError("need 0 <= k <= k_end")
    radius = 1 / np.sqrt(1 - q)
    pts = disk_grid(radius) if grid is None else as_points(grid, "grid")
    if np.any(np.abs(pts) >= radius):
        raise ValidationError(f"grid points must lie in the disk of radius {radius:.6g}")

    def shifted(z):
        out = None
        for i in range(k, k_end + 1):
            val = _as_value(S(np.sqrt(1 - q) * q ** (i / 2) * z))
            out = val if out is None else out @ val
        return out

    def kernel(z, w):
        sz, sw = shifted(z), shifted(w)
        eq = qcore.eq_eval_product(z, np.conj(w), q)
        return (np.eye(sz.shape[0]) - sz @ sw.conj().T) * eq

    gram = gram_check(kernel, pts, tol)
    return _verdict(gram, [shifted(z) for z in pts])


# ------------------------------------------------------ Stein / Theta

def stein_solve(Jsig, C, A):
    """Solve ``P - A^* P A = C^* J C`` as a dense linear system in the entries of ``P``."""
    A = as_matrix(A, "A")
    N = A.shape[0]
    if A.shape[1] != N:
        raise DimensionError("A must be square")
    C = as_matrix(C if np.ndim(C) != 1 else np.reshape(C, (1, -1)), "C", (None, N))
    Jsig = as_matrix(Jsig, "J", (C.shape[0], C.shape[0]))
    Q = C.conj().T @ Jsig @ C
    # column-major vec: vec(A^* P A) = (A^T kron A^*) vec(P)
    M = np.eye(N * N) - np.kron(A.T, A.conj().T)
    if condition_number(M) > COND_LIMIT:
        raise SingularityError("Stein operator is singular (eigenvalue pair with lambda_i conj(lambda_j) = 1)")
    P = np.linalg.solve(M, Q.reshape(-1, order="F")).reshape(N, N, order="F")
    return (P + P.conj().T) / 2


def stein_residual(P, Jsig, C, A):
    return float(np.linalg.norm(P - A.conj().T @ P @ A - C.conj().T @ Jsig @ C))


def is_signature(Jsig, tol=1e-12):
    J = np.asarray(Jsig, dtype=complex)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        return False
    I = np.eye(J.shape[0])
    return bool(np.linalg.norm(J - J.conj().T) <= tol and np.linalg.norm(J @ J - I) <= tol)


@dataclass(frozen=True)
class ThetaData:
    """Data ``(J, C, A, z0)`` plus the Stein solution ``P`` defining a J-inner function.

    ``P`` is solved for when not supplied.  Construction checks that ``J`` is
    a signature matrix, ``|z0| = 1`` with ``I - z0 A`` invertible, ``(C, A)``
    is observable, and ``P`` is Hermitian, invertible and solves the Stein
    equation.
    """

    Jsig: np.ndarray
    C: np.ndarray
    A: np.ndarray
    z0: complex = 1.0
    P: np.ndarray = None

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        N = A.shape[0]
        if A.shape[1] != N:
            raise DimensionError("A must be square")
        C = as_matrix(self.C if np.ndim(self.C) != 1 else np.reshape(self.C, (1, -1)),
                      "C", (None, N))
        J = as_matrix(self.Jsig, "J", (C.shape[0], C.shape[0]))
        if not is_signature(J):
            raise ValidationError("J must satisfy J = J^* = J^{-1}")
        z0 = complex(self.z0)
        if abs(abs(z0) - 1) > 1e-12:
            raise ValidationError(f"|z0| must be 1, got {abs(z0)}")
        if condition_number(np.eye(N) - z0 * A) > COND_LIMIT:
            raise SingularityError("z0 is not in the resolvent set: I - z0 A is singular")
        if not is_observable(C, A):
            raise ValidationError("(C, A) must be observable")
        P = stein_solve(J, C, A) if self.P is None else as_matrix(self.P, "P", (N, N))
        if np.linalg.norm(P - P.conj().T) > 1e-12 * max(1.0, np.linalg.norm(P)):
            raise ValidationError("P must be Hermitian")
        cond = condition_number(P)
        if cond > COND_LIMIT:
            raise SingularityError(f"P is not invertible (condition number {cond:.3e})")
        res = stein_residual(P, J, C, A)
        if res > 1e-10 * max(1.0, np.linalg.norm(C.conj().T @ J @ C)):
            raise ValidationError(f"P does not solve the Stein equation (residual {res:.3e})")
        for name, val in (("Jsig", J), ("C", C), ("A", A), ("P", P)):
            val = np.array(val)
            val.flags.writeable = False
            object.__setattr__(self, name, val)
        object.__setattr__(self, "z0", z0)

    @property
    def positive(self):
        """True when ``P`` is positive definite (the J-inner case)."""
        return bool(np.linalg.eigvalsh(self.P)[0] > 0)


def _resolvent(A, z):
    N = A.shape[0]
    M = np.eye(N) - z * A
    if condition_number(M) > COND_LIMIT:
        raise SingularityError(f"I - zA is singular at z = {z}")
    return np.linalg.inv(M)


def theta_eval(td, z):
    """``J - (1 - z conj z0) C (I - zA)^{-1} P^{-1} (I - z0 A)^{-*} C^*``."""
    z = complex(z)
    R = _resolvent(td.A, z)
    R0 = _resolvent(td.A, td.z0)
    core = td.C @ R @ np.linalg.solve(td.P, R0.conj().T @ td.C.conj().T)
    return td.Jsig - (1 - z * td.z0.conjugate()) * core


def theta_kernel_residual(td, z, w):
    """Residual of ``(J - Th(z) J Th(w)^*) / (1 - z conj w) = C (I-zA)^{-1} P^{-1} (I-wA)^{-*} C^*``."""
    z, w = complex(z), complex(w)
    Tz, Tw = theta_eval(td, z), theta_eval(td, w)
    lhs = (td.Jsig - Tz @ td.Jsig @ Tw.conj().T) / (1 - z * w.conjugate())
    Rz, Rw = _resolvent(td.A, z), _resolvent(td.A, w)
    rhs = td.C @ Rz @ np.linalg.solve(td.P, Rw.conj().T @ td.C.conj().T)
    return float(np.max(np.abs(lhs - rhs)))


def j_unitarity_residual(td, n_points=32):
    """Worst ``||Th J Th^* - J||`` over equispaced circle points away from poles."""
    worst = 0.0
    used = 0
    for t in np.arange(n_points) * 2 * np.pi / n_points + 0.1:
        z = np.exp(1j * t)
        try:
            T = theta_eval(td, z)
        except SingularityError:
            continue
        used += 1
        worst = max(worst, float(np.linalg.norm(T @ td.Jsig @ T.conj().T - td.Jsig, 2)))
    if used == 0:
        raise SingularityError("every circle sample hits a pole")
    return worst


def theta_q_kernel_check(td, q, points=None, tol=1e-9):
    """Gram check of ``(J - Th(s z) J Th(s w)^*) E_q(z conj w)`` with ``s = sqrt(1-q)``.

    Points where ``Th(s z)`` is undefined are dropped.
    """
    q = check_q(q)
    s = np.sqrt(1 - q)
    pts = disk_grid(1 / s) if points is None else as_points(points, "points")
    keep = [z for z in pts
            if condition_number(np.eye(td.A.shape[0]) - s * z * td.A) < 1e8]
    if not keep:
        raise ValidationError("no usable points inside the domain of Theta")
    cache = {complex(z): theta_eval(td, s * z) for z in keep}

    def kernel(z, w):
        Tz, Tw = cache[complex(z)], cache[complex(w)]
        return (td.Jsig - Tz @ td.Jsig @ Tw.conj().T) * qcore.eq_eval_product(z, np.conj(w), q)

    return gram_check(kernel, keep, tol)


def blaschke_theta_data(a, z0=1.0):
    """Scalar data ``J = 1``, ``C = 1``, ``A = conj(a)`` whose Theta is a normalized Blaschke factor."""
    a = _check_disk(a)
    return ThetaData(np.eye(1), np.ones((1, 1)), np.array([[a.conjugate()]]), z0)
