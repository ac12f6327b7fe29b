"""State-space realizations and their q-deformed evaluation.

Two realization forms are used throughout::

    F(z) = D + z C (I - zA)^{-1} B      ("weiz" form, D present)
    F(z) = C (I - zA)^{-1} B            ("weiz2" form, D is None)

A :class:`QRational` pairs a D-free triple with ``q`` in ``[0, 1)`` and stands
for ``C prod_{j>=0} (I - (1-q) z q**j A)^{-1} B``, whose Taylor coefficients
are ``C A**k B / [k]_q!``.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import qcore
from ._validation import (
    COND_LIMIT, as_coeffs, as_matrix, as_points, check_q, check_tol, condition_number,
    max_terms, numeric_rank,
)
from .exceptions import (
    ConvergenceError, DimensionError, DomainError, InsufficientDataError, RankWarning,
    SingularityError, ValidationError,
)

PRODUCT_CAP = 5000


def _frozen(arr):
    arr = np.array(arr, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class StateSpace:
    """Realization ``(C, A, B[, D])`` with ``C: m x N``, ``A: N x N``, ``B: N x n``.

    ``N = 0`` is allowed; pass ``C`` and ``B`` with a zero-length axis (or use
    :meth:`zero`).
    """

    C: np.ndarray
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray = None

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        N = A.shape[0]
        if A.shape[1] != N:
            raise DimensionError(f"A must be square, got {A.shape}")
        C = np.asarray(self.C, dtype=complex)
        B = np.asarray(self.B, dtype=complex)
        if N == 0:
            C = C.reshape(C.shape[0] if C.ndim else 1, 0)
            B = B.reshape(0, B.shape[-1] if B.ndim == 2 else (B.size or 1))
        else:
            C = as_matrix(C if C.ndim != 1 else C.reshape(1, -1), "C", (None, N))
            B = as_matrix(B, "B", (N, None))
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "B", _frozen(B))
        object.__setattr__(self, "C", _frozen(C))
        if self.D is not None:
            D = as_matrix(self.D, "D", (C.shape[0], B.shape[1]))
            object.__setattr__(self, "D", _frozen(D))

    @classmethod
    def zero(cls, m, n, D=None):
        """State-free realization of the constant ``D`` (or of zero)."""
        return cls(np.zeros((m, 0)), np.zeros((0, 0)), np.zeros((0, n)), D)

    @property
    def state_dim(self):
        return self.A.shape[0]

    @property
    def output_dim(self):
        return self.C.shape[0]

    @property
    def input_dim(self):
        return self.B.shape[1]

    @property
    def has_D(self):
        return self.D is not None

    def __call__(self, z):
        return eval_classical(self, z)

    def __repr__(self):
        form = "weiz" if self.has_D else "weiz2"
        return (f"StateSpace(N={self.state_dim}, m={self.output_dim}, "
                f"n={self.input_dim}, form={form})")


@dataclass(frozen=True)
class QRational:
    """q-rational function ``C prod_j (I - (1-q) z q**j A)^{-1} B``."""

    ss: StateSpace
    q: float = field(default=0.0)

    def __post_init__(self):
        if not isinstance(self.ss, StateSpace):
            raise ValidationError("ss must be a StateSpace")
        if self.ss.has_D:
            raise ValidationError("QRational needs a D-free realization; see to_weiz2")
        object.__setattr__(self, "q", check_q(self.q))

    @classmethod
    def from_matrices(cls, C, A, B, q=0.0):
        return cls(StateSpace(C, A, B), q)

    @property
    def radius(self):
        """Radius of the disk on which the defining product converges."""
        rho = spectral_radius(self.ss.A)
        if rho == 0:
            return np.inf
        return 1.0 / ((1 - self.q) * rho)

    def __call__(self, z, tol=1e-15):
        return eval_q(self, z, tol)

    def taylor(self, K):
        return taylor_q(self, K)

    def __repr__(self):
        return f"QRational(N={self.ss.state_dim}, shape=({self.ss.output_dim}, {self.ss.input_dim}), q={self.q})"


def spectral_radius(A):
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _resolvent_solve(M, X, what):
    if condition_number(M) > COND_LIMIT:
        raise SingularityError(f"{what} is singular within tolerance")
    return np.linalg.solve(M, X)


# ---------------------------------------------------------------- evaluation

def eval_classical(ss, z):
    """``D + z C (I - zA)^{-1} B`` (or ``C (I - zA)^{-1} B`` when D is None)."""
    z = complex(z)
    N = ss.state_dim
    if N == 0:
        if ss.has_D:
            return np.array(ss.D)
        return np.zeros((ss.output_dim, ss.input_dim), dtype=complex)
    X = _resolvent_solve(np.eye(N) - z * ss.A, ss.B, f"I - zA at z={z}")
    if ss.has_D:
        return ss.D + z * (ss.C @ X)
    return ss.C @ X


def _truncation_index(q, z, normA, tol):
    """Smallest J with ``(1-q)|z| q**J ||A|| < tol``."""
    c = (1 - q) * abs(z) * normA
    if c < tol:
        return 0
    if q == 0:
        return 1
    J = int(np.ceil(np.log(tol / c) / np.log(q)))
    J = max(J, 0)
    while c * q ** J >= tol:
        J += 1
    return J


def eval_q(fr, z, tol=1e-15):
    """Evaluate a :class:`QRational` through its truncated infinite product."""
    tol = check_tol(tol)
    z = complex(z)
    ss, q = fr.ss, fr.q
    N = ss.state_dim
    if N == 0:
        return np.zeros((ss.output_dim, ss.input_dim), dtype=complex)
    rho = spectral_radius(ss.A)
    if (1 - q) * abs(z) * rho >= 1:
        raise DomainError(
            f"|z| = {abs(z):.6g} outside the convergence disk of radius {fr.radius:.6g}")
    J = _truncation_index(q, z, np.linalg.norm(ss.A, 2), tol)
    cap = max_terms(PRODUCT_CAP)
    if J > cap:
        raise ConvergenceError(f"product needs {J} factors, more than the cap {cap}")
    X = np.array(ss.B)
    I = np.eye(N)
    # factors are polynomials in A and commute, so the order is immaterial
    for j in range(J):
        X = _resolvent_solve(I - (1 - q) * z * q ** j * ss.A, X, f"factor {j} at z={z}")
    return ss.C @ X


def markov_parameters(ss, K):
    """``C A**k B`` for ``k = 0..K`` (D is ignored)."""
    out = np.empty((K + 1, ss.output_dim, ss.input_dim), dtype=complex)
    X = np.array(ss.B)
    for k in range(K + 1):
        out[k] = ss.C @ X
        X = ss.A @ X
    return out


def taylor_q(fr, K):
    """Taylor coefficients ``C A**k B / [k]_q!`` for ``k = 0..K``."""
    K = int(K)
    if K < 0:
        raise ValidationError("K must be nonnegative")
    ss = fr.ss
    out = np.empty((K + 1, ss.output_dim, ss.input_dim), dtype=complex)
    X = np.array(ss.B)
    for k in range(K + 1):
        if k:
            X = ss.A @ X / qcore.q_int(k, fr.q)
        out[k] = ss.C @ X
    return out


def rq_apply(fr):
    """q-Jackson derivative of a q-rational function: ``(C, A, AB)``."""
    ss = fr.ss
    return QRational(StateSpace(ss.C, ss.A, ss.A @ ss.B), fr.q)


# ------------------------------------------------------ form conversions

def to_weiz(ss):
    """Rewrite ``C(I-zA)^{-1}B`` as ``CB + z C (I-zA)^{-1} AB``."""
    if ss.has_D:
        return ss
    return StateSpace(ss.C, ss.A, ss.A @ ss.B, ss.C @ ss.B)


def to_weiz2(ss):
    """D-free realization of ``D + z C(I-zA)^{-1}B`` on ``N + n`` states.

    Uses ``A' = [[A, B], [0, 0]]``, ``B' = [0; I]``, ``C' = [C, D]``.
    """
    if not ss.has_D:
        return ss
    N, n = ss.state_dim, ss.input_dim
    A = np.block([[ss.A, ss.B], [np.zeros((n, N)), np.zeros((n, n))]])
    B = np.vstack([np.zeros((N, n)), np.eye(n)])
    C = np.hstack([ss.C, ss.D])
    return StateSpace(C, A, B)


# ------------------------------------------- truncated product realizations

def _check_cab(C, A, B):
    ss = StateSpace(C, A, B)
    return ss.C, ss.A, ss.B


def truncated_realization_weiz(C, A, B, q, J):
    """Realization with D of ``C prod_{j=0}^{J} (I - (1-q) z q**j A)^{-1} B``.

    State matrix ``(1-q) U kron A`` where ``U[i, l] = q**l`` for ``l >= i``;
    ``B_J`` stacks ``J+1`` copies of ``B``; ``C_J = (1-q) [1, q, ..., q**J] kron CA``;
    ``D_J = CB``.
    """
    q = check_q(q)
    J = int(J)
    if J < 0:
        raise ValidationError("J must be nonnegative")
    C, A, B = _check_cab(C, A, B)
    powers = q ** np.arange(J + 1)
    U = np.triu(np.tile(powers, (J + 1, 1)))
    AJ = (1 - q) * np.kron(U, A)
    BJ = np.vstack([B] * (J + 1))
    CJ = (1 - q) * np.kron(powers.reshape(1, -1), C @ A)
    return StateSpace(CJ, AJ, BJ, C @ B)


def truncated_realization_weiz2(C, A, B, q, J):
    """D-free realization of the same truncated product.

    Block row 0 of the state matrix is ``[(1-q)A, I, ..., I]``; block row
    ``i >= 1`` holds ``(1-q) q**i A`` from column ``i`` onwards.  The input
    matrix is ``[B; (1-q) q AB; ...; (1-q) q**J AB]`` and the output matrix
    ``[C, 0, ..., 0]``.
    """
    q = check_q(q)
    J = int(J)
    if J < 0:
        raise ValidationError("J must be nonnegative")
    C, A, B = _check_cab(C, A, B)
    N = A.shape[0]
    I = np.eye(N)
    Z = np.zeros((N, N))
    rows = []
    for i in range(J + 1):
        coef = (1 - q) * q ** i * A
        row = []
        for l in range(J + 1):
            if l < i:
                row.append(Z)
            elif l == i:
                row.append(coef)
            else:
                row.append(I if i == 0 else coef)
        rows.append(row)
    AJ = np.block(rows)
    BJ = np.vstack([B] + [(1 - q) * q ** i * (A @ B) for i in range(1, J + 1)])
    CJ = np.hstack([C] + [np.zeros((C.shape[0], N))] * J)
    return StateSpace(CJ, AJ, BJ)


def truncated_product_direct(C, A, B, q, J, z):
    """Reference evaluation: multiply the ``J+1`` resolvent factors one by one."""
    C, A, B = _check_cab(C, A, B)
    N = A.shape[0]
    M = np.eye(N, dtype=complex)
    for j in range(J + 1):
        M = M @ np.linalg.inv(np.eye(N) - (1 - q) * z * q ** j * A)
    return C @ M @ B


# -------------------------------------------------------------- minimality

def _krylov_basis(A, B, tol):
    """Orthonormal basis of ``span{B, AB, A^2 B, ...}`` built block by block."""
    N = A.shape[0]
    if B.size == 0 or N == 0:
        return np.zeros((N, 0), dtype=complex)
    scale = max(np.linalg.norm(A, 2), np.linalg.norm(B, 2))
    if scale == 0:
        return np.zeros((N, 0), dtype=complex)

    def _orth(M, thresh):
        if M.size == 0:
            return np.zeros((N, 0), dtype=complex)
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        return U[:, s > thresh]

    basis = _orth(B, tol * scale)
    new = basis
    while new.shape[1] and basis.shape[1] < N:
        cand = A @ new
        for _ in range(2):
            cand = cand - basis @ (basis.conj().T @ cand)
        new = _orth(cand, tol * scale)
        basis = np.hstack([basis, new])
    return basis[:, :N]


def is_controllable(A, B, tol=1e-9):
    A = as_matrix(A, "A")
    return _krylov_basis(A, as_matrix(B, "B"), tol).shape[1] == A.shape[0]


def is_observable(C, A, tol=1e-9):
    A = as_matrix(A, "A")
    C = as_matrix(C, "C")
    return _krylov_basis(A.conj().T, C.conj().T, tol).shape[1] == A.shape[0]


def is_minimal(ss, tol=1e-9):
    return is_controllable(ss.A, ss.B, tol) and is_observable(ss.C, ss.A, tol)


def kalman_reduce(ss, tol=1e-9):
    """Minimal realization with the same Markov parameters.

    First restricts to the reachable subspace, then compresses away the
    unobservable part.  A ``D`` term is carried over unchanged.
    """
    tol = check_tol(tol)
    A, B, C = np.array(ss.A), np.array(ss.B), np.array(ss.C)
    V = _krylov_basis(A, B, tol)
    A, B, C = V.conj().T @ A @ V, V.conj().T @ B, C @ V
    W = _krylov_basis(A.conj().T, C.conj().T, tol)
    A, B, C = W.conj().T @ A @ W, W.conj().T @ B, C @ W
    if A.shape[0] == 0:
        return StateSpace.zero(ss.output_dim, ss.input_dim, ss.D)
    return StateSpace(C, A, B, ss.D)


# ------------------------------------------------- Hankel-based realization

def _hankel_blocks(F, rows, cols, shift=0):
    return np.block([[F[i + j + shift] for j in range(cols)] for i in range(rows)])


def _hankel_shape(L):
    rows = L // 2
    return rows, L - rows


def hankel_rank(ts, q, tol=1e-9):
    """Numeric rank of the block Hankel matrix of ``[k]_q! T_k``."""
    q = check_q(q, allow_one=True)
    T = as_coeffs(ts, "ts")
    L = T.shape[0]
    if L < 2:
        raise ValidationError("hankel_rank needs at least 2 coefficients")
    F = qcore.inverse_borel_q(T, q)
    rows = (L + 1) // 2
    cols = L + 1 - rows
    H = _hankel_blocks(F, rows, cols)
    return numeric_rank(np.linalg.svd(H, compute_uv=False), tol)


def realize_from_taylor(ts, q, tol=1e-9, return_singular_values=False, rank=None):
    """Recover a minimal q-rational realization from Taylor coefficients.

    The coefficients are de-weighted by ``[k]_q!`` to classical Markov
    parameters, a block Hankel matrix ``H0`` and its shift ``H1`` are formed,
    and ``H0 = U S V*`` is split as ``(U S^1/2)(S^1/2 V*)``.  Then ``C`` is the
    first block row of the left factor, ``B`` the first block column of the
    right factor and ``A = S^-1/2 U* H1 V S^-1/2``.

    ``rank`` fixes the state dimension instead of reading it off the
    singular values.
    """
    q = check_q(q)
    tol = check_tol(tol)
    T = as_coeffs(ts, "ts")
    L, m, n = T.shape
    if L < 2:
        raise InsufficientDataError("at least 2 coefficients are needed")
    F = qcore.inverse_borel_q(T, q)
    rows, cols = _hankel_shape(L)
    H0 = _hankel_blocks(F, rows, cols)
    H1 = _hankel_blocks(F, rows, cols, shift=1)
    U, s, Vh = np.linalg.svd(H0, full_matrices=False)
    if rank is None:
        r = numeric_rank(s, tol)
    else:
        r = int(rank)
        if not 0 <= r <= s.size:
            raise ValidationError(f"rank must lie in [0, {s.size}]")
    if r == 0:
        fr = QRational(StateSpace.zero(m, n), q)
        return (fr, s) if return_singular_values else fr
    if r >= min(H0.shape):
        raise InsufficientDataError(
            f"Hankel matrix of size {H0.shape} has full rank {r}; supply more coefficients")
    if r < s.size and s[r] > 0 and s[r - 1] / s[r] < 10:
        warnings.warn(
            f"weak singular value gap at rank {r}: {s[r - 1]:.3e} vs {s[r]:.3e}", RankWarning,
            stacklevel=2)
    sq = np.sqrt(s[:r])
    obs = U[:, :r] * sq
    ctr = sq[:, None] * Vh[:r]
    C = obs[:m]
    B = ctr[:, :n]
    A = (U[:, :r].conj().T @ H1 @ Vh[:r].conj().T) / np.outer(sq, sq)
    fr = QRational(StateSpace(C, A, B), q)
    return (fr, s) if return_singular_values else fr


# ----------------------------------------------------------- Jordan chains

def jordan_cell(lam, N):
    return complex(lam) * np.eye(N) + np.eye(N, k=1)


def _jordan_factor_terms(lam, z, q, tol):
    """Yield ``(c_j, s_j)`` with ``c_j = (1-q) z q**j`` and ``s_j = c_j / (1 - c_j lam)``."""
    cap = max_terms(PRODUCT_CAP)
    for j in range(cap):
        c = (1 - q) * z * q ** j
        if abs(c) * max(1.0, abs(lam)) / (1 - q) < tol:
            return
        denom = 1 - c * lam
        if abs(denom) < 1e-14:
            raise SingularityError(f"factor {j} is singular at z={z}")
        yield c, c / denom
    raise ConvergenceError(f"Jordan product did not converge within {cap} factors")


def jordan_chain_eval(lam, N, C, z, q, tol=1e-15):
    """Evaluate ``C prod_j (I - (1-q) z q**j (lam I + V))^{-1}`` through the nilpotent part.

    Each factor splits as ``(1 - c_j lam)^{-1} (I - s_j V)^{-1}``, so the
    product is a scalar prefactor times ``sum_v h_v V**v`` where ``h_v`` is the
    complete homogeneous symmetric polynomial of degree ``v`` in the ``s_j``.
    The ``h_v`` are accumulated with the recurrence
    ``h_v <- h_v + s_j h_{v-1}`` (multiplication by ``1/(1 - s_j x)``).
    """
    q = check_q(q)
    N = int(N)
    if N < 1:
        raise ValidationError("N must be at least 1")
    lam, z = complex(lam), complex(z)
    C = as_matrix(C if np.ndim(C) != 1 else np.reshape(C, (1, -1)), "C", (None, N))
    if lam != 0 and (1 - q) * abs(z) * abs(lam) >= 1:
        raise DomainError(f"|z| = {abs(z):.6g} outside the disk of radius "
                          f"{1 / ((1 - q) * abs(lam)):.6g}")
    prefactor = 1.0 + 0j
    h = np.zeros(N, dtype=complex)
    h[0] = 1
    for c, s in _jordan_factor_terms(lam, z, q, tol):
        prefactor /= 1 - c * lam
        for v in range(1, N):
            h[v] = h[v] + s * h[v - 1]
    V = np.eye(N, k=1)
    poly = sum(h[v] * np.linalg.matrix_power(V, v) for v in range(N))
    return prefactor * (C @ poly)


def jordan_chain_residual(lam, N, C, q, sample_zs, A=None, tol=1e-15):
    """Largest residual of ``R_q(F e_j) - lam F e_j - F e_{j-1}`` over the samples.

    ``F`` is the Jordan-cell function by default; pass ``A`` to evaluate
    ``C prod_j (I - (1-q) z q**j A)^{-1}`` for an arbitrary state matrix
    instead (useful as a negative control).
    """
    q = check_q(q)
    lam = complex(lam)
    zs = as_points(sample_zs)
    if np.any(zs == 0):
        raise ValidationError("sample points must be nonzero (difference quotient)")
    if A is None:
        F = lambda z: jordan_chain_eval(lam, N, C, z, q, tol)
    else:
        fr = QRational(StateSpace(C, A, np.eye(N)), q)
        F = lambda z: eval_q(fr, z, tol)
    worst = 0.0
    for z in zs:
        Fz, Fqz = F(z), F(q * z)
        RF = (Fz - Fqz) / ((1 - q) * z)
        shifted = np.hstack([np.zeros((Fz.shape[0], 1)), Fz[:, :-1]])
        res = RF - lam * Fz - shifted
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def jordan_chain_verify(lam, N, C, q, sample_zs, tol=1e-8, A=None):
    """True iff the columns of ``F`` form an ``R_q`` Jordan chain at every sample."""
    return jordan_chain_residual(lam, N, C, q, sample_zs, A=A) < tol
