"""Kaluza-type tests for diagonal kernels ``sum_n a_n (z conj w)**n``.

A diagonal kernel with ``a_0 = 1`` and a log-convex coefficient sequence
(``a_n**2 <= a_{n-1} a_{n+1}``) is a complete Nevanlinna-Pick kernel, because
then every coefficient ``b_n`` of ``1 - 1/f = sum_{n>=1} b_n z**n`` is
nonnegative.  This module checks both conditions numerically and builds the
standard example sequences.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import qcore
from ._validation import as_points, check_q, check_tol
from .exceptions import ValidationError

KALUZA_RTOL = 1e-12
FD_STEP = 1e-5
FD_TOL = 1e-5


@dataclass(frozen=True)
class CoeffSeq:
    """Positive coefficient sequence ``a_start, a_{start+1}, ...``."""

    values: np.ndarray
    start_index: int = 0
    label: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValidationError("values must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ValidationError(f"{self.label or 'sequence'}: all values must be finite and > 0")
        if self.start_index not in (0, 1):
            raise ValidationError("start_index must be 0 or 1")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    @property
    def normalized(self):
        """True when the sequence starts at index 0 with ``a_0 = 1``."""
        return bool(self.start_index == 0 and abs(self.values[0] - 1) <= 1e-15)


@dataclass(frozen=True)
class KaluzaVerdict:
    label: str
    passed: bool
    first_violation_index: int
    ratio_gap: float
    normalized: bool

    def report(self):
        return {"label": self.label, "pass": self.passed,
                "first_violation_index": self.first_violation_index,
                "ratio_gap": self.ratio_gap, "normalized": self.normalized}


def kaluza_check(seq, rtol=KALUZA_RTOL):
    """Log-convexity ``a_n**2 <= a_{n-1} a_{n+1}`` at every interior index.

    The test runs on logarithms with relative slack ``rtol``.  On failure the
    verdict carries the first offending index ``n`` (in the sequence's own
    indexing) and the ratio gap ``a_n/a_{n-1} - a_{n+1}/a_n`` there; on
    success the gap is the largest one observed (never above the slack).
    The verdict certifies the CNP property only when ``a_0 = 1``; otherwise it
    is a bare ratio condition (see ``normalized``).
    """
    if not isinstance(seq, CoeffSeq):
        seq = CoeffSeq(seq)
    a = seq.values
    if a.size < 3:
        raise ValidationError("kaluza_check needs at least 3 coefficients")
    # log domain: fast-growing sequences would overflow a_n**2
    la = np.log(a)
    gaps = np.exp(la[1:-1] - la[:-2]) - np.exp(la[2:] - la[1:-1])
    bad = np.nonzero(2 * la[1:-1] > la[:-2] + la[2:] + np.log1p(rtol))[0]
    if bad.size:
        i = int(bad[0])
        return KaluzaVerdict(seq.label, False, seq.start_index + i + 1, float(gaps[i]),
                             seq.normalized)
    return KaluzaVerdict(seq.label, True, None, float(np.max(gaps)), seq.normalized)


@dataclass(frozen=True)
class ReciprocalVerdict:
    passed: bool
    b: np.ndarray
    min_b: float
    first_negative_index: int

    def report(self):
        return {"pass": self.passed, "min_b": self.min_b,
                "first_negative_index": self.first_negative_index, "n": int(self.b.size)}


def reciprocal_nonneg_check(seq, n=50, tol=1e-12):
    """Check ``b_k >= -tol`` for ``1/f = 1 - sum_{k>=1} b_k z**k`` up to ``k = n``.

    Only as many coefficients as the sequence supplies are used.  The sign test
    runs on the rescaled series ``f(z/rho)`` with ``rho = max_n a_n**(1/n)``
    (when that exceeds 1); ``b`` is reported unscaled, ``min_b`` scaled.
    """
    if not isinstance(seq, CoeffSeq):
        seq = CoeffSeq(seq)
    if not seq.normalized:
        raise ValidationError("reciprocal test needs start_index 0 and a_0 = 1")
    tol = check_tol(tol)
    n = min(int(n), len(seq) - 1)
    if n < 1:
        raise ValidationError("need at least 2 coefficients")
    a = seq.values[:n + 1]
    k = np.arange(1, n + 1)
    # f(z/rho) has coefficients a_n rho**-n <= 1 and reciprocal coefficients
    # b_n rho**-n: same signs, without the roundoff growth of huge a_n
    log_rho = max(0.0, float(np.max(np.log(a[1:]) / k)))
    scale = np.exp(-log_rho * np.arange(n + 1))
    b_scaled = -qcore.reciprocal_series(a * scale, n)[1:]
    neg = np.nonzero(b_scaled < -tol)[0]
    first = int(neg[0]) + 1 if neg.size else None
    b = b_scaled * np.exp(log_rho * k)
    return ReciprocalVerdict(not neg.size, b, float(np.min(b_scaled)), first)


@dataclass(frozen=True)
class ContinuousVerdict:
    passed: bool
    worst_excess: float
    worst_x: float
    finite_differences: bool

    def report(self):
        return {"pass": self.passed, "worst_excess": self.worst_excess,
                "worst_x": self.worst_x, "finite_differences": self.finite_differences}


def kaluza_continuous(f, grid, f1=None, f2=None, tol=1e-12):
    """Check ``f'(x)**2 <= f''(x) f(x)`` (log-convexity of ``f``) on a grid.

    Missing derivatives are replaced by central differences with step
    ``1e-5``, in which case the tolerance is widened to ``1e-5``.  The excess
    ``f'**2 - f'' f`` is measured relative to ``1 + f'**2 + |f'' f|``.
    """
    xs = np.real(as_points(grid, "grid"))
    fd = f1 is None or f2 is None
    h = FD_STEP
    if f1 is None:
        f1 = lambda x: (f(x + h) - f(x - h)) / (2 * h)
    if f2 is None:
        f2 = lambda x: (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
    tol = max(check_tol(tol), FD_TOL) if fd else check_tol(tol)
    worst, worst_x = -np.inf, None
    for x in xs:
        fx = float(f(x))
        if not fx > 0:
            raise ValidationError(f"f must be positive on the grid, f({x}) = {fx}")
        d1, d2 = float(f1(x)), float(f2(x))
        excess = (d1 ** 2 - d2 * fx) / (1 + d1 ** 2 + abs(d2 * fx))
        if excess > worst:
            worst, worst_x = excess, float(x)
    return ContinuousVerdict(bool(worst <= tol), float(worst), worst_x, fd)


# -------------------------------------------------------- constructors

def _check_nmax(nmax):
    nmax = int(nmax)
    if nmax < 2:
        raise ValidationError("nmax must be at least 2")
    return nmax


def _check_open_q(q):
    q = check_q(q)
    if q == 0:
        raise ValidationError("q must lie in (0, 1)")
    return q


def _check_eps(eps):
    eps = float(eps)
    if not eps > 0 or not np.isfinite(eps):
        raise ValidationError("eps must be positive")
    return eps


def dirichlet(nmax):
    """``a_n = 1/(n+1)``."""
    n = np.arange(_check_nmax(nmax) + 1)
    return CoeffSeq(1 / (n + 1), 0, "dirichlet")


def hardy_sobolev_classical(eps, nmax):
    """``a_n = 1 / (1 + n**2/eps)``."""
    eps = _check_eps(eps)
    n = np.arange(_check_nmax(nmax) + 1, dtype=float)
    return CoeffSeq(1 / (1 + n ** 2 / eps), 0, f"hardy_sobolev_classical(eps={eps})")


def hardy_sobolev_full(n_order, nmax):
    """``a_k = 1 / (1 + k**2 + k**2 (k-1)**2 + ... + k**2 ... (k-n_order+1)**2)``."""
    n_order = int(n_order)
    if n_order < 1:
        raise ValidationError("n_order must be at least 1")
    vals = []
    for k in range(_check_nmax(nmax) + 1):
        total, term = 1.0, 1.0
        for i in range(n_order):
            term *= float(k - i) ** 2
            total += term
        vals.append(1 / total)
    return CoeffSeq(vals, 0, f"hardy_sobolev_full(n={n_order})")


def q_dirichlet(q, nmax):
    """``a_n = 1/(1 - q**n)`` for ``n >= 1`` (no constant term)."""
    q = _check_open_q(q)
    n = np.arange(1, _check_nmax(nmax) + 1)
    return CoeffSeq(1 / (1 - q ** n), 1, f"q_dirichlet(q={q})")


def q_pochhammer_inf(x, q, tol=1e-16):
    """``(q**x; q)_inf = prod_{j>=0} (1 - q**(x+j))``, truncated once factors are within ``tol`` of 1."""
    q = _check_open_q(q)
    out, j = 1.0, 0
    while True:
        t = q ** (x + j)
        if t < tol:
            return out
        out *= 1 - t
        j += 1


def q_gamma(x, q):
    """q-Gamma ``(1-q)**(1-x) (q;q)_inf / (q**x;q)_inf`` for ``x > 0``."""
    q = _check_open_q(q)
    x = float(x)
    if x <= 0:
        raise ValidationError("q_gamma is implemented for x > 0 only")
    return (1 - q) ** (1 - x) * q_pochhammer_inf(1, q) / q_pochhammer_inf(x, q)


def q_gamma_kernel(q, r, nmax):
    """``a_n = Gamma_q(n + r) / (Gamma_q(r) [n]_q!)`` for ``0 < r <= 1``.

    ``r = 0`` is excluded because ``Gamma_q`` has a pole there.
    """
    q = _check_open_q(q)
    r = float(r)
    if not 0 < r <= 1:
        raise ValidationError("r must lie in (0, 1]")
    nmax = _check_nmax(nmax)
    g0 = q_gamma(r, q)
    facts = qcore.q_factorials(nmax, q)
    vals = [q_gamma(n + r, q) / (g0 * facts[n]) for n in range(nmax + 1)]
    return CoeffSeq(vals, 0, f"q_gamma_kernel(q={q}, r={r})")


def q_hardy_sobolev(q, eps, nmax):
    """``a_k = 1 / ((1-q) + [k]**2/eps)`` with ``[k] = (1-q**k)/(1-q)``.

    Here ``[0] = 0`` (the ordinary q-number, not the shifted convention used by
    :func:`qrational.qcore.q_int`), so ``a_0 = 1/(1-q)``.
    """
    q = _check_open_q(q)
    eps = _check_eps(eps)
    k = np.arange(_check_nmax(nmax) + 1)
    qk = (1 - q ** k) / (1 - q)
    return CoeffSeq(1 / ((1 - q) + qk ** 2 / eps), 0, f"q_hardy_sobolev(q={q}, eps={eps})")


def q_hardy_sobolev_threshold(q, nmax=200, lo=1e-8, hi=1e4, iters=60):
    """Empirical largest ``eps`` for which the q-Hardy-Sobolev sequence is log-convex.

    Bisects in ``log eps`` assuming the verdict switches once; returns
    ``0.0`` if even ``lo`` fails and ``inf`` if ``hi`` still passes.
    """
    ok = lambda e: kaluza_check(q_hardy_sobolev(q, e, nmax)).passed
    if not ok(lo):
        return 0.0
    if ok(hi):
        return np.inf
    a, b = np.log(lo), np.log(hi)
    for _ in range(iters):
        mid = (a + b) / 2
        if ok(np.exp(mid)):
            a = mid
        else:
            b = mid
    return float(np.exp(a))


def partition_seq(E, nmax):
    """``a_n = f(n) / f(0)`` with ``f(x) = sum_k exp(x E_k)``, normalized so ``a_0 = 1``."""
    E = np.asarray(E, dtype=float)
    if E.ndim != 1 or E.size == 0 or np.any(E < 0):
        raise ValidationError("E must be a nonempty list of nonnegative reals")
    n = np.arange(_check_nmax(nmax) + 1)
    logs = logsumexp(np.outer(n, E), axis=1) - np.log(E.size)
    return CoeffSeq(np.exp(logs), 0, "partition")


def partition_function(E):
    """``f(x) = sum_k exp(x E_k)`` with exact first and second derivatives."""
    E = np.asarray(E, dtype=float)
    f = lambda x: float(np.sum(np.exp(x * E)))
    f1 = lambda x: float(np.sum(E * np.exp(x * E)))
    f2 = lambda x: float(np.sum(E ** 2 * np.exp(x * E)))
    return f, f1, f2


def eq_coeffs(q, nmax):
    """``a_n = 1/[n]_q!``, the coefficients of ``E_q``."""
    q = check_q(q)
    return CoeffSeq(1 / qcore.q_factorials(_check_nmax(nmax), q), 0, f"eq_coeffs(q={q})")


def hadamard(a, b):
    """Entrywise product of two aligned sequences."""
    if a.start_index != b.start_index:
        raise ValidationError("sequences must share the start index")
    n = min(len(a), len(b))
    return CoeffSeq(a.values[:n] * b.values[:n], a.start_index, f"({a.label})*({b.label})")


def power(seq, c):
    """Entrywise power ``a_n**c`` for ``c > 0``."""
    c = float(c)
    if not c > 0:
        raise ValidationError("exponent must be positive")
    return CoeffSeq(seq.values ** c, seq.start_index, f"({seq.label})**{c}")


CONSTRUCTORS = {
    "dirichlet": dirichlet,
    "hardy-sobolev": hardy_sobolev_classical,
    "hardy-sobolev-full": hardy_sobolev_full,
    "q-dirichlet": q_dirichlet,
    "q-gamma": q_gamma_kernel,
    "q-hardy-sobolev": q_hardy_sobolev,
    "partition": partition_seq,
    "eq-coeffs": eq_coeffs,
}
