"""Scalar q-calculus on coefficient sequences.

Conventions
-----------
The q-integer is ``[k]_q = 1 + q + ... + q**(k-1)`` with ``[0]_q = 1`` (not
the more common ``[0]_q = 0``), so that ``[k]_q! = [1]_q [2]_q ... [k]_q``
and ``[0]_q! = 1``.  At ``q = 0`` every q-integer equals one; at ``q = 1``
the q-factorial is the ordinary factorial.

Series are plain numpy arrays indexed by the power of ``z``.  Functions that
act coefficientwise also accept arrays of shape ``(K+1, m, n)`` holding
matrix coefficients.
"""
import math

import numpy as np

from ._validation import as_points, check_q, check_tol, max_terms
from .exceptions import ConvergenceError, DomainError, SingularityError, ValidationError

SERIES_CAP = 100_000


def q_int(k, q):
    """q-integer ``[k]_q``; returns 1 for ``k = 0``."""
    k = int(k)
    if k < 0:
        raise ValidationError(f"k must be nonnegative, got {k}")
    q = check_q(q, allow_one=True)
    if k == 0:
        return 1.0
    if q == 1:
        return float(k)
    # 1 - q**k loses digits for tiny q**k; the explicit sum does not
    return math.fsum(q ** j for j in range(k))


def q_factorial(k, q):
    """q-factorial ``[k]_q!``."""
    k = int(k)
    if k < 0:
        raise ValidationError(f"k must be nonnegative, got {k}")
    out = 1.0
    for j in range(1, k + 1):
        out *= q_int(j, q)
    return out


def q_factorials(K, q):
    """Array ``([0]_q!, [1]_q!, ..., [K]_q!)``."""
    q = check_q(q, allow_one=True)
    out = np.ones(int(K) + 1)
    for j in range(1, int(K) + 1):
        out[j] = out[j - 1] * q_int(j, q)
    return out


def _check_eq_domain(x, q):
    if q > 0 and abs(x) * (1 - q) >= 1:
        raise DomainError(
            f"|z a| = {abs(x):.6g} is outside the convergence disk of radius {1 / (1 - q):.6g}")
    if q == 0 and abs(x) >= 1:
        raise DomainError(f"|z a| = {abs(x):.6g} must be < 1 when q = 0")


def eq_eval_series(z, a, q, tol=1e-15):
    """q-exponential ``E_q(z a) = sum_k (z a)**k / [k]_q!`` by direct summation.

    Summation stops once the geometric bound on the remaining tail drops
    below ``tol * (1 + |partial sum|)``.
    """
    q = check_q(q)
    tol = check_tol(tol)
    x = complex(z) * complex(a)
    _check_eq_domain(x, q)
    if x == 0:
        return 1.0 + 0j
    cap = max_terms(SERIES_CAP)
    total = 1.0 + 0j
    term = 1.0 + 0j
    for k in range(1, cap + 1):
        term = term * x / q_int(k, q)
        total += term
        # ratio of all later terms is bounded by |x| / [k+1]_q (nonincreasing in k)
        ratio = abs(x) / q_int(k + 1, q)
        if ratio < 1 and abs(term) * ratio / (1 - ratio) < tol * (1 + abs(total)):
            return total
    raise ConvergenceError(f"E_q series did not converge within {cap} terms")


def eq_eval_product(z, a, q, tol=1e-15):
    """q-exponential via ``prod_j (1 - (1-q) z a q**j)**-1``."""
    q = check_q(q)
    tol = check_tol(tol)
    x = complex(z) * complex(a)
    _check_eq_domain(x, q)
    cap = max_terms(SERIES_CAP)
    c = (1 - q) * x
    total = 1.0 + 0j
    for j in range(cap):
        t = c * q ** j
        if abs(t) / (1 - q) < tol:
            return total
        denom = 1 - t
        if abs(denom) < tol:
            raise SingularityError(f"factor {j} of the E_q product vanishes")
        total /= denom
    raise ConvergenceError(f"E_q product did not converge within {cap} factors")


def eq_array(x, q, tol=1e-15):
    """Vectorised ``E_q(x)`` for an array of arguments (product form)."""
    q = check_q(q)
    x = np.asarray(x, dtype=complex)
    if x.size == 0:
        return np.ones_like(x)
    xmax = float(np.max(np.abs(x)))
    _check_eq_domain(xmax, q)
    out = np.ones_like(x)
    c = (1 - q) * x
    cap = max_terms(SERIES_CAP)
    for j in range(cap):
        scale = q ** j
        if (1 - q) * xmax * scale / (1 - q) < tol:
            return out
        out = out / (1 - c * scale)
    raise ConvergenceError(f"E_q product did not converge within {cap} factors")


def eq_coefficients(K, q, a=1.0):
    """Taylor coefficients ``a**k / [k]_q!`` of ``E_q(a z)`` for ``k = 0..K``."""
    return complex(a) ** np.arange(K + 1) / q_factorials(K, q)


def jackson_rq(series, q):
    """q-Jackson derivative ``(f(z) - f(qz)) / ((1-q) z)`` on Taylor coefficients.

    Coefficient ``k`` of the result is ``[k+1]_q * f_{k+1}``, so the output is
    one term shorter.  A constant series maps to the empty series.
    """
    q = check_q(q)
    f = np.asarray(series, dtype=complex)
    if f.shape[0] == 0:
        raise ValidationError("cannot differentiate an empty series")
    weights = np.array([q_int(k, q) for k in range(1, f.shape[0])])
    weights = weights.reshape((-1,) + (1,) * (f.ndim - 1))
    return weights * f[1:]


def borel_q(coeffs, q):
    """q-Borel transform: divide coefficient ``k`` by ``[k]_q!`` (``q = 1`` allowed)."""
    q = check_q(q, allow_one=True)
    c = np.asarray(coeffs, dtype=complex)
    w = q_factorials(c.shape[0] - 1, q).reshape((-1,) + (1,) * (c.ndim - 1))
    return c / w


def inverse_borel_q(coeffs, q):
    """Inverse of :func:`borel_q`: multiply coefficient ``k`` by ``[k]_q!``."""
    q = check_q(q, allow_one=True)
    c = np.asarray(coeffs, dtype=complex)
    w = q_factorials(c.shape[0] - 1, q).reshape((-1,) + (1,) * (c.ndim - 1))
    return c * w


def reciprocal_series(coeffs, n):
    """First ``n + 1`` Taylor coefficients of ``1 / f``.

    Uses the convolution recurrence ``b_k = -(sum_{i=1..k} a_i b_{k-i}) / a_0``.
    """
    a = np.asarray(coeffs)
    if a.ndim != 1 or a.size == 0:
        raise ValidationError("coeffs must be a nonempty 1-D sequence")
    if a[0] == 0:
        raise ValidationError("series with zero constant term has no reciprocal")
    n = int(n)
    dtype = complex if np.iscomplexobj(a) else float
    a = np.concatenate([a.astype(dtype), np.zeros(max(0, n + 1 - a.size), dtype=dtype)])
    b = np.zeros(n + 1, dtype=dtype)
    b[0] = 1 / a[0]
    for k in range(1, n + 1):
        b[k] = -np.dot(a[1:k + 1], b[k - 1::-1]) / a[0]
    return b


def cauchy_product(f, g, n=None):
    """Coefficients of ``f * g`` truncated to ``n + 1`` terms (blockwise for matrices)."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if n is None:
        n = min(f.shape[0], g.shape[0]) - 1
    if f.ndim == 1:
        return np.array([sum(f[i] * g[k - i] for i in range(k + 1)) for k in range(n + 1)])
    return np.array([sum(f[i] @ g[k - i] for i in range(k + 1)) for k in range(n + 1)])


def eval_series(coeffs, z):
    """Horner evaluation of a truncated (matrix) power series at points ``z``."""
    c = np.asarray(coeffs, dtype=complex)
    pts = as_points(z)
    out = np.zeros((pts.size,) + c.shape[1:], dtype=complex)
    shape = (-1,) + (1,) * (c.ndim - 1)
    for ck in c[::-1]:
        out = out * pts.reshape(shape) + ck
    return out
