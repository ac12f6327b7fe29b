"""Realization arithmetic: sums, products, inverses and the q-deformed star algebra.

Classical operations act on :class:`~qrational.statespace.StateSpace`
objects in either form.  The star operations act on
:class:`~qrational.statespace.QRational` values: they run the classical
construction at ``q = 0`` and reinterpret the result with the shared ``q``,
so on Taylor coefficients

    [k]_q! (f * g)_k = sum_{i+j=k} ([i]_q! f_i) ([j]_q! g_j).
"""
import numpy as np

from ._validation import COND_LIMIT, condition_number
from .exceptions import DimensionError, SingularityError, ValidationError
from .statespace import QRational, StateSpace, to_weiz, to_weiz2

__all__ = [
    "add", "sum", "product_classical_weiz", "product_classical_weiz2", "iterated_product",
    "inverse_classical", "inverse_classical_weiz2", "star_product", "star_inverse",
]


def _check_same_q(f, g):
    if not (isinstance(f, QRational) and isinstance(g, QRational)):
        raise ValidationError("expected QRational operands")
    if f.q != g.q:
        raise ValidationError(f"q mismatch: {f.q} vs {g.q}")


def _check_chain(f, g):
    if f.input_dim != g.output_dim:
        raise DimensionError(
            f"cannot multiply {f.output_dim}x{f.input_dim} by {g.output_dim}x{g.input_dim}")


def _safe_inv(M, what):
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{what} must be square, got {M.shape}")
    if condition_number(M) > COND_LIMIT:
        raise SingularityError(f"{what} is singular within tolerance")
    return np.linalg.inv(M)


def add(f, g):
    """Sum of two q-rational functions with the same ``q``.

    Block-diagonal state matrix, stacked ``B`` and concatenated ``C``.
    """
    _check_same_q(f, g)
    a, b = f.ss, g.ss
    if (a.output_dim, a.input_dim) != (b.output_dim, b.input_dim):
        raise DimensionError("summands must have the same shape")
    N1, N2 = a.state_dim, b.state_dim
    A = np.block([[a.A, np.zeros((N1, N2))], [np.zeros((N2, N1)), b.A]])
    B = np.vstack([a.B, b.B])
    C = np.hstack([a.C, b.C])
    return QRational(StateSpace(C, A, B), f.q)


sum = add


def product_classical_weiz(f, g):
    """Realization of ``F1(z) F2(z)`` for two realizations with ``D``.

    ``A = [[A1, B1 C2], [0, A2]]``, ``B = [B1 D2; B2]``, ``C = [C1, D1 C2]``,
    ``D = D1 D2``.
    """
    f, g = to_weiz(f), to_weiz(g)
    _check_chain(f, g)
    N1, N2 = f.state_dim, g.state_dim
    A = np.block([[f.A, f.B @ g.C], [np.zeros((N2, N1)), g.A]])
    B = np.vstack([f.B @ g.D, g.B])
    C = np.hstack([f.C, f.D @ g.C])
    return StateSpace(C, A, B, f.D @ g.D)


def product_classical_weiz2(f, g):
    """D-free realization of ``F1(z) F2(z)``.

    ``A = [[A1, B1 C2], [0, A2]]``, ``B = [B1 C2 B2; A2 B2]``, ``C = [C1, 0]``.
    """
    if f.has_D or g.has_D:
        raise ValidationError("product_classical_weiz2 expects D-free realizations")
    _check_chain(f, g)
    N1, N2 = f.state_dim, g.state_dim
    A = np.block([[f.A, f.B @ g.C], [np.zeros((N2, N1)), g.A]])
    B = np.vstack([f.B @ (g.C @ g.B), g.A @ g.B])
    C = np.hstack([f.C, np.zeros((f.output_dim, N2))])
    return StateSpace(C, A, B)


def _chain_prod(mats, start, stop, m):
    out = np.eye(m, dtype=complex)
    for M in mats[start:stop]:
        out = out @ M
    return out


def iterated_product(factors, form="weiz"):
    """Explicit block realization of ``F_1(z) F_2(z) ... F_J(z)``.

    With 0-based factor indices, the weiz form has upper block-triangular state
    matrix with blocks ``A_i`` on the diagonal and ``B_i D_{i+1} ... D_{l-1} C_l``
    above it, input blocks ``B_i D_{i+1} ... D_J``, output blocks
    ``D_1 ... D_{l-1} C_l`` and feedthrough ``D_1 ... D_J``.

    The weiz2 form uses off-diagonal blocks ``X_i (B_i C_{i+1}) ... (B_{l-1} C_l)``
    with ``X_0 = I`` and ``X_i = A_i`` otherwise, input blocks
    ``Y_i (C_{i+1} B_{i+1}) ... (C_J B_J)`` with ``Y_0 = B_0`` and
    ``Y_i = A_i B_i`` otherwise, and output ``[C_0, 0, ..., 0]``.
    """
    factors = list(factors)
    if not factors:
        raise ValidationError("need at least one factor")
    if form not in ("weiz", "weiz2"):
        raise ValidationError(f"form must be 'weiz' or 'weiz2', got {form!r}")
    for f, g in zip(factors, factors[1:]):
        _check_chain(f, g)
    if len(factors) == 1:
        return to_weiz(factors[0]) if form == "weiz" else to_weiz2(factors[0])
    if form == "weiz":
        fs = [to_weiz(f) for f in factors]
    else:
        fs = [to_weiz2(f) for f in factors]
    J = len(fs)
    dims = [f.state_dim for f in fs]
    offs = np.concatenate([[0], np.cumsum(dims)])
    Ntot = int(offs[-1])
    m, n = fs[0].output_dim, fs[-1].input_dim
    A = np.zeros((Ntot, Ntot), dtype=complex)
    B = np.zeros((Ntot, n), dtype=complex)
    C = np.zeros((m, Ntot), dtype=complex)
    sl = [slice(offs[i], offs[i + 1]) for i in range(J)]

    if form == "weiz":
        Ds = [f.D for f in fs]
        for i in range(J):
            A[sl[i], sl[i]] = fs[i].A
            for l in range(i + 1, J):
                mid = _chain_prod(Ds, i + 1, l, fs[i].input_dim)
                A[sl[i], sl[l]] = fs[i].B @ mid @ fs[l].C
            B[sl[i]] = fs[i].B @ _chain_prod(Ds, i + 1, J, fs[i].input_dim)
            C[:, sl[i]] = _chain_prod(Ds, 0, i, m) @ fs[i].C
        return StateSpace(C, A, B, _chain_prod(Ds, 0, J, m))

    links = [fs[r].B @ fs[r + 1].C for r in range(J - 1)]
    gains = [f.C @ f.B for f in fs]
    for i in range(J):
        A[sl[i], sl[i]] = fs[i].A
        X = np.eye(dims[i]) if i == 0 else fs[i].A
        for l in range(i + 1, J):
            A[sl[i], sl[l]] = X @ _chain_prod(links, i, l, dims[i])
        Y = fs[0].B if i == 0 else fs[i].A @ fs[i].B
        B[sl[i]] = Y @ _chain_prod(gains, i + 1, J, fs[i].input_dim)
    C[:, sl[0]] = fs[0].C
    return StateSpace(C, A, B)


def inverse_classical(f):
    """Realization of ``F(z)^{-1}`` for the form with ``D``.

    ``(A - B D^{-1} C, B D^{-1}, -D^{-1} C, D^{-1})``.
    """
    if not f.has_D:
        raise ValidationError("inverse_classical expects a realization with D; "
                              "see inverse_classical_weiz2")
    if f.output_dim != f.input_dim:
        raise DimensionError("only square functions can be inverted")
    Di = _safe_inv(f.D, "D")
    return StateSpace(-Di @ f.C, f.A - f.B @ Di @ f.C, f.B @ Di, Di)


def inverse_classical_weiz2(f):
    """Inverse of ``C(I - zA)^{-1}B`` as a realization with ``D``.

    ``F^{-1}(z) = (CB)^{-1} - z (CB)^{-1} C (I - z(A - AB(CB)^{-1}C))^{-1} AB (CB)^{-1}``.
    """
    if f.has_D:
        raise ValidationError("inverse_classical_weiz2 expects a D-free realization")
    if f.output_dim != f.input_dim:
        raise DimensionError("only square functions can be inverted")
    if f.state_dim == 0:
        raise SingularityError("CB is the zero matrix")
    G = _safe_inv(f.C @ f.B, "CB")
    AB = f.A @ f.B
    return StateSpace(-G @ f.C, f.A - AB @ G @ f.C, AB @ G, G)


def star_product(f, g):
    """q-deformed product: classical D-free product reinterpreted at the shared ``q``."""
    _check_same_q(f, g)
    return QRational(product_classical_weiz2(f.ss, g.ss), f.q)


def star_inverse(f):
    """q-deformed inverse, so that ``star_product(f, star_inverse(f))`` is the identity."""
    if not isinstance(f, QRational):
        raise ValidationError("expected a QRational")
    return QRational(to_weiz2(inverse_classical_weiz2(f.ss)), f.q)
