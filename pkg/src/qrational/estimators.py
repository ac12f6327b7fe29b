"""Estimator-style wrappers around the functional API.

:class:`QRealization` fits a minimal q-rational realization to a finite run of
Taylor coefficients; :class:`PickInterpolator` fits the central solution of a
Nevanlinna-Pick problem to nodes and targets.  Both follow the scikit-learn
conventions: constructor arguments are hyperparameters, ``fit`` returns
``self`` and learned state lives in attributes with a trailing underscore.
"""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import interp
from ._validation import as_coeffs, as_points, check_q, check_tol
from .exceptions import ValidationError
from .statespace import eval_q, realize_from_taylor, taylor_q


class QRealization(BaseEstimator):
    """Minimal realization of a q-rational function from its Taylor coefficients.

    Parameters
    ----------
    q : float, default=0.0
        Deformation parameter in ``[0, 1)``.
    tol : float, default=1e-9
        Relative singular value threshold for the Hankel rank.
    n_states : int or None, default=None
        Force the state dimension instead of estimating it.

    Attributes
    ----------
    C_, A_, B_ : ndarray
        Recovered realization (unique up to similarity).
    n_states_ : int
        State dimension of the fitted realization.
    singular_values_ : ndarray
        Singular values of the block Hankel matrix.
    n_outputs_, n_inputs_ : int
        Coefficient shape.

    Examples
    --------
    >>> import numpy as np
    >>> from qrational.estimators import QRealization
    >>> from qrational.qcore import q_factorials
    >>> est = QRealization(q=0.5).fit(0.8 ** np.arange(6) / q_factorials(5, 0.5))
    >>> est.n_states_
    1
    """

    def __init__(self, q=0.0, tol=1e-9, n_states=None):
        self.q = q
        self.tol = tol
        self.n_states = n_states

    def fit(self, X, y=None):
        """Fit to coefficients ``X`` of shape ``(K+1,)`` or ``(K+1, m, n)``."""
        q = check_q(self.q)
        tol = check_tol(self.tol)
        T = as_coeffs(X, "X")
        fr, s = realize_from_taylor(T, q, tol, return_singular_values=True, rank=self.n_states)
        self.model_ = fr
        self.C_, self.A_, self.B_ = fr.ss.C, fr.ss.A, fr.ss.B
        self.n_states_ = fr.ss.state_dim
        self.singular_values_ = s
        self.n_outputs_, self.n_inputs_ = T.shape[1:]
        return self

    def predict(self, X):
        """Evaluate the fitted function at points ``X``; returns shape ``(len(X), m, n)``."""
        check_is_fitted(self, "model_")
        pts = as_points(X, "X")
        return np.array([eval_q(self.model_, z) for z in pts])

    def coefficients(self, K):
        """Taylor coefficients ``0..K`` of the fitted function."""
        check_is_fitted(self, "model_")
        return taylor_q(self.model_, K)

    def score(self, X, y=None):
        """Negative max relative coefficient error on ``X`` (higher is better)."""
        check_is_fitted(self, "model_")
        T = as_coeffs(X, "X")
        pred = taylor_q(self.model_, T.shape[0] - 1)
        scale = max(np.max(np.abs(T)), np.finfo(float).tiny)
        return -float(np.max(np.abs(pred - T)) / scale)


class PickInterpolator(BaseEstimator):
    """Central solution of a Nevanlinna-Pick problem on the unit ball.

    Parameters
    ----------
    tol : float, default=1e-9
        Positive semidefiniteness tolerance for the Pick matrix.
    method : {"auto", "schur", "colligation"}, default="auto"
        How the J-inner function is built; ``"auto"`` uses the Schur
        algorithm for scalar problems on the disk.

    Attributes
    ----------
    problem_ : PickProblem
    pick_matrix_ : ndarray
    status_ : str
        ``"solvable"``, ``"degenerate"`` or ``"unsolvable"``.
    solvable_ : bool
    theta_ : object or None
        The J-inner function when the Pick matrix is positive definite.
    identity_residual_ : float or None
    verification_ : SolutionReport or None
    """

    def __init__(self, tol=1e-9, method="auto"):
        self.tol = tol
        self.method = method

    def fit(self, X, y=None, *, xi=None, eta=None):
        """Fit to nodes ``X`` (``(m,)`` or ``(m, N)``).

        Give either full values ``y`` (shape ``(m,)`` or ``(m, p, qd)``) or the
        tangential data ``xi`` and ``eta``.
        """
        tol = check_tol(self.tol)
        if (y is None) == (xi is None or eta is None):
            raise ValidationError("pass either y or both xi and eta")
        if y is not None:
            problem = interp.PickProblem.from_values(X, y)
        else:
            problem = interp.PickProblem(X, xi, eta)
        result = interp.solve(problem, tol, self.method)
        self.problem_ = problem
        self.pick_matrix_ = result.G
        self.status_ = result.status
        self.solvable_ = result.solvable
        self.theta_ = result.theta
        self.identity_residual_ = result.identity_residual
        self.verification_ = result.verification
        self.solution_ = result.central
        return self

    def predict(self, X):
        """Central solution at points ``X``; scalar problems return a 1-D array."""
        check_is_fitted(self, "problem_")
        if self.solution_ is None:
            raise ValidationError(f"no solution to evaluate (problem is {self.status_})")
        pts = np.asarray(X, dtype=complex)
        if pts.ndim <= 1:
            pts = pts.reshape(-1, 1) if self.problem_.ball_dim == 1 else pts.reshape(1, -1)
        vals = np.array([self.solution_(z) for z in pts])
        if self.problem_.p == 1 and self.problem_.qd == 1:
            return vals[:, 0, 0]
        return vals
