"""Matrix-valued q-rational functions.

Realizations ``C prod_j (I - (1-q) z q**j A)^{-1} B`` with their Taylor
coefficients ``C A**k B / [k]_q!``, realization arithmetic, Hankel-based
recovery, Schur-multiplier and kernel positivity certificates, and
Nevanlinna-Pick interpolation on the unit ball.
"""
from . import cnp, interp, kernels, qalgebra, qcore, statespace
from .estimators import PickInterpolator, QRealization
from .exceptions import (
    ConvergenceError, DegenerateProblemError, DimensionError, DomainError,
    InsufficientDataError, NumericalError, QRationalError, RankWarning, SingularityError,
    ValidationError,
)
from .statespace import QRational, StateSpace

__version__ = "0.1.0"

__all__ = [
    "cnp", "interp", "kernels", "qalgebra", "qcore", "statespace",
    "PickInterpolator", "QRealization", "QRational", "StateSpace",
    "ConvergenceError", "DegenerateProblemError", "DimensionError", "DomainError",
    "InsufficientDataError", "NumericalError", "QRationalError", "RankWarning",
    "SingularityError", "ValidationError",
]
