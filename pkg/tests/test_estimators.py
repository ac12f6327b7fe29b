import doctest

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import random_system
from qrational import estimators
from qrational.estimators import PickInterpolator, QRealization
from qrational.exceptions import ValidationError
from qrational.statespace import QRational, eval_q, taylor_q


def test_doctests():
    res = doctest.testmod(estimators)
    assert res.failed == 0 and res.attempted > 0


def test_params_and_clone():
    est = QRealization(q=0.3, tol=1e-8, n_states=2)
    assert est.get_params() == {"q": 0.3, "tol": 1e-8, "n_states": 2}
    c = clone(est)
    assert c.get_params() == est.get_params() and c is not est
    assert PickInterpolator().set_params(method="schur").method == "schur"


def test_not_fitted():
    with pytest.raises(NotFittedError):
        QRealization().predict([0.1])
    with pytest.raises(NotFittedError):
        PickInterpolator().predict([0.1])


def test_qrealization_fit_predict(rng):
    ss = random_system(rng, 3, 2, 1)
    fr = QRational(ss, 0.5)
    T = taylor_q(fr, 11)
    est = QRealization(q=0.5).fit(T)
    assert est.n_states_ == 3 and (est.n_outputs_, est.n_inputs_) == (2, 1)
    assert est.singular_values_.ndim == 1
    pts = [0.1, -0.3 + 0.2j]
    pred = est.predict(pts)
    assert pred.shape == (2, 2, 1)
    np.testing.assert_allclose(pred[1], eval_q(fr, pts[1]), atol=1e-9)
    assert est.score(taylor_q(fr, 20)) > -1e-8


@pytest.mark.filterwarnings("ignore::qrational.exceptions.RankWarning")
def test_qrealization_forced_states(rng):
    T = taylor_q(QRational(random_system(rng, 3), 0.0), 11)
    assert QRealization(n_states=1).fit(T).n_states_ == 1


def test_pick_interpolator_values(rng):
    z = np.array([0.1, -0.4j, 0.5 + 0.2j])
    s = 0.7 * z ** 2
    est = PickInterpolator().fit(z, s)
    assert est.solvable_ and est.status_ == "solvable"
    np.testing.assert_allclose(est.predict(z), s, atol=1e-10)
    assert est.verification_.passed


def test_pick_interpolator_tangential():
    nodes = np.array([[0.2, 0.1], [-0.3j, 0.4]])
    xi = np.ones((2, 1))
    eta = np.conj(nodes @ np.array([0.5, 0.2]))[:, None]
    est = PickInterpolator().fit(nodes, xi=xi, eta=eta)
    assert est.status_ == "solvable"
    assert est.predict(nodes[0]).shape == (1,)


def test_pick_interpolator_unsolvable():
    est = PickInterpolator().fit([0.3], [1.5])
    assert not est.solvable_
    with pytest.raises(ValidationError):
        est.predict([0.0])


def test_pick_interpolator_argument_check():
    with pytest.raises(ValidationError):
        PickInterpolator().fit([0.1], [0.2], xi=[[1.0]], eta=[[0.2]])
