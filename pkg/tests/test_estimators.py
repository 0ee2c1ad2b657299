import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pjdetect import MatchedFilterDetector, MLDetector, ProjectedJacobiDetector, RZFDetector
from pjdetect.errors import ConfigError, ShapeError
from pjdetect.modem import make_qam
from conftest import random_channel


def _data(M=32, N=4, n=20, J=4, sv=0.01, seed=0):
    gen = np.random.default_rng(seed)
    c = make_qam(J)
    H = random_channel(gen, M, N) / np.sqrt(M)
    X = c.points[gen.integers(0, J, (n, N))]
    V = np.sqrt(sv / 2) * (gen.standard_normal((n, M)) + 1j * gen.standard_normal((n, M)))
    return H, X, X @ H.T + V


ALL = [MatchedFilterDetector(), RZFDetector(), RZFDetector(rho="lmmse", noise_var=0.01),
       ProjectedJacobiDetector(), ProjectedJacobiDetector(init="mf", init_rho="zf"), MLDetector()]


@pytest.mark.parametrize("det", ALL, ids=lambda d: type(d).__name__)
def test_fit_predict_and_clone(det):
    H, X, Y = _data()
    fitted = clone(det).fit(H)
    X_hat = fitted.predict(Y)
    assert X_hat.shape == X.shape
    assert fitted.score(Y, X) > 0.95
    assert fitted.predict(Y[0]).shape == (4,)
    assert clone(det).get_params() == det.get_params()


def test_get_set_params():
    det = ProjectedJacobiDetector(T=3, init_rho="lmmse", noise_var=0.1)
    p = det.get_params()
    assert p["T"] == 3 and p["init_rho"] == "lmmse" and p["noise_var"] == 0.1
    det.set_params(T=7)
    assert det.T == 7


def test_not_fitted():
    with pytest.raises(NotFittedError):
        RZFDetector().predict(np.zeros((1, 4)))


def test_input_validation():
    H, X, Y = _data()
    det = RZFDetector().fit(H)
    with pytest.raises(ShapeError):
        det.predict(np.zeros((2, 5)))
    with pytest.raises(ShapeError):
        RZFDetector().fit(np.zeros((2, 4)))
    with pytest.raises(ConfigError):
        RZFDetector().fit(np.full((4, 2), np.nan))
    with pytest.raises(ConfigError):
        det.predict(np.full(32, np.inf))
    with pytest.raises(ConfigError):
        ProjectedJacobiDetector(T=0).fit(H)
    with pytest.raises(ConfigError):
        RZFDetector(rho="lmmse").fit(H).predict(Y)


def test_transform_outputs():
    H, X, Y = _data(sv=0.0)
    soft = RZFDetector().fit(H).transform(Y)
    assert np.allclose(soft, X, atol=1e-9)
    mf = MatchedFilterDetector().fit(H).transform(Y[0])
    assert mf.shape == (4,)


def test_pj_agrees_with_ml_on_easy_problem():
    H, X, Y = _data(M=16, N=3, J=16, sv=0.001, seed=2)
    ml = MLDetector(order=16).fit(H).predict(Y)
    pj = ProjectedJacobiDetector(order=16, T=5, solver="direct").fit(H)
    assert np.array_equal(pj.predict(Y), ml)
    assert pj.t_star_.shape == (20,)
