import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from gmopg.baseline import Exponential, Weibull, make_baseline
from gmopg.errors import DomainError, ParameterError


def test_exponential_pdf_at_median():
    assert Exponential(1.0).pdf(np.log(2.0)) == pytest.approx(0.5, abs=1e-15)


def test_weibull_shape_one_is_exponential_at_one():
    assert Weibull(1.0, 1.0).pdf(1.0) == pytest.approx(np.exp(-1.0), abs=1e-15)
    assert Weibull(1.0, 1.0).pdf(1.0) == Exponential(1.0).pdf(1.0)


def test_weibull_pdf_matches_cdf_finite_difference():
    b = Weibull(0.5, 2.0)
    t, h = 1.3, 1e-5
    fd = (b.cdf(t + h) - b.cdf(t - h)) / (2 * h)
    assert abs(b.pdf(t) - fd) < 1e-8


def test_cdf_values():
    assert Exponential(2.0).cdf(1e-300) == pytest.approx(0.0, abs=1e-299)
    assert Exponential(2.0).cdf(np.log(2.0) / 2) == pytest.approx(0.5, abs=1e-15)
    assert Weibull(1.0, 2.0).cdf(1.0) == pytest.approx(1 - np.exp(-1.0), abs=1e-15)


def test_quantiles():
    assert Exponential(1.0).quantile(0.5) == pytest.approx(np.log(2.0), abs=1e-15)
    assert Weibull(1.0, 2.0).quantile(1 - np.exp(-1.0)) == pytest.approx(1.0, abs=1e-14)
    b = Exponential(0.54)
    assert abs(b.cdf(b.quantile(0.9)) - 0.9) < 1e-12


def test_round_trip_random_draws():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        if rng.random() < 0.5:
            b = Exponential(rng.uniform(0.05, 20))
        else:
            b = Weibull(rng.uniform(0.05, 20), rng.uniform(0.2, 5))
        p = rng.uniform(1e-6, 1 - 1e-6)
        assert abs(b.cdf(b.quantile(p)) - p) < 1e-12


@pytest.mark.parametrize("b", [Exponential(0.3), Exponential(4.0), Weibull(0.5, 2.0), Weibull(2.0, 0.7), Weibull(1.3, 3.5)])
def test_normalization(b):
    total = sum(integrate.quad(b.pdf, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0] for lo, hi in [(0, 1), (1, np.inf)])
    assert abs(total - 1.0) < 1e-8


def test_weibull_reduction_on_log_grid():
    t = np.geomspace(1e-6, 50, 400)
    for rate in (0.2, 1.0, 3.0):
        w, e = Weibull(rate, 1.0), Exponential(rate)
        np.testing.assert_allclose(w.pdf(t), e.pdf(t), rtol=1e-14, atol=0)
        np.testing.assert_allclose(w.cdf(t), e.cdf(t), rtol=1e-14, atol=0)
        np.testing.assert_allclose(w.sf(t), e.sf(t), rtol=1e-14, atol=0)


def test_isf_is_accurate_in_the_far_tail():
    b = Weibull(0.7, 1.8)
    q = 1e-200
    assert b.logsf(b.isf(q)) == pytest.approx(np.log(q), rel=1e-14)


def test_dlogpdf_matches_finite_difference():
    b = Weibull(0.8, 2.4)
    t = np.linspace(0.2, 3, 20)
    h = 1e-6
    fd = (b.logpdf(t + h) - b.logpdf(t - h)) / (2 * h)
    np.testing.assert_allclose(b.dlogpdf(t), fd, atol=1e-7)


@given(st.floats(0.01, 50), st.floats(0.2, 6))
@settings(max_examples=50, deadline=None)
def test_cdf_nondecreasing(rate, shape):
    t = np.geomspace(1e-4, 100, 300)
    assert np.all(np.diff(Weibull(rate, shape).cdf(t)) >= 0)


def test_errors():
    with pytest.raises(DomainError):
        Exponential(1.0).pdf(0.0)
    with pytest.raises(DomainError):
        Exponential(1.0).cdf(-1.0)
    with pytest.raises(DomainError):
        Weibull(1.0, 2.0).quantile(1.0)
    with pytest.raises(ParameterError):
        Exponential(-1.0)
    with pytest.raises(ParameterError):
        Weibull(1.0, 0.0)
    with pytest.raises(ParameterError):
        make_baseline("gamma", 1.0)
    assert make_baseline("Weibull", 1.0, 2.0) == Weibull(1.0, 2.0)
