import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from specbarron import specfn
from specbarron.specfn import SeriesControl, TruncationError


@pytest.mark.parametrize("x, expected", [(0.5, math.sqrt(math.pi)), (5.0, 24.0), (2.5, 1.3293403882)])
def test_gamma_examples(x, expected):
    assert specfn.gamma_fn(x) == pytest.approx(expected, rel=1e-10)


def test_gamma_against_scipy():
    xs = np.concatenate([np.geomspace(1e-3, 1.0, 200), np.linspace(1.0, 170.0, 800)])
    ours = np.array([specfn.gamma_fn(x) for x in xs])
    np.testing.assert_allclose(ours, special.gamma(xs), rtol=1e-12)


def test_gamma_domain():
    with pytest.raises(ValueError):
        specfn.gamma_fn(0.0)
    with pytest.raises(ValueError):
        specfn.gamma_fn(-1.5)
    with pytest.raises(OverflowError):
        specfn.gamma_fn(200.0)


@given(st.floats(1e-3, 49.0))
def test_gamma_recurrence(x):
    assert specfn.gamma_fn(x + 1) == pytest.approx(x * specfn.gamma_fn(x), rel=1e-12)


@pytest.mark.parametrize("a, b, expected", [(0.5, 1.0, 2.0), (0.5, 2.0, 4.0 / 3.0), (1.0, 1.0, 1.0)])
def test_beta_examples(a, b, expected):
    assert specfn.beta_fn(a, b) == pytest.approx(expected, rel=1e-12)


@given(st.floats(0.01, 30.0), st.floats(0.01, 30.0))
def test_beta_symmetry_and_oracle(a, b):
    assert specfn.beta_fn(a, b) == pytest.approx(specfn.beta_fn(b, a), rel=1e-12)
    assert specfn.beta_fn(a, b) == pytest.approx(special.beta(a, b), rel=1e-11)
    assert specfn.beta_fn(a, 1.0) == pytest.approx(1.0 / a, rel=1e-12)


def test_beta_domain():
    with pytest.raises(ValueError):
        specfn.beta_fn(0.0, 1.0)


def test_bessel_examples():
    assert specfn.bessel_j(0.0, 0.0) == 1.0
    assert specfn.bessel_j(-0.5, math.pi) == pytest.approx(-math.sqrt(2 / math.pi ** 2), rel=1e-10)
    assert specfn.bessel_j(1.5, 1.0) == pytest.approx(0.2402978391, rel=1e-9)


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.0, 1.5, 2.5, 3.5, 7.0])
def test_bessel_against_scipy(nu):
    xs = np.linspace(0.0, 60.0, 601)
    ours = specfn.bessel_j(nu, xs)
    if nu == -0.5:
        xs, ours = xs[1:], ours[1:]
    np.testing.assert_allclose(ours, special.jv(nu, xs), rtol=1e-9, atol=1e-12)


@given(st.floats(1e-3, 40.0))
def test_half_integer_closed_forms(x):
    scale = math.sqrt(math.pi * x / 2)
    assert specfn.bessel_j(0.5, x) * scale == pytest.approx(math.sin(x), abs=1e-11)
    assert specfn.bessel_j(-0.5, x) * scale == pytest.approx(math.cos(x), abs=1e-11)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.5, 2.5])
def test_bessel_crossover_continuity(nu):
    xc = specfn.bessel_crossover(nu)
    window = np.linspace(xc - 1.0, xc + 1.0, 41)
    series = specfn.bessel_j_series(nu, window)
    asym = specfn.bessel_j_asymptotic(nu, window)
    assert np.max(np.abs(series - asym)) <= 1e-9


def test_bessel_truncation_failure():
    with pytest.raises(TruncationError):
        specfn.bessel_j(0.0, 8.0, SeriesControl(rel_tol=1e-12, max_terms=3))


def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(rel_tol=0.0)
    with pytest.raises(ValueError):
        SeriesControl(max_terms=0)


def test_hyp1f2_examples():
    assert specfn.hyp1f2(0.3, 1.2, 2.7, 0.0) == 1.0
    assert specfn.hyp1f2(0.5, 1.5, 0.5, -math.pi ** 2 / 16) == pytest.approx(2 / math.pi, rel=1e-12)
    # C(x) = x 1F2(1/4; 1/2, 5/4; -pi^2 x^4 / 16) at x = 2
    _, c2 = special.fresnel(2.0)
    assert specfn.hyp1f2(0.25, 1.25, 0.5, -math.pi ** 2) == pytest.approx(c2 / 2, rel=1e-11)


@given(st.floats(0.0, 3.0))
def test_hyp1f2_fresnel_identity(x):
    _, c = special.fresnel(x)
    lhs = x * specfn.hyp1f2(0.25, 0.5, 1.25, -math.pi ** 2 * x ** 4 / 16)
    assert lhs == pytest.approx(c, rel=1e-10, abs=1e-14)


def test_hyp1f2_term_ratio():
    a, b1, b2, x = 0.7, 1.3, 2.1, -3.2
    ctrl = SeriesControl(max_terms=1)
    partial = [1.0]
    term = 1.0
    for k in range(1, 12):
        term *= ((a + k - 1) / ((b1 + k - 1) * (b2 + k - 1))) * x / k
        partial.append(partial[-1] + term)
    # one-term cap cannot converge for this x
    with pytest.raises(TruncationError):
        specfn.hyp1f2(a, b1, b2, x, ctrl)
    assert specfn.hyp1f2(a, b1, b2, x) == pytest.approx(sum(
        math.gamma(a + k) / math.gamma(a) * math.gamma(b1) / math.gamma(b1 + k)
        * math.gamma(b2) / math.gamma(b2 + k) * x ** k / math.factorial(k) for k in range(60)), rel=1e-12)


def test_hyp1f2_forbidden_parameters():
    with pytest.raises(ValueError):
        specfn.hyp1f2(1.0, 0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        specfn.hyp1f2(1.0, 1.0, -2.0, 0.5)


def test_hyp1f2_cancellation_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        specfn.hyp1f2(0.5, 1.5, 1.0, -900.0)
    assert any(issubclass(w.category, specfn.CancellationWarning) for w in caught)


def test_fresnel_examples():
    assert specfn.fresnel_c(0.0) == 0.0
    assert abs(specfn.fresnel_c(50.0) - 0.5) < 0.01
    assert specfn.fresnel_c(1.0) == pytest.approx(0.7798934003, rel=1e-9)


def test_fresnel_against_scipy():
    xs = np.linspace(0.0, 40.0, 400)
    np.testing.assert_allclose(specfn.fresnel_c(xs), special.fresnel(xs)[1], rtol=1e-10, atol=1e-13)


def test_sphere_and_ball():
    assert specfn.sphere_area(1) == pytest.approx(2.0)
    assert specfn.sphere_area(2) == pytest.approx(2 * math.pi)
    assert specfn.ball_volume(3) == pytest.approx(4 * math.pi / 3)
