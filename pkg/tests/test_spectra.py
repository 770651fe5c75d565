import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from specbarron import spectra
from specbarron.spectra import (AtomicSpectrum, BanachSum, BochnerRiesz, CosGauss, FpIndicator, GaussFamily,
                                NormFlavor, Variant)

L1 = NormFlavor.L1
EUC = NormFlavor.EUCLIDEAN


def pair():
    return AtomicSpectrum(xi=[[1.0, 0.0], [-1.0, 0.0]], weights=[0.5, 0.5])


def random_atomic(rng, n=10, d=2):
    return AtomicSpectrum(xi=rng.normal(scale=3, size=(n, d)),
                          weights=rng.normal(size=n) + 1j * rng.normal(size=n))


def test_atomic_norm_example():
    for s in (0.0, 0.5, 2.0):
        assert spectra.spectral_norm(pair(), s, L1) == pytest.approx(1.0)


def test_bochner_riesz_norm_example():
    assert spectra.spectral_norm(BochnerRiesz(1, 1, 1), 0, EUC) == pytest.approx(4 / 3, rel=1e-14)


def test_fp_norm_example():
    assert spectra.spectral_norm(FpIndicator(1, 1), 0, EUC) == pytest.approx(2.0, rel=1e-12)


def test_eval_examples():
    assert spectra.eval_function(pair(), [0.0, 0.0]) == pytest.approx(1.0)
    assert spectra.eval_function(BochnerRiesz(1, 1, 1), [1e-9]).real == pytest.approx(4 / 3, rel=1e-9)
    assert abs(spectra.eval_function(FpIndicator(1, 1), [0.5])) < 1e-12


def test_bochner_riesz_against_direct_inversion_1d():
    br = BochnerRiesz(1.3, 0.7, 1)
    for x in np.random.default_rng(0).uniform(-3, 3, 10):
        val, _ = integrate.quad(lambda k: (1 - (k / 1.3) ** 2) ** 0.7 * math.cos(2 * math.pi * x * k),
                                -1.3, 1.3, epsabs=1e-13, limit=200)
        assert br.eval([x]).real == pytest.approx(val, rel=1e-7, abs=1e-10)


@pytest.mark.parametrize("s, d", [(0.0, 1), (1.0, 1), (0.5, 2), (1.5, 3)])
def test_bochner_riesz_closed_norm(s, d):
    br = BochnerRiesz(1.7, 1.5, d)
    expected = 0.5 * spectra.sphere_area(d) * special.beta((s + d) / 2, 2.5) * 1.7 ** (s + d)
    assert br.norm(s) == pytest.approx(expected, rel=1e-12)
    quad = spectra.RadialSpectrum.norm(br, s)
    assert quad == pytest.approx(expected, rel=1e-8)


def test_gauss_fourier_pair():
    g = GaussFamily(2.0, 1)
    x = np.linspace(0, 2, 9)
    np.testing.assert_allclose(g.eval(x[:, None]).real, np.exp(-math.pi * x ** 2 / 2.0), atol=1e-12)


def test_moment_examples():
    atom = AtomicSpectrum(xi=[[2.0]], weights=[1.0], real_valued=False)
    rep = spectra.moment_inequality_report(atom, 0, 1, 2, L1)
    assert rep.holder_lhs == pytest.approx(2.0) and rep.holder_rhs == pytest.approx(2.0)
    unit = AtomicSpectrum(xi=[[1.0]], weights=[1.0], real_valued=False)
    rep = spectra.moment_inequality_report(unit, 1, 1, 2, EUC)
    assert rep.monotone_lhs == pytest.approx(2.0) and rep.monotone_rhs == pytest.approx(3.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 2), st.floats(0, 1), st.floats(0, 2))
def test_moment_inequalities_random(seed, s1, frac, width):
    spec = random_atomic(np.random.default_rng(seed))
    s2 = s1 + width
    s = s1 + frac * width
    assert spectra.moment_inequality_report(spec, s1, s, s2, L1).holds()


def test_sample_mu_two_atoms():
    spec = AtomicSpectrum(xi=[[1.0], [2.0]], weights=[0.3, 0.3], real_valued=False)
    np.testing.assert_allclose(spec.probabilities(1.0, Variant.HOMOGENEOUS), [2 / 3, 1 / 3])
    draw = spectra.sample_mu(spec, 1.0, 10, Variant.HOMOGENEOUS, seed=3)
    assert draw.Q == pytest.approx(1.5 * 0.3)


def test_sample_mu_single_atom_and_determinism():
    spec = AtomicSpectrum(xi=[[3.0, -1.0]], weights=[0.2j], real_valued=False)
    a = spectra.sample_mu(spec, 0.5, 50, seed=11)
    assert np.all(a.xi == [3.0, -1.0])
    assert np.all((a.r > 0) & (a.r < 1))
    b = spectra.sample_mu(spec, 0.5, 50, seed=11)
    assert np.array_equal(a.r, b.r) and np.array_equal(a.theta, b.theta)


def test_sample_mu_chi_square():
    spec = AtomicSpectrum(xi=[[1.0], [2.0], [-3.0], [0.5]], weights=[1.0, 0.5j, 2.0, 0.25], real_valued=False)
    p = spec.probabilities(0.5, Variant.SHIFTED)
    draw = spectra.sample_mu(spec, 0.5, 100_000, Variant.SHIFTED, seed=5)
    counts = np.array([np.sum(draw.xi[:, 0] == v) for v in (1.0, 2.0, -3.0, 0.5)])
    assert stats.chisquare(counts, p * counts.sum()).pvalue > 1e-3


def test_sample_mu_homogeneous_rejects_origin():
    spec = AtomicSpectrum(xi=[[0.0], [1.0]], weights=[1.0, 1.0], real_valued=False)
    with pytest.raises(ValueError):
        spectra.sample_mu(spec, 0.5, 5, Variant.HOMOGENEOUS)


@pytest.mark.parametrize("xi, phase, theta", [((1, 0), 0.0, 0.0), ((-1, 0), 0.0, 1.0), ((1, -1), 0.25, 1.25)])
def test_phase_theta_examples(xi, phase, theta):
    assert spectra.phase_theta(xi, phase) == pytest.approx(theta)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4), st.floats(-3, 3))
def test_phase_theta_range(xi, phase):
    xi = np.array(xi)
    th = spectra.phase_theta(xi, phase)
    assert (th - phase) == pytest.approx(round(th - phase), abs=1e-9)
    corners = np.array(np.meshgrid(*[[0, 1]] * len(xi))).reshape(len(xi), -1).T
    vals = corners @ xi + th
    assert vals.min() >= -1e-12 and vals.max() <= np.abs(xi).sum() + 1 + 1e-12


def test_split_examples():
    spec = AtomicSpectrum(xi=[[0.5], [2.0]], weights=[1.0, 1.0], real_valued=False)
    low, high = spectra.split_spectrum(spec)
    assert low.xi.tolist() == [[0.5]] and high.xi.tolist() == [[2.0]]
    low, high = spectra.split_spectrum(AtomicSpectrum.cosine([3.0]))
    assert low is None and len(high.weights) == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1))
def test_split_norms_bounded(seed, s):
    spec = random_atomic(np.random.default_rng(seed), d=1)
    low, high = spectra.split_spectrum(spec)
    whole = spec.norm(s, L1)
    if low is not None:
        assert low.norm(1, L1) <= whole * (1 + 1e-12)
    if high is not None:
        assert high.norm(s, L1) <= whole * (1 + 1e-12)


def test_banach_growth_examples():
    rep = spectra.banach_growth_report(3, 1.0, 0.0, 1, True)
    assert rep.v0 == pytest.approx(6.0)
    assert rep.vs == pytest.approx(7 / 8)
    a = spectra.banach_growth_report(1, 0.5, 0.5, 2, True)
    b = spectra.banach_growth_report(2, 0.5, 0.5, 2, True)
    assert b.v0 == pytest.approx(2 * a.v0) and a.vs < b.vs < 2 * a.vs
    assert spectra.banach_growth_report(5, 1.0, 1.0, 1, False).l1_lower == 5


def test_banach_sum_norm_matches_quadrature():
    fam = BanachSum(4, 0.5, 1, scaled=True)
    assert spectra.RadialSpectrum.norm(fam, 0.5) == pytest.approx(fam.norm(0.5), rel=1e-8)
    assert BanachSum(5, 1.0, 1, scaled=False).value_at_origin() == 5


def test_cos_gauss_density_and_decay():
    cg = CosGauss(3, 2.0, 1)
    mass = sum(integrate.quad(lambda k: cg.fhat(np.array([[k]]))[0].real, a, b, limit=200)[0]
               for a, b in [(-20, -3), (-3, 0), (0, 3), (3, 20)])
    assert mass == pytest.approx(1.0, rel=1e-8)
    assert cg.norm(0, L1) == pytest.approx(1.0, rel=1e-8)
    assert cg.norm(1, L1) <= 3 + 1 / (math.pi * math.sqrt(2.0)) + 1e-9


def test_divergence_reported():
    with pytest.raises(spectra.DivergenceError):
        spectra.TabulatedRadial([0, 1], [1, 1], 1, origin_exponent=-1.5).norm(0.0)
    with pytest.raises(spectra.DivergenceError):
        spectra.RadialSpectrum(lambda r: 1.0 / (1.0 + r), 1).norm(0.0)


def test_file_round_trip(tmp_path):
    spec = AtomicSpectrum.cosine_sum([([2.0], 0.8, 0.1), ([5.0], 0.2, 0.35)])
    path = tmp_path / "s.json"
    spectra.dump_spectrum(spec, path)
    back = spectra.load_spectrum(path)
    np.testing.assert_allclose(back.xi, spec.xi)
    np.testing.assert_allclose(back.weights, spec.weights)
    named = spectra.spectrum_from_dict({"type": "named", "family": "bochner_riesz", "params": {"R": 1, "delta": 1}})
    assert named.norm(0) == pytest.approx(4 / 3)


def test_file_schema_violations():
    with pytest.raises(ValueError):
        spectra.spectrum_from_dict({"type": "atomic", "dim": 1, "atoms": []})
    with pytest.raises(ValueError):
        spectra.spectrum_from_dict({"type": "radial-table", "dim": 1, "r": [0, 0.5, 0.4], "g0": [1, 1, 1]})
    with pytest.raises(ValueError):
        spectra.spectrum_from_dict({"type": "named", "family": "bochner_riesz", "params": {"bogus": 1}})


def test_benchmark_fixture():
    with open("tests/fixtures/benchmark.json") as fh:
        spec = spectra.spectrum_from_dict(json.load(fh))
    assert spec.real_valued and spec.norm(0, L1) == pytest.approx(1.0)
    assert spec.norm(0.5, L1) == pytest.approx(0.8 * 2 ** 0.5 + 0.2 * 5 ** 0.5)
