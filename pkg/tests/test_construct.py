import json
import math

import numpy as np
import pytest

from specbarron import construct, network as nw
from specbarron.construct import ConstructConfig, MPolicy
from specbarron.spectra import AtomicSpectrum, NormFlavor, load_spectrum

L1 = NormFlavor.L1
BENCH = "tests/fixtures/benchmark.json"


def bench():
    return load_spectrum(BENCH)


def test_shallow_cosine_example():
    spec = AtomicSpectrum.cosine([1.0])
    rep = construct.construct_shallow(spec, 40, ConstructConfig(seed=1))
    assert rep.accepted
    assert rep.measured_l2 <= 2 / math.sqrt(40)
    assert rep.width <= 40


def test_shallow_constant_is_exact():
    spec = AtomicSpectrum(xi=[[0.0, 0.0]], weights=[1.0])
    rep = construct.construct_shallow(spec, 8)
    assert rep.measured_l2 <= 1e-12 and rep.accepted


def test_shallow_bound_scaling():
    spec = AtomicSpectrum.cosine([1.0])
    bounds = [construct.construct_shallow(spec, N, ConstructConfig(seed=N, retries=2)).bound
              for N in (16, 32, 64, 128, 256)]
    for a, b in zip(bounds, bounds[1:]):
        assert a / b == pytest.approx(math.sqrt(2))


def test_deep_high_fixed_m_example():
    spec = bench()
    ups = spec.norm(0.5, L1)
    rep = construct.construct_deep_high(spec, 1, 0.5, None, ConstructConfig(m=64, seed=3))
    assert rep.accepted
    assert rep.measured_l2 <= 22 * ups / math.sqrt(rep.width)


def test_deep_high_block_widths_L2():
    rep = construct.construct_deep_high(bench(), 2, 0.25, None, ConstructConfig(m=16, seed=2, retries=1))
    for d in rep.draws:
        block = nw.assemble_gate_block(d.xi, d.theta, d.r, 2)
        assert max(block.widths()) <= 12 * np.abs(d.xi).sum() ** 0.5


def test_single_atom_draws_identical():
    spec = AtomicSpectrum(xi=[[3.0]], weights=[0.5], real_valued=False)
    rep = construct.construct_deep_high(spec, 1, 0.5, None, ConstructConfig(m=32, retries=1))
    assert rep.Q == pytest.approx(0.5 * 3 ** -0.5)
    assert all(np.array_equal(d.xi, [3.0]) for d in rep.draws)
    # the radius r is still random, so the error is Monte-Carlo, not zero
    assert rep.measured_l2 > 1e-10


def test_deep_high_support_and_range_errors():
    mixed = AtomicSpectrum.cosine_sum([([0.5], 0.3, 0.0), ([3.0], 0.7, 0.0)])
    with pytest.raises(construct.SupportError):
        construct.construct_deep_high(mixed, 1, 0.5, 64)
    with pytest.raises(ValueError):
        construct.construct_deep_high(bench(), 2, 0.5, 64)


def test_deep_mixed_example():
    spec = AtomicSpectrum.cosine_sum([([0.5], 0.3, 0.0), ([3.0], 0.7, 0.0)])
    ups = spec.norm(0.5, L1)
    rep = construct.construct_deep(spec, 1, 0.5, 64, ConstructConfig(seed=4))
    assert rep.accepted
    assert rep.measured_l2 <= 29 * ups / 8
    assert rep.width <= 66
    assert set(rep.children) == {"low", "high"}


def test_deep_all_low():
    spec = AtomicSpectrum.cosine([0.4])
    ups = spec.norm(0.5, L1)
    rep = construct.construct_deep(spec, 2, 0.25, 64, ConstructConfig(seed=5))
    assert rep.measured_l2 <= 2 * math.sqrt(6) * ups / 64 ** 0.5
    assert rep.width <= 66
    assert list(rep.children) == ["low"]


@pytest.mark.parametrize("L, s, N", [(1, 0.5, 16), (2, 0.25, 48), (2, 0.125, 100)])
def test_deep_width_and_real_output(L, s, N):
    rep = construct.construct_deep(bench(), L, s, N, ConstructConfig(seed=N))
    assert rep.width <= N + 2
    assert rep.network.is_real
    x = np.random.default_rng(0).random((200, 1))
    assert np.max(np.abs(rep.network.eval(x).imag)) <= 1e-12


def test_markov_policy_m():
    Q, ups = 1.0, 2.0
    assert construct.markov_m(Q, 256, 0.5, 1, 1.0, ups) == math.ceil(256 / 72)
    assert construct.markov_m(Q, 8, 0.5, 1, 1.0, ups) == 0
    rep = construct.construct_deep_high(bench(), 1, 0.5, 2000, ConstructConfig(m_policy=MPolicy.MARKOV))
    assert rep.m == construct.markov_m(rep.Q, 2000, 0.5, 1, 1.0, rep.upsilon)


def test_unbiased_estimator():
    spec = bench()
    x = np.random.default_rng(7).random((20, 1))
    runs = np.array([construct.estimator_network(spec, 2, 0.25, 4, seed=k).eval(x).real for k in range(200)])
    mean = runs.mean(axis=0)
    se = runs.std(axis=0, ddof=1) / math.sqrt(len(runs))
    assert np.all(np.abs(mean - spec.eval(x).real) <= 3 * se)


def test_envelope_bound():
    spec = AtomicSpectrum(xi=[[2.0, -1.0], [0.0, 4.0]], weights=[0.4 + 0.1j, -0.3j], real_valued=False)
    rep = construct.construct_deep_high(spec, 2, 0.2, None, ConstructConfig(m=20, retries=1))
    x = np.random.default_rng(1).random((500, 2))
    for d in rep.draws:
        assert abs(d.coefficient) * rep.m <= d.envelope * (1 + 1e-12)
        assert d.envelope == pytest.approx(0.5 * math.pi * rep.Q * np.abs(d.xi).sum() ** 0.2)
        block = nw.assemble_gate_block(d.xi, d.theta, d.r, 2)
        assert np.max(np.abs(d.coefficient * rep.m * block.network.eval(x))) <= d.envelope * (1 + 1e-12)


def test_retry_returns_flagged_best():
    # an impossible bound can never be met
    rep = construct.construct_shallow(AtomicSpectrum.cosine([1.0]), 40, ConstructConfig(retries=3), bound=1e-9)
    assert not rep.accepted and rep.retry_count == 3


def test_determinism():
    a = construct.construct_deep(bench(), 1, 0.5, 32, ConstructConfig(seed=9))
    b = construct.construct_deep(bench(), 1, 0.5, 32, ConstructConfig(seed=9))
    assert nw.serialize(a.network) == nw.serialize(b.network)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def test_hard_instance_examples():
    inst = construct.hard_instance(1, 2, 0.5, 0.1)
    assert inst.n == 16
    assert math.exp(-math.pi * 1 / inst.R) >= 0.9
    assert inst.spectrum.norm(0.5, L1) <= 1.1
    assert inst.lower == pytest.approx(0.9 / (8 * math.sqrt(2)))
    inst2 = construct.hard_instance(2, 3, 0.25, 0.2, d=2)
    assert inst2.n == 2 ** 4 * 9
    assert math.exp(-math.pi * 2 / inst2.R) >= 0.8


def test_hard_instance_errors():
    with pytest.raises(ValueError):
        construct.hard_instance(1, 2, 0.5, 0.7)
    with pytest.raises(ValueError):
        construct.hard_instance(2, 2, 0.5, 0.1)


def test_rate_study_small():
    study = construct.rate_study(bench(), 1, 0.5, [8, 16, 32, 64], ConstructConfig(seed=0), replicates=2)
    assert len(study.rows) == 8
    assert all(r.error <= r.bound for r in study.rows if r.accepted)
    assert math.isfinite(study.slope)
