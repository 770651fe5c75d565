import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specbarron import analysis, gates, network as nw
from specbarron.spectra import phase_theta

FIXTURE = "tests/fixtures/network_v1.json"
PINNED = [
    ((0.1, 0.2), 0.125 + 0j),
    ((0.35, 0.8), 0.125 + 0j),
    ((0.5, 0.5), -0.375 + 0.25j),
    ((0.9, 0.05), 0.375 + 0.25j),
    ((0.62, 0.41), -0.625 + 0j),
]


def unit_step(w, b, d=1):
    return nw.LNNetwork(d, [], nw.DenseLayer(np.atleast_2d(w), np.array([b], dtype=float)), [1.0])


def gamma_net(r, n):
    atoms = gates.gamma_heaviside_atoms(r, n)
    gate = nw.DenseLayer(atoms.scale[:, None], -atoms.threshold)
    return nw.LNNetwork(1, [], gate, atoms.sign, atoms.offset)


def test_empty_network_is_zero():
    net = nw.zero_network(3, depth=2)
    assert np.all(net.eval(np.random.default_rng(0).random((10, 3))) == 0)


@pytest.mark.parametrize("l1, L, k", [(0.5, 1, 2), (3, 2, 2), (7, 3, 2), (8, 3, 3), (0, 4, 1), (1, 4, 2), (24, 2, 5)])
def test_layer_count(l1, L, k):
    assert nw.layer_count(l1, L) == k


def test_block_formula_examples():
    b = nw.assemble_gate_block([0.5], phase_theta([0.5], 0.0), 0.3, 1)
    assert b.n_layers == (2,) and b.n_xi == 2 and b.widths() == [8]
    b = nw.assemble_gate_block([1.0, 2.0], phase_theta([1.0, 2.0], 0.1), 0.3, 2)
    assert b.n_layers == (2, 2) and b.n_xi == 8 and b.widths() == [6, 8]


@pytest.mark.parametrize("xi, L", [([1.0, 0.0], 1), ([2.0, -1.0], 2), ([-3.0, 4.0], 3), ([0.7, 0.2], 2), ([5.0], 4)])
def test_block_matches_gates(xi, L):
    rng = np.random.default_rng(len(xi) * 10 + L)
    d = len(xi)
    for _ in range(5):
        r = rng.random()
        block = nw.assemble_gate_block(xi, phase_theta(xi, rng.random()), r, L)
        x = rng.random((10_000, d))
        t = block.t_of(x)
        assert t.min() >= 0 and t.max() <= 1
        out = block.network.eval(x).real
        assert np.array_equal(out, gates.gamma_tiled(t, r, block.n_xi))
        # width per layer <= 12 |xi|_1^{1/L} once |xi|_1 >= 1
        l1 = np.abs(xi).sum()
        if l1 >= 1:
            assert max(block.widths()) <= 12 * l1 ** (1 / L)


def test_parallel_merge():
    rng = np.random.default_rng(3)
    blocks = []
    for _ in range(4):
        xi = rng.integers(-3, 4, size=2).astype(float)
        blocks.append((nw.assemble_gate_block(xi, phase_theta(xi, rng.random()), rng.random(), 2),
                       complex(rng.normal(), rng.normal())))
    merged = nw.parallel_merge(blocks)
    x = rng.random((500, 2))
    expected = sum(c * b.network.eval(x) for b, c in blocks)
    np.testing.assert_allclose(merged.eval(x), expected, atol=1e-12)
    assert merged.widths() == [sum(b.widths()[i] for b, _ in blocks) for i in range(2)]
    one = nw.parallel_merge(blocks[:1])
    np.testing.assert_allclose(one.eval(x), blocks[0][1] * blocks[0][0].network.eval(x), atol=1e-12)
    same = nw.parallel_merge([blocks[0]] * 5)
    assert same.widths() == [5 * w for w in blocks[0][0].widths()]


def test_merge_depth_mismatch():
    a = nw.assemble_gate_block([2.0], 0.0, 0.3, 1)
    b = nw.assemble_gate_block([2.0], 0.0, 0.3, 2)
    with pytest.raises(ValueError):
        nw.parallel_merge([(a, 1.0), (b, 1.0)])


@pytest.mark.parametrize("general", [False, True])
def test_identity_extend(general):
    rng = np.random.default_rng(4)
    blocks = [(nw.assemble_gate_block([1.0, 2.0], 0.0, r, 1), 1.0) for r in (0.2, 0.7)]
    net = nw.parallel_merge(blocks)
    assert nw.identity_extend(net, 1).network is net
    ext = nw.identity_extend(net, 3, general=general)
    x = rng.random((1000, 2))
    assert np.array_equal(ext.network.eval(x), net.eval(x))
    assert ext.nominal_width == net.width
    assert ext.passthrough_units == (4 if general else 2)
    assert ext.network.depth == 3


def test_identity_extend_general_off_omega():
    net = nw.parallel_merge([(nw.assemble_gate_block([1.0], 0.0, 0.4, 1), 1.0)])
    ext = nw.identity_extend(net, 2, general=True)
    x = np.random.default_rng(0).uniform(-2, 2, (200, 1))
    assert np.array_equal(ext.network.eval(x), net.eval(x))


def test_profile_single_unit():
    prof = nw.profile_1d(unit_step([1.0], -0.5))
    np.testing.assert_allclose(prof.breakpoints, [0.0, 0.5, 1.0])
    np.testing.assert_allclose(prof.values, [0.0, 1.0])


@pytest.mark.parametrize("n", [1, 2, 5])
def test_profile_gamma(n):
    prof = nw.profile_1d(gamma_net(0.3, n))
    interior = len(prof.breakpoints) - 2
    assert 4 * n - 2 <= interior <= 4 * n


def test_profile_matches_eval_and_sign_budget():
    rng = np.random.default_rng(9)
    for L, N in [(1, 4), (2, 3), (3, 2)]:
        for _ in range(10):
            net = analysis.random_heaviside_network(rng, L, N, d=2)
            line = rng.random(1)
            prof = nw.profile_1d(net, line)
            mids = 0.5 * (prof.breakpoints[:-1] + prof.breakpoints[1:])
            direct = net.eval(np.column_stack([mids, np.full_like(mids, line[0])]))
            assert np.array_equal(prof.values, direct)
            assert prof.sign_changes() <= 2 ** (L + 1) * N ** L


def test_profile_budget():
    with pytest.raises(nw.BreakpointBudgetExceeded):
        nw.profile_1d(gamma_net(0.3, 10), max_breakpoints=10)


def test_serialize_round_trip():
    rng = np.random.default_rng(5)
    for L in (1, 2, 3):
        net = analysis.random_heaviside_network(rng, L, 4, d=3)
        net = net.with_output(net.output_weights * (1 + 0.5j), 0.25 - 1j)
        back = nw.deserialize(nw.serialize(net))
        for a, b in zip(net.hidden + (net.gate,), back.hidden + (back.gate,)):
            assert np.array_equal(a.weight, b.weight) and np.array_equal(a.bias, b.bias)
        assert np.array_equal(net.output_weights, back.output_weights)
        assert net.output_bias == back.output_bias
    sig = unit_step([2.0], 0.1).with_mode(nw.Sigmoidal(50.0))
    assert nw.deserialize(nw.serialize(sig)).mode == nw.Sigmoidal(50.0)


def test_declared_width_violation():
    data = json.loads(open(FIXTURE).read())
    data["declared_width"] = 8
    with pytest.raises(ValueError):
        nw.from_dict(data)
    with pytest.raises(ValueError):
        unit_step([1.0, 1.0], 0.0, d=2).with_declared_width(0)


def test_schema_violation():
    data = json.loads(open(FIXTURE).read())
    data["version"] = 2
    with pytest.raises(ValueError):
        nw.from_dict(data)


def test_golden_fixture():
    net = nw.load_network(FIXTURE)
    assert net.widths() == [12, 16] and net.declared_width == 16
    x = np.array([p for p, _ in PINNED])
    np.testing.assert_allclose(net.eval(x), [v for _, v in PINNED], atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        unit_step([1.0, 1.0], 0.0, d=2).eval(np.zeros((3, 3)))


def test_sigmoidal_convergence():
    gaps = [analysis.sigmoid_gap([1.3], -0.4, 10.0 ** k).value for k in range(1, 7)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-2
    assert gaps[-1] == pytest.approx(analysis.sigmoid_gap_limit(1.3, -0.4, 1e6), rel=1e-6)


def test_heaviside_vs_sigmoid_small_nets():
    rng = np.random.default_rng(12)
    for _ in range(5):
        net = analysis.random_heaviside_network(rng, 2, 3, d=2)
        est = analysis.l2_error(net, net.with_mode(nw.Sigmoidal(1e6)), analysis.QuadratureSpec(points=1 << 12))
        assert est.value < 1e-3


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_real_part_projection(seed):
    rng = np.random.default_rng(seed)
    net = analysis.random_heaviside_network(rng, 2, 3, d=2)
    net = net.with_output(net.output_weights * (1 + 2j), 1j)
    re = net.real_part()
    assert re.is_real
    x = rng.random((50, 2))
    np.testing.assert_allclose(re.eval(x), net.eval(x).real, atol=1e-12)
    assert np.max(np.abs(re.eval(x).imag)) <= 1e-12
