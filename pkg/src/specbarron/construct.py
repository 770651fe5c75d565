"""Monte-Carlo constructions of (L, N)-networks from a spectrum.

Every sampled frequency xi with gate radius r contributes one gate block
realising gamma_{,n_xi}(t_xi(x), r), weighted by

    (pi Q / (2 m)) * w(xi)^{-1} * cos(pi r),

where w is the sampling weight (|xi|_1^{-s} or (1+|xi|_1)^{-s}) and Q its
normaliser.  Averaged over (xi, r) the blocks reproduce Re f; complex targets
add a second family of blocks with the phase shifted by a quarter cycle and
output weight i.  Draws are accepted by the double Markov test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import network as nw
from .analysis import ErrorEstimate, QuadKind, QuadratureSpec, l2_error
from .spectra import (AtomicSpectrum, BandRestricted, CosGauss, NormFlavor, Spectrum, Variant,
                      phase_theta, sample_mu, split_spectrum)

LOW_MASS_FLOOR = 1e-12


class MPolicy(str, Enum):
    FILL = "fill"
    MARKOV = "markov"


class SupportError(ValueError):
    pass


@dataclass(frozen=True)
class ConstructConfig:
    m: int | None = None
    retries: int = 10
    epsilon: float = 1.0
    seed: int = 0
    quad_points: int = 1 << 13
    audit_points: int = 1 << 17
    replications: int = 8
    m_policy: MPolicy = MPolicy.FILL
    shallow_constant: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "m_policy", MPolicy(self.m_policy))
        if self.retries < 1:
            raise ValueError("retries must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.m is not None and self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.replications < 8:
            raise ValueError("replications must be >= 8")
        for pts in (self.quad_points, self.audit_points):
            if pts < self.replications:
                raise ValueError("quadrature budget smaller than the replication count")

    def quad(self, seed: int, audit: bool = False) -> QuadratureSpec:
        total = self.audit_points if audit else self.quad_points
        return QuadratureSpec(QuadKind.SOBOL, max(1, total // self.replications), self.replications, seed)


@dataclass(frozen=True)
class Draw:
    xi: np.ndarray
    r: float
    theta: float
    n_xi: int
    coefficient: complex
    envelope: float  # (pi Q / 2) w(xi)^{-1}


@dataclass
class ConstructReport:
    network: nw.LNNetwork
    measured_l2: float
    stderr: float
    width_per_layer: list[int]
    Q: float
    retry_count: int
    bound: float
    accepted: bool
    m: int
    budget: int
    upsilon: float
    kind: str
    nominal_width: int | None = None
    in_loop_l2: float = float("nan")
    draws: list[Draw] = field(default_factory=list)
    children: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def width(self) -> int:
        return max(self.width_per_layer) if self.width_per_layer else 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "accepted": self.accepted,
            "measured_l2": self.measured_l2,
            "stderr": self.stderr,
            "in_loop_l2": self.in_loop_l2,
            "bound": self.bound,
            "upsilon": self.upsilon,
            "Q": self.Q,
            "m": self.m,
            "budget": self.budget,
            "retry_count": self.retry_count,
            "width_per_layer": list(self.width_per_layer),
            "nominal_width": self.nominal_width,
            "notes": list(self.notes),
            "children": {k: v.to_dict() for k, v in self.children.items()},
        }


# --------------------------------------------------------------------------
# sampling core
# --------------------------------------------------------------------------

def _components(real_valued: bool) -> list[tuple[float, complex]]:
    """(phase shift in cycles, output weight) per estimated part."""
    return [(0.0, 1.0)] if real_valued else [(0.0, 1.0), (-0.25, 1j)]


def expected_block_width(sampler: Spectrum, s: float, variant: Variant, L: int, seed: int = 12345) -> float:
    """E_mu of the gate-layer width 4 k(xi), the widest layer of a block."""
    if isinstance(sampler, AtomicSpectrum):
        p = sampler.probabilities(s, variant)
        l1 = np.abs(sampler.xi).sum(axis=1)
        return float(sum(pk * 4 * nw.layer_count(float(v), L) for pk, v in zip(p, l1)))
    draws = sample_mu(sampler, s, 4096, variant, seed)
    l1 = np.abs(draws.xi).sum(axis=1)
    return float(np.mean([4 * nw.layer_count(float(v), L) for v in l1]))


def sample_blocks(sampler: Spectrum, L: int, s: float, variant: Variant, m: int,
                  rng: np.random.Generator, real_valued: bool) -> tuple[list[tuple[nw.GateBlock, complex]], list[Draw], float]:
    """m draws per component, assembled into weighted gate blocks."""
    out: list[tuple[nw.GateBlock, complex]] = []
    draws: list[Draw] = []
    Q = math.nan
    if m == 0:
        return out, draws, Q
    for shift, weight in _components(real_valued):
        smp = sample_mu(sampler, s, m, variant, rng)
        Q = smp.Q
        inv_w = smp.inverse_weight()
        for i in range(m):
            xi = smp.xi[i]
            theta = phase_theta(xi, float(smp.phase[i]) + shift)
            block = nw.assemble_gate_block(xi, theta, float(smp.r[i]), L, sampler.dim)
            env = 0.5 * math.pi * Q * float(inv_w[i])
            coef = weight * env * math.cos(math.pi * smp.r[i]) / m
            out.append((block, coef))
            draws.append(Draw(xi.copy(), float(smp.r[i]), theta, block.n_xi, complex(coef), env))
    return out, draws, Q


def estimator_network(spec: Spectrum, L: int, s: float, m: int, seed: int = 0,
                      variant: Variant = Variant.HOMOGENEOUS) -> nw.LNNetwork:
    """One raw Monte-Carlo network (no acceptance test); its mean over seeds is f."""
    rng = np.random.default_rng(seed)
    blocks, _, _ = sample_blocks(_sampler(spec), L, s, variant, m, rng, spec.real_valued)
    return nw.parallel_merge(blocks, spec.dim) if blocks else nw.zero_network(spec.dim, L)


def _sampler(spec: Spectrum) -> Spectrum:
    # continuous Gaussian mixtures carry a negligible low band; sample |xi|_1 >= 1 only
    if isinstance(spec, CosGauss):
        return BandRestricted(spec, 1.0, math.inf)
    return spec


def _is_high(spec: Spectrum) -> bool:
    if isinstance(spec, AtomicSpectrum):
        return bool(np.all(np.abs(spec.xi).sum(axis=1) >= 1.0))
    return spec.low_mass() <= LOW_MASS_FLOOR


@dataclass
class _Attempt:
    network: nw.LNNetwork
    estimate: ErrorEstimate
    draws: list[Draw]
    Q: float
    ok: bool


def _merge(blocks, d: int, L: int, bias: complex) -> nw.LNNetwork:
    if blocks:
        net = nw.parallel_merge(blocks, d)
        return net.with_output(net.output_weights, net.output_bias + bias)
    return nw.zero_network(d, L, bias)


def _retry_loop(target: Spectrum, sampler: Spectrum, L: int, s: float, variant: Variant, m: int,
                cfg: ConstructConfig, seed_seq: np.random.SeedSequence, bias: complex,
                in_loop_ok: Callable[[nw.LNNetwork, ErrorEstimate, float], bool],
                final_ok: Callable[[ErrorEstimate], bool]) -> tuple[_Attempt, int, float]:
    """Resample until a draw passes both tests; returns (best, rounds used, audited error)."""
    best: _Attempt | None = None
    children = seed_seq.spawn(cfg.retries)
    for k, child in enumerate(children):
        draw_seed, quad_seed, audit_seed = child.spawn(3)
        rng = np.random.default_rng(draw_seed)
        blocks, draws, Q = sample_blocks(sampler, L, s, variant, m, rng, target.real_valued)
        net = _merge(blocks, target.dim, L, bias)
        if target.real_valued:
            net = net.real_part()
        est = l2_error(target, net, cfg.quad(int(quad_seed.generate_state(1)[0])))
        ok = in_loop_ok(net, est, Q)
        audit = None
        if ok:
            audit = l2_error(target, net, cfg.quad(int(audit_seed.generate_state(1)[0]), audit=True))
            ok = final_ok(audit)
        att = _Attempt(net, audit if audit is not None else est, draws, Q, ok)
        if ok:
            return att, k + 1, est.value
        if best is None or att.estimate.value < best.estimate.value:
            best = att
    assert best is not None
    return best, cfg.retries, best.estimate.value


def _seed_seq(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


# --------------------------------------------------------------------------
# shallow
# --------------------------------------------------------------------------

def construct_shallow(spec: Spectrum, N: int, cfg: ConstructConfig = ConstructConfig(),
                      bound: float | None = None, seed=None) -> ConstructReport:
    """(1, N)-network for a spectrum with finite first l1 moment.

    Uses the shifted weight (1+|xi|_1)^{-1}; exact zero-frequency atoms go
    straight into the output bias.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    seq = _seed_seq(cfg.seed if seed is None else seed)
    d = spec.dim
    bias = 0.0 + 0.0j
    target = spec
    sampler: Spectrum | None = spec
    if isinstance(spec, AtomicSpectrum):
        zero = np.abs(spec.xi).sum(axis=1) == 0
        bias = complex(np.sum(spec.weights[zero]))
        sampler = spec.select(~zero)
    ups1 = spec.norm(1.0, NormFlavor.L1)
    if bound is None:
        bound = cfg.shallow_constant * ups1 / math.sqrt(max(N, 1))
    if sampler is None:
        # purely constant target
        net = nw.zero_network(d, 1, bias)
        if spec.real_valued:
            net = net.real_part()
        est = l2_error(spec, net, cfg.quad(0, audit=True))
        return ConstructReport(net, est.value, est.stderr, net.widths(), 0.0, 0, bound,
                               est.value <= bound, 0, N, ups1, "shallow", in_loop_l2=est.value)
    comps = len(_components(spec.real_valued))
    m = cfg.m if cfg.m is not None else int(
        N // (comps * expected_block_width(sampler, 1.0, Variant.SHIFTED, 1)))

    def in_loop(net, est, Q):
        return net.width <= N and est.value <= bound

    att, rounds, loop_val = _retry_loop(target, sampler, 1, 1.0, Variant.SHIFTED, m, cfg, seq, bias,
                                        in_loop, lambda a: a.value <= bound)
    return ConstructReport(att.network, att.estimate.value, att.estimate.stderr, att.network.widths(),
                           att.Q, rounds, bound, att.ok, m, N, ups1, "shallow", in_loop_l2=loop_val,
                           draws=att.draws)


# --------------------------------------------------------------------------
# deep, high frequencies
# --------------------------------------------------------------------------

def _check_sl(L: int, s: float) -> None:
    if L < 1:
        raise ValueError("L must be >= 1")
    if not (0 < s * L <= 0.5 + 1e-15):
        raise ValueError("need 0 < sL <= 1/2")


def markov_m(Q: float, N: int, s: float, L: int, eps: float, ups: float) -> int:
    """m inverted from Q/m <= 12(2+eps) upsilon / N^{2sL}; 0 when below one draw."""
    target = Q * N ** (2 * s * L) / (12.0 * (2.0 + eps) * ups)
    return 0 if target < 1 else int(math.ceil(target))


def construct_deep_high(spec: Spectrum, L: int, s: float, N: int | None = None,
                        cfg: ConstructConfig = ConstructConfig(), bound: float | None = None,
                        seed=None) -> ConstructReport:
    """(L, N)-network for a spectrum supported in |xi|_1 >= 1."""
    _check_sl(L, s)
    if not _is_high(spec):
        raise SupportError("spectrum has mass in |xi|_1 < 1; use construct_deep")
    if N is None and cfg.m is None:
        raise ValueError("give a width budget N or a sample count m")
    seq = _seed_seq(cfg.seed if seed is None else seed)
    sampler = _sampler(spec)
    ups = spec.norm(s, NormFlavor.L1)
    eps = cfg.epsilon
    comps = len(_components(spec.real_valued))
    Q = sample_mu(sampler, s, 1, Variant.HOMOGENEOUS, 0).Q
    if cfg.m is not None:
        m = cfg.m
    elif cfg.m_policy is MPolicy.MARKOV:
        m = markov_m(Q, N, s, L, eps, ups)
    else:
        m = int((N // comps) // expected_block_width(sampler, s, Variant.HOMOGENEOUS, L))
    budget = N

    def bound_for(width: int) -> float:
        if bound is not None:
            return bound
        n_eff = budget if budget is not None else max(width, 1)
        return 22.0 * ups / n_eff ** (s * L)

    def in_loop(net, est, Qd):
        if m == 0:
            return budget is None or net.width <= budget
        # (a) mean-square bound, one term per estimated part
        a = est.value ** 2 <= comps * (2 + eps) * math.pi ** 2 * Qd * ups / (4.0 * m)
        # (b) realised width against the sample count
        width = max(net.width, 1)
        b = Qd / m <= 12.0 * (2 + eps) * ups / width ** (2 * s * L)
        c = budget is None or net.width <= budget
        return a and b and c

    holder = {}

    def final_ok(audit: ErrorEstimate) -> bool:
        return audit.value <= holder.get("bound", math.inf)

    # the bound depends on the realised width only when no budget is set
    def in_loop_wrapped(net, est, Qd):
        holder["bound"] = bound_for(net.width)
        return in_loop(net, est, Qd) and est.value <= holder["bound"]

    att, rounds, loop_val = _retry_loop(spec, sampler, L, s, Variant.HOMOGENEOUS, m, cfg, seq, 0.0,
                                        in_loop_wrapped, final_ok)
    rep = ConstructReport(att.network, att.estimate.value, att.estimate.stderr, att.network.widths(),
                          Q, rounds, bound_for(att.network.width), att.ok, m,
                          budget if budget is not None else att.network.width, ups, "deep_high",
                          in_loop_l2=loop_val, draws=att.draws)
    if m == 0:
        rep.notes.append("sample count below one draw; zero network returned")
    return rep


# --------------------------------------------------------------------------
# split construction
# --------------------------------------------------------------------------

def construct_deep(spec: Spectrum, L: int, s: float, N: int,
                   cfg: ConstructConfig = ConstructConfig()) -> ConstructReport:
    """(L, N+2)-network with error target 29 upsilon / N^{sL}.

    The low band |xi|_1 < 1 gets a shallow network on ceil(N/6) units lifted
    to depth L; the high band gets ceil(5N/6) units.  An empty band hands its
    share to the other one.
    """
    _check_sl(L, s)
    if N < 1:
        raise ValueError("N must be >= 1")
    seq = np.random.SeedSequence(cfg.seed)
    low_seed, high_seed, audit_seed = seq.spawn(3)
    d = spec.dim
    ups = spec.norm(s, NormFlavor.L1)
    bound = 29.0 * ups / N ** (s * L)
    if _is_high(spec):
        low, high = None, spec
    else:
        low, high = split_spectrum(spec)
        if high is not None and not isinstance(high, AtomicSpectrum) and high.norm(0.0) <= LOW_MASS_FLOOR:
            high = None
    if low is None and high is None:
        raise ValueError("empty spectrum")
    if low is not None and high is not None:
        n1, n2 = math.ceil(N / 6), math.ceil(5 * N / 6)
    elif low is None:
        n1, n2 = 0, N + 2
    else:
        n1, n2 = N + 2, 0
    parts: list[tuple[nw.LNNetwork, complex]] = []
    children = {}
    nominal = 0
    notes = []
    if low is not None:
        low_bound = 2.0 * math.sqrt(6.0) * ups / N ** (s * L)
        sub = ConstructConfig(None, cfg.retries, cfg.epsilon, cfg.seed, cfg.quad_points, cfg.audit_points,
                              cfg.replications, cfg.m_policy, cfg.shallow_constant)
        rep_low = construct_shallow(low, n1, sub, bound=low_bound, seed=low_seed)
        ext = nw.identity_extend(rep_low.network, L)
        children["low"] = rep_low
        parts.append((ext.network, 1.0))
        nominal += ext.nominal_width
        if ext.passthrough_units:
            notes.append(f"low band uses {ext.passthrough_units} pass-through units per lifted layer")
    if high is not None:
        sub = ConstructConfig(cfg.m, cfg.retries, cfg.epsilon, cfg.seed, cfg.quad_points, cfg.audit_points,
                              cfg.replications, cfg.m_policy, cfg.shallow_constant)
        rep_high = construct_deep_high(high, L, s, n2, sub, seed=high_seed)
        children["high"] = rep_high
        parts.append((rep_high.network, 1.0))
        nominal += rep_high.width
    net = nw.combine_networks(parts, d, declared_width=None)
    if spec.real_valued:
        net = net.real_part()
    est = l2_error(spec, net, cfg.quad(int(audit_seed.generate_state(1)[0]), audit=True))
    width_ok = net.width <= N + 2
    if not width_ok:
        notes.append(f"realised width {net.width} exceeds N+2 = {N + 2}")
    accepted = all(c.accepted for c in children.values()) and width_ok and est.value <= bound
    rounds = max(c.retry_count for c in children.values())
    m = sum(c.m for c in children.values())
    Q = children["high"].Q if "high" in children else children["low"].Q
    return ConstructReport(net, est.value, est.stderr, net.widths(), Q, rounds, bound, accepted, m, N,
                           ups, "deep", nominal_width=nominal, in_loop_l2=est.value, children=children,
                           notes=notes)


# --------------------------------------------------------------------------
# hard instance
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HardInstance:
    spectrum: CosGauss
    n: int
    R: float
    lower: float


def hard_instance(L: int, N: int, s: float, eps: float, d: int = 1) -> HardInstance:
    """n^{-s} cos(2 pi n x_1) exp(-pi |x|^2 / R) with n = 2^{L+2} N^L.

    R is large enough that the Gaussian stays above 1-eps on Omega and the
    first-moment bound n + d/(pi sqrt R) keeps upsilon_{f,s} <= 1+eps.
    """
    _check_sl(L, s)
    if N < 1:
        raise ValueError("N must be >= 1")
    if not (0 < eps <= 0.5):
        raise ValueError("need 0 < eps <= 1/2")
    n = 2 ** (L + 2) * N ** L
    r_env = math.pi * d / (-math.log1p(-eps))
    k = -20
    while (1.0 + d / (math.pi * n * math.sqrt(2.0 ** k))) ** s > 1.0 + eps:
        k += 1
    R = max(r_env, 2.0 ** k)
    spec = CosGauss(n, R, d, scale=float(n) ** (-s))
    return HardInstance(spec, n, R, (1.0 - eps) / (8.0 * N ** (s * L)))


def sweep(spec: Spectrum, L: int, s: float, Ns: Sequence[int], cfg: ConstructConfig) -> list[ConstructReport]:
    """construct_deep at each N with seeds split from cfg.seed."""
    out = []
    for i, N in enumerate(Ns):
        child = ConstructConfig(cfg.m, cfg.retries, cfg.epsilon, cfg.seed * 1000003 + i, cfg.quad_points,
                                cfg.audit_points, cfg.replications, cfg.m_policy, cfg.shallow_constant)
        out.append(construct_deep(spec, L, s, N, child))
    return out


@dataclass(frozen=True)
class RateRow:
    N: int
    replicate: int
    seed: int
    error: float
    stderr: float
    width: int
    bound: float
    accepted: bool


@dataclass(frozen=True)
class RateStudy:
    rows: tuple[RateRow, ...]
    rms: tuple[tuple[int, float], ...]
    slope: float
    slope_stderr: float


def replicate_seed(seed: int, N: int, replicate: int) -> int:
    """Seed for one (N, replicate) run, independent of the other runs."""
    return int(np.random.SeedSequence([seed, N, replicate]).generate_state(1)[0])


def rate_study(spec: Spectrum, L: int, s: float, Ns: Sequence[int], cfg: ConstructConfig = ConstructConfig(),
               replicates: int = 8) -> RateStudy:
    """construct_deep over Ns with independent replicates; the rate is fitted to the
    root-mean-square accepted error per N."""
    from .analysis import rate_fit

    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    rows = []
    rms = []
    for N in Ns:
        errs = []
        for k in range(replicates):
            sd = replicate_seed(cfg.seed, N, k)
            child = ConstructConfig(cfg.m, cfg.retries, cfg.epsilon, sd, cfg.quad_points, cfg.audit_points,
                                    cfg.replications, cfg.m_policy, cfg.shallow_constant)
            rep = construct_deep(spec, L, s, N, child)
            rows.append(RateRow(int(N), k, sd, rep.measured_l2, rep.stderr, rep.width, rep.bound, rep.accepted))
            errs.append(rep.measured_l2)
        rms.append((int(N), float(np.sqrt(np.mean(np.square(errs))))))
    if len(rms) >= 4:
        fit = rate_fit(rms)
        slope, se = fit.slope, fit.stderr
    else:
        slope = se = math.nan
    return RateStudy(tuple(rows), tuple(rms), slope, se)
