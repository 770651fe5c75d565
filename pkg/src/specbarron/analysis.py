"""Error quadrature, Besov norms with a dyadic partition, embedding checks,
lower-bound audits and rate fits."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.stats import qmc

from . import network as nw
from .specfn import ball_volume, sphere_area
from .spectra import (AtomicSpectrum, NormFlavor, RadialSpectrum, Spectrum,
                      UnsupportedError, _lambda_kernel)

MAX_QUAD_POINTS = 1 << 24


class QuadKind(str, Enum):
    TENSOR_GAUSS = "tensor_gauss"
    SOBOL = "sobol"
    ADAPTIVE = "adaptive"  # one-dimensional adaptive quadrature, reported only


class ModeConflictWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    kind: QuadKind = QuadKind.SOBOL
    points: int = 1 << 13  # per replication
    replications: int = 8
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", QuadKind(self.kind))
        if self.points < 1:
            raise ValueError("points must be positive")
        if self.kind is QuadKind.SOBOL and self.replications < 8:
            raise ValueError("error bars need at least 8 replications")
        if self.points * max(self.replications, 1) > MAX_QUAD_POINTS:
            raise ValueError(f"quadrature budget exceeds {MAX_QUAD_POINTS} points")


@dataclass(frozen=True)
class ErrorEstimate:
    value: float
    stderr: float
    mean_square: float
    kind: QuadKind

    def __iter__(self):
        yield self.value
        yield self.stderr


def _as_callable(obj, d: int) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(obj, (Spectrum, nw.LNNetwork)):
        dim = obj.input_dim if isinstance(obj, nw.LNNetwork) else obj.dim
        if dim != d:
            raise ValueError("dimension mismatch between target and approximant")
        return lambda x: np.asarray(obj.eval(x), dtype=complex).reshape(-1)
    return lambda x: np.asarray(obj(x), dtype=complex).reshape(-1)


def _dim_of(*objs) -> int:
    for o in objs:
        if isinstance(o, nw.LNNetwork):
            return o.input_dim
        if isinstance(o, Spectrum):
            return o.dim
    raise ValueError("cannot infer the dimension; pass d explicitly")


def sobol_points(d: int, points: int, seed: int) -> np.ndarray:
    """One scrambled Sobol block in [0,1)^d."""
    eng = qmc.Sobol(d=d, scramble=True, seed=np.random.default_rng(seed))
    m = int(math.log2(points))
    if 1 << m == points:
        return eng.random_base2(m)
    return eng.random(points)


def l2_error(target, approx, quad: QuadratureSpec = QuadratureSpec(), d: int | None = None) -> ErrorEstimate:
    """(int_Omega |target - approx|^2)^{1/2} with a standard error.

    target and approx may be spectra, networks or plain callables on (n, d)
    arrays.  Step-activated networks force the scrambled Sobol rule.
    """
    d = d if d is not None else _dim_of(target, approx)
    f = _as_callable(target, d)
    g = _as_callable(approx, d)
    kind = quad.kind
    if kind is QuadKind.TENSOR_GAUSS:
        if d > 3:
            raise ValueError("tensor Gauss rules are limited to d <= 3")
        if any(isinstance(o, nw.LNNetwork) and isinstance(o.mode, nw.Heaviside) for o in (target, approx)):
            warnings.warn("tensor Gauss is unreliable for step networks; using scrambled Sobol",
                          ModeConflictWarning, stacklevel=2)
            kind = QuadKind.SOBOL
    if kind is QuadKind.TENSOR_GAUSS:
        k = max(1, int(round(quad.points ** (1.0 / d))))
        t, w = np.polynomial.legendre.leggauss(k)
        t, w = 0.5 * (t + 1.0), 0.5 * w
        grids = np.meshgrid(*([t] * d), indexing="ij")
        x = np.stack([gr.ravel() for gr in grids], axis=1)
        wt = np.ones(x.shape[0])
        for wg in np.meshgrid(*([w] * d), indexing="ij"):
            wt = wt * wg.ravel()
        ms = float(np.sum(wt * np.abs(f(x) - g(x)) ** 2))
        return ErrorEstimate(math.sqrt(max(ms, 0.0)), 0.0, ms, kind)
    reps = max(quad.replications, 8)
    seeds = np.random.SeedSequence(quad.seed).spawn(reps)
    est = np.empty(reps)
    for i, ss in enumerate(seeds):
        x = sobol_points(d, quad.points, int(ss.generate_state(1)[0]))
        est[i] = np.mean(np.abs(f(x) - g(x)) ** 2)
    ms = float(est.mean())
    se_ms = float(est.std(ddof=1) / math.sqrt(reps))
    val = math.sqrt(max(ms, 0.0))
    # delta method for the square root
    se = se_ms / (2.0 * val) if val > 0 else math.sqrt(se_ms)
    return ErrorEstimate(val, se, ms, QuadKind.SOBOL)


def sigmoid_gap(weight, bias: float, tau: float, quad: QuadratureSpec = QuadratureSpec()) -> ErrorEstimate:
    """L2(Omega) distance between sigma(tau(w.x+b)) and its step limit."""
    weight = np.atleast_1d(np.asarray(weight, dtype=float))
    d = weight.shape[0]
    step = nw.LNNetwork(d, [], nw.DenseLayer(weight[None, :], np.array([bias])), [1.0])
    if d == 1 and weight[0] != 0:
        # the transition layer has width ~1/tau; adaptive quadrature around the step
        w, x0 = float(weight[0]), -bias / float(weight[0])
        width = 40.0 / (tau * abs(w))

        def sq(x):
            u = w * x + bias
            return (float(logistic_scalar(tau * u)) - (1.0 if u >= 0 else 0.0)) ** 2

        pts = sorted({min(max(v, 0.0), 1.0) for v in (x0 - width, x0, x0 + width)} - {0.0, 1.0})
        val, _ = integrate.quad(sq, 0.0, 1.0, points=pts or None, epsabs=1e-16, epsrel=1e-12, limit=400)
        return ErrorEstimate(math.sqrt(val), 0.0, val, QuadKind.ADAPTIVE)
    return l2_error(step, step.with_mode(nw.Sigmoidal(tau)), quad)


def logistic_scalar(z: float) -> float:
    return float(nw.logistic(np.array([z]))[0])


def sigmoid_gap_limit(weight: float, bias: float, tau: float) -> float:
    """Large-tau value of the one-dimensional gap for a step inside (0, 1).

    int (sigma(tau u) - H(u))^2 dx = 2 (ln 2 - 1/2) / (tau |w|) up to
    exponentially small edge terms.
    """
    return math.sqrt(2.0 * (math.log(2.0) - 0.5) / (tau * abs(weight)))


# --------------------------------------------------------------------------
# Littlewood-Paley partition and Besov norms
# --------------------------------------------------------------------------

def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def transition(t):
    """Smooth monotone psi: 1 for t <= 1, 0 for t >= 2."""
    t = np.asarray(t, dtype=float)
    a = _h(2.0 - t)
    b = _h(t - 1.0)
    return a / (a + b)


@dataclass(frozen=True)
class DyadicPartition:
    j_max: int = 40

    def phi(self, j: int, r):
        r = np.abs(np.asarray(r, dtype=float))
        if j == 0:
            return transition(r)
        return transition(r / 2.0 ** j) - transition(r / 2.0 ** (j - 1))

    def support(self, j: int) -> tuple[float, float]:
        return (0.0, 2.0) if j == 0 else (2.0 ** (j - 1), 2.0 ** (j + 1))

    def total(self, r, upto: int | None = None):
        J = self.j_max if upto is None else upto
        return sum(self.phi(j, r) for j in range(J + 1))


@dataclass(frozen=True)
class BesovBracket:
    lower: float
    upper: float
    alpha: float
    p: float
    j_max: int
    tail_estimate: float
    terms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.lower > self.upper * (1 + 1e-12) + 1e-300:
            raise ValueError("bracket with lower > upper")

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _radial_profile(spec: Spectrum) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(spec, RadialSpectrum):
        return lambda r: np.asarray(spec.fhat(np.outer(np.atleast_1d(r), np.eye(spec.dim)[0])), dtype=complex)
    raise UnsupportedError(f"Besov norms need a radial spectrum, got {type(spec).__name__}")


def _support_radius(spec: Spectrum) -> float:
    return getattr(spec, "support_radius", math.inf)


def _radial_quad(func: Callable[[float], float], a: float, b: float) -> float:
    val, _ = integrate.quad(func, a, b, epsabs=1e-16, epsrel=1e-12, limit=400)
    return val


def _gl_nodes(a: float, b: float, panels: int, order: int = 32):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + 0.5 * h[:, None] * (t[None, :] + 1.0)).ravel()
    weights = (0.5 * h[:, None] * w[None, :]).ravel()
    return nodes, weights


def _piece_inverse(g, part: DyadicPartition, j: int, d: int, radii: np.ndarray, support: float) -> np.ndarray:
    """(phi_j fhat)^vee at the given radii for a radial fhat with profile g."""
    a, b = part.support(j)
    b = min(b, support)
    if b <= a:
        return np.zeros(len(radii), dtype=complex)
    panels = max(16, int(math.ceil(4 * (b - a) * (1.0 + float(np.max(radii))))))
    r, w = _gl_nodes(a, b, panels)
    vals = part.phi(j, r) * g(r) * r ** (d - 1)
    kern = _lambda_kernel(d, 2.0 * math.pi * np.outer(radii, r))
    return sphere_area(d) * (kern @ (w * vals))


def besov_norm(spec: Spectrum, alpha: float, p: float, part: DyadicPartition = DyadicPartition(),
               grid_radius: float = 4.0, grid_points: int = 129, tol: float = 1e-10) -> BesovBracket:
    """||f||_{B^alpha_{p,1}} for p in {2, inf}, d in {1, 2}.

    p = 2 is exact to quadrature through Plancherel.  For p = inf the lower end
    is the max of |(phi_j fhat)^vee| over a radial grid and the upper end is
    ||phi_j fhat||_{L1}.
    """
    if p not in (2, 2.0, math.inf):
        raise UnsupportedError("p must be 2 or inf")
    if isinstance(spec, AtomicSpectrum):
        if p != math.inf:
            raise UnsupportedError("atomic spectra have no finite L2 Besov norm")
        return _besov_atomic(spec, alpha, part, grid_radius, grid_points)
    d = spec.dim
    if d not in (1, 2):
        raise UnsupportedError("Besov norms are computed for d in {1, 2}")
    g = _radial_profile(spec)
    R = _support_radius(spec)
    omega = sphere_area(d)
    radii = np.linspace(0.0, grid_radius, grid_points)
    lo_sum = hi_sum = 0.0
    terms = []
    quiet = 0
    j_used = 0
    tail = 0.0
    for j in range(part.j_max + 1):
        a, b = part.support(j)
        if a >= R:
            break
        b = min(b, R)
        wj = 2.0 ** (alpha * j)
        if p == math.inf:
            upper = omega * _radial_quad(lambda r: float(part.phi(j, r)) * abs(complex(g(np.array([r]))[0])) * r ** (d - 1), a, b)
            lower = float(np.max(np.abs(_piece_inverse(g, part, j, d, radii, R))))
            lower = min(lower, upper)
        else:
            val = omega * _radial_quad(lambda r: float(part.phi(j, r)) ** 2 * abs(complex(g(np.array([r]))[0])) ** 2
                                       * r ** (d - 1), a, b)
            lower = upper = math.sqrt(max(val, 0.0))
        terms.append((wj * lower, wj * upper))
        lo_sum += wj * lower
        hi_sum += wj * upper
        j_used = j
        if j >= 2 and wj * upper < tol * max(hi_sum, 1e-300):
            quiet += 1
            if quiet >= 2:
                tail = wj * upper
                break
        else:
            quiet = 0
    else:
        raise ArithmeticError("spectrum tail too heavy for the dyadic truncation")
    return BesovBracket(lo_sum, hi_sum, alpha, p, j_used, tail, tuple(terms))


def _besov_atomic(spec: AtomicSpectrum, alpha, part, grid_radius, grid_points) -> BesovBracket:
    xi, c = spec.xi, spec.weights
    rad = np.linalg.norm(xi, axis=1)
    d = spec.dim
    terms = []
    lo_sum = hi_sum = 0.0
    j_top = int(math.ceil(math.log2(max(rad.max(), 1.0)))) + 2
    rng = np.random.default_rng(0)
    grid = np.linspace(0.0, 1.0, grid_points)[:, None] * grid_radius
    pts = grid if d == 1 else np.vstack([grid * np.eye(d)[0], rng.random((grid_points, d)) * grid_radius])
    for j in range(j_top + 1):
        phi = part.phi(j, rad)
        if not np.any(phi > 0):
            terms.append((0.0, 0.0))
            continue
        wj = 2.0 ** (alpha * j)
        upper = float(np.sum(phi * np.abs(c)))
        vals = np.exp(2j * math.pi * pts @ xi.T) @ (phi * c)
        lower = min(float(np.max(np.abs(vals))), upper)
        terms.append((wj * lower, wj * upper))
        lo_sum += wj * lower
        hi_sum += wj * upper
    return BesovBracket(lo_sum, hi_sum, alpha, math.inf, j_top, 0.0, tuple(terms))


@dataclass(frozen=True)
class SandwichRecord:
    s: float
    d: int
    barron: float
    left_bracket: BesovBracket
    right_besov: float
    right_constant: float
    lhs_ok: bool
    rhs_ok: bool
    lhs_margin: float  # conservative: B - 2^{-s} * upper end
    lhs_margin_lower_end: float
    rhs_margin: float

    @property
    def ok(self) -> bool:
        return self.lhs_ok and self.rhs_ok


def sandwich_check(spec: Spectrum, s: float, part: DyadicPartition = DyadicPartition()) -> SandwichRecord:
    """2^{-s}||f||_{B^s_{inf,1}} <= ||f||_{B^s} <= 2^{s+1+d/2} sqrt(nu_d) ||f||_{B^{s+d/2}_{2,1}}."""
    d = spec.dim
    if d not in (1, 2):
        raise UnsupportedError("sandwich check is defined for d in {1, 2}")
    barron = spec.barron_norm(s, NormFlavor.EUCLIDEAN)
    left = besov_norm(spec, s, math.inf, part)
    right = besov_norm(spec, s + d / 2.0, 2, part).upper
    const = 2.0 ** (s + 1 + d / 2.0) * math.sqrt(ball_volume(d))
    lhs_margin = barron - 2.0 ** (-s) * left.upper
    rhs_margin = const * right - barron
    return SandwichRecord(s, d, barron, left, right, const, lhs_margin >= 0, rhs_margin >= 0,
                          lhs_margin, barron - 2.0 ** (-s) * left.lower, rhs_margin)


# --------------------------------------------------------------------------
# psi_n decay
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    slope: float
    stderr: float
    norms: tuple[float, ...]
    n_list: tuple[float, ...]
    predicted: float


def psi_n_besov(n: float, p: float, alpha: float, q: float = 1.0,
                part: DyadicPartition = DyadicPartition()) -> float:
    """||psi_n||_{B^alpha_{p,q}} in d = 1.

    Each piece (phi_j psi_n^)^vee is the trapezoid sum of a band-limited,
    rapidly decaying integrand, evaluated on a periodic x-grid by one FFT.
    The frequency step is chosen so the x-period covers the chirp spread
    |x| <~ 7|n| twice over; the x-step is 1/64.
    """
    h = 2.0 ** (-math.ceil(math.log2(2.5 * (7.0 * abs(n) + 10.0))))
    size = int(round(64.0 / h))
    k = np.arange(size) - size // 2
    xi = k * h
    base = np.exp(-math.pi * (1.0 + 1j * n) * xi * xi)
    dx = 1.0 / (size * h)
    total = 0.0
    for j in range(part.j_max + 1):
        a, _ = part.support(j)
        if a > 7.0:
            break
        g = part.phi(j, xi) * base
        # f(x_m) = h sum_k g_k exp(2 pi i xi_k x_m), x_m = m dx
        vals = h * size * np.fft.ifft(np.fft.ifftshift(g))
        # undo the index shift of xi: xi_k = (k' - size/2) h
        m = np.arange(size)
        vals = vals * np.exp(-2j * math.pi * (size // 2) * h * m * dx)
        if math.isinf(p):
            lp = float(np.max(np.abs(vals)))
        else:
            lp = float((np.sum(np.abs(vals) ** p) * dx) ** (1.0 / p))
        total += (2.0 ** (alpha * j) * lp) ** q
    return total ** (1.0 / q)


def psi_n_decay(p: float, q: float, alpha: float, n_list: Sequence[float] = (1, 2, 4, 8, 16),
                d: int = 1, part: DyadicPartition = DyadicPartition()) -> DecayFit:
    if d != 1:
        raise UnsupportedError("psi_n decay is audited in d = 1")
    if not p >= 2:
        raise ValueError("p must be >= 2")
    norms = [psi_n_besov(n, p, alpha, q, part) for n in n_list]
    fit = rate_fit(list(zip([1.0 + n * n for n in n_list], norms)))
    return DecayFit(fit.slope, fit.stderr, tuple(norms), tuple(float(n) for n in n_list),
                    -d * (p - 2) / (4.0 * p))


# --------------------------------------------------------------------------
# Lower bound audit
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBoundRecord:
    measured: float
    bound: float
    ok: bool
    pieces: int
    method: str


def _piecewise_l2(f: Callable[[float], complex], prof: nw.PiecewiseProfile, f_sq_total: float) -> float:
    # int |f - c|^2 = int f^2 - 2 Re(conj(c) int f) + |c|^2 |piece|  (f real)
    acc = f_sq_total
    for a, b, c in zip(prof.breakpoints[:-1], prof.breakpoints[1:], prof.values):
        if c == 0 or b <= a:
            continue
        intf, _ = integrate.quad(lambda t: f(t), a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
        acc += -2.0 * c.real * intf + abs(c) ** 2 * (b - a)
    return math.sqrt(max(acc, 0.0))


def lower_bound_check(L: int, N: int, s: float, eps: float, nets: Sequence[nw.LNNetwork],
                      d: int = 1, quad: QuadratureSpec | None = None) -> list[LowerBoundRecord]:
    """Measure each network against the hard instance; ok iff error >= (1-eps)/(8 N^{sL})."""
    from .construct import hard_instance

    inst = hard_instance(L, N, s, eps, d=d)
    target = inst.spectrum
    out = []
    if d == 1:
        def f(t):
            return float(np.real(target.eval(np.array([[t]]))[0]))
        n = inst.n
        fsq, _ = integrate.quad(lambda t: f(t) ** 2, 0.0, 1.0, limit=max(200, 8 * n), epsabs=1e-15, epsrel=1e-12)
    for net in nets:
        if not isinstance(net.mode, nw.Heaviside):
            raise ValueError("lower-bound audit needs step-activated networks")
        if net.input_dim != d:
            raise ValueError("network dimension does not match the audit")
        if d == 1:
            prof = nw.profile_1d(net)
            measured = _piecewise_l2(f, prof, fsq)
            out.append(LowerBoundRecord(measured, inst.lower, measured >= inst.lower, prof.pieces, "piecewise"))
        else:
            q = quad or QuadratureSpec(QuadKind.SOBOL, 1 << 14, 32, 0)
            if q.replications < 32:
                q = QuadratureSpec(q.kind, q.points, 32, q.seed)
            est = l2_error(target, net, q)
            out.append(LowerBoundRecord(est.value, inst.lower, est.value >= inst.lower, 0, "sobol"))
    return out


def random_heaviside_network(rng: np.random.Generator, L: int, N: int, d: int = 1) -> nw.LNNetwork:
    """A random (L, N) step network with features aimed at Omega."""
    hidden = []
    fan = d
    for _ in range(L - 1):
        w = rng.standard_normal((N, fan)) * 4.0
        # biases chosen so most ReLU kinks fall inside the unit cube
        centre = rng.random((N, fan))
        hidden.append(nw.DenseLayer(w, -(w * centre).sum(axis=1)))
        fan = N
    w = rng.standard_normal((N, fan)) * 8.0
    if L == 1:
        centre = rng.random((N, fan))
        b = -(w * centre).sum(axis=1)
    else:
        b = rng.standard_normal(N)
    out_w = rng.standard_normal(N) * 0.3
    return nw.LNNetwork(d, hidden, nw.DenseLayer(w, b), out_w, rng.standard_normal() * 0.1)


# --------------------------------------------------------------------------
# Rate fits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    slope: float
    stderr: float
    intercept: float
    r_squared: float


def rate_fit(points: Sequence[tuple[float, float]]) -> RateFit:
    """Least squares on (log N, log error)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise ValueError("rate fit needs at least 4 points")
    if np.any(pts <= 0):
        raise ValueError("rate fit needs positive values")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(x) == 0:
        raise ValueError("degenerate spread in N")
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = len(x) - 2
    sxx = float(np.sum((x - x.mean()) ** 2))
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    stderr = math.sqrt(sigma2 / sxx)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    return RateFit(float(coef[0]), stderr, float(coef[1]), r2)

