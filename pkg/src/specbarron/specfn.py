"""Scalar special functions with explicit truncation control.

Everything here is evaluated from series or asymptotic definitions rather
than delegated to a library, so the truncation behaviour is visible and
testable.  Functions accept scalars or numpy arrays and return the same
shape (a Python float for scalar input).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "TruncationError",
    "CancellationWarning",
    "gamma_fn",
    "log_gamma",
    "beta_fn",
    "log_beta",
    "bessel_j",
    "bessel_j_scaled",
    "bessel_j_series",
    "bessel_j_asymptotic",
    "bessel_crossover",
    "hyp1f2",
    "fresnel_c",
    "sphere_area",
    "ball_volume",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SeriesControl:
    """Stopping rule shared by every series evaluator."""

    rel_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_CONTROL = SeriesControl()


class TruncationError(ArithmeticError):
    """A series did not reach the requested tolerance within its term budget."""


class CancellationWarning(RuntimeWarning):
    """Alternating-series cancellation has eaten most of the available digits."""


def _out(arr: np.ndarray, scalar: bool):
    return float(arr.reshape(-1)[0]) if scalar else arr


# --------------------------------------------------------------------------
# Gamma and Beta
# --------------------------------------------------------------------------

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_GAMMA_MAX = 171.6243769563027


def _lanczos_sum(z: np.ndarray) -> np.ndarray:
    # z is the shifted argument x - 1
    acc = np.full_like(z, _LANCZOS_P[0])
    for i, p in enumerate(_LANCZOS_P[1:], start=1):
        acc = acc + p / (z + i)
    return acc


def _gamma_pos(x: np.ndarray) -> np.ndarray:
    """Gamma for x >= 0.5."""
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    half = 0.5 * (z + 0.5)
    # split the power so t**(z+0.5) cannot overflow before exp(-t) rescales it
    tp = np.power(t, half)
    return math.sqrt(2.0 * math.pi) * tp * np.exp(-t) * tp * _lanczos_sum(z)


def gamma_fn(x):
    """Gamma function for positive real arguments."""
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(xa > 0)):
        raise ValueError("gamma_fn: domain error, argument must be positive")
    if np.any(xa > _GAMMA_MAX):
        raise OverflowError("gamma_fn: result not representable")
    out = np.empty_like(xa)
    small = xa < 0.5
    if np.any(~small):
        out[~small] = _gamma_pos(xa[~small])
    if np.any(small):
        xs = xa[small]
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        out[small] = math.pi / (np.sin(math.pi * xs) * _gamma_pos(1.0 - xs))
    # integers are exact factorials
    whole = xa == np.floor(xa)
    if np.any(whole):
        out[whole] = [float(math.factorial(int(v) - 1)) for v in xa[whole]]
    return _out(out, scalar)


def log_gamma(x):
    """log Gamma(x) for x > 0, usable far beyond the overflow point of Gamma."""
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(xa > 0)):
        raise ValueError("log_gamma: domain error, argument must be positive")
    out = np.empty_like(xa)
    small = xa < 0.5
    big = ~small
    if np.any(big):
        z = xa[big] - 1.0
        t = z + _LANCZOS_G + 0.5
        out[big] = (0.5 * math.log(2.0 * math.pi) + (z + 0.5) * np.log(t) - t
                    + np.log(_lanczos_sum(z)))
    if np.any(small):
        xs = xa[small]
        out[small] = np.log(math.pi / np.sin(math.pi * xs)) - log_gamma(1.0 - xs)
    return _out(out, scalar)


def log_beta(a, b):
    return log_gamma(a) + log_gamma(b) - log_gamma(np.add(a, b))


def beta_fn(a, b):
    """B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    aa, bb = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                                 np.atleast_1d(np.asarray(b, dtype=float)))
    if np.any(~(aa > 0)) or np.any(~(bb > 0)):
        raise ValueError("beta_fn: domain error, arguments must be positive")
    out = np.empty(aa.shape)
    direct = (aa + bb) < 170.0
    if np.any(direct):
        ad, bd = aa[direct], bb[direct]
        out[direct] = gamma_fn(ad) * (gamma_fn(bd) / gamma_fn(ad + bd))
    if np.any(~direct):
        out[~direct] = np.exp(log_beta(aa[~direct], bb[~direct]))
    return _out(out, scalar)


def sphere_area(d: int) -> float:
    """omega_{d-1}, the surface area of the unit sphere in R^d."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return 2.0 * math.pi ** (d / 2.0) / gamma_fn(d / 2.0)


def ball_volume(d: int) -> float:
    """nu_d, the volume of the unit ball in R^d."""
    return sphere_area(d) / d


# --------------------------------------------------------------------------
# Bessel J
# --------------------------------------------------------------------------

def bessel_crossover(nu: float) -> float:
    return max(12.0, 2.0 * nu * nu)


def _check_nu(nu: float) -> None:
    if nu < -0.5:
        raise ValueError("bessel order must be >= -1/2")


def _series_scaled(nu: float, x: np.ndarray, ctrl: SeriesControl):
    """x**(-nu) J_nu(x) by its power series. Returns (value, converged)."""
    q = -(0.5 * x) ** 2
    term = np.full_like(x, 2.0 ** (-nu) / gamma_fn(nu + 1.0))
    total = term.copy()
    peak = np.abs(term)
    done = np.zeros(x.shape, dtype=bool)
    done |= x == 0.0
    for k in range(1, ctrl.max_terms + 1):
        term = term * q / (k * (nu + k))
        total = np.where(done, total, total + term)
        at = np.abs(term)
        peak = np.maximum(peak, at)
        # converged in the relative sense, or below the rounding floor of the
        # largest partial term (no further digits are obtainable)
        conv = (at <= ctrl.rel_tol * np.abs(total)) | (at <= _EPS * peak)
        # only trust the test once the terms are shrinking
        conv &= k > 0.5 * x
        done |= conv
        if done.all():
            break
    return total, done, peak


def bessel_j_series(nu: float, x, ctrl: SeriesControl = DEFAULT_CONTROL):
    """J_nu(x) from the power series alone (no regime switch)."""
    _check_nu(nu)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    val, _, _ = _series_scaled(nu, xa, ctrl)
    with np.errstate(divide="ignore"):
        out = val * np.power(xa, nu)
    return _out(out, scalar)


def _asymptotic(nu: float, x: np.ndarray, ctrl: SeriesControl):
    """Hankel expansion; sums up to the smallest term. Returns (J, converged)."""
    mu = 4.0 * nu * nu
    a = np.ones_like(x)  # a_k / x^k
    p = np.ones_like(x)
    qs = np.zeros_like(x)
    prev = np.full_like(x, np.inf)
    conv = np.zeros(x.shape, dtype=bool)
    stop = np.zeros(x.shape, dtype=bool)
    for k in range(1, ctrl.max_terms + 1):
        a_new = a * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        mag = np.abs(a_new)
        # the expansion diverges once terms grow; stop at the smallest
        grow = mag > prev
        stop |= grow
        live = ~stop
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p = np.where(live, p + sign * a_new, p)
        else:
            qs = np.where(live, qs + sign * a_new, qs)
        env = np.hypot(p, qs)
        newly = live & (mag <= ctrl.rel_tol * env)
        conv |= newly
        stop |= newly
        prev = np.where(live, mag, prev)
        a = a_new
        if stop.all():
            break
    w = x - (0.5 * nu + 0.25) * math.pi
    val = np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(w) - qs * np.sin(w))
    return val, conv


def bessel_j_asymptotic(nu: float, x, ctrl: SeriesControl = DEFAULT_CONTROL,
                        with_status: bool = False):
    """J_nu(x) from the large-argument expansion alone."""
    _check_nu(nu)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0):
        raise ValueError("asymptotic expansion needs x > 0")
    val, conv = _asymptotic(nu, xa, ctrl)
    if with_status:
        return _out(val, scalar), (bool(conv[0]) if scalar else conv)
    return _out(val, scalar)


def _bessel_core(nu: float, xa: np.ndarray, ctrl: SeriesControl, scaled: bool):
    _check_nu(nu)
    if np.any(xa < 0):
        raise ValueError("bessel argument must be >= 0")
    out = np.empty_like(xa)
    cross = bessel_crossover(nu)
    use_asym = xa >= cross
    use_series = ~use_asym
    if np.any(use_asym):
        xs = xa[use_asym]
        val, conv = _asymptotic(nu, xs, ctrl)
        if scaled:
            val = val * np.power(xs, -nu)
        out[use_asym] = val
        if not conv.all():
            # fall back to the series where the expansion stalled
            back = np.flatnonzero(use_asym)[~conv]
            use_series[back] = True
    if np.any(use_series):
        idx = np.flatnonzero(use_series)
        xs = xa[idx]
        val, conv, peak = _series_scaled(nu, xs, ctrl)
        if not conv.all():
            raise TruncationError(
                f"bessel_j: neither regime converged for nu={nu} at x={xs[~conv][0]}")
        # below the crossover the series can still lose digits to cancellation
        # for larger orders; prefer the expansion wherever it has converged
        with np.errstate(divide="ignore", invalid="ignore"):
            lossy = (_EPS * peak > ctrl.rel_tol * np.abs(val)) & (xs > 0)
        if np.any(lossy):
            alt, aconv = _asymptotic(nu, xs[lossy], ctrl)
            alt = alt * np.power(xs[lossy], -nu)
            take = np.flatnonzero(lossy)[aconv]
            val[take] = alt[aconv]
        if not scaled:
            with np.errstate(divide="ignore"):
                val = val * np.power(xs, nu)
        out[idx] = val
    return out


def bessel_j(nu: float, x, ctrl: SeriesControl = DEFAULT_CONTROL):
    """Bessel function of the first kind J_nu(x), nu >= -1/2, x >= 0."""
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = _bessel_core(nu, xa.ravel(), ctrl, scaled=False).reshape(xa.shape)
    return _out(out, scalar)


def bessel_j_scaled(nu: float, x, ctrl: SeriesControl = DEFAULT_CONTROL):
    """x**(-nu) J_nu(x), finite at x = 0 where it equals 2**(-nu)/Gamma(nu+1)."""
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = _bessel_core(nu, xa.ravel(), ctrl, scaled=True).reshape(xa.shape)
    return _out(out, scalar)


# --------------------------------------------------------------------------
# 1F2
# --------------------------------------------------------------------------

def _nonpositive_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def hyp1f2(a: float, b1: float, b2: float, x, ctrl: SeriesControl = DEFAULT_CONTROL):
    """Generalized hypergeometric 1F2(a; b1, b2; x) by compensated summation."""
    if _nonpositive_int(b1) or _nonpositive_int(b2):
        raise ValueError("hyp1f2: lower parameters may not be 0, -1, -2, ...")
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    term = np.ones_like(xa)
    total = np.ones_like(xa)
    comp = np.zeros_like(xa)
    peak = np.ones_like(xa)
    done = xa == 0.0
    if _nonpositive_int(a):
        # terminating polynomial
        nterms = int(-a) + 1
    else:
        nterms = None
    for k in range(ctrl.max_terms):
        term = term * ((a + k) / ((b1 + k) * (b2 + k))) * xa / (k + 1)
        # Kahan step, frozen where already converged
        y = term - comp
        t = total + y
        comp = np.where(done, comp, (t - total) - y)
        total = np.where(done, total, t)
        at = np.abs(term)
        peak = np.maximum(peak, at)
        ratio_small = np.abs((a + k + 1) * xa) < np.abs((b1 + k + 1) * (b2 + k + 1) * (k + 2))
        conv = ratio_small & ((at <= ctrl.rel_tol * np.abs(total)) | (at <= _EPS * peak))
        done |= conv
        if nterms is not None and k + 2 >= nterms:
            done[:] = True
        if done.all():
            break
    if not done.all():
        raise TruncationError("hyp1f2: series did not converge within max_terms")
    with np.errstate(divide="ignore", invalid="ignore"):
        loss = _EPS * peak / np.abs(total)
    if np.any(loss > 1e6 * ctrl.rel_tol):
        warnings.warn(
            f"hyp1f2: cancellation leaves relative accuracy ~{float(np.max(loss)):.1e}",
            CancellationWarning, stacklevel=2)
    return _out(total, scalar)


# --------------------------------------------------------------------------
# Fresnel cosine integral
# --------------------------------------------------------------------------

_FRESNEL_XMIN = 1.5


def _fresnel_series(x: float, ctrl: SeriesControl) -> float:
    # C(x) = sum_k (-1)^k (pi/2)^{2k} x^{4k+1} / ((2k)! (4k+1))
    u = 0.5 * math.pi * x * x
    term = x
    total = x
    k = 0
    while True:
        k += 1
        term *= -u * u / ((2 * k - 1) * (2 * k))
        piece = term / (4 * k + 1)
        total += piece
        if abs(piece) <= ctrl.rel_tol * abs(total):
            return total
        if k >= ctrl.max_terms:
            raise TruncationError("fresnel_c: series did not converge")


def _fresnel_cf(x: float, ctrl: SeriesControl) -> float:
    # continued fraction for the complementary error function (modified Lentz)
    tiny = 1e-300
    pix2 = math.pi * x * x
    b = complex(1.0, -pix2)
    cc = 1.0 / tiny
    d = h = 1.0 / b
    n = -1
    for _ in range(ctrl.max_terms):
        n += 2
        a = -n * (n + 1)
        b += 4.0
        d = 1.0 / (a * d + b)
        cc = b + a / cc
        step = cc * d
        h *= step
        if abs(step - 1.0) <= max(1e-2 * ctrl.rel_tol, 4 * _EPS):
            break
    else:
        raise TruncationError("fresnel_c: continued fraction did not converge")
    h *= complex(x, -x)
    cs = complex(0.5, 0.5) * (1.0 - complex(math.cos(0.5 * pix2), math.sin(0.5 * pix2)) * h)
    return cs.real


def fresnel_c(x, ctrl: SeriesControl = DEFAULT_CONTROL):
    """Fresnel cosine integral C(x) = int_0^x cos(pi t^2 / 2) dt for x >= 0."""
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0):
        raise ValueError("fresnel_c: argument must be >= 0")
    out = np.empty_like(xa)
    for i, v in enumerate(xa.flat):
        if v == 0.0:
            out.flat[i] = 0.0
        elif v < _FRESNEL_XMIN:
            out.flat[i] = _fresnel_series(v, ctrl)
        else:
            out.flat[i] = _fresnel_cf(v, ctrl)
    return _out(out, scalar)
