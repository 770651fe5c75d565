"""Fourier-side descriptions of target functions and their spectral norms.

Conventions: f(x) = int fhat(xi) exp(2 pi i xi.x) d xi, frequencies in cycles
per unit.  Two norm flavors are supported, Euclidean |xi| and L1 |xi|_1.
Continuous spectra with an L1 flavor are integrated over the sphere for
d <= 3 only.
"""

from __future__ import annotations

import json
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Literal, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter, field_validator
from scipy import integrate

from . import specfn
from .specfn import ball_volume, beta_fn, gamma_fn, sphere_area


class NormFlavor(str, Enum):
    EUCLIDEAN = "l2"
    L1 = "l1"


class Variant(str, Enum):
    HOMOGENEOUS = "homogeneous"
    SHIFTED = "shifted"


class DivergenceError(ArithmeticError):
    """A norm integral is infinite or failed to converge."""


class UnsupportedError(ValueError):
    pass


def _norm_of(xi: np.ndarray, flavor: NormFlavor) -> np.ndarray:
    xi = np.atleast_2d(xi)
    if NormFlavor(flavor) is NormFlavor.L1:
        return np.abs(xi).sum(axis=1)
    return np.sqrt((xi * xi).sum(axis=1))


def _points(x, d: int) -> tuple[np.ndarray, bool]:
    """Normalise to an (n, d) array; the flag says whether a single point was given."""
    xa = np.asarray(x, dtype=float)
    if xa.ndim == 0:
        if d != 1:
            raise ValueError(f"expected points of dimension {d}")
        return xa.reshape(1, 1), True
    if xa.ndim == 1:
        if xa.shape[0] == d:
            return xa.reshape(1, d), True
        if d == 1:
            return xa.reshape(-1, 1), False
        raise ValueError(f"expected points of dimension {d}, got {xa.shape[0]}")
    if xa.ndim != 2 or xa.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got shape {xa.shape}")
    return xa, False


def _finish(vals: np.ndarray, single: bool):
    return complex(vals[0]) if single else vals


def _safe_pow(r: np.ndarray, s: float) -> np.ndarray:
    # |xi|^s with the convention 0^0 = 1
    if s == 0:
        return np.ones_like(r)
    return np.power(r, s)


def sphere_l1_integral(g: Callable[[np.ndarray], np.ndarray], d: int) -> float:
    """int over the unit sphere S^{d-1} of g(|theta|_1) d sigma, d <= 3."""
    if d == 1:
        return 2.0 * float(g(np.array([1.0]))[0])
    if d == 2:
        val, _ = integrate.quad(lambda p: float(g(np.array([math.cos(p) + math.sin(p)]))[0]),
                                0.0, 0.5 * math.pi, epsabs=0, epsrel=1e-13, limit=200)
        return 4.0 * val
    if d == 3:
        def inner(ph, th):
            st = math.sin(th)
            l1 = st * (math.cos(ph) + math.sin(ph)) + math.cos(th)
            return float(g(np.array([l1]))[0]) * st
        val, _ = integrate.dblquad(inner, 0.0, 0.5 * math.pi, 0.0, 0.5 * math.pi,
                                   epsabs=0, epsrel=1e-12)
        return 8.0 * val
    raise UnsupportedError("L1-flavor sphere quadrature is implemented for d <= 3 only")


def _sample_sphere(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    if d == 1:
        return rng.choice(np.array([-1.0, 1.0]), size=m).reshape(m, 1)
    g = rng.standard_normal((m, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def phase_theta(xi, phase: float) -> float:
    """Representative of `phase` mod 1 in [sum max(-xi_j,0), sum max(-xi_j,0) + 1).

    With this choice 0 <= xi.x + theta <= |xi|_1 + 1 for every x in [0,1]^d.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    lo = float(np.maximum(-xi, 0.0).sum())
    return lo + float(np.mod(phase - lo, 1.0))


def phase_theta_many(xi: np.ndarray, phase: np.ndarray) -> np.ndarray:
    lo = np.maximum(-np.atleast_2d(xi), 0.0).sum(axis=1)
    return lo + np.mod(phase - lo, 1.0)


# --------------------------------------------------------------------------
# Base class
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MuSample:
    """Draws from the construction measure mu.

    xi: (m, d) frequencies; r: (m,) gate radii; theta: (m,) shifts from
    phase_theta; phase: (m,) raw phases in cycles; Q: normaliser.
    """

    xi: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    phase: np.ndarray
    Q: float
    variant: Variant
    s: float

    def __len__(self) -> int:
        return len(self.r)

    def inverse_weight(self) -> np.ndarray:
        """1/w(xi) for each draw: |xi|_1^s or (1+|xi|_1)^s."""
        l1 = np.abs(self.xi).sum(axis=1)
        if self.variant is Variant.HOMOGENEOUS:
            return _safe_pow(l1, self.s)
        return np.power(1.0 + l1, self.s)


def weight_fn(variant: Variant, s: float) -> Callable[[np.ndarray], np.ndarray]:
    """w as a function of |xi|_1."""
    if Variant(variant) is Variant.HOMOGENEOUS:
        return lambda l1: _safe_pow(np.asarray(l1, dtype=float), -s)
    return lambda l1: np.power(1.0 + np.asarray(l1, dtype=float), -s)


class Spectrum(ABC):
    """A target f described through fhat."""

    dim: int
    real_valued: bool

    @abstractmethod
    def norm(self, s: float, flavor: NormFlavor = NormFlavor.EUCLIDEAN) -> float:
        """upsilon_{f,s} = int |xi|^s |fhat(xi)| d xi."""

    @abstractmethod
    def eval(self, x):
        """f at a point (d-vector) or at an (n, d) array of points."""

    @abstractmethod
    def fhat(self, xi) -> np.ndarray:
        """fhat at an (n, d) array of frequencies."""

    @abstractmethod
    def _sample_mu(self, rng: np.random.Generator, s: float, m: int,
                   variant: Variant) -> tuple[np.ndarray, np.ndarray, float]:
        """(xi, phase, Q) for m draws."""

    def barron_norm(self, s: float, flavor: NormFlavor = NormFlavor.EUCLIDEAN) -> float:
        """||f||_{B^s} = upsilon_0 + upsilon_s."""
        return self.norm(0.0, flavor) + self.norm(s, flavor)

    def low_mass(self) -> float:
        """int_{|xi|_1 < 1} |fhat|; used to decide whether a split is needed."""
        raise UnsupportedError(f"{type(self).__name__} does not report band masses")

    def __call__(self, x):
        return self.eval(x)


# --------------------------------------------------------------------------
# Atomic spectra
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyAtom:
    xi: tuple[float, ...]
    weight: complex

    def __post_init__(self):
        if self.weight == 0:
            raise ValueError("atom weight must be nonzero")
        if not all(math.isfinite(v) for v in self.xi):
            raise ValueError("atom frequency must be finite")


class AtomicSpectrum(Spectrum):
    """f(x) = sum_k c_k exp(2 pi i xi_k . x)."""

    def __init__(self, atoms: Sequence[FrequencyAtom] | None = None, *,
                 xi: np.ndarray | None = None, weights: np.ndarray | None = None,
                 real_valued: bool | None = None):
        if atoms is not None:
            xi = np.array([a.xi for a in atoms], dtype=float)
            weights = np.array([a.weight for a in atoms], dtype=complex)
        if xi is None or weights is None:
            raise ValueError("need atoms or (xi, weights)")
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        weights = np.atleast_1d(np.asarray(weights, dtype=complex))
        if xi.shape[0] != weights.shape[0]:
            raise ValueError("xi and weights disagree in length")
        if np.any(weights == 0):
            raise ValueError("atom weights must be nonzero")
        if not np.all(np.isfinite(xi)):
            raise ValueError("frequencies must be finite")
        self.xi = xi
        self.weights = weights
        self.dim = xi.shape[1]
        symmetric = self._is_conjugate_symmetric()
        if real_valued is None:
            real_valued = symmetric
        elif real_valued and not symmetric:
            raise ValueError("real_valued spectrum must be conjugate symmetric")
        self.real_valued = bool(real_valued)

    def _is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        remaining = list(range(len(self.weights)))
        while remaining:
            k = remaining.pop(0)
            if np.all(self.xi[k] == 0):
                if abs(self.weights[k].imag) > tol * max(1.0, abs(self.weights[k])):
                    return False
                continue
            match = None
            for idx in remaining:
                if (np.allclose(self.xi[idx], -self.xi[k], rtol=0, atol=tol)
                        and abs(self.weights[idx] - np.conj(self.weights[k])) <= tol * max(1.0, abs(self.weights[k]))):
                    match = idx
                    break
            if match is None:
                return False
            remaining.remove(match)
        return True

    @classmethod
    def cosine(cls, xi, amplitude: float = 1.0, phase: float = 0.0) -> "AtomicSpectrum":
        """amplitude * cos(2 pi (xi.x + phase)) as a conjugate pair."""
        xi = np.asarray(xi, dtype=float)
        c = 0.5 * amplitude * np.exp(2j * math.pi * phase)
        return cls(xi=np.stack([xi, -xi]), weights=np.array([c, np.conj(c)]), real_valued=True)

    @classmethod
    def cosine_sum(cls, terms: Sequence[tuple[Sequence[float], float, float]]) -> "AtomicSpectrum":
        """Sum of amplitude*cos(2 pi (xi.x + phase)) for (xi, amplitude, phase) terms."""
        parts = [cls.cosine(xi, a, p) for xi, a, p in terms]
        return cls(xi=np.concatenate([p.xi for p in parts]),
                   weights=np.concatenate([p.weights for p in parts]), real_valued=True)

    @property
    def atoms(self) -> list[FrequencyAtom]:
        return [FrequencyAtom(tuple(map(float, x)), complex(c)) for x, c in zip(self.xi, self.weights)]

    def __len__(self) -> int:
        return len(self.weights)

    def norm(self, s: float, flavor: NormFlavor = NormFlavor.EUCLIDEAN) -> float:
        if s < 0:
            raise ValueError("s must be >= 0")
        r = _norm_of(self.xi, flavor)
        return float(np.sum(np.abs(self.weights) * _safe_pow(r, s)))

    def eval(self, x):
        xa, single = _points(x, self.dim)
        phase = 2j * math.pi * (xa @ self.xi.T)
        return _finish(np.exp(phase) @ self.weights, single)

    def fhat(self, xi) -> np.ndarray:
        raise UnsupportedError("atomic spectra are measures; use .weights")

    def l2_sq_omega(self) -> float:
        """int_{[0,1]^d} |f|^2 exactly from pairwise atom interactions."""
        diff = self.xi[:, None, :] - self.xi[None, :, :]
        w = 2j * math.pi * diff
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(diff == 0, 1.0 + 0j, (np.exp(w) - 1.0) / np.where(w == 0, 1.0, w))
        gram = np.prod(fac, axis=2)
        c = self.weights
        return float(np.real(c @ gram @ np.conj(c)))

    def low_mass(self) -> float:
        return float(np.sum(np.abs(self.weights[np.abs(self.xi).sum(axis=1) < 1.0])))

    def select(self, mask: np.ndarray) -> "AtomicSpectrum | None":
        if not np.any(mask):
            return None
        return AtomicSpectrum(xi=self.xi[mask], weights=self.weights[mask],
                              real_valued=self.real_valued)

    def _sample_mu(self, rng, s, m, variant):
        l1 = np.abs(self.xi).sum(axis=1)
        if Variant(variant) is Variant.HOMOGENEOUS and np.any(l1 == 0) and s > 0:
            raise ValueError("homogeneous measure needs no atom at the origin")
        w = weight_fn(variant, s)(l1) * np.abs(self.weights)
        Q = float(w.sum())
        if not math.isfinite(Q) or Q <= 0:
            raise DivergenceError("normaliser Q is not finite and positive")
        idx = rng.choice(len(w), size=m, p=w / Q)
        phase = np.angle(self.weights[idx]) / (2.0 * math.pi)
        return self.xi[idx], phase, Q

    def probabilities(self, s: float, variant: Variant) -> np.ndarray:
        l1 = np.abs(self.xi).sum(axis=1)
        w = weight_fn(variant, s)(l1) * np.abs(self.weights)
        return w / w.sum()


# --------------------------------------------------------------------------
# Radial spectra
# --------------------------------------------------------------------------

def _lambda_kernel(d: int, z: np.ndarray) -> np.ndarray:
    """Sphere average of exp(i z theta_1) over S^{d-1}: 0F1(; d/2; -z^2/4)."""
    z = np.asarray(z, dtype=float)
    if d == 1:
        return np.cos(z)
    if d == 3:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(z == 0, 1.0, np.sin(z) / np.where(z == 0, 1.0, z))
    nu = d / 2.0 - 1.0
    return gamma_fn(d / 2.0) * 2.0 ** nu * specfn.bessel_j_scaled(nu, np.abs(z))


class RadialSpectrum(Spectrum):
    """fhat(xi) = g0(|xi|), possibly complex valued.

    `origin_exponent` a declares g0(r) ~ r^a h(r) with h smooth near 0; the
    quadratures use it to integrate the algebraic singularity exactly.
    """

    def __init__(self, g0: Callable[[np.ndarray], np.ndarray], dim: int,
                 support_radius: float = math.inf, origin_exponent: float = 0.0,
                 real_valued: bool = True, name: str = "radial"):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        if not support_radius > 0:
            raise ValueError("support radius must be positive")
        self.g0 = g0
        self.dim = int(dim)
        self.support_radius = float(support_radius)
        self.origin_exponent = float(origin_exponent)
        self.real_valued = bool(real_valued)
        self.name = name
        self._cdf_cache: dict = {}

    # -- quadrature helpers -------------------------------------------------
    def _radial_integral(self, power: float, extra: Callable[[float], float] | None = None,
                         a: float = 0.0, b: float | None = None) -> float:
        """int_a^b |g0(r)| r^power extra(r) dr, with the origin singularity handled."""
        b = self.support_radius if b is None else b
        ex = extra if extra is not None else (lambda r: 1.0)
        alpha = self.origin_exponent + power
        if alpha <= -1 and a == 0.0:
            raise DivergenceError("radial integral diverges at the origin")

        def smooth(r):
            # limit of |g0(r)| / r^a as r -> 0; r^a must not overflow
            r = max(r, 1e-30)
            return abs(complex(self.g0(np.array([r]))[0])) * r ** (-self.origin_exponent) * ex(r)

        def plain(r):
            return abs(complex(self.g0(np.array([r]))[0])) * r ** power * ex(r)

        opts = dict(epsabs=0.0, epsrel=1e-13, limit=500)
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                if math.isinf(b):
                    head_end = max(a, 1.0)
                    total = 0.0
                    if a == 0.0 and alpha != 0.0:
                        val, _ = integrate.quad(smooth, 0.0, head_end, weight="alg",
                                                wvar=(alpha, 0.0), **opts)
                        total += val
                    elif head_end > a:
                        val, _ = integrate.quad(plain, a, head_end, **opts)
                        total += val
                    val, _ = integrate.quad(plain, head_end, math.inf, **opts)
                    return total + val
                if a == 0.0 and alpha != 0.0:
                    val, _ = integrate.quad(smooth, 0.0, b, weight="alg", wvar=(alpha, 0.0), **opts)
                else:
                    val, _ = integrate.quad(plain, a, b, **opts)
                return val
            except integrate.IntegrationWarning as exc:
                raise DivergenceError(f"radial norm quadrature failed: {exc}") from exc

    def norm(self, s: float, flavor: NormFlavor = NormFlavor.EUCLIDEAN) -> float:
        if s < 0:
            raise ValueError("s must be >= 0")
        d = self.dim
        radial = self._radial_integral(s + d - 1)
        if not math.isfinite(radial):
            raise DivergenceError("radial norm integral diverges")
        if NormFlavor(flavor) is NormFlavor.EUCLIDEAN or d == 1 or s == 0:
            return sphere_area(d) * radial
        return radial * sphere_l1_integral(lambda l1: np.power(l1, s), d)

    def fhat(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        r = np.sqrt((xi * xi).sum(axis=1))
        out = np.asarray(self.g0(r), dtype=complex)
        return np.where(r < self.support_radius, out, 0.0)

    def low_mass(self) -> float:
        # |xi|_1 < 1 region; exact in d = 1, otherwise bracketed by balls
        if self.dim == 1:
            return 2.0 * self._radial_integral(0.0, b=min(1.0, self.support_radius))
        raise UnsupportedError("band masses for radial spectra are computed in d = 1 only")

    def eval(self, x):
        """Radial Fourier inversion: omega_{d-1} int g0(r) r^{d-1} Lambda(2 pi |x| r) dr."""
        xa, single = _points(x, self.dim)
        radii = np.sqrt((xa * xa).sum(axis=1))
        out = np.empty(len(radii), dtype=complex)
        for i, rad in enumerate(radii):
            out[i] = self._eval_radius(float(rad))
        return _finish(out, single)

    def _eval_radius(self, rad: float) -> complex:
        d = self.dim
        omega = sphere_area(d)
        R = self.support_radius
        part = []
        for comp in (np.real, np.imag):
            if comp is np.imag and self.real_valued:
                part.append(0.0)
                continue

            def g(r, comp=comp):
                return float(comp(complex(self.g0(np.array([r]))[0])))

            if d == 1 and rad > 0 and self.origin_exponent == 0.0:
                # cosine transform
                if math.isinf(R):
                    val, _ = integrate.quad(g, 0.0, math.inf, weight="cos", wvar=2 * math.pi * rad, limlst=100)
                else:
                    val, _ = integrate.quad(g, 0.0, R, weight="cos", wvar=2 * math.pi * rad, limit=2000)
                part.append(2.0 * val)
                continue

            def integrand(r, g=g):
                return g(r) * r ** (d - 1) * float(_lambda_kernel(d, np.array([2 * math.pi * rad * r]))[0])

            upper = R if not math.isinf(R) else math.inf
            alpha = self.origin_exponent + d - 1
            if alpha != 0 and not math.isinf(upper):
                def smooth(r, g=g):
                    r = max(r, 1e-300)
                    return g(r) * r ** (-self.origin_exponent) * float(
                        _lambda_kernel(d, np.array([2 * math.pi * rad * r]))[0])
                val, _ = integrate.quad(smooth, 0.0, upper, weight="alg", wvar=(alpha, 0.0), limit=2000,
                                        epsabs=1e-14, epsrel=1e-12)
            else:
                val, _ = integrate.quad(integrand, 0.0, upper, limit=2000, epsabs=1e-14, epsrel=1e-12)
            part.append(omega * val)
        return complex(part[0], part[1])

    # -- sampling -------------------------------------------------------------
    def _radial_cdf(self, s: float, variant: Variant):
        key = (float(s), Variant(variant))
        if key in self._cdf_cache:
            return self._cdf_cache[key]
        d = self.dim
        R = self.support_radius
        if math.isinf(R):
            R = self._tail_radius()
        if Variant(variant) is Variant.HOMOGENEOUS:
            power, extra = d - 1 - s, None
        else:
            power, extra = d - 1, (lambda r: (1.0 + r) ** (-s))
        # denser near the origin where singular densities live
        grid = R * np.linspace(0.0, 1.0, 4096) ** 2
        pieces = np.array([self._radial_integral(power, extra, a=float(a), b=float(b)) if a > 0
                           else self._radial_integral(power, extra, a=0.0, b=float(b))
                           for a, b in zip(grid[:-1], grid[1:])])
        cdf = np.concatenate([[0.0], np.cumsum(pieces)])
        self._cdf_cache[key] = (grid, cdf)
        return grid, cdf

    def _tail_radius(self) -> float:
        # radius beyond which the (r^{d-1}-weighted) mass is negligible
        total = self._radial_integral(self.dim - 1)
        r = 1.0
        while self._radial_integral(self.dim - 1, a=r, b=math.inf) > 1e-14 * total:
            r *= 1.5
            if r > 1e8:
                raise DivergenceError("radial density has too heavy a tail to tabulate")
        return r

    def _sample_mu(self, rng, s, m, variant):
        d = self.dim
        variant = Variant(variant)
        grid, cdf = self._radial_cdf(s, variant)
        if variant is Variant.HOMOGENEOUS:
            # direction law proportional to |theta|_1^{-s} <= 1
            radial_mass = cdf[-1]
            sphere = sphere_l1_integral(lambda l1: np.power(l1, -s), d)
            Q = radial_mass * sphere
        else:
            def dir_weight(r):
                return sphere_l1_integral(lambda l1: (1.0 + r * l1) ** (-s), d)
            Q = self._radial_integral(d - 1, dir_weight) if d > 1 else 2.0 * cdf[-1]
        xs = np.empty((0, d))
        tries = 0
        while len(xs) < m:
            k = max(2 * (m - len(xs)), 16)
            u = rng.random(k) * cdf[-1]
            r = np.interp(u, cdf, grid)
            theta = _sample_sphere(rng, k, d)
            l1 = np.abs(theta).sum(axis=1)
            if variant is Variant.HOMOGENEOUS:
                acc = np.power(l1, -s)
            else:
                acc = np.power((1.0 + r) / (1.0 + r * l1), s)
            keep = rng.random(k) < acc
            xs = np.concatenate([xs, r[keep, None] * theta[keep]])
            tries += 1
            if tries > 1000:
                raise RuntimeError("rejection sampler stalled")
        xs = xs[:m]
        phase = np.angle(self.fhat(xs)) / (2.0 * math.pi)
        return xs, phase, float(Q)

    def sample_abs(self, rng: np.random.Generator, m: int) -> np.ndarray:
        """m frequencies distributed as |fhat| / upsilon_0."""
        return self._sample_mu(rng, 0.0, m, Variant.HOMOGENEOUS)[0]


# --------------------------------------------------------------------------
# Named families
# --------------------------------------------------------------------------

class BochnerRiesz(RadialSpectrum):
    """fhat = (1 - |xi|^2/R^2)_+^delta."""

    family = "bochner_riesz"

    def __init__(self, R: float = 1.0, delta: float = 1.0, d: int = 1):
        if not delta > -1:
            raise ValueError("BochnerRiesz needs delta > -1")
        if not R > 0:
            raise ValueError("R must be positive")
        self.R, self.delta = float(R), float(delta)
        super().__init__(self._g0, d, support_radius=R, name=self.family)

    def params(self) -> dict:
        return {"R": self.R, "delta": self.delta, "d": self.dim}

    def _g0(self, r):
        r = np.asarray(r, dtype=float)
        base = np.clip(1.0 - (r / self.R) ** 2, 0.0, None)
        return np.power(base, self.delta)

    def norm(self, s, flavor=NormFlavor.EUCLIDEAN):
        d = self.dim
        if NormFlavor(flavor) is NormFlavor.EUCLIDEAN or d == 1 or s == 0:
            return 0.5 * sphere_area(d) * beta_fn((s + d) / 2.0, self.delta + 1.0) * self.R ** (s + d)
        return super().norm(s, flavor)

    def value_at_origin(self) -> float:
        return self.norm(0.0)

    def eval(self, x):
        xa, single = _points(x, self.dim)
        rad = np.sqrt((xa * xa).sum(axis=1))
        return _finish(self.eval_radius(rad).astype(complex), single)

    def eval_radius(self, rad) -> np.ndarray:
        d, delta, R = self.dim, self.delta, self.R
        nu = delta + d / 2.0
        z = 2.0 * math.pi * np.asarray(rad, dtype=float) * R
        pref = gamma_fn(delta + 1.0) * math.pi ** (-delta) * (2.0 * math.pi) ** nu * R ** d
        return pref * specfn.bessel_j_scaled(nu, z)


class FpIndicator(RadialSpectrum):
    """fhat = |xi|^{-d/p'} on the open unit ball, p' the dual exponent."""

    family = "fp_indicator"
    closed_form_radius = 1.0

    def __init__(self, p: float = 1.0, d: int = 1):
        if not (1.0 <= p < math.inf):
            raise ValueError("FpIndicator needs 1 <= p < inf")
        self.p = float(p)
        self.a = -d * (1.0 - 1.0 / self.p)  # exponent -d/p'
        super().__init__(self._g0, d, support_radius=1.0, origin_exponent=self.a, name=self.family)

    def params(self) -> dict:
        return {"p": self.p, "d": self.dim}

    def _g0(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(r < 1.0, np.power(r, self.a) if self.a != 0 else 1.0, 0.0)

    def norm(self, s, flavor=NormFlavor.EUCLIDEAN):
        d = self.dim
        if NormFlavor(flavor) is NormFlavor.EUCLIDEAN or d == 1 or s == 0:
            return sphere_area(d) / (s + d / self.p)
        return super().norm(s, flavor)

    def decay_exponent(self) -> float:
        return min((self.dim + 1) / 2.0, self.dim / self.p)

    def eval(self, x):
        xa, single = _points(x, self.dim)
        rad = np.sqrt((xa * xa).sum(axis=1))
        return _finish(self.eval_radius(rad).astype(complex), single)

    def eval_radius(self, rad) -> np.ndarray:
        rad = np.atleast_1d(np.asarray(rad, dtype=float))
        out = np.empty_like(rad)
        near = rad <= self.closed_form_radius
        if np.any(near):
            out[near] = self.closed_form(rad[near])
        if np.any(~near):
            out[~near] = self.quadrature_form(rad[~near])
        return out

    def closed_form(self, rad) -> np.ndarray:
        """p nu_d 1F2(d/(2p); 1 + d/(2p), d/2; -pi^2 |x|^2)."""
        d, p = self.dim, self.p
        a = d / (2.0 * p)
        with warnings.catch_warnings():
            # relative accuracy is meaningless at the zeros of f_p; the absolute
            # error stays at rounding level for |x| <= closed_form_radius
            warnings.simplefilter("ignore", specfn.CancellationWarning)
            val = specfn.hyp1f2(a, 1.0 + a, d / 2.0, -(math.pi * np.asarray(rad)) ** 2)
        return p * ball_volume(d) * val

    def quadrature_form(self, rad, panels_per_cycle: int = 2, order: int = 24) -> np.ndarray:
        """p nu_d int_0^1 Lambda(2 pi |x| u^{p/d}) du by composite Gauss-Legendre."""
        d, p = self.dim, self.p
        rad = np.atleast_1d(np.asarray(rad, dtype=float))
        nodes, wts = np.polynomial.legendre.leggauss(order)
        out = np.empty_like(rad)
        expo = p / d
        for i, rv in enumerate(rad):
            # panels in r = u^{p/d}, graded so that each panel sees < 1/2 cycle
            cycles = rv + 1.0
            npan = int(max(8, math.ceil(panels_per_cycle * 2 * cycles)))
            redges = np.linspace(0.0, 1.0, npan + 1)
            uedges = redges ** (1.0 / expo)
            # extra geometric grading near the origin where r(u) is not smooth
            if expo < 1:
                extra = uedges[1] * np.geomspace(1e-12, 1.0, 30)
                uedges = np.unique(np.concatenate([[0.0], extra, uedges]))
            lo, hi = uedges[:-1], uedges[1:]
            half = 0.5 * (hi - lo)
            u = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
            vals = _lambda_kernel(d, 2 * math.pi * rv * np.power(u, expo))
            out[i] = float((vals * wts[None, :] * half[:, None]).sum())
        return p * ball_volume(d) * out


class GaussFamily(RadialSpectrum):
    """f = exp(-pi |x|^2 / R), fhat = R^{d/2} exp(-pi R |xi|^2)."""

    family = "gauss"

    def __init__(self, R: float = 1.0, d: int = 1):
        if not R > 0:
            raise ValueError("R must be positive")
        self.R = float(R)
        super().__init__(self._g0, d, name=self.family)

    def params(self) -> dict:
        return {"R": self.R, "d": self.dim}

    def _g0(self, r):
        r = np.asarray(r, dtype=float)
        return self.R ** (self.dim / 2.0) * np.exp(-math.pi * self.R * r * r)

    def norm(self, s, flavor=NormFlavor.EUCLIDEAN):
        d, R = self.dim, self.R
        if NormFlavor(flavor) is NormFlavor.EUCLIDEAN or d == 1 or s == 0:
            return R ** (d / 2.0) * sphere_area(d) * gamma_fn((s + d) / 2.0) / (
                2.0 * (math.pi * R) ** ((s + d) / 2.0))
        return super().norm(s, flavor)

    def eval(self, x):
        xa, single = _points(x, self.dim)
        return _finish(np.exp(-math.pi * (xa * xa).sum(axis=1) / self.R).astype(complex), single)

    def _tail_radius(self) -> float:
        return math.sqrt(40.0 / (math.pi * self.R))


class OscGauss(RadialSpectrum):
    """psi_n = (1+in)^{-d/2} exp(-pi |x|^2/(1+in)), fhat = exp(-pi (1+in) |xi|^2)."""

    family = "osc_gauss"

    def __init__(self, n: float = 1.0, d: int = 1):
        self.n = float(n)
        super().__init__(self._g0, d, real_valued=False, name=self.family)

    def params(self) -> dict:
        return {"n": self.n, "d": self.dim}

    def _g0(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-math.pi * (1.0 + 1j * self.n) * r * r)

    def norm(self, s, flavor=NormFlavor.EUCLIDEAN):
        # |fhat| does not depend on n
        return GaussFamily(1.0, self.dim).norm(s, flavor)

    def eval(self, x):
        xa, single = _points(x, self.dim)
        a = 1.0 + 1j * self.n
        val = a ** (-self.dim / 2.0) * np.exp(-math.pi * (xa * xa).sum(axis=1) / a)
        return _finish(val, single)

    def _tail_radius(self) -> float:
        return math.sqrt(40.0 / math.pi)


class BanachSum(RadialSpectrum):
    """Sum over k = 1..n of 2^{kd} (1 - 4^k |xi|^2)_+^delta (scaled) or without 2^{kd}."""

    family = "banach_sum"

    def __init__(self, n_terms: int, delta: float, d: int = 1, scaled: bool = True):
        if n_terms < 1:
            raise ValueError("n_terms must be >= 1")
        if scaled and not delta > -1:
            raise ValueError("scaled family needs delta > -1")
        if not scaled and not delta > (d - 1) / 2.0:
            raise ValueError("unscaled family needs delta > (d-1)/2")
        self.n_terms, self.delta, self.scaled = int(n_terms), float(delta), bool(scaled)
        self._parts = [BochnerRiesz(2.0 ** (-k), delta, d) for k in range(1, n_terms + 1)]
        self._amp = [2.0 ** (k * d) if scaled else 1.0 for k in range(1, n_terms + 1)]
        super().__init__(self._g0, d, support_radius=0.5, name=self.family)

    def params(self) -> dict:
        return {"n_terms": self.n_terms, "delta": self.delta, "d": self.dim, "scaled": self.scaled}

    def _g0(self, r):
        return sum(a * p._g0(r) for a, p in zip(self._amp, self._parts))

    def norm(self, s, flavor=NormFlavor.EUCLIDEAN):
        if NormFlavor(flavor) is NormFlavor.EUCLIDEAN or self.dim == 1 or s == 0:
            return banach_closed_norm(self.n_terms, s, self.delta, self.dim, self.scaled)
        return super().norm(s, flavor)

    def value_at_origin(self) -> float:
        return float(sum(self._amp))

    def eval(self, x):
        xa, single = _points(x, self.dim)
        rad = np.sqrt((xa * xa).sum(axis=1))
        val = sum(a * p.eval_radius(rad) for a, p in zip(self._amp, self._parts))
        return _finish(np.asarray(val, dtype=complex), single)


def banach_closed_norm(n: int, s: float, delta: float, d: int, scaled: bool) -> float:
    """Geometric sums of the Bochner-Riesz norm over the dyadic radii 2^{-k}."""
    omega = sphere_area(d)
    B = beta_fn((s + d) / 2.0, delta + 1.0)
    if scaled:
        if s == 0:
            return 0.5 * omega * B * n
        return (1.0 - 2.0 ** (-n * s)) / (2.0 ** (s + 1) - 2.0) * omega * B
    return (1.0 - 2.0 ** (-n * (s + d))) / (2.0 ** (s + d + 1) - 2.0) * omega * B


@dataclass(frozen=True)
class BanachGrowth:
    n: int
    v0: float
    vs: float
    l1_lower: float | None

    @property
    def ratio(self) -> float:
        return self.v0 / self.vs


def banach_growth_report(n: int, s: float, delta: float, d: int, scaled: bool) -> BanachGrowth:
    if n < 1:
        raise ValueError("n must be >= 1")
    if s <= 0:
        raise ValueError("s must be positive")
    if scaled and not delta > -1:
        raise ValueError("scaled family needs delta > -1")
    if not scaled and not delta > (d - 1) / 2.0:
        raise ValueError("unscaled family needs delta > (d-1)/2")
    v0 = banach_closed_norm(n, 0.0, delta, d, scaled)
    vs = banach_closed_norm(n, s, delta, d, scaled)
    return BanachGrowth(n, v0, vs, None if scaled else float(n))


class CosGauss(Spectrum):
    """f = scale * cos(2 pi n x_1) exp(-pi |x|^2 / R).

    fhat = scale * R^{d/2} exp(-pi R (|xi|^2 + n^2)) cosh(2 pi n R xi_1), an equal
    mixture of two Gaussians centred at +-n e_1 with variance 1/(2 pi R).
    """

    family = "cos_gauss"

    def __init__(self, n: float, R: float, d: int = 1, scale: float = 1.0):
        if not R > 0:
            raise ValueError("R must be positive")
        self.n, self.R, self.dim, self.scale = float(n), float(R), int(d), float(scale)
        self.real_valued = True
        self.sigma = 1.0 / math.sqrt(2.0 * math.pi * self.R)

    def params(self) -> dict:
        return {"n": self.n, "R": self.R, "d": self.dim, "scale": self.scale}

    def fhat(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        d, R, n = self.dim, self.R, self.n
        x1 = xi[:, 0]
        rest = (xi[:, 1:] ** 2).sum(axis=1)
        # cosh written as a sum of two shifted Gaussians to avoid overflow
        g = 0.5 * (np.exp(-math.pi * R * ((x1 - n) ** 2 + rest)) + np.exp(-math.pi * R * ((x1 + n) ** 2 + rest)))
        return (self.scale * R ** (d / 2.0) * g).astype(complex)

    def eval(self, x):
        xa, single = _points(x, self.dim)
        val = self.scale * np.cos(2 * math.pi * self.n * xa[:, 0]) * np.exp(-math.pi * (xa * xa).sum(axis=1) / self.R)
        return _finish(val.astype(complex), single)

    def _expect(self, g: Callable[[float], float], flavor: NormFlavor, lo: float = 0.0) -> float:
        """E[g(|Y|)] under fhat/upsilon_0 restricted to |Y| >= lo (norm per flavor)."""
        d, n, sig = self.dim, self.n, self.sigma

        def dens1(t):
            return 0.5 * (math.exp(-0.5 * ((t - n) / sig) ** 2) + math.exp(-0.5 * ((t + n) / sig) ** 2)) / (
                sig * math.sqrt(2 * math.pi))

        opts = dict(epsabs=0.0, epsrel=1e-12, limit=400)
        span = n + 40 * sig
        if d == 1:
            pts = [p for p in (n, 1.0, lo) if 0 < p < span]
            val, _ = integrate.quad(lambda t: 2 * dens1(t) * (g(t) if t >= lo else 0.0), 0.0, span,
                                    points=sorted(set(pts)) or None, **opts)
            return val
        if NormFlavor(flavor) is NormFlavor.EUCLIDEAN:
            # |Y|^2 / sigma^2 is noncentral chi-square with d dof
            from scipy.stats import ncx2
            lam = (n / sig) ** 2
            val, _ = integrate.quad(
                lambda q: ncx2.pdf(q, d, lam) * (g(sig * math.sqrt(q)) if sig * math.sqrt(q) >= lo else 0.0),
                0.0, (n / sig + 40) ** 2, points=[lam], **opts)
            return val

        def half(t):
            return 2.0 * math.exp(-0.5 * (t / sig) ** 2) / (sig * math.sqrt(2 * math.pi))

        if d == 2:
            val, _ = integrate.dblquad(
                lambda t2, t1: 2 * dens1(t1) * half(t2) * (g(t1 + t2) if t1 + t2 >= lo else 0.0),
                0.0, span, 0.0, 40 * sig, epsabs=0.0, epsrel=1e-10)
            return val
        if d == 3:
            val, _ = integrate.tplquad(
                lambda t3, t2, t1: 2 * dens1(t1) * half(t2) * half(t3) * (g(t1 + t2 + t3) if t1 + t2 + t3 >= lo else 0.0),
                0.0, span, 0.0, 40 * sig, 0.0, 40 * sig, epsabs=0.0, epsrel=1e-8)
            return val
        raise UnsupportedError("CosGauss L1 quadrature is implemented for d <= 3")

    def norm(self, s, flavor=NormFlavor.EUCLIDEAN):
        if s < 0:
            raise ValueError("s must be >= 0")
        if s == 0:
            return abs(self.scale)
        if s == 1 and (NormFlavor(flavor) is NormFlavor.L1 or self.dim == 1):
            return abs(self.scale) * self.l1_first_moment()
        return abs(self.scale) * self._expect(lambda t: t ** s, flavor)

    def l1_first_moment(self) -> float:
        """E|Y_1| + (d-1) E|Z| for the normalised density."""
        n, sig = self.n, self.sigma
        folded = sig * math.sqrt(2 / math.pi) * math.exp(-0.5 * (n / sig) ** 2) + n * math.erf(n / (sig * math.sqrt(2)))
        return folded + (self.dim - 1) * sig * math.sqrt(2 / math.pi)

    def decay_bound(self) -> float:
        """n + d/(pi sqrt(R)), an upper bound for the first L1 moment."""
        return self.n + self.dim / (math.pi * math.sqrt(self.R))

    def low_mass(self) -> float:
        if self.dim == 1:
            return abs(self.scale) * self._expect(lambda t: 1.0, NormFlavor.L1) - abs(self.scale) * self._expect(
                lambda t: 1.0, NormFlavor.L1, lo=1.0)
        # mass of |xi|_1 < 1 is bounded by the mass of |xi_1| < 1
        from scipy.stats import norm as gauss
        sig, n = self.sigma, self.n
        p = 0.5 * ((gauss.cdf((1 - n) / sig) - gauss.cdf((-1 - n) / sig))
                   + (gauss.cdf((1 + n) / sig) - gauss.cdf((-1 + n) / sig)))
        return abs(self.scale) * p

    def _sample_mu(self, rng, s, m, variant, restrict_high: bool = False):
        variant = Variant(variant)
        if variant is Variant.HOMOGENEOUS and not restrict_high and s > 0:
            if self.low_mass() > 0:
                raise ValueError("homogeneous measure needs the spectrum away from the origin; restrict to |xi|_1 >= 1")
        w = weight_fn(variant, s)
        lo = 1.0 if restrict_high else 0.0
        Q = abs(self.scale) * self._expect(lambda t: float(w(t)), NormFlavor.L1, lo=lo)
        d = self.dim
        out = np.empty((0, d))
        tries = 0
        while len(out) < m:
            k = max(2 * (m - len(out)), 16)
            centre = np.zeros((k, d))
            centre[:, 0] = self.n * rng.choice(np.array([-1.0, 1.0]), size=k)
            y = centre + self.sigma * rng.standard_normal((k, d))
            l1 = np.abs(y).sum(axis=1)
            acc = np.where(l1 >= lo, w(np.maximum(l1, lo if lo > 0 else 1e-300)), 0.0)
            if variant is Variant.HOMOGENEOUS and not restrict_high:
                acc = np.minimum(acc, 1.0)
            keep = rng.random(k) < acc
            out = np.concatenate([out, y[keep]])
            tries += 1
            if tries > 1000:
                raise RuntimeError("rejection sampler stalled")
        out = out[:m]
        return out, np.zeros(m), float(Q)


# --------------------------------------------------------------------------
# Module-level operations
# --------------------------------------------------------------------------

def spectral_norm(spec: Spectrum, s: float, flavor: NormFlavor = NormFlavor.EUCLIDEAN) -> float:
    return spec.norm(s, NormFlavor(flavor))


def eval_function(spec: Spectrum, x):
    return spec.eval(x)


@dataclass(frozen=True)
class MomentReport:
    s1: float
    s: float
    s2: float
    alpha: float
    holder_lhs: float
    holder_rhs: float
    barron_lhs: float
    barron_rhs: float
    monotone_lhs: float
    monotone_rhs: float

    def holds(self, rtol: float = 1e-12) -> bool:
        return (self.holder_lhs <= self.holder_rhs * (1 + rtol)
                and self.barron_lhs <= self.barron_rhs * (1 + rtol)
                and self.monotone_lhs <= self.monotone_rhs * (1 + rtol))


def moment_inequality_report(spec: Spectrum, s1: float, s: float, s2: float,
                             flavor: NormFlavor = NormFlavor.EUCLIDEAN) -> MomentReport:
    """Both sides of the Hoelder interpolation (for upsilon and for the full
    B^s norm) and of the monotone embedding ||f||_{B^{s1}} <= (2 - s1/s2)||f||_{B^{s2}}."""
    if not (0 <= s1 <= s <= s2):
        raise ValueError("need 0 <= s1 <= s <= s2")
    alpha = 1.0 if s2 == s1 else (s2 - s) / (s2 - s1)
    v = {t: spec.norm(t, flavor) for t in {0.0, s1, s, s2}}
    holder_rhs = v[s1] ** alpha * v[s2] ** (1 - alpha)
    b = {t: v[0.0] + v[t] for t in (s1, s, s2)}
    barron_rhs = b[s1] ** alpha * b[s2] ** (1 - alpha)
    mono_rhs = (2.0 - (s1 / s2 if s2 > 0 else 1.0)) * b[s2]
    return MomentReport(s1, s, s2, alpha, v[s], holder_rhs, b[s], barron_rhs, b[s1], mono_rhs)


def sample_mu(spec: Spectrum, s: float, m: int, variant: Variant = Variant.HOMOGENEOUS,
              seed: int | np.random.Generator | None = 0) -> MuSample:
    """m i.i.d. draws (xi, r) with law proportional to w(xi)|fhat(xi)| on frequencies
    and uniform r in (0,1)."""
    if m < 1:
        raise ValueError("m must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    xi, phase, Q = spec._sample_mu(rng, float(s), int(m), Variant(variant))
    r = rng.random(m)
    # r lives in the open interval
    r = np.where(r == 0.0, 0.5, r)
    theta = phase_theta_many(xi, phase)
    return MuSample(xi=np.asarray(xi, dtype=float), r=r, theta=theta, phase=np.asarray(phase, dtype=float),
                    Q=float(Q), variant=Variant(variant), s=float(s))


class BandRestricted(Spectrum):
    """fhat restricted to a band of |xi|_1 (d = 1 continuous spectra only)."""

    def __init__(self, base: Spectrum, lo: float, hi: float):
        if base.dim != 1:
            raise UnsupportedError("continuous band restriction is supported in d = 1 only")
        self.base, self.lo, self.hi = base, float(lo), float(hi)
        self.dim = 1
        self.real_valued = base.real_valued

    def fhat(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        a = np.abs(xi[:, 0])
        return np.where((a >= self.lo) & (a < self.hi), self.base.fhat(xi), 0.0)

    def _quad(self, func):
        hi = self.hi
        if math.isinf(hi):
            hi = max(self.lo, 1.0) * 2
            while abs(func(hi)) > 1e-300 and hi < 1e6:
                hi *= 2
        val, _ = integrate.quad(func, self.lo, hi, limit=2000, epsabs=0.0, epsrel=1e-12)
        return val

    def norm(self, s, flavor=NormFlavor.EUCLIDEAN):
        return self._quad(lambda t: 2 * abs(complex(self.base.fhat(np.array([[t]]))[0])) * (t ** s if s else 1.0))

    def low_mass(self) -> float:
        if self.lo >= 1.0:
            return 0.0
        return BandRestricted(self.base, self.lo, min(self.hi, 1.0)).norm(0.0)

    def eval(self, x):
        xa, single = _points(x, 1)
        if math.isinf(self.hi):
            # complement of a finite band
            if self.lo == 0.0:
                return self.base.eval(x)
            rest = BandRestricted(self.base, 0.0, self.lo).eval(xa)
            return _finish(np.asarray(self.base.eval(xa), dtype=complex) - rest, single)
        if getattr(self.base, "origin_exponent", 0.0) < 0.0 and self.lo == 0.0:
            return _finish(self._eval_quad(xa[:, 0]), single)
        # smooth band: composite Gauss-Legendre over +-[lo, hi]
        t, w = np.polynomial.legendre.leggauss(40)
        span = self.hi - self.lo
        panels = max(8, int(math.ceil(4.0 * span * (1.0 + float(np.max(np.abs(xa)))))))
        edges = np.linspace(self.lo, self.hi, panels + 1)
        h = np.diff(edges)
        nodes = (edges[:-1, None] + 0.5 * h[:, None] * (t[None, :] + 1.0)).ravel()
        wts = (0.5 * h[:, None] * w[None, :]).ravel()
        fp = np.asarray(self.base.fhat(nodes[:, None]), dtype=complex)
        fm = np.asarray(self.base.fhat(-nodes[:, None]), dtype=complex)
        ph = np.exp(2j * math.pi * np.outer(xa[:, 0], nodes))
        out = (ph * (wts * fp)).sum(axis=1) + (np.conj(ph) * (wts * fm)).sum(axis=1)
        if self.real_valued:
            out = out.real.astype(complex)
        return _finish(out, single)

    def _eval_quad(self, xs: np.ndarray) -> np.ndarray:
        out = np.empty(len(xs), dtype=complex)
        for i, xv in enumerate(xs):
            def part(comp, xv=xv):
                return self._quad(lambda t: float(comp(self.base.fhat(np.array([[t]]))[0]
                                                       * np.exp(2j * math.pi * t * xv)
                                                       + self.base.fhat(np.array([[-t]]))[0]
                                                       * np.exp(-2j * math.pi * t * xv))))
            out[i] = complex(part(np.real), 0.0 if self.real_valued else part(np.imag))
        return out

    def _sample_mu(self, rng, s, m, variant):
        variant = Variant(variant)
        if isinstance(self.base, CosGauss) and self.lo == 1.0 and math.isinf(self.hi):
            return self.base._sample_mu(rng, s, m, variant, restrict_high=True)
        # generic: inverse CDF on |xi| in the band with symmetric sign
        w = weight_fn(variant, s)
        hi = self.hi if not math.isinf(self.hi) else self.lo + 64.0
        grid = np.linspace(self.lo, hi, 4096)
        dens = np.abs(self.base.fhat(grid[:, None])) + np.abs(self.base.fhat(-grid[:, None]))
        dens = dens * w(grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
        Q = float(cdf[-1])
        u = rng.random(m) * cdf[-1]
        rad = np.interp(u, cdf, grid)
        pos = np.abs(self.base.fhat(rad[:, None]))
        neg = np.abs(self.base.fhat(-rad[:, None]))
        sign = np.where(rng.random(m) * (pos + neg) < pos, 1.0, -1.0)
        xi = (sign * rad)[:, None]
        phase = np.angle(self.base.fhat(xi)) / (2 * math.pi)
        return xi, phase, Q


def split_spectrum(spec: Spectrum) -> tuple[Spectrum | None, Spectrum | None]:
    """(part with |xi|_1 < 1, part with |xi|_1 >= 1); None for an empty part."""
    if isinstance(spec, AtomicSpectrum):
        l1 = np.abs(spec.xi).sum(axis=1)
        return spec.select(l1 < 1.0), spec.select(l1 >= 1.0)
    if spec.dim != 1:
        raise UnsupportedError("continuous spectra are split in d = 1 only")
    low = BandRestricted(spec, 0.0, 1.0)
    high = BandRestricted(spec, 1.0, math.inf)
    return low, high


# --------------------------------------------------------------------------
# Spectrum description files
# --------------------------------------------------------------------------

class _AtomModel(BaseModel):
    xi: list[float]
    weight: tuple[float, float] = Field(description="(re, im)")


class AtomicFile(BaseModel):
    type: Literal["atomic"]
    dim: int = Field(ge=1)
    real_valued: bool | None = None
    atoms: list[_AtomModel] = Field(min_length=1)

    @field_validator("atoms")
    @classmethod
    def _nonzero(cls, v):
        for a in v:
            if a.weight == (0.0, 0.0):
                raise ValueError("atom weights must be nonzero")
        return v


class RadialTableFile(BaseModel):
    type: Literal["radial-table"]
    dim: int = Field(ge=1)
    r: list[float] = Field(min_length=2)
    g0: list[float] = Field(min_length=2)
    support_radius: float | None = None
    origin_exponent: float = 0.0

    @field_validator("r")
    @classmethod
    def _sorted(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])) or v[0] < 0:
            raise ValueError("r must be strictly increasing and >= 0")
        return v


class NamedFile(BaseModel):
    type: Literal["named"]
    family: Literal["bochner_riesz", "fp_indicator", "gauss", "cos_gauss", "banach_sum", "osc_gauss"]
    params: dict[str, float | int | bool] = Field(default_factory=dict)


SpectrumFile = TypeAdapter(Union[AtomicFile, RadialTableFile, NamedFile])

_FAMILIES = {
    "bochner_riesz": BochnerRiesz,
    "fp_indicator": FpIndicator,
    "gauss": GaussFamily,
    "cos_gauss": CosGauss,
    "banach_sum": BanachSum,
    "osc_gauss": OscGauss,
}


class TabulatedRadial(RadialSpectrum):
    """Radial density r^a * table(r), the table linearly interpolated."""

    def __init__(self, r: Sequence[float], g0: Sequence[float], dim: int, support_radius: float | None = None,
                 origin_exponent: float = 0.0):
        self.r_tab = np.asarray(r, dtype=float)
        self.g_tab = np.asarray(g0, dtype=float)
        if len(self.r_tab) != len(self.g_tab):
            raise ValueError("r and g0 tables differ in length")
        R = float(support_radius) if support_radius is not None else float(self.r_tab[-1])
        super().__init__(self._g0, dim, support_radius=R, origin_exponent=origin_exponent, name="radial-table")

    def _g0(self, r):
        r = np.asarray(r, dtype=float)
        tab = np.interp(r, self.r_tab, self.g_tab, right=0.0)
        if self.origin_exponent == 0.0:
            return tab
        with np.errstate(divide="ignore"):
            return np.power(r, self.origin_exponent) * tab


def spectrum_from_dict(data: dict) -> Spectrum:
    model = SpectrumFile.validate_python(data)
    if isinstance(model, AtomicFile):
        xi = np.array([a.xi for a in model.atoms], dtype=float)
        if xi.shape[1] != model.dim:
            raise ValueError("atom frequency length disagrees with dim")
        w = np.array([complex(*a.weight) for a in model.atoms])
        return AtomicSpectrum(xi=xi, weights=w, real_valued=model.real_valued)
    if isinstance(model, RadialTableFile):
        if len(model.r) != len(model.g0):
            raise ValueError("r and g0 tables differ in length")
        return TabulatedRadial(model.r, model.g0, model.dim, model.support_radius, model.origin_exponent)
    cls = _FAMILIES[model.family]
    try:
        return cls(**model.params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {model.family}: {exc}") from exc


def spectrum_to_dict(spec: Spectrum) -> dict:
    if isinstance(spec, AtomicSpectrum):
        return {"type": "atomic", "dim": spec.dim, "real_valued": spec.real_valued,
                "atoms": [{"xi": [float(v) for v in x], "weight": [float(c.real), float(c.imag)]}
                          for x, c in zip(spec.xi, spec.weights)]}
    if isinstance(spec, TabulatedRadial):
        return {"type": "radial-table", "dim": spec.dim, "r": spec.r_tab.tolist(),
                "g0": spec.g_tab.tolist(), "support_radius": spec.support_radius,
                "origin_exponent": spec.origin_exponent}
    fam = getattr(spec, "family", None)
    if fam in _FAMILIES:
        return {"type": "named", "family": fam, "params": spec.params()}
    raise UnsupportedError(f"cannot serialise {type(spec).__name__}")


def load_spectrum(path) -> Spectrum:
    with open(path, "r", encoding="utf-8") as fh:
        return spectrum_from_dict(json.load(fh))


def dump_spectrum(spec: Spectrum, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spectrum_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
