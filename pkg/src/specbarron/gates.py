"""Triangle maps, step gates and the cosine reconstruction integral.

Boundary convention: indicator intervals are closed at both ends, the step
chi_[0,inf) takes the value 1 at 0, and at r = 1/2 the r <= 1/2 branch of
alpha wins.  Both the piecewise evaluators and the atom lists below follow
it, so the network module can build layers from the atom lists and compare
against the piecewise forms exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BOUNDARY_CONVENTION = "LeftClosed"


def _as(t):
    return np.ndim(t) == 0, np.asarray(t, dtype=float)


def _ret(v, scalar, dtype=float):
    return dtype(v) if scalar else v


def heaviside(z):
    """chi_[0, inf)(z) with value 1 at 0."""
    return (np.asarray(z) >= 0).astype(float)


def relu(z):
    return np.maximum(z, 0.0)


# --------------------------------------------------------------------------
# beta
# --------------------------------------------------------------------------

def beta_map(t):
    """Tent: 2t on [0,1/2], 2-2t on [1/2,1], zero elsewhere."""
    scalar, ta = _as(t)
    out = np.where((ta >= 0) & (ta <= 1), 1.0 - np.abs(2.0 * ta - 1.0), 0.0)
    return _ret(out, scalar)


def beta_tiled(t, n: int):
    """n-fold tiling beta(n t - j) on the tile containing t, t in [0,1]."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    scalar, ta = _as(t)
    if np.any((ta < 0) | (ta > 1)):
        raise ValueError("beta_tiled: t must lie in [0, 1]")
    u = n * ta
    frac = u - np.floor(u)
    # tent on each tile; the tile boundaries (integers) map to 0
    out = 1.0 - np.abs(2.0 * frac - 1.0)
    out = np.where(frac == 0.0, 0.0, out)
    return _ret(out, scalar)


@dataclass(frozen=True)
class ReluAtoms:
    """sum_i coef[i] * ReLU(slope[i] * t + offset[i])."""

    coef: np.ndarray
    slope: np.ndarray
    offset: np.ndarray

    def __len__(self) -> int:
        return len(self.coef)

    def __call__(self, t):
        scalar, ta = _as(t)
        z = np.multiply.outer(ta, self.slope) + self.offset
        return _ret(relu(z) @ self.coef, scalar)


def beta_relu_atoms(n: int) -> ReluAtoms:
    """The 3n ReLU atoms of beta_{,n}: beta(nt-j) = R(2u) - 2R(2u-1) + R(2u-2), u = nt-j."""
    j = np.repeat(np.arange(n, dtype=float), 3)
    k = np.tile(np.array([0.0, 1.0, 2.0]), n)
    coef = np.tile(np.array([1.0, -2.0, 1.0]), n)
    slope = np.full(3 * n, 2.0 * n)
    offset = -2.0 * j - k
    return ReluAtoms(coef, slope, offset)


# --------------------------------------------------------------------------
# alpha and gamma
# --------------------------------------------------------------------------

def _alpha_params(r):
    """Sign and closed support [lo, hi] of alpha(., r)."""
    r = np.asarray(r, dtype=float)
    sign = np.where(r <= 0.5, 1.0, -1.0)
    lo = np.minimum(r / 2.0, (1.0 - r) / 2.0)
    hi = np.maximum(r / 2.0, (1.0 - r) / 2.0)
    return sign, lo, hi


def alpha_gate(t, r):
    """+1 on [r/2,(1-r)/2] if r <= 1/2, -1 on [(1-r)/2, r/2] if r > 1/2, else 0."""
    scalar = np.ndim(t) == 0 and np.ndim(r) == 0
    ta, ra = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(r, dtype=float))
    sign, lo, hi = _alpha_params(ra)
    out = np.where((ta >= lo) & (ta <= hi), sign, 0.0).astype(int)
    return _ret(out, scalar, int)


def gamma_tiled(t, r, n: int):
    """gamma_{,n}(t, r) from the explicit two-case tiling, t in [0,1].

    Around integer points of u = n t (|u - j| <= 1/4) the value is
    alpha(u - j + 1/4, r); in between it is -alpha(u - j - 1/4, r).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    scalar = np.ndim(t) == 0 and np.ndim(r) == 0
    ta, ra = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(r, dtype=float))
    u = n * ta
    j = np.floor(u + 0.25)
    v = u - j  # in [-1/4, 3/4)
    near = v <= 0.25
    first = alpha_gate(v + 0.25, ra)
    second = -alpha_gate(v - 0.25, ra)
    out = np.where(near, first, second).astype(int)
    return _ret(out, scalar, int)


@dataclass(frozen=True)
class HeavisideAtoms:
    """offset + sum_i sign[i] * chi_[0,inf)(scale[i] * t - threshold[i])."""

    scale: np.ndarray
    threshold: np.ndarray
    sign: np.ndarray
    offset: float

    def __len__(self) -> int:
        return len(self.scale)

    def __call__(self, t):
        scalar, ta = _as(t)
        z = np.multiply.outer(ta, self.scale) - self.threshold
        return _ret(self.offset + heaviside(z) @ self.sign, scalar)


def gamma_heaviside_atoms(r: float, n: int) -> HeavisideAtoms:
    """Exactly 4n Heaviside atoms reproducing gamma_{,n}(t, r) on t in [0, 1].

    Each closed-interval indicator is written as H(u - lo) + H(hi - u) - 1, so
    alpha(u, r) = sign * (H(u - lo) + H(hi - u) - 1).  On [0, 1] the lower step
    of the j = 0 term and the upper step of the j = n term are identically 1
    and are folded into the constant.  The constants then add up to sign(r).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    sgn, lo, hi = (float(v) for v in _alpha_params(r))
    scale, thr, sign = [], [], []

    def lower(shift, outer):
        # H(n t + shift - lo)
        scale.append(float(n)); thr.append(lo - shift); sign.append(outer * sgn)

    def upper(shift, outer):
        # H(hi - n t - shift)
        scale.append(-float(n)); thr.append(-(hi - shift)); sign.append(outer * sgn)

    for j in range(n + 1):
        shift = -j + 0.25
        if j > 0:
            lower(shift, 1.0)
        if j < n:
            upper(shift, 1.0)
    for j in range(n):
        shift = -j - 0.25
        lower(shift, -1.0)
        upper(shift, -1.0)
    return HeavisideAtoms(np.array(scale), np.array(thr), np.array(sign), sgn)


# --------------------------------------------------------------------------
# cosine reconstruction
# --------------------------------------------------------------------------

def r_section(t: float, n: int) -> list[tuple[float, float, int]]:
    """Intervals of r in (0,1) where gamma_{,n}(t, r) is nonzero, with the sign.

    For fixed t the gate value is +-alpha(v, r) with v in [0, 1/2]; alpha(v, .)
    equals +1 for r <= min(2v, 1-2v) and -1 for r >= max(2v, 1-2v).
    """
    u = n * t
    j = math.floor(u + 0.25)
    w = u - j
    if w <= 0.25:
        v, outer = w + 0.25, 1
    else:
        v, outer = w - 0.25, -1
    a = min(2.0 * v, 1.0 - 2.0 * v)
    b = 1.0 - a
    out = []
    if a > 0:
        out.append((0.0, a, outer))
    if b < 1:
        out.append((b, 1.0, -outer))
    return out


def cos_gate_integral(t, n: int):
    """(pi/2) int_0^1 cos(pi r) gamma_{,n}(t, r) dr, in closed form."""
    scalar, ta = _as(t)
    flat = np.atleast_1d(ta).ravel()
    out = np.empty(flat.shape)
    for i, tv in enumerate(flat):
        acc = 0.0
        for lo, hi, sg in r_section(float(tv), n):
            acc += sg * 0.5 * (math.sin(math.pi * hi) - math.sin(math.pi * lo))
        out[i] = acc
    out = out.reshape(np.shape(ta)) if not scalar else out[0]
    return _ret(out, scalar)


def cos_gate_integral_vec(t, n: int) -> np.ndarray:
    """Vectorized form of cos_gate_integral for large grids."""
    ta = np.asarray(t, dtype=float)
    u = n * ta
    j = np.floor(u + 0.25)
    w = u - j
    near = w <= 0.25
    v = np.where(near, w + 0.25, w - 0.25)
    outer = np.where(near, 1.0, -1.0)
    a = np.minimum(2.0 * v, 1.0 - 2.0 * v)
    # +[0,a] and -[1-a,1] contribute sin(pi a)/2 each
    return outer * np.sin(math.pi * a)


def compose_gates(t, r, n1: int, n2: int):
    """(gamma_{,n2}(beta_{,n1}(t), r), gamma_{,2 n1 n2}(t, r))."""
    inner = beta_tiled(t, n1)
    return gamma_tiled(inner, r, n2), gamma_tiled(t, r, 2 * n1 * n2)
