"""(L,N)-networks: L-1 ReLU layers, one step (or logistic) gate layer and
complex output weights.

Gate blocks are assembled from the atom lists of the gates module so the
network realisation and the piecewise formulas share one source of truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from . import gates

FORMAT_NAME = "specbarron.lnnetwork"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Heaviside:
    kind: str = "heaviside"


@dataclass(frozen=True)
class Sigmoidal:
    tau: float = 1.0
    kind: str = "sigmoidal"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")


ActivationMode = Union[Heaviside, Sigmoidal]


def logistic(z):
    # numerically stable 1/(1+exp(-z))
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class DenseLayer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ValueError(f"layer shapes disagree: weight {w.shape}, bias {b.shape}")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def width(self) -> int:
        return self.weight.shape[0]

    @property
    def fan_in(self) -> int:
        return self.weight.shape[1]

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return z @ self.weight.T + self.bias


class LNNetwork:
    """Immutable (L, N)-network."""

    def __init__(self, input_dim: int, hidden: Sequence[DenseLayer], gate: DenseLayer,
                 output_weights, output_bias: complex = 0.0,
                 mode: ActivationMode = Heaviside(), declared_width: int | None = None):
        self.input_dim = int(input_dim)
        self.hidden = tuple(hidden)
        self.gate = gate
        self.output_weights = np.asarray(output_weights, dtype=complex).reshape(-1)
        self.output_bias = complex(output_bias)
        self.mode = mode
        fan = self.input_dim
        for i, layer in enumerate(self.hidden + (self.gate,)):
            if layer.fan_in != fan:
                raise ValueError(f"layer {i} expects {layer.fan_in} inputs, previous layer gives {fan}")
            fan = layer.width
        if self.output_weights.shape[0] != fan:
            raise ValueError("output weights do not match the gate width")
        if declared_width is not None and max(self.widths(), default=0) > declared_width:
            raise ValueError(f"layer width {max(self.widths())} exceeds declared N = {declared_width}")
        self.declared_width = declared_width

    # -- structure -------------------------------------------------------------
    @property
    def depth(self) -> int:
        return len(self.hidden) + 1

    def widths(self) -> list[int]:
        return [layer.width for layer in self.hidden] + [self.gate.width]

    @property
    def width(self) -> int:
        return max(self.widths())

    def with_mode(self, mode: ActivationMode) -> "LNNetwork":
        return LNNetwork(self.input_dim, self.hidden, self.gate, self.output_weights,
                         self.output_bias, mode, self.declared_width)

    def with_output(self, weights, bias) -> "LNNetwork":
        return LNNetwork(self.input_dim, self.hidden, self.gate, weights, bias, self.mode, self.declared_width)

    def with_declared_width(self, n: int | None) -> "LNNetwork":
        return LNNetwork(self.input_dim, self.hidden, self.gate, self.output_weights,
                         self.output_bias, self.mode, n)

    def real_part(self) -> "LNNetwork":
        return self.with_output(self.output_weights.real, self.output_bias.real)

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.output_weights.imag == 0) and self.output_bias.imag == 0)

    # -- evaluation --------------------------------------------------------------
    def _as_points(self, x) -> tuple[np.ndarray, bool]:
        xa = np.asarray(x, dtype=float)
        d = self.input_dim
        if xa.ndim == 0:
            if d != 1:
                raise ValueError("dimension mismatch")
            return xa.reshape(1, 1), True
        if xa.ndim == 1:
            if xa.shape[0] == d:
                return xa.reshape(1, d), True
            if d == 1:
                return xa.reshape(-1, 1), False
            raise ValueError(f"dimension mismatch: network takes {d} inputs")
        if xa.shape[1] != d:
            raise ValueError(f"dimension mismatch: network takes {d} inputs")
        return xa, False

    def hidden_output(self, x: np.ndarray) -> np.ndarray:
        z = x
        for layer in self.hidden:
            z = gates.relu(layer(z))
        return z

    def gate_preactivation(self, x) -> np.ndarray:
        xa, _ = self._as_points(x)
        return self.gate(self.hidden_output(xa))

    def gate_activation(self, g: np.ndarray) -> np.ndarray:
        if isinstance(self.mode, Sigmoidal):
            return logistic(self.mode.tau * g)
        return gates.heaviside(g)

    def eval(self, x, chunk: int = 65536):
        xa, single = self._as_points(x)
        out = np.empty(xa.shape[0], dtype=complex)
        for start in range(0, xa.shape[0], chunk):
            part = xa[start:start + chunk]
            act = self.gate_activation(self.gate(self.hidden_output(part)))
            out[start:start + chunk] = act @ self.output_weights + self.output_bias
        return complex(out[0]) if single else out

    __call__ = eval

    def __repr__(self) -> str:
        return f"LNNetwork(d={self.input_dim}, L={self.depth}, widths={self.widths()}, mode={self.mode})"


def zero_network(input_dim: int, depth: int = 1, bias: complex = 0.0) -> LNNetwork:
    hidden = [DenseLayer(np.zeros((0, input_dim if i == 0 else 0)), np.zeros(0)) for i in range(depth - 1)]
    fan = input_dim if depth == 1 else 0
    return LNNetwork(input_dim, hidden, DenseLayer(np.zeros((0, fan)), np.zeros(0)), np.zeros(0), bias)


# --------------------------------------------------------------------------
# Gate blocks
# --------------------------------------------------------------------------

def layer_count(l1: float, L: int) -> int:
    """Smallest integer k with k^L >= |xi|_1 + 1, i.e. ceil((|xi|_1+1)^{1/L})."""
    target = l1 + 1.0
    k = max(1, int(math.floor(target ** (1.0 / L))))
    while k ** L < target:
        k += 1
    while k > 1 and (k - 1) ** L >= target:
        k -= 1
    return k


@dataclass(frozen=True)
class GateBlock:
    xi: np.ndarray
    theta: float
    r: float
    L: int
    n_layers: tuple[int, ...]
    n_xi: int
    relu_atoms: tuple[gates.ReluAtoms, ...]
    heaviside_atoms: gates.HeavisideAtoms
    network: LNNetwork

    def t_of(self, x: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(x) @ self.xi + self.theta) / self.n_xi

    def widths(self) -> list[int]:
        return self.network.widths()


def assemble_gate_block(xi, theta: float, r: float, L: int, input_dim: int | None = None) -> GateBlock:
    """Sub-network whose output equals gamma_{,n_xi}(t_xi(x), r) in step mode."""
    if L < 1:
        raise ValueError("L must be >= 1")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = input_dim if input_dim is not None else xi.shape[0]
    l1 = float(np.abs(xi).sum())
    k = layer_count(l1, L)
    n_layers = (k,) * L
    n_xi = 2 ** (L - 1) * k ** L
    # affine input t = (xi.x + theta)/n_xi
    a_in = xi / n_xi
    b_in = theta / n_xi
    hidden: list[DenseLayer] = []
    relu_lists = []
    prev_coef = None  # how the previous layer recombines into its scalar
    for j in range(L - 1):
        atoms = gates.beta_relu_atoms(n_layers[j])
        relu_lists.append(atoms)
        if j == 0:
            W = np.outer(atoms.slope, a_in)
            b = atoms.slope * b_in + atoms.offset
        else:
            W = np.outer(atoms.slope, prev_coef)
            b = atoms.offset.copy()
        hidden.append(DenseLayer(W, b))
        prev_coef = atoms.coef
    hv = gates.gamma_heaviside_atoms(r, n_layers[-1])
    if L == 1:
        Wg = np.outer(hv.scale, a_in)
        bg = hv.scale * b_in - hv.threshold
    else:
        Wg = np.outer(hv.scale, prev_coef)
        bg = -hv.threshold
    net = LNNetwork(d, hidden, DenseLayer(Wg, bg), hv.sign, hv.offset)
    return GateBlock(xi, float(theta), float(r), L, n_layers, n_xi, tuple(relu_lists), hv, net)


def combine_networks(parts: Sequence[tuple[LNNetwork, complex]], input_dim: int | None = None,
                     mode: ActivationMode | None = None,
                     declared_width: int | None = None) -> LNNetwork:
    """Block-diagonal stacking: output = sum of coeff * part(x)."""
    parts = list(parts)
    if not parts:
        if input_dim is None:
            raise ValueError("empty merge needs input_dim")
        return zero_network(input_dim)
    depth = parts[0][0].depth
    d = parts[0][0].input_dim
    for net, _ in parts:
        if net.depth != depth:
            raise ValueError("depth mismatch in merge")
        if net.input_dim != d:
            raise ValueError("input dimension mismatch in merge")
    layers = []
    for li in range(depth):
        blocks = [(net.hidden + (net.gate,))[li] for net, _ in parts]
        if li == 0:
            W = np.vstack([b.weight for b in blocks])
        else:
            rows = sum(b.width for b in blocks)
            cols = sum(b.fan_in for b in blocks)
            W = np.zeros((rows, cols))
            r0 = c0 = 0
            for b in blocks:
                W[r0:r0 + b.width, c0:c0 + b.fan_in] = b.weight
                r0 += b.width
                c0 += b.fan_in
        layers.append(DenseLayer(W, np.concatenate([b.bias for b in blocks])))
    out_w = np.concatenate([c * net.output_weights for net, c in parts])
    out_b = sum(c * net.output_bias for net, c in parts)
    return LNNetwork(d, layers[:-1], layers[-1], out_w, out_b,
                     mode if mode is not None else parts[0][0].mode, declared_width)


def parallel_merge(blocks: Sequence[tuple[GateBlock, complex]], input_dim: int | None = None,
                   mode: ActivationMode | None = None) -> LNNetwork:
    if blocks:
        L = blocks[0][0].L
        if any(b.L != L for b, _ in blocks):
            raise ValueError("depth mismatch in merge")
    return combine_networks([(b.network, c) for b, c in blocks], input_dim, mode)


@dataclass(frozen=True)
class ExtendedNetwork:
    network: LNNetwork
    nominal_width: int
    actual_width: int
    passthrough_units: int


def identity_extend(net: LNNetwork, L: int, general: bool = False) -> ExtendedNetwork:
    """Prepend L-1 ReLU layers that carry the inputs through unchanged.

    On Omega the inputs are nonnegative so d units per layer suffice; with
    general=True each coordinate uses the pair ReLU(t), ReLU(-t).
    """
    if net.depth != 1:
        raise ValueError("identity_extend expects a one-hidden-layer network")
    if L < 1:
        raise ValueError("L must be >= 1")
    d = net.input_dim
    nominal = net.gate.width
    if L == 1:
        return ExtendedNetwork(net, nominal, nominal, 0)
    eye = np.eye(d)
    if general:
        first = DenseLayer(np.vstack([eye, -eye]), np.zeros(2 * d))
        keep = DenseLayer(np.eye(2 * d), np.zeros(2 * d))
        gate_w = np.hstack([net.gate.weight, -net.gate.weight])
        units = 2 * d
    else:
        first = DenseLayer(eye, np.zeros(d))
        keep = DenseLayer(eye.copy(), np.zeros(d))
        gate_w = net.gate.weight
        units = d
    hidden = [first] + [keep] * (L - 2)
    ext = LNNetwork(d, hidden, DenseLayer(gate_w, net.gate.bias), net.output_weights,
                    net.output_bias, net.mode)
    return ExtendedNetwork(ext, nominal, max(units, nominal), units)


# --------------------------------------------------------------------------
# One-dimensional structure
# --------------------------------------------------------------------------

class BreakpointBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PiecewiseProfile:
    """Piecewise-constant restriction t -> net(t, x_2..x_d) on [t0, t1]."""

    breakpoints: np.ndarray  # includes both ends
    values: np.ndarray  # one complex value per piece

    @property
    def pieces(self) -> int:
        return len(self.values)

    def sign_changes(self) -> int:
        re = self.values.real
        nz = re[re != 0]
        if len(nz) < 2:
            return 0
        return int(np.sum(np.sign(nz[1:]) != np.sign(nz[:-1])))

    def __call__(self, t) -> np.ndarray:
        idx = np.searchsorted(self.breakpoints, np.asarray(t, dtype=float), side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]


def profile_1d(net: LNNetwork, line: Sequence[float] = (), t_range: tuple[float, float] = (0.0, 1.0),
               max_breakpoints: int = 1_000_000) -> PiecewiseProfile:
    """Exact breakpoints of t -> net(t, *line) for a step-mode network."""
    if not isinstance(net.mode, Heaviside):
        raise ValueError("profile_1d needs a Heaviside-mode network")
    line = np.asarray(line, dtype=float).reshape(-1)
    if line.shape[0] != net.input_dim - 1:
        raise ValueError("line must fix the remaining d-1 coordinates")

    def embed(t):
        t = np.asarray(t, dtype=float).reshape(-1, 1)
        return np.hstack([t, np.broadcast_to(line, (t.shape[0], line.shape[0]))])

    bps = np.array([float(t_range[0]), float(t_range[1])])

    def add_roots(values: np.ndarray, bps: np.ndarray) -> np.ndarray:
        # values: (len(bps), units), affine on each piece
        lo, hi = values[:-1], values[1:]
        cross = (lo * hi) < 0
        if not np.any(cross):
            return bps
        i, u = np.nonzero(cross)
        frac = lo[i, u] / (lo[i, u] - hi[i, u])
        roots = bps[i] + frac * (bps[i + 1] - bps[i])
        return np.unique(np.concatenate([bps, roots]))

    # every pre-activation is affine between consecutive breakpoints of the
    # layers below it, so its sign changes are located exactly by interpolation
    for depth in range(len(net.hidden) + 1):
        z = embed(bps)
        for layer in net.hidden[:depth]:
            z = gates.relu(layer(z))
        layer = net.hidden[depth] if depth < len(net.hidden) else net.gate
        bps = add_roots(layer(z), bps)
        if len(bps) > max_breakpoints:
            raise BreakpointBudgetExceeded(f"more than {max_breakpoints} breakpoints")
    mids = 0.5 * (bps[:-1] + bps[1:])
    vals = net.eval(embed(mids))
    return PiecewiseProfile(bps, np.asarray(vals, dtype=complex).reshape(-1))


# --------------------------------------------------------------------------
# Serialisation
# --------------------------------------------------------------------------

class _LayerModel(BaseModel):
    shape: tuple[int, int]
    weight: list[list[float]]
    bias: list[float]

    @model_validator(mode="after")
    def _check(self):
        rows, cols = self.shape
        if len(self.weight) != rows or any(len(r) != cols for r in self.weight):
            raise ValueError("weight matrix does not match its declared shape")
        if len(self.bias) != rows:
            raise ValueError("bias length does not match the declared shape")
        return self


class _ActivationModel(BaseModel):
    kind: Literal["heaviside", "sigmoidal"]
    tau: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _tau(self):
        if self.kind == "sigmoidal" and self.tau is None:
            raise ValueError("sigmoidal activation needs tau")
        return self


class _OutputModel(BaseModel):
    weights: list[tuple[float, float]]
    bias: tuple[float, float]


class NetworkFile(BaseModel):
    format: Literal["specbarron.lnnetwork"]
    version: Literal[1]
    input_dim: int = Field(ge=1)
    declared_width: int | None = Field(default=None, ge=0)
    activation: _ActivationModel
    hidden_layers: list[_LayerModel]
    gate_layer: _LayerModel
    output: _OutputModel


def _layer_dict(layer: DenseLayer) -> dict:
    return {"shape": [int(layer.weight.shape[0]), int(layer.weight.shape[1])],
            "weight": [[float(v) for v in row] for row in layer.weight],
            "bias": [float(v) for v in layer.bias]}


def to_dict(net: LNNetwork) -> dict:
    act = {"kind": "heaviside"} if isinstance(net.mode, Heaviside) else {"kind": "sigmoidal", "tau": net.mode.tau}
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "declared_width": net.declared_width,
        "activation": act,
        "hidden_layers": [_layer_dict(l) for l in net.hidden],
        "gate_layer": _layer_dict(net.gate),
        "output": {"weights": [[float(c.real), float(c.imag)] for c in net.output_weights],
                   "bias": [float(net.output_bias.real), float(net.output_bias.imag)]},
    }


def from_dict(data: dict) -> LNNetwork:
    model = NetworkFile.model_validate(data)

    def layer(m: _LayerModel) -> DenseLayer:
        w = np.array(m.weight, dtype=float).reshape(m.shape)
        return DenseLayer(w, np.array(m.bias, dtype=float))

    mode: ActivationMode = Heaviside() if model.activation.kind == "heaviside" else Sigmoidal(model.activation.tau)
    out_w = np.array([complex(a, b) for a, b in model.output.weights], dtype=complex)
    return LNNetwork(model.input_dim, [layer(l) for l in model.hidden_layers], layer(model.gate_layer),
                     out_w, complex(*model.output.bias), mode, model.declared_width)


def serialize(net: LNNetwork) -> str:
    return json.dumps(to_dict(net), indent=1, sort_keys=True) + "\n"


def deserialize(text: str) -> LNNetwork:
    return from_dict(json.loads(text))


def save_network(net: LNNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(net))


def load_network(path) -> LNNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize(fh.read())
