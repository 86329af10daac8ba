"""Coordinate MLPs with scaled activations, analytic Jacobians, training and
the constructive shift networks.

A network with layers ``(W_1, b_1), ..., (W_L, b_L)`` computes

    h_0 = x
    h_l = F((W_l h_{l-1} + b_l) / omega_l)     for l < L
    y   = W_L h_{L-1} + b_L

where ``F`` is the activation family and ``omega_l`` the per-hidden-layer
scale (a single value broadcast for the usual shallow/deep models).
"""

from __future__ import annotations

import copy
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisKind, ShiftCoefficients, eval_basis, eval_basis_derivative
from .errors import (
    BadShape,
    DimensionMismatch,
    EmptyDataset,
    EmptyRange,
    MalformedHeader,
    NonFiniteLoss,
    TruncatedData,
)
from .signals import psnr, write_atomic


@dataclass
class LayerParams:
    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=float, ndmin=2)
        self.bias = np.array(self.bias, dtype=float).ravel()
        if self.bias.size != self.weights.shape[0]:
            raise DimensionMismatch(
                f"bias length {self.bias.size} does not match weights {self.weights.shape}"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("layer parameters must be finite")

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]


@dataclass
class InrNetwork:
    layers: list
    activation: BasisKind
    omega_scale: object = 1.0

    def __post_init__(self):
        if len(self.layers) < 2:
            raise BadShape("an INR needs at least one hidden layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise DimensionMismatch(f"layer dims do not chain: {prev.out_dim} -> {nxt.in_dim}")
        n_hidden = len(self.layers) - 1
        omegas = np.broadcast_to(np.asarray(self.omega_scale, dtype=float), (n_hidden,))
        if np.any(omegas <= 0):
            raise ValueError("omega_scale must be positive")
        self.omegas = tuple(float(w) for w in omegas)

    @property
    def in_dim(self):
        return self.layers[0].in_dim

    @property
    def out_dim(self):
        return self.layers[-1].out_dim

    @property
    def shape(self):
        return [self.in_dim] + [layer.out_dim for layer in self.layers]

    def copy(self):
        return copy.deepcopy(self)

    def parameters(self):
        """Flat list of parameter arrays (views), weights before bias per layer."""
        out = []
        for layer in self.layers:
            out += [layer.weights, layer.bias]
        return out

    def _check_input(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1
        x = np.atleast_2d(x) if x.ndim == 1 else x.reshape(-1, 1) if x.ndim == 0 else x
        if x.shape[1] != self.in_dim:
            raise DimensionMismatch(f"input has dimension {x.shape[1]}, network expects {self.in_dim}")
        return x, single

    def _forward_cache(self, x):
        pre, acts = [], [x]
        h = x
        for layer, omega in zip(self.layers[:-1], self.omegas):
            z = (h @ layer.weights.T + layer.bias) / omega
            pre.append(z)
            h = eval_basis(self.activation, z)
            acts.append(h)
        last = self.layers[-1]
        return h @ last.weights.T + last.bias, pre, acts

    def forward(self, x):
        """Evaluate at one point (1-D input) or a batch (rows of a 2-D input)."""
        x, single = self._check_input(x)
        y, _, _ = self._forward_cache(x)
        return y[0] if single else y

    __call__ = forward

    def jacobian(self, x):
        """Exact chain-rule Jacobian, ``(out, in)`` for one point or ``(N, out, in)``."""
        x, single = self._check_input(x)
        _, pre, _ = self._forward_cache(x)
        # J_l = diag(F'(z_l) / omega_l) W_l J_{l-1}
        jac = np.broadcast_to(np.eye(self.in_dim), (x.shape[0], self.in_dim, self.in_dim))
        for layer, z, omega in zip(self.layers[:-1], pre, self.omegas):
            d = eval_basis_derivative(self.activation, z) / omega
            jac = d[:, :, None] * np.einsum("oi,nij->noj", layer.weights, jac)
        jac = np.einsum("oi,nij->noj", self.layers[-1].weights, jac)
        return jac[0] if single else jac

    def loss_and_grads(self, x, y):
        """Mean squared error and its gradients for every parameter array."""
        out, pre, acts = self._forward_cache(x)
        resid = out - y
        # overflow surfaces as a non-finite loss, which train() reports
        with np.errstate(over="ignore", invalid="ignore"):
            loss = float(np.mean(resid**2))
        delta = 2.0 * resid / resid.size
        grads = []
        last = self.layers[-1]
        grads.append((delta.T @ acts[-1], delta.sum(axis=0)))
        back = delta @ last.weights
        for i in range(len(self.layers) - 2, -1, -1):
            layer, omega = self.layers[i], self.omegas[i]
            dz = back * eval_basis_derivative(self.activation, pre[i]) / omega
            grads.append((dz.T @ acts[i], dz.sum(axis=0)))
            if i > 0:
                back = dz @ layer.weights
        grads.reverse()
        flat = []
        for gw, gb in grads:
            flat += [gw, gb]
        return loss, flat


def init_network(shape, kind, omega_scale=1.0, seed=0):
    """Uniform ``+-sqrt(6 / fan_in)`` weights, zero biases, deterministic per seed."""
    shape = [int(s) for s in shape]
    if len(shape) < 3 or min(shape) < 1:
        raise BadShape(f"shape needs >= 3 positive entries, got {shape}")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(shape, shape[1:]):
        bound = np.sqrt(6.0 / fan_in)
        layers.append(LayerParams(rng.uniform(-bound, bound, (fan_out, fan_in)), np.zeros(fan_out)))
    return InrNetwork(layers, kind, omega_scale)


# --- training --------------------------------------------------------------------

GD = "gd"
ADAM = "adam"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 1000
    batch_size: int = 1024
    seed: int = 0
    optimizer: str = ADAM
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.optimizer not in (GD, ADAM):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class TrainReport:
    final_loss: float
    loss_history: list = field(default_factory=list)
    psnr_history: list = field(default_factory=list)
    wall_time_seconds: float = 0.0


def train(net, inputs, targets, config):
    """Minimise MSE in place with mini-batch GD or Adam.

    ``loss_history[e]`` is the full-dataset MSE after epoch ``e``. Batches are
    reshuffled every epoch from ``config.seed``, so runs are repeatable.
    """
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] == 0:
        raise EmptyDataset("no training samples")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch("inputs and targets differ in length")
    if x.shape[1] != net.in_dim or y.shape[1] != net.out_dim:
        raise DimensionMismatch("data dimensions do not match the network")

    rng = np.random.default_rng(config.seed)
    params = net.parameters()
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    step = 0
    n = x.shape[0]
    report = TrainReport(final_loss=float("nan"))
    start = time.perf_counter()
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            loss, grads = net.loss_and_grads(x[idx], y[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} at step {step}")
            step += 1
            if config.learning_rate == 0:
                continue
            if config.optimizer == GD:
                for p, g in zip(params, grads):
                    p -= config.learning_rate * g
            else:
                b1, b2 = config.beta1, config.beta2
                corr1 = 1 - b1**step
                corr2 = 1 - b2**step
                for p, g, mi, vi in zip(params, grads, m, v):
                    mi *= b1
                    mi += (1 - b1) * g
                    vi *= b2
                    vi += (1 - b2) * g * g
                    p -= config.learning_rate * (mi / corr1) / (np.sqrt(vi / corr2) + config.eps)
        pred = net.forward(x)
        loss = float(np.mean((pred - y) ** 2))
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"loss became {loss} after epoch {len(report.loss_history) + 1}")
        report.loss_history.append(loss)
        report.psnr_history.append(psnr(y, pred))
    report.final_loss = report.loss_history[-1]
    report.wall_time_seconds = time.perf_counter() - start
    return report


# --- constructive networks ----------------------------------------------------------


def _as_coefficients(coeffs, k_range=None):
    if isinstance(coeffs, ShiftCoefficients):
        if k_range is not None and tuple(k_range) != coeffs.k_range:
            lo, hi = k_range
            coeffs = ShiftCoefficients(lo, [_lookup(coeffs, k) for k in range(lo, hi + 1)])
        return coeffs
    if isinstance(coeffs, dict):
        if k_range is None:
            return ShiftCoefficients.from_mapping(coeffs)
        lo, hi = k_range
        return ShiftCoefficients(lo, [coeffs.get(k, 0.0) for k in range(lo, hi + 1)])
    values = np.asarray(coeffs, dtype=float)
    if k_range is None:
        half = (values.size - 1) // 2
        k_range = (-half, -half + values.size - 1)
    return ShiftCoefficients(k_range[0], values)


def _lookup(coeffs, k):
    i = k - coeffs.k_min
    return float(coeffs.values[i]) if 0 <= i < coeffs.values.size else 0.0


def construct_scaled_shift_network(coeffs, kind, omega_scale, k_range=None):
    """Two-layer network computing ``sum_k a(k) F((x - omega k) / omega)``.

    Hidden weights are all one, hidden biases ``-omega k``, the activation is
    ``F(. / omega)`` and the output weights are the coefficients.
    """
    coeffs = _as_coefficients(coeffs, k_range)
    if len(coeffs) == 0:
        raise EmptyRange("coefficient range is empty")
    ks = coeffs.ks.astype(float)
    hidden = LayerParams(np.ones((ks.size, 1)), -omega_scale * ks)
    out = LayerParams(coeffs.values[None, :], np.zeros(1))
    return InrNetwork([hidden, out], kind, omega_scale)


def construct_shift_network(coeffs, kind, k_range=None):
    """Two-layer network computing ``sum_k a(k) F(x - k)`` exactly."""
    return construct_scaled_shift_network(coeffs, kind, 1.0, k_range)


def construct_deep_shift_network(outer_coeffs, inner_table, kind, omega1, omega2, inner_k_range):
    """Two-hidden-layer network from the deep approximation construction.

    Parameters
    ----------
    outer_coeffs : ShiftCoefficients
        ``b_k`` of the shallow target ``sum_k b_k F_{omega2}(x - omega2 k)``.
    inner_table : array, shape (len(outer_coeffs), n_inner)
        Row ``k`` holds ``a_j(k)``, the coefficients with which
        ``sum_j a_j(k) F_{omega1}(x - omega1 j)`` approximates ``x - omega2 k``.
    inner_k_range : (int, int)
        Shift range ``j_min..j_max`` for the first hidden layer.

    The weights are ``W1 = 1``, ``b1 = -omega1 j``, ``W2 = inner_table``,
    ``b2 = 0``, ``W3 = b``, ``b3 = 0``. An empty outer range gives the zero
    network (a single hidden unit with zero output weight).
    """
    outer_coeffs = _as_coefficients(outer_coeffs)
    js = np.arange(inner_k_range[0], inner_k_range[1] + 1, dtype=float)
    if js.size == 0:
        raise EmptyRange("inner range is empty")
    table = np.asarray(inner_table, dtype=float)
    if len(outer_coeffs) == 0:
        table = np.zeros((1, js.size))
        outer = np.zeros(1)
    else:
        outer = outer_coeffs.values
        if table.shape != (outer.size, js.size):
            raise DimensionMismatch(
                f"inner table shape {table.shape} does not match ({outer.size}, {js.size})"
            )
    layers = [
        LayerParams(np.ones((js.size, 1)), -omega1 * js),
        LayerParams(table, np.zeros(table.shape[0])),
        LayerParams(outer[None, :], np.zeros(1)),
    ]
    return InrNetwork(layers, kind, (omega1, omega2))


# --- least-squares fitting of the shallow shift network ---------------------------------


def shift_design(kind, omega_scale, k_range, t):
    ks = np.arange(k_range[0], k_range[1] + 1)
    return eval_basis(kind, np.asarray(t, dtype=float)[:, None] / omega_scale - ks)


def fit_shift_network(times, values, kind, omega_scale, ridge=1e-8, pad=4):
    """Fit the output layer of a two-layer shift network by ridge least squares.

    The hidden layer is fixed at shifts ``omega k`` covering the sample range
    (plus ``pad`` units each side); the returned network maps ``t`` to the
    fitted values, ``1 -> D``. ``omega_scale`` sets the bandwidth and so the
    amount of smoothing.
    """
    t = np.asarray(times, dtype=float).ravel()
    y = np.asarray(values, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if t.size == 0:
        raise EmptyDataset("no samples to fit")
    if y.shape[0] != t.size:
        raise DimensionMismatch("times and values differ in length")
    k_range = (int(np.floor(t[0] / omega_scale)) - pad, int(np.ceil(t[-1] / omega_scale)) + pad)
    design = shift_design(kind, omega_scale, k_range, t)
    gram = design.T @ design
    reg = ridge * np.trace(gram) / gram.shape[0]
    coef = np.linalg.solve(gram + reg * np.eye(gram.shape[0]), design.T @ y)
    ks = np.arange(k_range[0], k_range[1] + 1, dtype=float)
    hidden = LayerParams(np.ones((ks.size, 1)), -omega_scale * ks)
    out = LayerParams(coef.T, np.zeros(y.shape[1]))
    return InrNetwork([hidden, out], kind, omega_scale)


def rescale_io(net, in_center, in_scale, out_center, out_scale):
    """Fold affine input/output normalisation into the first and last layers.

    If ``net`` maps ``u = (x - in_center) / in_scale`` to ``v`` with
    ``y = out_center + out_scale * v``, the returned network maps ``x`` to ``y``.
    """
    net = net.copy()
    in_center = np.broadcast_to(np.asarray(in_center, dtype=float), (net.in_dim,))
    in_scale = np.broadcast_to(np.asarray(in_scale, dtype=float), (net.in_dim,))
    out_center = np.broadcast_to(np.asarray(out_center, dtype=float), (net.out_dim,))
    out_scale = np.broadcast_to(np.asarray(out_scale, dtype=float), (net.out_dim,))
    first = net.layers[0]
    w = first.weights / in_scale
    first.bias = first.bias - w @ in_center
    first.weights = w
    last = net.layers[-1]
    last.weights = last.weights * out_scale[:, None]
    last.bias = last.bias * out_scale + out_center
    return net


# --- checkpoints -------------------------------------------------------------------

CHECKPOINT_MAGIC = "sincinr-checkpoint"


def checkpoint_bytes(net, seed=None):
    """Serialise as one JSON header line followed by little-endian float64 parameters.

    Parameters are laid out layer by layer, weights (row-major) before bias.
    """
    header = {
        "format": CHECKPOINT_MAGIC,
        "version": 1,
        "shape": net.shape,
        "activation": net.activation.to_dict(),
        "omega": list(net.omegas),
        "seed": seed,
    }
    blob = np.concatenate([p.ravel() for p in net.parameters()]).astype("<f8").tobytes()
    return (json.dumps(header, sort_keys=True) + "\n").encode() + blob


def network_from_checkpoint_bytes(data):
    head, sep, blob = bytes(data).partition(b"\n")
    try:
        header = json.loads(head.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedHeader(f"checkpoint header is not JSON: {exc}") from exc
    if not sep or header.get("format") != CHECKPOINT_MAGIC:
        raise MalformedHeader("not a sincinr checkpoint")
    shape = header["shape"]
    sizes = [(o, i) for i, o in zip(shape, shape[1:])]
    expected = sum(o * i + o for o, i in sizes)
    if len(blob) != 8 * expected:
        raise TruncatedData(f"expected {8 * expected} parameter bytes, found {len(blob)}")
    flat = np.frombuffer(blob, dtype="<f8").astype(float)
    layers, pos = [], 0
    for o, i in sizes:
        w = flat[pos : pos + o * i].reshape(o, i)
        pos += o * i
        layers.append(LayerParams(w, flat[pos : pos + o]))
        pos += o
    return InrNetwork(layers, BasisKind.from_dict(header["activation"]), header["omega"])


def save_checkpoint(net, path, seed=None):
    write_atomic(path, checkpoint_bytes(net, seed))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        return network_from_checkpoint_bytes(fh.read())
