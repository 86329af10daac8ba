"""Shared fixtures for unit and acceptance tests."""

import numpy as np
from scipy.special import erf

from sincinr.basis import BasisKind, ShiftCoefficients
from sincinr.dynamics import OdeSystem, integrate_rk4
from sincinr.network import InrNetwork, LayerParams, construct_deep_shift_network, init_network
from sincinr.signals import gen_bandlimited


def bump(x, width=0.5):
    return np.exp(-np.asarray(x) ** 2 / (2 * width**2))


def plateau(x, half=6.0, edge=1.0):
    """Smooth window equal to 1 on ``|x| < half`` (erf edges of width ``edge``)."""
    return 0.5 * (erf((x + half) / edge) - erf((x - half) / edge))


def deep_case(omega1=0.25, omega2=0.25, outer=8, inner=40):
    """Deep sinc network whose inner layer sinc-interpolates ``(x - omega2 k) w(x)``.

    Returns ``(deep_net, outer_coeffs)``; the shallow target is
    ``construct_scaled_shift_network(outer_coeffs, sinc, omega2)``.
    """
    ks = np.arange(-outer, outer + 1)
    js = np.arange(-inner, inner + 1)
    table = np.array([(omega1 * js - omega2 * k) * plateau(omega1 * js) for k in ks])
    coeffs = ShiftCoefficients(-outer, bump(omega2 * ks))
    net = construct_deep_shift_network(coeffs, table, BasisKind.sinc(), omega1, omega2, (-inner, inner))
    return net, coeffs


def signal_fit_data(samples=256, max_freq=4.0, terms=8, seed=0):
    """Band-limited signal min-max scaled to [0, 1] on inputs in [-1, 1]."""
    grid = np.linspace(0.0, (terms + 1) / (2 * max_freq), samples)
    sig, _ = gen_bandlimited(max_freq, terms, seed=seed, grid=grid)
    y = (sig.values - sig.values.min()) / np.ptp(sig.values)
    x = 2 * (grid - grid[0]) / (grid[-1] - grid[0]) - 1
    return x[:, None], y[:, None]


def reference_forward(net, x):
    """Straight-line re-implementation of the layer recursion."""
    from sincinr.basis import eval_basis

    h = np.atleast_2d(np.asarray(x, dtype=float))
    for layer, omega in zip(net.layers[:-1], net.omegas):
        h = np.array([eval_basis(net.activation, (layer.weights @ row + layer.bias) / omega) for row in h])
    last = net.layers[-1]
    return np.array([last.weights @ row + last.bias for row in h])


def random_net(rng, shape, kind, omega=None):
    omega = float(rng.uniform(0.5, 2.0)) if omega is None else omega
    net = init_network(shape, kind, omega, seed=int(rng.integers(2**31)))
    for layer in net.layers:
        layer.bias = rng.uniform(-1, 1, layer.bias.shape)
    return net


def single_neuron(kind, omega):
    return InrNetwork([LayerParams([[1.0]], [0.0]), LayerParams([[1.0]], [0.0])], kind, omega)


def lorenz_reference(x0=(-8.0, 7.0, 27.0), dt=0.1, samples=1000):
    return integrate_rk4(OdeSystem.lorenz(), x0, 0.0, (samples - 1) * dt, dt, substeps=10)


def vdp_on_cycle():
    """A Van der Pol state on the limit cycle (50 time units of burn-in from (2, 0))."""
    burn = integrate_rk4(OdeSystem.van_der_pol(), [2.0, 0.0], 0.0, 50.0, 0.01)
    return burn.states[-1]
