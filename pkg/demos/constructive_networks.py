"""Networks built by hand rather than trained.

A two-layer sinc network with unit input weights and biases -omega k is the
synthesis operator of the scaled shift space, so approximation coefficients
become output weights directly. Stacking a second hidden layer whose weights
hold an inner interpolation table gives the deep construction.
"""

import numpy as np

from sincinr import basis as B
from sincinr.basis import BasisKind
from sincinr.network import construct_deep_shift_network, construct_scaled_shift_network
from sincinr.signals import Signal1D
from scipy.special import erf

SINC = BasisKind.sinc()

x = np.arange(-6.0, 6.0, 0.002)
target = np.exp(-(x**2) / 0.5)
omega = 0.05
coeffs = B.approx_operator(Signal1D(x, target), omega)
net = construct_scaled_shift_network(coeffs, SINC, omega)
out = net(x[:, None])[:, 0]
print(f"shallow network: shape {net.shape}")
print(f"  relative L2 error to the bump     {np.linalg.norm(out - target) / np.linalg.norm(target):.2e}")
print(f"  gap to direct synthesis           {np.abs(out - B.scaled_reconstruct(SINC, coeffs, omega, x)).max():.1e}")

# Deep case: the inner layer sinc-interpolates (x - omega2 k) on a window so
# that the outer layer sees the same arguments as the shallow network.
omega1 = omega2 = 0.25
ks, js = np.arange(-8, 9), np.arange(-40, 41)
window = 0.5 * (erf(omega1 * js + 6) - erf(omega1 * js - 6))
table = np.array([(omega1 * js - omega2 * k) * window for k in ks])
outer = B.ShiftCoefficients(-8, np.exp(-((omega2 * ks) ** 2) / 0.5))
deep = construct_deep_shift_network(outer, table, SINC, omega1, omega2, (-40, 40))
shallow = construct_scaled_shift_network(outer, SINC, omega2)
grid = np.linspace(-2, 2, 801)[:, None]
print(f"\ndeep network: shape {deep.shape}, scales {deep.omegas}")
print(f"  sup gap to shallow target on [-2, 2]  {np.abs(deep(grid) - shallow(grid)).max():.2e}")
