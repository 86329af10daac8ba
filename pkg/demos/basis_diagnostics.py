"""Which activation families can stand in for a sampling basis?

A shifted family F(x - k) reproduces constants only if it satisfies the
partition of unity, and it is a stable (Riesz) basis only if the periodized
power spectrum stays between two positive bounds. This script measures both
for the built-in families, then shows what the failure costs: the
approximation error of the scaled shift space as the scale shrinks.
"""

import numpy as np

from sincinr import basis as B
from sincinr.basis import BasisKind
from sincinr.signals import Signal1D

print("Partition-of-unity residual and Riesz bounds")
for kind in (BasisKind.sinc(), BasisKind.gaussian(0.25, normalized=True), BasisKind.gaussian(1.0, normalized=True)):
    d = B.diagnose(kind)
    print(f"  {kind.kind:9s} {kind.params}: PUC residual {d.puc_residual:.2e}, A = {d.riesz_lower:.4f}, B = {d.riesz_upper:.4f}")
for name, reason in B.RIESZ_VIOLATION.items():
    print(f"  {name:9s}: unsupported ({reason})")

# The error kernel averaged over a smooth spectrum should vanish as the scale
# shrinks. It does for sinc; a narrow Gaussian leaves a floor.
xi = np.linspace(-30, 30, 60001)
spectrum = np.exp(-(xi**2))
print("\nAveraged error kernel at scale 1 and 0.1")
for kind in (BasisKind.sinc(), BasisKind.gaussian(0.25, normalized=True)):
    hi = B.averaged_error(kind, 1.0, spectrum, xi)
    lo = B.averaged_error(kind, 0.1, spectrum, xi)
    print(f"  {kind.kind:9s}: {hi:.3e} -> {lo:.3e} (ratio {hi / lo:.1f})")

x = np.arange(-6.0, 6.0, 0.002)
bump = Signal1D(x, np.exp(-(x**2) / 0.5))
print("\nRelative L2 error of the sinc shift-space approximation of a bump")
for omega in (0.4, 0.2, 0.1, 0.05):
    recon, coeffs = B.reconstruct_signal(BasisKind.sinc(), bump, omega)
    err = B.approximation_error(bump, recon) / B.l2_norm(bump)
    print(f"  omega = {omega:<5g} {len(coeffs):4d} coefficients, error {err:.4f}")
