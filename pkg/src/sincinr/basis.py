"""Generator/activation families and sampling-theory diagnostics.

Fourier convention throughout: ``F_hat(w) = integral F(x) exp(-i w x) dx``
with ``w`` in radians per unit length. With this convention the normalised
sinc ``sin(pi x) / (pi x)`` has ``F_hat = 1`` on ``[-pi, pi)`` and ``0``
elsewhere. The rectangle is taken half-open so that its ``2 pi``
periodisation is exactly one everywhere (the value on a single point does
not matter for an L2 function).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite as _herm

from .errors import GridMismatch, QuadratureTooCoarse, UnsupportedKind
from .signals import Signal1D

SINC = "sinc"
GAUSSIAN = "gaussian"
SINE = "sine"
RELU = "relu"
GABOR = "gabor"
HERMITE = "hermite"

KINDS = (SINC, GAUSSIAN, SINE, RELU, GABOR, HERMITE)
INTEGRABLE = (SINC, GAUSSIAN, GABOR, HERMITE)

_REQUIRED = {
    SINC: ("bandwidth",),
    GAUSSIAN: ("s",),
    SINE: ("omega",),
    RELU: (),
    GABOR: ("sigma", "omega0"),
    HERMITE: ("max_degree", "coeffs"),
}

# Why a family is not a Riesz basis: keyed by kind, used in reports.
RIESZ_VIOLATION = {
    RELU: "condition 1 (stable l2 norm equivalence): ReLU is not square integrable",
    SINE: "condition 1 (stable l2 norm equivalence): sine is not square integrable",
}


@dataclass(frozen=True)
class BasisKind:
    """A generator family plus its shape parameters.

    Use the factory helpers (:meth:`sinc`, :meth:`gaussian`, ...) rather than
    building ``params`` by hand.
    """

    kind: str
    params: dict = field(default_factory=dict)
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        missing = [p for p in _REQUIRED[self.kind] if p not in self.params]
        if missing:
            raise ValueError(f"{self.kind} needs parameters {missing}")
        params = dict(self.params)
        for name in _REQUIRED[self.kind]:
            if name in ("max_degree", "coeffs"):
                continue
            value = float(params[name])
            if not value > 0:
                raise ValueError(f"{self.kind}.{name} must be positive, got {value}")
            params[name] = value
        if self.kind == HERMITE:
            deg = int(params["max_degree"])
            if not 0 <= deg <= 10:
                raise ValueError("hermite max_degree must be in 0..10")
            coeffs = tuple(float(c) for c in params["coeffs"])
            if len(coeffs) != deg + 1:
                raise ValueError("hermite needs max_degree + 1 coefficients")
            params["max_degree"], params["coeffs"] = deg, coeffs
        if self.normalized and self.kind not in INTEGRABLE:
            raise ValueError(f"{self.kind} is not integrable and cannot be normalised")
        object.__setattr__(self, "params", params)

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items())), self.normalized))

    # factories

    @classmethod
    def sinc(cls, bandwidth=1.0, normalized=True):
        return cls(SINC, {"bandwidth": bandwidth}, normalized)

    @classmethod
    def gaussian(cls, s=1.0, normalized=False):
        return cls(GAUSSIAN, {"s": s}, normalized)

    @classmethod
    def sine(cls, omega=1.0):
        return cls(SINE, {"omega": omega}, False)

    @classmethod
    def relu(cls):
        return cls(RELU, {}, False)

    @classmethod
    def gabor(cls, sigma=1.0, omega0=2.0, normalized=False):
        return cls(GABOR, {"sigma": sigma, "omega0": omega0}, normalized)

    @classmethod
    def hermite(cls, max_degree=4, coeffs=None, normalized=False):
        if coeffs is None:
            coeffs = [1.0] * (max_degree + 1)
        return cls(HERMITE, {"max_degree": max_degree, "coeffs": coeffs}, normalized)

    # serialisation

    def to_dict(self):
        params = dict(self.params)
        if "coeffs" in params:
            params["coeffs"] = list(params["coeffs"])
        return {"kind": self.kind, "params": params, "normalized": self.normalized}

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], dict(data.get("params", {})), bool(data.get("normalized", False)))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @property
    def integrable(self):
        return self.kind in INTEGRABLE

    @property
    def scale(self):
        """Multiplier applied to the raw shape when ``normalized`` is set."""
        if not self.normalized:
            return 1.0
        p = self.params
        if self.kind == SINC:
            return 1.0
        if self.kind == GAUSSIAN:
            return 1.0 / (p["s"] * math.sqrt(2 * math.pi))
        if self.kind == GABOR:
            area = p["sigma"] * math.sqrt(2 * math.pi) * math.exp(-0.5 * (p["sigma"] * p["omega0"]) ** 2)
            return 1.0 / area
        if self.kind == HERMITE:
            f0 = _hermite_hat_raw(p["coeffs"], np.zeros(1))[0].real
            if abs(f0) < 1e-12:
                raise ValueError("hermite coefficients give zero integral; cannot normalise")
            return 1.0 / f0
        raise AssertionError(self.kind)


def _hermite_hat_raw(coeffs, omega):
    # H_n(x) exp(-x^2/2) is an eigenfunction of the Fourier transform with
    # eigenvalue sqrt(2 pi) (-i)^n.
    omega = np.asarray(omega, dtype=float)
    phases = np.array([(-1j) ** n for n in range(len(coeffs))])
    return math.sqrt(2 * math.pi) * np.exp(-0.5 * omega**2) * _herm.hermval(omega, np.asarray(coeffs) * phases)


def _dsinc(u):
    # derivative of sin(pi u)/(pi u)
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    nz = u != 0
    un = u[nz]
    out[nz] = (np.cos(np.pi * un) - np.sinc(un)) / un
    return out


def eval_basis(kind, x):
    """Evaluate the generator pointwise (vectorised over ``x``).

    Sinc is ``b sinc(b x)`` when normalised (``sinc(u) = sin(pi u)/(pi u)``,
    unit integral) and ``sin(b x)/(b x)`` otherwise (unit peak).
    """
    x = np.asarray(x, dtype=float)
    p = kind.params
    k = kind.kind
    if k == SINC:
        b = p["bandwidth"]
        if kind.normalized:
            return b * np.sinc(b * x)
        return np.sinc(b * x / np.pi)
    if k == GAUSSIAN:
        return kind.scale * np.exp(-0.5 * (x / p["s"]) ** 2)
    if k == SINE:
        return np.sin(p["omega"] * x)
    if k == RELU:
        return np.maximum(x, 0.0)
    if k == GABOR:
        return kind.scale * np.cos(p["omega0"] * x) * np.exp(-0.5 * (x / p["sigma"]) ** 2)
    if k == HERMITE:
        return kind.scale * _herm.hermval(x, p["coeffs"]) * np.exp(-0.5 * x**2)
    raise AssertionError(k)


def eval_basis_derivative(kind, x):
    """Analytic derivative of :func:`eval_basis`. ReLU uses 0 at the kink."""
    x = np.asarray(x, dtype=float)
    p = kind.params
    k = kind.kind
    if k == SINC:
        b = p["bandwidth"]
        if kind.normalized:
            return b * b * _dsinc(b * x)
        return (b / np.pi) * _dsinc(b * x / np.pi)
    if k == GAUSSIAN:
        s = p["s"]
        return -kind.scale * x / s**2 * np.exp(-0.5 * (x / s) ** 2)
    if k == SINE:
        w = p["omega"]
        return w * np.cos(w * x)
    if k == RELU:
        return (x > 0).astype(float)
    if k == GABOR:
        w0, sg = p["omega0"], p["sigma"]
        env = np.exp(-0.5 * (x / sg) ** 2)
        return kind.scale * env * (-w0 * np.sin(w0 * x) - x / sg**2 * np.cos(w0 * x))
    if k == HERMITE:
        c = p["coeffs"]
        poly = _herm.hermval(x, c)
        dpoly = _herm.hermval(x, _herm.hermder(c)) if len(c) > 1 else np.zeros_like(x)
        return kind.scale * (dpoly - x * poly) * np.exp(-0.5 * x**2)
    raise AssertionError(k)


def fourier_transform(kind, omega):
    """Complex Fourier transform ``F_hat(omega)`` in closed form.

    Raises :class:`UnsupportedKind` for ReLU and sine, which are not in L2.
    """
    if not kind.integrable:
        raise UnsupportedKind(f"{kind.kind} has no L2 Fourier transform; {RIESZ_VIOLATION[kind.kind]}")
    omega = np.asarray(omega, dtype=float)
    p = kind.params
    k = kind.kind
    if k == SINC:
        b = p["bandwidth"]
        if kind.normalized:
            inside = (omega >= -np.pi * b) & (omega < np.pi * b)
            return inside.astype(complex)
        inside = (omega >= -b) & (omega < b)
        return (np.pi / b) * inside.astype(complex)
    if k == GAUSSIAN:
        s = p["s"]
        return (kind.scale * s * math.sqrt(2 * math.pi)) * np.exp(-0.5 * (s * omega) ** 2) + 0j
    if k == GABOR:
        sg, w0 = p["sigma"], p["omega0"]
        lobes = np.exp(-0.5 * (sg * (omega - w0)) ** 2) + np.exp(-0.5 * (sg * (omega + w0)) ** 2)
        return (kind.scale * sg * math.sqrt(2 * math.pi) / 2) * lobes + 0j
    if k == HERMITE:
        return kind.scale * _hermite_hat_raw(p["coeffs"], omega)
    raise AssertionError(k)


def fourier_magnitude(kind, omega):
    return np.abs(fourier_transform(kind, omega))


def fourier_transform_quadrature(kind, omega, step=1e-3, half_width=40.0):
    """Trapezoidal ``F_hat`` on ``[-half_width, half_width]`` with the given step.

    Independent of the closed forms; only meaningful for rapidly decaying
    kinds (Gaussian, Gabor, Hermite).
    """
    x = np.arange(-half_width, half_width + step / 2, step)
    fx = eval_basis(kind, x)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.array([np.trapezoid(fx * np.exp(-1j * w * x), x) for w in omega])
    return out


# --- diagnostics ---------------------------------------------------------------


def default_truncation(kind):
    return 10_000 if kind.kind == SINC else 50


def puc_residual(kind, grid=None, truncation_k=None):
    """Sup over ``grid`` of ``|sum_{|k|<=K} F(x + k) - 1|`` (symmetric partial sums)."""
    if grid is None:
        grid = np.linspace(0.0, 1.0, 101, endpoint=False)
    if truncation_k is None:
        truncation_k = default_truncation(kind)
    if truncation_k < 1:
        raise ValueError("truncation_k must be >= 1")
    grid = np.asarray(grid, dtype=float)
    total = np.zeros_like(grid)
    ks = np.arange(-truncation_k, truncation_k + 1, dtype=float)
    # chunk shifts to keep memory flat for large K
    for start in range(0, ks.size, 4096):
        chunk = ks[start : start + 4096]
        total += eval_basis(kind, grid[:, None] + chunk[None, :]).sum(axis=1)
    return float(np.max(np.abs(total - 1.0)))


def periodized_power(kind, omega, truncation_k, skip_zero=False):
    """``sum_{|k|<=K} |F_hat(omega + 2 pi k)|^2``, optionally without ``k = 0``."""
    omega = np.asarray(omega, dtype=float)
    ks = np.arange(-truncation_k, truncation_k + 1)
    if skip_zero:
        ks = ks[ks != 0]
    shifted = omega[..., None] + 2 * np.pi * ks
    return np.sum(np.abs(fourier_transform(kind, shifted)) ** 2, axis=-1)


def riesz_bounds(kind, freq_grid=None, truncation_k=50):
    """Estimate the Riesz bounds ``(A, B)`` as min/max of the periodised power."""
    if truncation_k < 1:
        raise ValueError("truncation_k must be >= 1")
    if freq_grid is None:
        freq_grid = np.linspace(0.0, 2 * np.pi, 1001)
    power = periodized_power(kind, np.asarray(freq_grid, dtype=float), truncation_k)
    return float(power.min()), float(power.max())


@dataclass(frozen=True)
class AnalysisFunction:
    """Analysis (prefilter) function with ``F_hat(0) = 1``.

    Defaults to the normalised Gaussian with ``s = 1``.
    """

    kind: BasisKind = field(default_factory=lambda: BasisKind.gaussian(1.0, normalized=True))

    def __post_init__(self):
        if not self.kind.integrable:
            raise UnsupportedKind(f"{self.kind.kind} cannot serve as an analysis function")
        if not self.kind.normalized:
            object.__setattr__(self, "kind", BasisKind(self.kind.kind, self.kind.params, True))
        f0 = fourier_transform(self.kind, 0.0)
        if abs(f0 - 1.0) > 1e-9:
            raise ValueError(f"analysis function has F_hat(0) = {f0}, expected 1")

    def __call__(self, x):
        return eval_basis(self.kind, x)

    def hat(self, omega):
        return fourier_transform(self.kind, omega)


def error_kernel(kind, analysis=None, omega=0.0, truncation_k=50):
    """Error kernel ``|1 - Fa_hat F_hat|^2 + |Fa_hat|^2 sum_{k != 0} |F_hat(w + 2 pi k)|^2``."""
    if analysis is None:
        analysis = AnalysisFunction()
    omega = np.asarray(omega, dtype=float)
    fa = analysis.hat(omega)
    f = fourier_transform(kind, omega)
    alias = periodized_power(kind, omega, truncation_k, skip_zero=True)
    return np.abs(1.0 - fa * f) ** 2 + np.abs(fa) ** 2 * alias


def averaged_error(kind, omega_scale, power_spectrum, xi, analysis=None, truncation_k=50):
    """``integral E(omega_scale * xi) |s_hat(xi)|^2 dxi / 2 pi`` by trapezoid on ``xi``.

    ``power_spectrum`` holds ``|s_hat|^2`` sampled on ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    kern = error_kernel(kind, analysis, omega_scale * xi, truncation_k)
    return float(np.trapezoid(kern * np.asarray(power_spectrum, dtype=float), xi) / (2 * np.pi))


@dataclass(frozen=True)
class BasisDiagnostics:
    puc_residual: float
    riesz_lower: float | None
    riesz_upper: float | None
    kernel_at_zero: float | None
    truncation_k: int

    def to_dict(self):
        return {
            "pucResidual": self.puc_residual,
            "rieszLower": self.riesz_lower,
            "rieszUpper": self.riesz_upper,
            "kernelAtZero": self.kernel_at_zero,
            "truncationK": self.truncation_k,
        }


def diagnose(kind, grid_size=101, truncation_k=None, analysis=None):
    """Bundle PUC residual, Riesz bounds and ``E(0)``.

    Fourier-side quantities are ``None`` for kinds outside L2.
    """
    if truncation_k is None:
        truncation_k = default_truncation(kind)
    grid = np.linspace(0.0, 1.0, grid_size, endpoint=False)
    puc = puc_residual(kind, grid, truncation_k)
    if not kind.integrable:
        return BasisDiagnostics(puc, None, None, None, truncation_k)
    fk = min(truncation_k, 200)
    a, b = riesz_bounds(kind, np.linspace(0.0, 2 * np.pi, grid_size), fk)
    e0 = float(error_kernel(kind, analysis, 0.0, fk))
    return BasisDiagnostics(puc, a, b, e0, truncation_k)


# --- scaled approximation ---------------------------------------------------------


@dataclass(frozen=True)
class ShiftCoefficients:
    """Coefficients ``a(k)`` on consecutive integer shifts ``k_min..k_max``."""

    k_min: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())
        object.__setattr__(self, "k_min", int(self.k_min))

    @property
    def ks(self):
        return np.arange(self.k_min, self.k_min + self.values.size)

    @property
    def k_range(self):
        return (self.k_min, self.k_min + self.values.size - 1)

    def __len__(self):
        return self.values.size

    @classmethod
    def from_mapping(cls, mapping):
        if not mapping:
            return cls(0, np.zeros(0))
        lo, hi = min(mapping), max(mapping)
        vals = np.zeros(hi - lo + 1)
        for k, v in mapping.items():
            vals[k - lo] = v
        return cls(lo, vals)


def default_k_range(grid, omega_scale, pad=8):
    lo = math.floor(grid[0] / omega_scale) - pad
    hi = math.ceil(grid[-1] / omega_scale) + pad
    return lo, hi


def approx_operator(signal, omega_scale, k_range=None, analysis=None):
    """Coefficients ``a(k) = integral s(y) Fa(y / omega - k) dy / omega`` (trapezoid).

    The signal is taken as zero outside its grid. Raises
    :class:`QuadratureTooCoarse` when the grid step exceeds ``omega_scale / 8``.
    """
    if omega_scale <= 0:
        raise ValueError("omega_scale must be positive")
    if analysis is None:
        analysis = AnalysisFunction()
    grid, values = signal.grid, signal.values
    if grid.size < 2:
        raise QuadratureTooCoarse("need at least two samples")
    step = float(np.max(np.diff(grid)))
    if step > omega_scale / 8 * (1 + 1e-12):
        raise QuadratureTooCoarse(f"grid step {step:g} exceeds omega/8 = {omega_scale / 8:g}")
    if k_range is None:
        k_range = default_k_range(grid, omega_scale)
    ks = np.arange(k_range[0], k_range[1] + 1)
    coeffs = np.empty(ks.size)
    for i, k in enumerate(ks):
        coeffs[i] = np.trapezoid(values * analysis(grid / omega_scale - k), grid) / omega_scale
    return ShiftCoefficients(k_range[0], coeffs)


def scaled_reconstruct(kind, coeffs, omega_scale, x):
    """Synthesis ``sum_k a(k) F(x / omega - k)``."""
    x = np.asarray(x, dtype=float)
    if len(coeffs) == 0:
        return np.zeros_like(x)
    basis = eval_basis(kind, x[..., None] / omega_scale - coeffs.ks)
    return basis @ coeffs.values


def sample_coefficients(func, omega_scale, k_range):
    """Shannon coefficients ``a(k) = s(omega k)``.

    Paired with the normalised unit-bandwidth sinc these interpolate ``s``
    exactly on the sample points and reproduce it everywhere when ``s`` is
    band-limited to ``pi / omega``.
    """
    ks = np.arange(k_range[0], k_range[1] + 1)
    return ShiftCoefficients(k_range[0], np.asarray(func(omega_scale * ks), dtype=float))


def l2_norm(signal):
    return float(np.sqrt(np.trapezoid(signal.values**2, signal.grid)))


def approximation_error(signal, reconstruction):
    """Discrete L2 distance between two signals on the same grid (trapezoid)."""
    if signal.grid.shape != reconstruction.grid.shape or not np.array_equal(signal.grid, reconstruction.grid):
        raise GridMismatch("signal and reconstruction must share the same grid")
    diff = signal.values - reconstruction.values
    return float(np.sqrt(np.trapezoid(diff**2, signal.grid)))


def reconstruct_signal(kind, signal, omega_scale, analysis=None, k_range=None):
    """``A_omega(s)`` sampled back on the signal grid, with its coefficients."""
    coeffs = approx_operator(signal, omega_scale, k_range, analysis)
    return Signal1D(signal.grid, scaled_reconstruct(kind, coeffs, omega_scale, signal.grid)), coeffs
