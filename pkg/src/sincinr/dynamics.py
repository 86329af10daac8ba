"""ODE presets, RK4 integration, noisy observation, Hankel delay embeddings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConvergenceFailure, DimensionMismatch, NonFiniteState, SeriesTooShort
from .signals import Signal1D, write_table_csv

LORENZ = "lorenz"
VAN_DER_POL = "vanderpol"
CHEN = "chen"
ROSSLER = "rossler"
DUFFING = "duffing"
RANK14_LORENZ = "rank14lorenz"

_DIMENSION = {LORENZ: 3, VAN_DER_POL: 2, CHEN: 3, ROSSLER: 3, DUFFING: 3, RANK14_LORENZ: 14}

RANK14_STATE_NAMES = (
    "psi11", "psi13", "psi22", "psi31", "psi33", "psi24",
    "theta11", "theta13", "theta22", "theta31", "theta33", "theta24", "theta02", "theta04",
)  # fmt: skip


@dataclass(frozen=True)
class OdeSystem:
    """An autonomous (or autonomised) ODE preset ``dx/dt = f(x)``.

    Build with the factory methods. ``lorenz()`` is the textbook system
    with ``dz/dt = xy - beta z``; ``lorenz(standard=False)`` flips the sign
    of the ``xy`` term in ``dz/dt``. That variant has
    no bounded attractor (it overflows within a fraction of a time unit).
    """

    tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in _DIMENSION:
            raise ValueError(f"unknown system {self.tag!r}")
        for name, value in self.params.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise ValueError(f"parameter {name} must be finite")

    def __hash__(self):
        return hash((self.tag, tuple(sorted(self.params.items()))))

    @property
    def dimension(self):
        return _DIMENSION[self.tag]

    @classmethod
    def lorenz(cls, sigma=10.0, rho=28.0, beta=8.0 / 3.0, standard=True):
        return cls(LORENZ, {"sigma": sigma, "rho": rho, "beta": beta, "standard": bool(standard)})

    @classmethod
    def van_der_pol(cls, mu=1.0):
        return cls(VAN_DER_POL, {"mu": mu})

    @classmethod
    def chen(cls, alpha=5.0, beta=-10.0, delta=-0.38):
        return cls(CHEN, {"alpha": alpha, "beta": beta, "delta": delta})

    @classmethod
    def rossler(cls, a=0.2, b=0.2, c=5.7):
        return cls(ROSSLER, {"a": a, "b": b, "c": c})

    @classmethod
    def duffing(cls, delta=0.2, alpha=-1.0, beta=1.0, gamma=0.3, omega=1.0):
        """Forced Duffing oscillator, autonomised with a phase variable.

        State is ``(x, dx/dt, phase)``. The defaults are the conventional
        double-well chaotic regime.
        """
        return cls(DUFFING, {"delta": delta, "alpha": alpha, "beta": beta, "gamma": gamma, "omega": omega})

    @classmethod
    def rank14_lorenz(cls, a=1.0 / math.sqrt(2.0), r=45.92, sigma=10.0, R=None):
        if R is None:
            R = 6.75 * r
        return cls(RANK14_LORENZ, {"a": a, "r": r, "R": R, "sigma": sigma})

    @classmethod
    def by_name(cls, name, **overrides):
        factories = {
            LORENZ: cls.lorenz,
            VAN_DER_POL: cls.van_der_pol,
            CHEN: cls.chen,
            ROSSLER: cls.rossler,
            DUFFING: cls.duffing,
            RANK14_LORENZ: cls.rank14_lorenz,
        }
        if name not in factories:
            raise ValueError(f"unknown system {name!r}; choose from {sorted(factories)}")
        return factories[name](**overrides)

    def rhs(self, state, t=0.0):
        state = np.asarray(state, dtype=float)
        if state.shape != (self.dimension,):
            raise DimensionMismatch(f"{self.tag} expects a state of length {self.dimension}")
        p = self.params
        if self.tag == LORENZ:
            x, y, z = state
            s, r, b = p["sigma"], p["rho"], p["beta"]
            dz = x * y - b * z if p["standard"] else -x * y - b * z
            return np.array([-s * x + s * y, r * x - y - x * z, dz])
        if self.tag == VAN_DER_POL:
            x, y = state
            mu = p["mu"]
            return np.array([mu * (x - x**3 / 3.0 - y), x / mu])
        if self.tag == CHEN:
            x, y, z = state
            return np.array([p["alpha"] * x - y * z, p["beta"] * y + x * z, p["delta"] * z + x * y / 3.0])
        if self.tag == ROSSLER:
            x, y, z = state
            return np.array([-(y + z), x + p["a"] * y, p["b"] + z * (x - p["c"])])
        if self.tag == DUFFING:
            x, v, phase = state
            acc = -p["delta"] * v - p["alpha"] * x - p["beta"] * x**3 + p["gamma"] * math.cos(phase)
            return np.array([v, acc, p["omega"]])
        return _rank14_rhs(state, p["a"], p["R"], p["sigma"])


def _rank14_rhs(state, a, R, sigma):
    p11, p13, p22, p31, p33, p24, t11, t13, t22, t31, t33, t24, t02, t04 = state
    out = np.empty(14)
    out[0] = (
        -a * (7 / 3 * p13 * p22 + 17 / 6 * p13 * p24 + 1 / 3 * p31 * p22 + 9 / 2 * p33 * p24)
        - sigma * 3 / 2 * p11
        + sigma * a * 2 / 3 * t11
    )
    out[1] = (
        a * (-9 / 19 * p11 * p22 + 33 / 38 * p11 * p24 + 2 / 19 * p31 * p22 - 125 / 38 * p31 * p24)
        - sigma * 19 / 2 * p13
        + sigma * a * 2 / 19 * t13
    )
    out[2] = a * (4 / 3 * p11 * p13 - 2 / 3 * p11 * p31 - 4 / 3 * p13 * p31) - 6 * sigma * p22 + 1 / 3 * sigma * a * t22
    out[3] = (
        a * (9 / 11 * p11 * p22 + 14 / 11 * p13 * p22 + 85 / 22 * p13 * p24)
        - 11 / 2 * sigma * p31
        + 6 / 11 * sigma * a * t31
    )
    out[4] = a * (11 / 6 * p11 * p24) - 27 / 2 * sigma * p33 + 2 / 9 * sigma * a * t33
    out[5] = a * (-2 / 9 * p11 * p13 - p11 * p33 + 5 / 9 * p13 * p31) - 18 * sigma * p24 + 1 / 9 * sigma * a * t24
    out[6] = (
        a
        * (
            p11 * t02 + p13 * t22 - 1 / 2 * p13 * t24 - p13 * t02 + 2 * p13 * t04
            + p22 * t13 + p22 * t31 + p31 * t22
            + 3 / 2 * p33 * t24 - 1 / 2 * p24 * t13 + 3 / 2 * p24 * t33
        )
        + R * a * p11
        - 3 / 2 * t11
    )  # fmt: skip
    out[7] = (
        a
        * (
            -p11 * t22 + 1 / 2 * p11 * t24 - p11 * t02 + 2 * p11 * t04 - p22 * t11 - 2 * p31 * t22
            + 5 / 2 * p31 * t24 + 1 / 2 * p24 * t11 + 5 / 2 * p24 * t31
        )
        + R * a * p13
        - 19 / 2 * t13
    )  # fmt: skip
    out[8] = (
        a * (p11 * t13 - p11 * t31 - p13 * t11 + 2 * p13 * t31 + 4 * p22 * t04 - p33 * t11 + 2 * p24 * t02)
        + 2 * R * a * p22
        - 6 * t22
    )
    out[9] = (
        a
        * (
            p11 * t22 - 2 * p13 * t22 + 5 / 2 * p13 * t24 - p22 * t11 + 2 * p22 * t13 + 4 * p31 * t02
            - 4 * p33 * t02 + 8 * p33 * t04 - 5 / 2 * p24 * t13
        )
        + 3 * R * a * p31
        - 11 / 2 * t31
    )  # fmt: skip
    out[10] = a * (3 / 2 * p11 * t24 - 4 * p31 * t02 + 8 * p31 * t04 - 3 / 2 * p24 * t11) + 3 * R * a * p33 - 27 / 2 * t33
    out[11] = (
        a
        * (
            1 / 2 * p11 * t13 - 3 / 2 * p11 * t33 + 1 / 2 * p13 * t11 - 5 / 2 * p13 * t31 - 2 * p22 * t02
            - 5 / 2 * p31 * t13 - 3 / 2 * p33 * t11
        )
        + 2 * R * a * p24
        - 18 * t24
    )  # fmt: skip
    # the first two terms cancel; kept as transcribed
    out[12] = (
        a
        * (
            -1 / 2 * p11 * t11 + 1 / 2 * p11 * t11 + 1 / 2 * p11 * t13 + 1 / 2 * p13 * t11 + p22 * t24
            - 3 / 2 * p31 * t31 + 3 / 2 * p31 * t33 + 3 / 2 * p33 * t31 + p24 * t24
        )
        - 4 * t02
    )  # fmt: skip
    out[13] = -a * (p11 * t13 + p13 * t11 + 2 * p22 * t22 + 4 * p31 * t33 + 4 * p33 * t31) - 16 * t04
    return out


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if states.shape[0] != times.size:
            raise DimensionMismatch("states must have one row per time")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(states)):
            raise ValueError("trajectory contains non-finite states")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self):
        return self.times.size

    @property
    def dimension(self):
        return self.states.shape[1]

    def to_csv(self, path):
        header = ["t"] + [f"x{i}" for i in range(self.dimension)]
        write_table_csv(path, header, [self.times] + list(self.states.T))

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1:])


def integrate_rk4(system, x0, t0, t1, dt, substeps=1):
    """Classical fourth-order Runge-Kutta from ``t0`` to ``t1``.

    Records ``round((t1 - t0) / dt) + 1`` samples at spacing ``dt``; each
    recorded interval is split into ``substeps`` RK4 steps. ``system`` is
    anything with an ``rhs(state, t)`` method.

    Raises :class:`NonFiniteState` (with the partial trajectory attached)
    when the state overflows.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    n = int(round((t1 - t0) / dt))
    times = t0 + dt * np.arange(n + 1)
    state = np.array(x0, dtype=float)
    if hasattr(system, "dimension") and state.shape != (system.dimension,):
        raise DimensionMismatch(f"initial state must have length {system.dimension}")
    states = np.empty((n + 1, state.size))
    states[0] = state
    h = dt / substeps
    f = system.rhs
    with np.errstate(over="ignore", invalid="ignore"):
        _rk4_loop(f, times, states, state, h, substeps)
    return Trajectory(times, states)


def _rk4_loop(f, times, states, state, h, substeps):
    for i in range(times.size - 1):
        t = times[i]
        for j in range(substeps):
            tj = t + j * h
            k1 = f(state, tj)
            k2 = f(state + 0.5 * h * k1, tj + 0.5 * h)
            k3 = f(state + 0.5 * h * k2, tj + 0.5 * h)
            k4 = f(state + h * k3, tj + h)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise NonFiniteState(
                f"state became non-finite at t = {times[i + 1]:g}",
                partial=Trajectory(times[: i + 1], states[: i + 1]),
            )
        states[i + 1] = state


# --- observation -------------------------------------------------------------------


@dataclass(frozen=True)
class ObservationSpec:
    """Observe one coordinate with optional noise.

    ``noise`` is ``None``, ``("uniform", n)`` for ``U(-n, n)`` or
    ``("gaussian", std)``.
    """

    component_index: int = 0
    noise: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.noise is not None:
            law, level = self.noise
            if law not in ("uniform", "gaussian"):
                raise ValueError(f"unknown noise law {law!r}")
            if level < 0:
                raise ValueError("noise level must be non-negative")


def noise_samples(noise, size, seed):
    if noise is None:
        return np.zeros(size)
    law, level = noise
    rng = np.random.default_rng(seed)
    if level == 0:
        return np.zeros(size)
    if law == "uniform":
        return rng.uniform(-level, level, size)
    return rng.normal(0.0, level, size)


def observe(traj, spec):
    """``y(t) = x_i(t) + noise`` as a :class:`Signal1D`."""
    if not 0 <= spec.component_index < traj.dimension:
        raise DimensionMismatch(f"component {spec.component_index} out of range for dimension {traj.dimension}")
    clean = traj.states[:, spec.component_index]
    return Signal1D(traj.times, clean + noise_samples(spec.noise, clean.size, spec.seed))


def add_noise(traj, noise, seed):
    """Add independent noise to every coordinate of a trajectory."""
    shape = traj.states.shape
    eta = noise_samples(noise, shape[0] * shape[1], seed).reshape(shape)
    return Trajectory(traj.times, traj.states + eta)


# --- Hankel / SVD ---------------------------------------------------------------------


def build_hankel(series, m, n=None):
    """``H[i, j] = series[i + j]`` with ``m`` rows and ``n`` columns.

    ``n`` defaults to ``len(series) - m + 1`` (use every sample).
    """
    series = np.asarray(series, dtype=float).ravel()
    if n is None:
        n = series.size - m + 1
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if series.size < m + n - 1:
        raise SeriesTooShort(f"need {m + n - 1} samples for a {m}x{n} Hankel matrix, got {series.size}")
    return sliding_window_view(series[: m + n - 1], n)[:m].copy()


@dataclass(frozen=True)
class DelayEmbedding:
    hankel: np.ndarray
    singular_values: np.ndarray
    modes: np.ndarray
    surrogate: np.ndarray

    @property
    def rank(self):
        return self.surrogate.shape[1]

    def write_csv(self, sv_path, surrogate_path):
        write_table_csv(sv_path, ["index", "sigma"], [np.arange(self.singular_values.size), self.singular_values])
        header = ["k"] + [f"v{i}" for i in range(self.rank)]
        write_table_csv(surrogate_path, header, [np.arange(self.surrogate.shape[0])] + list(self.surrogate.T))


def svd_embed(hankel, r):
    """Top-``r`` SVD factors; the surrogate is ``V_r * sigma_r`` (one row per column of H).

    Singular-vector signs are fixed so the largest-magnitude entry of each
    left vector is positive.
    """
    hankel = np.asarray(hankel, dtype=float)
    if not 1 <= r <= min(hankel.shape):
        raise ValueError(f"r must be in 1..{min(hankel.shape)}")
    try:
        u, s, vt = np.linalg.svd(hankel, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    u, vt = u[:, :r], vt[:r]
    signs = np.sign(u[np.argmax(np.abs(u), axis=0), np.arange(r)])
    signs[signs == 0] = 1.0
    u = u * signs
    vt = vt * signs[:, None]
    return DelayEmbedding(hankel, s, u, vt.T * s[:r])


def takens_min_dim(box_dim):
    """Smallest integer ``d >= 2 D + 1``."""
    if box_dim <= 0:
        raise ValueError("box-counting dimension must be positive")
    return int(math.ceil(2 * box_dim + 1 - 1e-12))


# --- closed-curve diagnostics ------------------------------------------------------------


def estimate_period(series):
    """Mean spacing (in samples) between upward mean-crossings."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    ups = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))
    if ups.size < 2:
        raise ValueError("series has fewer than two upward crossings")
    # sub-sample crossing positions by linear interpolation
    frac = -x[ups] / (x[ups + 1] - x[ups])
    pos = ups + frac
    return float(np.mean(np.diff(pos)))


def _point_polyline_distance(points, polyline):
    a, b = polyline[:-1], polyline[1:]
    ab = b - a
    denom = np.maximum((ab**2).sum(-1), 1e-300)
    ap = points[:, None, :] - a[None, :, :]
    t = np.clip((ap * ab[None]).sum(-1) / denom, 0.0, 1.0)
    nearest = a[None] + t[..., None] * ab[None]
    return np.sqrt(((points[:, None, :] - nearest) ** 2).sum(-1)).min(axis=1)


def cycle_gap(curve, period=None):
    """Largest distance from the last cycle to the first, over the curve diameter.

    ``curve`` is ``(N, d)``; ``period`` in samples defaults to
    :func:`estimate_period` of the first coordinate. Distances are measured
    to the first cycle as a polyline, so sampling density does not leak in.
    """
    curve = np.asarray(curve, dtype=float)
    if period is None:
        period = estimate_period(curve[:, 0])
    p = int(math.ceil(period)) + 1
    first, last = curve[:p], curve[-p:]
    gaps = _point_polyline_distance(last, first)
    # diameter over a subsample keeps the pairwise table small
    sub = curve[:: max(1, curve.shape[0] // 2000)]
    diameter = np.sqrt(((sub[:, None, :] - sub[None, :, :]) ** 2).sum(-1)).max()
    return float(gaps.max() / diameter)
