import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import vdp_on_cycle
from sincinr.basis import BasisKind
from sincinr.dynamics import (
    DelayEmbedding,
    ObservationSpec,
    OdeSystem,
    Trajectory,
    add_noise,
    build_hankel,
    cycle_gap,
    estimate_period,
    integrate_rk4,
    observe,
    svd_embed,
    takens_min_dim,
)
from sincinr.errors import DimensionMismatch, NonFiniteState, SeriesTooShort
from sincinr.network import fit_shift_network


class Decay:
    """``dx/dt = -x``."""

    def rhs(self, state, t=0.0):
        return -np.asarray(state)


class Still:
    def rhs(self, state, t=0.0):
        return np.zeros_like(state)


# --- presets -------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "system, dim",
    [
        (OdeSystem.lorenz(), 3),
        (OdeSystem.van_der_pol(), 2),
        (OdeSystem.chen(), 3),
        (OdeSystem.rossler(), 3),
        (OdeSystem.duffing(), 3),
        (OdeSystem.rank14_lorenz(), 14),
    ],
    ids=lambda v: getattr(v, "tag", v),
)
def test_dimensions(system, dim):
    assert system.dimension == dim
    assert system.rhs(np.zeros(dim)).shape == (dim,)


def test_lorenz_origin_fixed_point():
    np.testing.assert_array_equal(OdeSystem.lorenz().rhs(np.zeros(3)), np.zeros(3))


def test_van_der_pol_example():
    np.testing.assert_allclose(OdeSystem.van_der_pol().rhs([1.0, 0.0]), [2 / 3, 1.0], atol=1e-15)


def test_rossler_example():
    np.testing.assert_allclose(OdeSystem.rossler().rhs(np.zeros(3)), [0.0, 0.0, 0.2])


def test_lorenz_variants_differ_only_in_xy_sign():
    s = np.array([1.5, -2.0, 3.0])
    std = OdeSystem.lorenz().rhs(s)
    app = OdeSystem.lorenz(standard=False).rhs(s)
    np.testing.assert_array_equal(std[:2], app[:2])
    assert std[2] - app[2] == pytest.approx(2 * s[0] * s[1])


def test_rank14_defaults():
    p = OdeSystem.rank14_lorenz().params
    assert p["a"] == pytest.approx(1 / math.sqrt(2))
    assert p["R"] == pytest.approx(6.75 * 45.92)


def test_rhs_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        OdeSystem.lorenz().rhs(np.zeros(2))


def test_by_name():
    assert OdeSystem.by_name("rossler", c=4.0).params["c"] == 4.0
    with pytest.raises(ValueError):
        OdeSystem.by_name("pendulum")


# --- integration --------------------------------------------------------------------------------


def test_rk4_exponential_decay():
    traj = integrate_rk4(Decay(), [1.0], 0.0, 1.0, 0.01)
    assert len(traj) == 101
    assert traj.states[-1, 0] == pytest.approx(math.exp(-1), abs=1e-9)


def test_rk4_order():
    errs = []
    for dt in (0.1, 0.05):
        traj = integrate_rk4(Decay(), [1.0], 0.0, 1.0, dt)
        errs.append(abs(traj.states[-1, 0] - math.exp(-1)))
    assert errs[0] / errs[1] >= 14
    assert math.log2(errs[0] / errs[1]) >= 3.8


def test_substeps_equal_finer_step():
    a = integrate_rk4(OdeSystem.rossler(), [1.0, 1.0, 1.0], 0.0, 2.0, 0.1, substeps=4)
    b = integrate_rk4(OdeSystem.rossler(), [1.0, 1.0, 1.0], 0.0, 2.0, 0.025)
    np.testing.assert_allclose(a.states, b.states[::4], rtol=1e-12, atol=1e-12)


def test_zero_field_constant():
    traj = integrate_rk4(Still(), [3.0, -1.0], 0.0, 5.0, 0.5)
    assert np.all(traj.states == [3.0, -1.0])


def test_lorenz_stays_bounded():
    traj = integrate_rk4(OdeSystem.lorenz(), [1.0, 1.0, 1.0], 0.0, 5000 * 0.02, 0.02)
    assert len(traj) == 5001
    assert np.abs(traj.states).max() <= 100


def test_appendix_lorenz_blows_up_with_partial():
    with pytest.raises(NonFiniteState) as info:
        integrate_rk4(OdeSystem.lorenz(standard=False), [1.0, 1.0, 1.0], 0.0, 10.0, 0.02)
    partial = info.value.partial
    assert partial is not None and 1 < len(partial) < 501
    assert np.all(np.isfinite(partial.states))


def test_integrate_validation():
    with pytest.raises(ValueError):
        integrate_rk4(Decay(), [1.0], 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_rk4(Decay(), [1.0], 1.0, 0.0, 0.1)


def test_trajectory_csv_round_trip(tmp_path):
    traj = integrate_rk4(OdeSystem.van_der_pol(), [2.0, 0.0], 0.0, 1.0, 0.1)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    assert path.read_text().splitlines()[0] == "t,x0,x1"
    back = Trajectory.from_csv(path)
    np.testing.assert_array_equal(back.times, traj.times)
    np.testing.assert_array_equal(back.states, traj.states)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Trajectory([0.0, 1.0], np.zeros((3, 1)))


# --- observation ----------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def lorenz_traj():
    return integrate_rk4(OdeSystem.lorenz(), [1.0, 1.0, 1.0], 0.0, 4999 * 0.02, 0.02)


def test_observe_noise_free(lorenz_traj):
    obs = observe(lorenz_traj, ObservationSpec(1))
    np.testing.assert_array_equal(obs.values, lorenz_traj.states[:, 1])
    zero = observe(lorenz_traj, ObservationSpec(1, ("uniform", 0.0)))
    np.testing.assert_array_equal(zero.values, obs.values)


def test_observe_gaussian_variance(lorenz_traj):
    obs = observe(lorenz_traj, ObservationSpec(0, ("gaussian", 0.5), seed=3))
    assert 0.22 <= np.var(obs.values - lorenz_traj.states[:, 0]) <= 0.28


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("noise", [("gaussian", 0.5), ("uniform", 0.3)])
def test_observe_noise_zero_mean(lorenz_traj, seed, noise):
    eta = observe(lorenz_traj, ObservationSpec(2, noise, seed)).values - lorenz_traj.states[:, 2]
    std = noise[1] if noise[0] == "gaussian" else noise[1] / math.sqrt(3)
    assert abs(eta.mean()) <= 3 * std / math.sqrt(eta.size)


def test_uniform_noise_bounds(lorenz_traj):
    eta = observe(lorenz_traj, ObservationSpec(0, ("uniform", 0.1), 0)).values - lorenz_traj.states[:, 0]
    assert np.abs(eta).max() <= 0.1


def test_observe_component_range(lorenz_traj):
    with pytest.raises(DimensionMismatch):
        observe(lorenz_traj, ObservationSpec(3))
    with pytest.raises(ValueError):
        ObservationSpec(0, ("laplace", 1.0))


def test_add_noise_every_coordinate(lorenz_traj):
    noisy = add_noise(lorenz_traj, ("gaussian", 0.5), 0)
    assert noisy.states.shape == lorenz_traj.states.shape
    assert np.all(np.std(noisy.states - lorenz_traj.states, axis=0) > 0.4)


# --- Hankel and SVD ---------------------------------------------------------------------------------


def test_hankel_small():
    np.testing.assert_array_equal(build_hankel([1, 2, 3, 4], 2, 3), [[1, 2, 3], [2, 3, 4]])


def test_hankel_too_short():
    with pytest.raises(SeriesTooShort):
        build_hankel(np.arange(5), 3, 4)


def test_hankel_constant_rank_one():
    emb = svd_embed(build_hankel(np.full(60, 2.5), 10), 2)
    assert emb.singular_values[1] / emb.singular_values[0] <= 1e-10


def test_hankel_sinusoid_rank_two():
    sv = np.linalg.svd(build_hankel(np.sin(0.1 * np.arange(99)), 50, 50), compute_uv=False)
    assert np.sum(sv > 1e-8 * sv[0]) == 2


@settings(max_examples=30, deadline=None)
@given(n=st.integers(5, 60), m=st.integers(1, 5), seed=st.integers(0, 1000))
def test_hankel_first_row_last_column_recover_series(n, m, seed):
    series = np.random.default_rng(seed).standard_normal(n)
    H = build_hankel(series, m)
    np.testing.assert_array_equal(np.concatenate([H[0], H[1:, -1]]), series)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), m=st.integers(2, 12))
def test_singular_values_reversal_invariant(seed, m):
    series = np.random.default_rng(seed).standard_normal(2 * m - 1)
    a = svd_embed(build_hankel(series, m, m), 1).singular_values
    b = svd_embed(build_hankel(series[::-1], m, m), 1).singular_values
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12 * a[0])


def test_svd_embed_structure():
    rng = np.random.default_rng(1)
    H = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 20))
    emb = svd_embed(H, 3)
    assert isinstance(emb, DelayEmbedding)
    assert np.all(np.diff(emb.singular_values) <= 0) and np.all(emb.singular_values >= 0)
    recon = emb.modes @ emb.surrogate.T
    assert np.linalg.norm(recon) ** 2 >= 0.99 * np.linalg.norm(H) ** 2
    np.testing.assert_allclose(recon, H, atol=1e-10)
    with pytest.raises(ValueError):
        svd_embed(H, 9)


def test_delay_embedding_csv(tmp_path):
    emb = svd_embed(build_hankel(np.sin(0.2 * np.arange(80)), 10), 2)
    emb.write_csv(tmp_path / "sv.csv", tmp_path / "sur.csv")
    assert (tmp_path / "sur.csv").read_text().splitlines()[0] == "k,v0,v1"
    assert len((tmp_path / "sv.csv").read_text().splitlines()) == 11


@pytest.mark.parametrize("d, expected", [(1, 3), (2.06, 6), (0.5, 2)])
def test_takens_min_dim(d, expected):
    assert takens_min_dim(d) == expected


def test_takens_rejects_nonpositive():
    with pytest.raises(ValueError):
        takens_min_dim(0)


# --- closed curves ---------------------------------------------------------------------------------


def test_estimate_period_of_sinusoid():
    assert estimate_period(np.sin(2 * np.pi * np.arange(1000) / 37.5)) == pytest.approx(37.5, rel=1e-3)


def test_cycle_gap_circle_and_spiral():
    t = np.linspace(0, 6 * np.pi, 3000)
    circle = np.column_stack([np.cos(t), np.sin(t)])
    assert cycle_gap(circle) < 1e-3
    spiral = circle * (1 + 0.05 * t)[:, None]
    assert cycle_gap(spiral) > 0.1


@pytest.fixture(scope="module")
def vdp_series():
    traj = integrate_rk4(OdeSystem.van_der_pol(), vdp_on_cycle(), 0.0, 4999 * 0.02, 0.02)
    return traj


def test_van_der_pol_surrogate_closed(vdp_series):
    emb = svd_embed(build_hankel(vdp_series.states[:, 0], 100), 2)
    assert cycle_gap(emb.surrogate) <= 0.05


def test_sinc_resampling_tightens_noisy_attractor(vdp_series):
    obs = observe(vdp_series, ObservationSpec(0, ("uniform", 0.1), seed=0))
    raw = cycle_gap(svd_embed(build_hankel(obs.values, 100), 2).surrogate)
    net = fit_shift_network(obs.grid, obs.values, BasisKind.sinc(), 0.2)
    smooth = net(obs.grid[:, None])[:, 0]
    assert cycle_gap(svd_embed(build_hankel(smooth, 100), 2).surrogate) < raw
