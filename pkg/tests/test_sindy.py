import json
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import lorenz_reference
from sincinr.basis import BasisKind
from sincinr.dynamics import OdeSystem, Trajectory, add_noise, integrate_rk4
from sincinr.errors import DimensionMismatch, EmptyDataset, LengthTooShort, NonUniformGrid
from sincinr.network import fit_shift_network, init_network
from sincinr.signals import psnr
from sincinr.sindy import (
    CentralDifference,
    InrJacobian,
    LibrarySpec,
    SindyModel,
    Spectral,
    build_library,
    central_difference,
    estimate_derivatives,
    fit_sindy,
    inr_derivative,
    refine_flow,
    simulate_model,
    sindy_pipeline,
    spectral_derivative,
)

SPEC = LibrarySpec(2)


def lorenz_gamma(sigma=10.0, rho=28.0, beta=8 / 3):
    """Exact standard Lorenz in the degree-2, 3-D library order."""
    names = SPEC.term_names(3)
    g = np.zeros((len(names), 3))
    g[names.index("x0"), 0], g[names.index("x1"), 0] = -sigma, sigma
    g[names.index("x0"), 1], g[names.index("x0 x2"), 1], g[names.index("x1"), 1] = rho, -1.0, -1.0
    g[names.index("x0 x1"), 2], g[names.index("x2"), 2] = 1.0, -beta
    return g


# --- library -----------------------------------------------------------------------------


def test_library_single_row():
    np.testing.assert_array_equal(build_library([[2.0]], LibrarySpec(2)), [[1.0, 2.0, 4.0]])


def test_library_trig_at_zero():
    spec = LibrarySpec(0, include_trig=True, include_constant=False)
    row = build_library(np.zeros((1, 2)), spec)[0]
    np.testing.assert_array_equal(row[:2], 0.0)
    np.testing.assert_array_equal(row[2:4], 1.0)
    np.testing.assert_array_equal(row[4:], 0.0)


@pytest.mark.parametrize("degree, dim, const, count", [(2, 3, True, 10), (2, 3, False, 9), (3, 2, True, 10), (1, 4, True, 5)])
def test_library_column_count(degree, dim, const, count):
    spec = LibrarySpec(degree, include_constant=const)
    assert spec.num_terms(dim) == count
    assert build_library(np.ones((3, dim)), spec).shape == (3, count)


def test_library_term_order():
    assert SPEC.term_names(2) == ["1", "x0", "x1", "x0^2", "x0 x1", "x1^2"]


def test_library_requires_terms():
    with pytest.raises(ValueError):
        LibrarySpec(0, include_constant=False)
    with pytest.raises(ValueError):
        LibrarySpec(6)


def test_library_empty_rows():
    with pytest.raises(EmptyDataset):
        build_library(np.zeros((0, 2)), SPEC)


# --- derivatives ---------------------------------------------------------------------------


def test_spectral_constant():
    assert np.abs(spectral_derivative(np.full(64, 3.2), 0.1)).max() <= 1e-12


def test_spectral_sine():
    t = np.arange(256) * 2 * np.pi / 256
    assert np.abs(spectral_derivative(np.sin(t), t[1]) - np.cos(t)).max() <= 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 1000), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_spectral_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, 33))
    lhs = spectral_derivative(a * u + b * v, 0.2)
    rhs = a * spectral_derivative(u, 0.2) + b * spectral_derivative(v, 0.2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + abs(a) + abs(b)))


def test_spectral_too_short():
    with pytest.raises(LengthTooShort):
        spectral_derivative([1.0, 2.0, 3.0], 0.1)


def test_central_ramp_and_quadratic():
    t = np.arange(20) * 0.1
    np.testing.assert_allclose(central_difference(3 * t - 1, 0.1), 3.0, atol=1e-12)
    np.testing.assert_allclose(central_difference(t**2, 0.1)[1:-1], 2 * t[1:-1], atol=1e-12)


def test_central_sine():
    t = np.arange(0, 10, 0.01)
    err = np.abs(central_difference(np.sin(t), 0.01) - np.cos(t))
    assert err[1:-1].max() <= 2e-5
    # one-sided second-order ends carry dt^2 / 3
    assert err[[0, -1]].max() <= 0.01**2 / 3 * 1.01


def test_central_too_short():
    with pytest.raises(LengthTooShort):
        central_difference([1.0, 2.0], 0.1)


def test_inr_derivative_zero_net():
    net = init_network((1, 8, 2), BasisKind.sinc(), 0.5, seed=0)
    net.layers[-1].weights[:] = 0.0
    np.testing.assert_array_equal(inr_derivative(net, np.linspace(0, 1, 5)), 0.0)


def test_inr_derivative_needs_scalar_input():
    with pytest.raises(DimensionMismatch):
        inr_derivative(init_network((2, 4, 1), BasisKind.sinc(), 1.0), [0.0])


@pytest.fixture(scope="module")
def sine_net():
    t = np.linspace(0, 4 * np.pi, 400)
    return t, fit_shift_network(t, np.sin(t), BasisKind.sinc(), 0.1)


def test_inr_derivative_of_sine_fit(sine_net):
    t, net = sine_net
    assert psnr(np.sin(t), net(t[:, None])[:, 0]) >= 50
    inner = (t > 1) & (t < 4 * np.pi - 1)
    assert np.abs(inr_derivative(net, t)[inner, 0] - np.cos(t[inner])).max() <= 0.02


def test_inr_derivative_matches_finite_difference(sine_net):
    _, net = sine_net
    t = np.linspace(2.0, 9.0, 17)
    h = 1e-6
    fd = (net((t + h)[:, None]) - net((t - h)[:, None]))[:, 0] / (2 * h)
    np.testing.assert_allclose(inr_derivative(net, t)[:, 0], fd, rtol=1e-5, atol=1e-7)


def test_estimate_derivatives_non_uniform():
    traj = Trajectory([0.0, 0.1, 0.3, 0.4, 0.5], np.zeros((5, 1)))
    with pytest.raises(NonUniformGrid):
        estimate_derivatives(traj, Spectral())


# --- regression -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def sparse_case():
    rng = np.random.default_rng(4)
    Y = rng.uniform(-2, 2, (200, 2))
    gamma = np.zeros((6, 2))
    gamma[2, 0], gamma[3, 1] = 1.5, -0.7
    return Y, build_library(Y, SPEC) @ gamma, gamma


@pytest.mark.parametrize("threshold", [1e-3, 0.1, 0.5, 0.69])
def test_two_sparse_recovery(sparse_case, threshold):
    Y, Ydot, gamma = sparse_case
    model = fit_sindy(Y, Ydot, SPEC, threshold=threshold)
    np.testing.assert_allclose(model.gamma, gamma, atol=1e-8)
    np.testing.assert_array_equal(model.active_mask, gamma != 0)


def test_threshold_above_everything(sparse_case):
    Y, Ydot, _ = sparse_case
    model = fit_sindy(Y, Ydot, SPEC, threshold=10.0)
    assert not model.gamma.any()
    assert np.linalg.norm(Ydot - model.predict(Y)) == pytest.approx(np.linalg.norm(Ydot))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), threshold=st.floats(0.01, 0.5))
def test_residual_grows_as_terms_drop(seed, threshold):
    # each refit is least squares on a subset of the previous active set
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((50, 2))
    Ydot = rng.standard_normal((50, 2))
    history = fit_sindy(Y, Ydot, SPEC, threshold=threshold).residual_history
    assert np.all(np.diff(history) >= -1e-9 * history[0])


def test_permutation_equivariance(sparse_case):
    Y, Ydot, _ = sparse_case
    base = fit_sindy(Y, Ydot, SPEC, threshold=0.1)
    swapped = fit_sindy(Y[:, ::-1], Ydot[:, ::-1], SPEC, threshold=0.1)
    # under x0 <-> x1 the library order 1, x0, x1, x0^2, x0 x1, x1^2 becomes:
    perm = [0, 2, 1, 5, 4, 3]
    np.testing.assert_allclose(swapped.gamma, base.gamma[perm][:, ::-1], atol=1e-10)


def test_too_many_terms():
    with pytest.raises(DimensionMismatch):
        fit_sindy(np.ones((3, 2)), np.ones((3, 2)), SPEC)


def test_fine_sampled_lorenz_central_difference():
    traj = lorenz_reference(dt=0.01, samples=1000)
    Y, Ydot = estimate_derivatives(traj, CentralDifference())
    model = fit_sindy(Y, Ydot, SPEC, lam=1e-6, threshold=0.1)
    truth = lorenz_gamma()
    np.testing.assert_array_equal(model.active_mask, truth != 0)
    active = truth != 0
    np.testing.assert_allclose(model.gamma[active], truth[active], rtol=0.05)


def test_model_json_round_trip(sparse_case):
    Y, Ydot, _ = sparse_case
    model = fit_sindy(Y, Ydot, SPEC, lam=1e-6, threshold=0.1)
    data = json.loads(model.to_json())
    assert data["termNames"] == SPEC.term_names(2)
    back = SindyModel.from_dict(data)
    np.testing.assert_array_equal(back.gamma, model.gamma)
    assert back.lam == 1e-6 and back.threshold == 0.1


def test_equation_rendering():
    model = SindyModel(SPEC, lorenz_gamma())
    lines = model.equations(["x", "y", "z"])
    assert lines[0] == "dx/dt = -10.000·x + 10.000·y"
    assert lines[2] == "dz/dt = -2.667·z + 1.000·x y"
    assert SindyModel(SPEC, np.zeros((6, 2))).equations() == ["dx0/dt = 0", "dx1/dt = 0"]


def test_model_rejects_non_finite():
    with pytest.raises(ValueError):
        SindyModel(SPEC, np.full((6, 2), np.nan))


# --- simulation --------------------------------------------------------------------------------


def test_zero_model_constant():
    sim = simulate_model(SindyModel(SPEC, np.zeros((6, 2))), [0.3, -1.0], 0.0, 1.0, 0.1)
    assert np.all(sim.states == [0.3, -1.0])


def test_hand_set_lorenz_matches_preset():
    x0 = [-8.0, 7.0, 27.0]
    sim = simulate_model(SindyModel(SPEC, lorenz_gamma()), x0, 0.0, 2.0, 0.01)
    ref = integrate_rk4(OdeSystem.lorenz(), x0, 0.0, 2.0, 0.01)
    np.testing.assert_allclose(sim.states, ref.states, rtol=1e-9, atol=1e-9)


def test_simulate_dimension_check():
    with pytest.raises(DimensionMismatch):
        simulate_model(SindyModel(SPEC, np.zeros((6, 2))), [0.0, 0.0, 0.0], 0.0, 1.0, 0.1)


# --- pipeline -------------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def lorenz_coarse():
    return lorenz_reference(x0=(1.0, 1.0, 1.0))


def test_refine_recovers_coarse_lorenz(lorenz_coarse):
    Y, Ydot = estimate_derivatives(lorenz_coarse, CentralDifference())
    rough = fit_sindy(Y, Ydot, SPEC, lam=1e-6, threshold=0.1)
    model = refine_flow(lorenz_coarse, rough)
    truth = lorenz_gamma()
    np.testing.assert_array_equal(model.active_mask, truth != 0)
    np.testing.assert_allclose(model.gamma, truth, atol=1e-6)


def test_pipeline_clean_lorenz(lorenz_coarse):
    model, score = sindy_pipeline(lorenz_coarse, CentralDifference(), SPEC, 1e-6, 0.1, refine=True)
    assert score >= 30
    assert model.active_mask.sum() == 7


def test_pipeline_fine_lorenz_without_refinement():
    traj = lorenz_reference(x0=(1.0, 1.0, 1.0), dt=0.01, samples=2000)
    _, score = sindy_pipeline(traj, CentralDifference(), SPEC, 1e-6, 0.1, horizon=10.0)
    assert score >= 30


def test_pipeline_inr_on_noisy_rossler():
    ref = integrate_rk4(OdeSystem.rossler(), [1.0, 1.0, 1.0], 0.0, 99.9, 0.1, substeps=10)
    noisy = add_noise(ref, ("gaussian", 0.5), seed=0)
    _, inr = sindy_pipeline(noisy, InrJacobian(omega=0.3), SPEC, 1e-6, 0.1, reference=ref)
    _, spec = sindy_pipeline(noisy, Spectral(), SPEC, 1e-6, 0.1, reference=ref)
    assert inr > spec


def test_pipeline_errors():
    with pytest.raises(EmptyDataset):
        sindy_pipeline(Trajectory(np.zeros(0), np.zeros((0, 3))), CentralDifference())
    short = lorenz_reference(samples=20)
    with pytest.raises(DimensionMismatch):
        sindy_pipeline(short, CentralDifference(), SPEC, horizon=10.0)
