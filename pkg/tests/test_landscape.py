import numpy as np
import pytest

from oracles import fd_gradient
from warmstart.circuits import build_hea
from warmstart.errors import ValidationError
from warmstart.landscape import (
    Cut1D,
    HypercubeRegion,
    cut_1d,
    default_r_grid,
    estimate_variance,
    fit_power_law,
    gradient_along_path,
    grid_2d,
    pca_plane,
    sample_hypercube,
    surface_mean_loss,
    variance_sweep_r,
    variance_vs_dt,
)
from warmstart.loss import LossContext, loss, loss_batch
from warmstart.models import xz_chain
from warmstart.seeding import derive_seed
from warmstart.states import basis_state


def make_ctx(n=2, layers=1, dt=0.0, seed=5):
    ansatz = build_hea(n, layers, seed=seed)
    rng = np.random.default_rng(seed)
    return LossContext(
        ansatz=ansatz,
        theta_star=rng.uniform(-0.5, 0.5, ansatz.n_params),
        hamiltonian=xz_chain(n),
        dt=dt,
        psi0=basis_state(n),
    )


def test_sample_hypercube_determinism_and_bounds():
    region = HypercubeRegion(np.array([1.0, -2.0, 0.5]), 0.3)
    a = sample_hypercube(region, seed=7, k=100)
    b = sample_hypercube(region, seed=7, k=100)
    assert np.array_equal(a, b)
    assert a.shape == (100, 3)
    assert np.all(np.abs(a - region.center) <= 0.3)
    c = sample_hypercube(region, seed=8, k=100)
    assert not np.array_equal(a, c)
    with pytest.raises(ValidationError):
        sample_hypercube(region, seed=7, k=0)
    with pytest.raises(ValidationError):
        HypercubeRegion(np.array([np.nan]), 0.1)
    with pytest.raises(ValidationError):
        HypercubeRegion(np.zeros(2), -0.1)


def test_estimate_variance_mirrors_manual_computation():
    ctx = make_ctx(dt=0.2)
    region = HypercubeRegion(ctx.theta_star, 0.4)
    n, seed = 500, 11
    est = estimate_variance(ctx, region, n, seed)
    values = loss_batch(ctx, sample_hypercube(region, seed, n))
    mean = float(np.mean(values))
    centered = values - mean
    variance = float(np.sum(centered**2)) / (n - 1)
    m4 = float(np.mean(centered**4))
    se = float(np.sqrt(max(0.0, (m4 - variance**2 * (n - 3) / (n - 1)) / n)))
    assert est.mean == mean
    assert est.variance == variance
    assert est.std_error_of_variance == se
    assert est.n_samples == n and est.seed == seed
    with pytest.raises(ValidationError):
        estimate_variance(ctx, region, 1, seed)
    with pytest.raises(ValidationError):
        estimate_variance(ctx, HypercubeRegion(np.zeros(3), 0.1), n, seed)


def test_variance_of_single_qubit_instance_near_one_eighth():
    # at r = pi the loss reduces to sin^2 of one angle combination per gate;
    # the variance of such a loss over the full cube is exactly 1/8
    ansatz = build_hea(1, 1)
    ctx = LossContext(
        ansatz=ansatz,
        theta_star=np.zeros(ansatz.n_params),
        hamiltonian=xz_chain(1),
        dt=0.0,
        psi0=basis_state(1),
    )
    region = HypercubeRegion(ctx.theta_star, np.pi)
    est = estimate_variance(ctx, region, 40_000, seed=3)
    assert abs(est.variance - 0.125) < 3 * est.std_error_of_variance + 1e-3


def test_variance_sweep_bookkeeping():
    ctx = make_ctx(dt=0.1)
    grid = np.array([0.05, 0.3, 1.0, 3.0])
    sweep = variance_sweep_r(ctx, grid, n_samples=300, seed=9)
    assert np.array_equal(sweep.r, grid)
    peak = int(np.argmax(sweep.variance))
    assert sweep.r_max == grid[peak]
    assert sweep.variance_max == sweep.variance[peak]
    # per-point seeds are derived, so each point reproduces independently
    est = estimate_variance(
        ctx, HypercubeRegion(ctx.theta_star, grid[2]), 300, derive_seed(9, "r", 2)
    )
    assert sweep.variance[2] == est.variance
    assert sweep.mean_loss[2] == est.mean
    with pytest.raises(ValidationError):
        variance_sweep_r(ctx, np.array([]), n_samples=300)


def test_variance_vs_dt_bookkeeping():
    ctx = make_ctx(dt=0.0)
    grid = np.array([0.01, 0.1, 0.5])
    sweep = variance_vs_dt(ctx, grid, r_fixed=0.2, n_samples=300, seed=4)
    assert np.array_equal(sweep.dt, grid)
    peak = int(np.argmax(sweep.variance))
    assert sweep.dt_peak == grid[peak]
    assert sweep.variance_peak == sweep.variance[peak]
    est = estimate_variance(
        ctx.replace(dt=float(grid[1])),
        HypercubeRegion(ctx.theta_star, 0.2),
        300,
        derive_seed(4, "dt", 1),
    )
    assert sweep.variance[1] == est.variance


def test_default_r_grid_spans_decades():
    grid = default_r_grid()
    assert grid[0] == pytest.approx(1e-3)
    assert grid[-1] == pytest.approx(np.pi)
    assert np.all(np.diff(np.log(grid)) > 0)


def test_surface_mean_loss_is_deterministic_and_bounded():
    ctx = make_ctx(dt=0.3)
    a = surface_mean_loss(ctx, 0.5, n_directions=200, seed=2)
    assert a == surface_mean_loss(ctx, 0.5, n_directions=200, seed=2)
    assert 0.0 <= a <= 1.0
    with pytest.raises(ValidationError):
        surface_mean_loss(ctx, 0.5, n_directions=0)


def test_fit_power_law_recovers_synthetic_exponent():
    xs = np.geomspace(0.1, 10.0, 12)
    ys = 2.5 * xs**-1.7
    exponent, prefactor, r2 = fit_power_law(xs, ys)
    assert exponent == pytest.approx(-1.7, abs=1e-12)
    assert prefactor == pytest.approx(2.5, rel=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        fit_power_law(xs[:2], ys[:2])
    with pytest.raises(ValidationError):
        fit_power_law(xs, -ys)
    with pytest.raises(ValidationError):
        fit_power_law(xs, np.full_like(xs, np.nan))


def test_cut_1d_geometry_and_endpoint_losses():
    ctx = make_ctx(dt=0.0)
    rng = np.random.default_rng(6)
    a = rng.uniform(-1, 1, ctx.n_params)
    b = rng.uniform(-1, 1, ctx.n_params)
    dts = np.array([0.0, 0.1])
    cut = cut_1d(ctx, dts, a, b, grid_points=9, margin=0.25)
    assert isinstance(cut, Cut1D)
    assert cut.s.shape == (18,)
    # dt outer, s inner
    assert np.array_equal(cut.dt[:9], np.zeros(9))
    assert np.array_equal(cut.dt[9:], np.full(9, 0.1))
    assert cut.s[0] == pytest.approx(-0.25)
    assert cut.s[8] == pytest.approx(1.25)
    span = float(np.max(np.abs(b - a)))
    assert cut.direction_norm_inf == span
    assert np.allclose(cut.coord_inf, cut.s * span)
    # locate s = 0 and s = 1 on the grid and compare against direct losses
    s_vals = cut.s[:9]
    i0 = int(np.argmin(np.abs(s_vals)))
    i1 = int(np.argmin(np.abs(s_vals - 1.0)))
    theta_i0 = a + s_vals[i0] * (b - a)
    theta_i1 = a + s_vals[i1] * (b - a)
    assert cut.loss[i0] == pytest.approx(loss(ctx, theta_i0), abs=1e-14)
    assert cut.loss[9 + i1] == pytest.approx(
        loss(ctx.replace(dt=0.1), theta_i1), abs=1e-14
    )
    with pytest.raises(ValidationError):
        cut_1d(ctx, dts, a, a)
    with pytest.raises(ValidationError):
        cut_1d(ctx, dts, a, b, grid_points=1)
    with pytest.raises(ValidationError):
        cut_1d(ctx, dts, a[:-1], b)


def test_pca_plane_recovers_planar_trajectory():
    rng = np.random.default_rng(8)
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0, 0.0])
    coeffs = rng.standard_normal((30, 2)) * np.array([3.0, 1.0])
    points = coeffs[:, :1] * e1 + coeffs[:, 1:] * e2 + 0.7
    plane = pca_plane(points)
    assert not plane.degenerate
    assert np.sum(plane.explained_fractions) == pytest.approx(1.0)
    # finite-sample covariance rotates the axes within the plane, so only
    # assert the recovered axes span exactly span(e1, e2)
    for axis in plane.axes:
        assert np.max(np.abs(axis[2:])) < 1e-12
        assert np.linalg.norm(axis) == pytest.approx(1.0, abs=1e-12)
        nz = np.nonzero(np.abs(axis) > 1e-14)[0]
        assert axis[nz[0]] > 0
    assert abs(np.dot(plane.axes[0], plane.axes[1])) < 1e-12
    assert plane.explained_fractions[0] >= plane.explained_fractions[1]


def test_pca_plane_degenerate_line():
    direction = np.array([1.0, 1.0]) / np.sqrt(2)
    points = np.outer(np.linspace(0, 1, 5), direction)
    plane = pca_plane(points)
    assert plane.degenerate
    assert abs(np.dot(plane.axes[0], plane.axes[1])) < 1e-12
    assert np.linalg.norm(plane.axes[1]) == pytest.approx(1.0)
    assert plane.explained_fractions[0] == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        pca_plane(points[:1])
    with pytest.raises(ValidationError):
        pca_plane(np.zeros((5, 1)))
    with pytest.raises(ValidationError):
        pca_plane(np.tile(direction, (5, 1)))  # fewer than 3 distinct points


def test_grid_2d_row_major_and_direct_losses():
    ctx = make_ctx(dt=0.1)
    origin = ctx.theta_star
    axes = np.zeros((2, ctx.n_params))
    axes[0, 0] = 1.0
    axes[1, 1] = 1.0
    grid = grid_2d(ctx, origin, axes, ((-0.5, 0.5), (-0.2, 0.2)), resolution=(3, 2))
    assert grid.u.shape == (6,)
    # u varies slowest (row-major in (u, v))
    assert np.array_equal(grid.u, np.repeat(np.linspace(-0.5, 0.5, 3), 2))
    assert np.array_equal(grid.v, np.tile(np.linspace(-0.2, 0.2, 2), 3))
    for idx in range(6):
        theta = origin + grid.u[idx] * axes[0] + grid.v[idx] * axes[1]
        assert grid.loss[idx] == pytest.approx(loss(ctx, theta), abs=1e-14)
    with pytest.raises(ValidationError):
        grid_2d(ctx, origin, axes, ((-1, 1), (-1, 1)), resolution=1)
    with pytest.raises(ValidationError):
        grid_2d(ctx, origin[:-1], axes, ((-1, 1), (-1, 1)))


def test_gradient_along_path_matches_segments():
    ctx = make_ctx(dt=0.2)
    rng = np.random.default_rng(10)
    path = rng.uniform(-1, 1, (4, ctx.n_params))
    profile = gradient_along_path(ctx, path)
    seg = np.diff(path, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    assert np.allclose(profile.arclength, np.concatenate([[0.0], np.cumsum(seg_len)]))
    for i in range(4):
        j = min(i, 2)
        fd = fd_gradient(lambda x: loss(ctx, x), path[i])
        expected = float(np.dot(fd, seg[j] / seg_len[j]))
        assert profile.directional_gradient[i] == pytest.approx(expected, abs=1e-7)
    # repeated point: zero-length tangent reports zero slope
    flat = np.vstack([path[0], path[0]])
    still = gradient_along_path(ctx, flat)
    assert np.array_equal(still.directional_gradient, np.zeros(2))
    single = gradient_along_path(ctx, path[:1])
    assert single.arclength.shape == (1,)
    assert single.directional_gradient[0] == 0.0
    with pytest.raises(ValidationError):
        gradient_along_path(ctx, path[:, :-1])
