"""Hypercube sampling, variance estimation, power-law fits, landscape cuts.

All estimators are deterministic functions of their seed. Sweeps derive one
child seed per grid point from the master seed, so adding grid points never
reshuffles the samples of existing ones. Reductions go through numpy's
pairwise summation, which keeps results independent of chunking.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError
from .loss import LossContext, gradient, loss, loss_batch
from .seeding import derive_seed

DEFAULT_N_SAMPLES = 20_000
_CHUNK_AMPLITUDES = 1 << 22


@dataclass(frozen=True)
class HypercubeRegion:
    """Axis-aligned cube: every coordinate within r of the center."""

    center: np.ndarray
    r: float

    def __post_init__(self) -> None:
        center = np.atleast_1d(np.asarray(self.center, dtype=np.float64))
        if center.ndim != 1 or not np.all(np.isfinite(center)):
            raise ValidationError("center must be a finite parameter vector")
        object.__setattr__(self, "center", center)
        if not np.isfinite(self.r) or self.r < 0:
            raise ValidationError(f"half-width must be >= 0, got {self.r!r}")

    @property
    def n_params(self) -> int:
        return self.center.size


@dataclass(frozen=True)
class VarianceEstimate:
    mean: float
    variance: float
    n_samples: int
    std_error_of_variance: float
    seed: int


def default_r_grid(n_points: int = 40) -> np.ndarray:
    """Log-spaced sampling radii from 1e-3 to pi."""
    return np.geomspace(1e-3, np.pi, n_points)


def sample_hypercube(region: HypercubeRegion, seed: int, k: int) -> np.ndarray:
    """(k, M) matrix of independent uniform draws from the cube."""
    if k < 1:
        raise ValidationError(f"need k >= 1 samples, got {k}")
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-region.r, region.r, size=(k, region.n_params))
    return region.center[None, :] + offsets


def _chunked_losses(ctx: LossContext, thetas: np.ndarray) -> np.ndarray:
    chunk = max(1, _CHUNK_AMPLITUDES // (1 << ctx.n))
    parts = [
        loss_batch(ctx, thetas[i : i + chunk]) for i in range(0, thetas.shape[0], chunk)
    ]
    return np.concatenate(parts)


def estimate_variance(
    ctx: LossContext, region: HypercubeRegion, n_samples: int, seed: int
) -> VarianceEstimate:
    """Unbiased sample variance of the loss over the cube.

    The standard error of the variance uses the fourth-moment estimator
    sqrt((m4 - s^4 (n-3)/(n-1)) / n) with m4 the central fourth moment.
    """
    if n_samples < 2:
        raise ValidationError(f"need n_samples >= 2, got {n_samples}")
    if region.n_params != ctx.n_params:
        raise ValidationError("region dimension does not match the ansatz")
    values = _chunked_losses(ctx, sample_hypercube(region, seed, n_samples))
    mean = float(np.mean(values))
    centered = values - mean
    variance = float(np.sum(centered**2)) / (n_samples - 1)
    m4 = float(np.mean(centered**4))
    se_sq = (m4 - variance**2 * (n_samples - 3) / (n_samples - 1)) / n_samples
    return VarianceEstimate(
        mean=mean,
        variance=variance,
        n_samples=n_samples,
        std_error_of_variance=float(np.sqrt(max(0.0, se_sq))),
        seed=int(seed),
    )


@dataclass(frozen=True)
class VarianceSweep:
    """Per-radius variance estimates plus the grid argmax."""

    r: np.ndarray
    mean_loss: np.ndarray
    variance: np.ndarray
    var_stderr: np.ndarray
    r_max: float
    variance_max: float
    seed: int


def variance_sweep_r(
    ctx: LossContext,
    r_grid: np.ndarray | None = None,
    n_samples: int = DEFAULT_N_SAMPLES,
    seed: int = 0,
) -> VarianceSweep:
    """Variance of the loss versus sampling radius around theta*."""
    grid = default_r_grid() if r_grid is None else np.asarray(r_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("r grid must be a non-empty 1-D array")
    means, variances, errors = [], [], []
    for i, r in enumerate(grid):
        region = HypercubeRegion(ctx.theta_star, float(r))
        est = estimate_variance(ctx, region, n_samples, derive_seed(seed, "r", i))
        means.append(est.mean)
        variances.append(est.variance)
        errors.append(est.std_error_of_variance)
    variance = np.array(variances)
    peak = int(np.argmax(variance))
    return VarianceSweep(
        r=grid,
        mean_loss=np.array(means),
        variance=variance,
        var_stderr=np.array(errors),
        r_max=float(grid[peak]),
        variance_max=float(variance[peak]),
        seed=int(seed),
    )


@dataclass(frozen=True)
class StepSweep:
    """Per-timestep variance estimates at fixed radius, plus the peak."""

    dt: np.ndarray
    mean_loss: np.ndarray
    variance: np.ndarray
    var_stderr: np.ndarray
    dt_peak: float
    variance_peak: float
    seed: int


def variance_vs_dt(
    ctx: LossContext,
    dt_grid: np.ndarray,
    r_fixed: float,
    n_samples: int = DEFAULT_N_SAMPLES,
    seed: int = 0,
) -> StepSweep:
    """Variance of the loss versus evolution timestep at fixed radius."""
    grid = np.asarray(dt_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("dt grid must be a non-empty 1-D array")
    region = HypercubeRegion(ctx.theta_star, float(r_fixed))
    means, variances, errors = [], [], []
    for i, dt in enumerate(grid):
        step_ctx = ctx.replace(dt=float(dt))
        est = estimate_variance(step_ctx, region, n_samples, derive_seed(seed, "dt", i))
        means.append(est.mean)
        variances.append(est.variance)
        errors.append(est.std_error_of_variance)
    variance = np.array(variances)
    peak = int(np.argmax(variance))
    return StepSweep(
        dt=grid,
        mean_loss=np.array(means),
        variance=variance,
        var_stderr=np.array(errors),
        dt_peak=float(grid[peak]),
        variance_peak=float(variance[peak]),
        seed=int(seed),
    )


def surface_mean_loss(
    ctx: LossContext, r: float, n_directions: int = 500, seed: int = 0
) -> float:
    """Mean loss over random unit-max-norm directions at distance exactly r.

    Directions are uniform cube draws normalized to unit max-norm, so every
    evaluated point sits on the surface of the radius-r cube around theta*.
    """
    if n_directions < 1:
        raise ValidationError("need at least one direction")
    rng = np.random.default_rng(seed)
    raw = rng.uniform(-1.0, 1.0, size=(n_directions, ctx.n_params))
    norms = np.max(np.abs(raw), axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    thetas = ctx.theta_star[None, :] + float(r) * raw / norms
    return float(np.mean(_chunked_losses(ctx, thetas)))


def fit_power_law(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    """(exponent, prefactor, r^2 of fit) from least squares on log-log data."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 3:
        raise ValidationError("need matching 1-D arrays with at least 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0) or not (
        np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))
    ):
        raise ValidationError("power-law fit needs strictly positive finite data")
    fit = stats.linregress(np.log(xs), np.log(ys))
    return float(fit.slope), float(np.exp(fit.intercept)), float(fit.rvalue**2)


@dataclass(frozen=True)
class Cut1D:
    """Loss along the segment theta_a + s (theta_b - theta_a), one row set per dt."""

    dt: np.ndarray
    s: np.ndarray
    coord_inf: np.ndarray
    loss: np.ndarray
    direction_norm_inf: float


def cut_1d(
    ctx: LossContext,
    dt_list: np.ndarray,
    theta_a: np.ndarray,
    theta_b: np.ndarray,
    grid_points: int = 201,
    margin: float = 0.25,
) -> Cut1D:
    """1-D landscape cut through two parameter points, for each timestep.

    s runs over [-margin, 1 + margin]; s = 0 is theta_a, s = 1 is theta_b.
    coord_inf = s * max-norm of (theta_b - theta_a) gives the cut a metric
    axis. Flattened row order: dt outer, s inner.
    """
    theta_a = np.asarray(theta_a, dtype=np.float64)
    theta_b = np.asarray(theta_b, dtype=np.float64)
    if theta_a.shape != (ctx.n_params,) or theta_b.shape != (ctx.n_params,):
        raise ValidationError("endpoint shapes must match the ansatz")
    direction = theta_b - theta_a
    span = float(np.max(np.abs(direction)))
    if span == 0.0:
        raise ValidationError("cut endpoints coincide")
    if grid_points < 2:
        raise ValidationError("need at least 2 grid points")
    dts = np.atleast_1d(np.asarray(dt_list, dtype=np.float64))
    s = np.linspace(-margin, 1.0 + margin, grid_points)
    thetas = theta_a[None, :] + s[:, None] * direction[None, :]
    losses = []
    for dt in dts:
        step_ctx = ctx.replace(dt=float(dt))
        losses.append(_chunked_losses(step_ctx, thetas))
    dt_col = np.repeat(dts, grid_points)
    s_col = np.tile(s, dts.size)
    return Cut1D(
        dt=dt_col,
        s=s_col,
        coord_inf=s_col * span,
        loss=np.concatenate(losses),
        direction_norm_inf=span,
    )


@dataclass(frozen=True)
class Plane:
    axes: np.ndarray
    explained_fractions: np.ndarray
    degenerate: bool = False


def pca_plane(trajectory: np.ndarray) -> Plane:
    """Top-2 principal axes of a parameter trajectory.

    Axes are eigenvectors of the mean-centered covariance, each flipped so
    its first nonzero component is positive. A rank-deficient trajectory gets
    its second axis completed by an arbitrary orthogonal unit vector and the
    degenerate flag set.
    """
    points = np.asarray(trajectory, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] < 2:
        raise ValidationError("trajectory must be (k, M) with M >= 2")
    if np.unique(points, axis=0).shape[0] < 3:
        raise ValidationError("need at least 3 distinct trajectory points")
    centered = points - np.mean(points, axis=0)
    cov = centered.T @ centered / (points.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    axes = eigvecs[:, order].T[:2].copy()
    total = float(np.sum(eigvals))
    fractions = eigvals[:2] / total if total > 0 else np.zeros(2)
    degenerate = bool(eigvals[1] <= eigvals[0] * 1e-12)
    if degenerate:
        # complete an orthonormal pair from the dominant axis
        basis = np.eye(points.shape[1])
        candidate = basis[int(np.argmin(np.abs(axes[0])))]
        candidate = candidate - axes[0] * np.dot(axes[0], candidate)
        axes[1] = candidate / np.linalg.norm(candidate)
    for i in range(2):
        nz = np.nonzero(np.abs(axes[i]) > 1e-14)[0]
        if nz.size and axes[i, nz[0]] < 0:
            axes[i] = -axes[i]
    return Plane(axes=axes, explained_fractions=fractions, degenerate=degenerate)


@dataclass(frozen=True)
class Grid2D:
    u: np.ndarray
    v: np.ndarray
    loss: np.ndarray


def grid_2d(
    ctx: LossContext,
    origin: np.ndarray,
    axes: np.ndarray,
    extents: tuple[tuple[float, float], tuple[float, float]],
    resolution: int | tuple[int, int] = 41,
) -> Grid2D:
    """Loss on the lattice origin + u axes[0] + v axes[1], row-major in (u, v)."""
    origin = np.asarray(origin, dtype=np.float64)
    axes = np.asarray(axes, dtype=np.float64)
    if origin.shape != (ctx.n_params,) or axes.shape != (2, ctx.n_params):
        raise ValidationError("origin must be (M,), axes must be (2, M)")
    (umin, umax), (vmin, vmax) = extents
    nu, nv = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nu < 2 or nv < 2:
        raise ValidationError("resolution must be >= 2 per axis")
    us = np.linspace(umin, umax, nu)
    vs = np.linspace(vmin, vmax, nv)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    u_flat, v_flat = uu.ravel(), vv.ravel()
    thetas = origin[None, :] + np.outer(u_flat, axes[0]) + np.outer(v_flat, axes[1])
    return Grid2D(u=u_flat, v=v_flat, loss=_chunked_losses(ctx, thetas))


@dataclass(frozen=True)
class PathProfile:
    arclength: np.ndarray
    loss: np.ndarray
    directional_gradient: np.ndarray


def gradient_along_path(ctx: LossContext, path: np.ndarray) -> PathProfile:
    """Loss and tangential gradient at each point of a parameter path.

    The tangent at point i is the segment to point i+1 (the last point keeps
    the preceding segment); zero-length segments yield zero directional
    gradient. Arclength accumulates Euclidean segment lengths.
    """
    points = np.asarray(path, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != ctx.n_params:
        raise ValidationError("path must be (k, M) matching the ansatz")
    k = points.shape[0]
    if k < 1:
        raise ValidationError("empty path")
    seg = np.diff(points, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    arclength = np.concatenate([[0.0], np.cumsum(seg_len)])
    losses = _chunked_losses(ctx, points)
    directional = np.zeros(k)
    for i in range(k):
        j = min(i, k - 2) if k > 1 else 0
        if k == 1 or seg_len[j] == 0.0:
            continue
        directional[i] = float(np.dot(gradient(ctx, points[i]), seg[j] / seg_len[j]))
    return PathProfile(arclength=arclength, loss=losses, directional_gradient=directional)
