"""Minimization, adiabatic continuation, jump detection, compression driver.

The quasi-Newton path keeps a positive-definite inverse-curvature estimate
(BFGS update with a curvature guard) and a sufficient-decrease line search
whose first fallback is the exact quadratic-interpolation step. On a convex
quadratic that fallback is the exact 1-D minimizer, so the method inherits
the conjugate-direction termination property: at most M + 2 iterations.

Every optimizer records the accepted iterates; downstream landscape tools
(plane projection, path gradients) consume those trajectories directly.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuits import Ansatz
from .errors import ValidationError
from .loss import LossContext, gradient, hessian, loss
from .pauli import PauliSum
from .seeding import derive_seed
from .states import StateVector, evolve_real, fidelity

DEFAULT_GRAD_TOL = 1e-8
DEFAULT_JUMP_GUARD = 0.3
DEFAULT_TRACK_STEPS = 50


@dataclass(frozen=True)
class OptimizerOptions:
    method: str = "quasi_newton"
    grad_tol: float = DEFAULT_GRAD_TOL
    max_iters: int = 500
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 60
    step_init: float = 1.0

    def __post_init__(self) -> None:
        if self.method not in ("quasi_newton", "gradient_descent"):
            raise ValidationError(f"unknown method {self.method!r}")
        if not (self.grad_tol > 0):
            raise ValidationError("grad_tol must be > 0")
        if self.max_iters < 0 or self.max_backtracks < 1:
            raise ValidationError("max_iters must be >= 0, max_backtracks >= 1")
        if not (0 < self.armijo_c < 0.5) or not (0 < self.backtrack_factor < 1):
            raise ValidationError("need 0 < armijo_c < 0.5 and 0 < backtrack_factor < 1")


@dataclass(frozen=True)
class MinimizeResult:
    theta: np.ndarray
    loss: float
    trajectory: np.ndarray
    n_iters: int
    converged: bool
    line_search_failed: bool
    grad_norm_inf: float

    def __iter__(self):
        # unpacks as (theta, loss, trajectory)
        return iter((self.theta, self.loss, self.trajectory))


def _line_search(
    fun: Callable[[np.ndarray], float],
    x: np.ndarray,
    f0: float,
    slope: float,
    direction: np.ndarray,
    opts: OptimizerOptions,
) -> tuple[float, float] | None:
    """Find a step with sufficient decrease; None when none is found.

    Tries the unit step, then the quadratic-interpolation minimizer through
    (0, f0), slope, (1, f1) — exact on quadratics — then geometric
    backtracking. Returns (alpha, f(x + alpha d)).
    """
    alpha = opts.step_init
    f1 = fun(x + alpha * direction)
    best = (alpha, f1)
    denom = 2.0 * (f1 - f0 - slope * alpha)
    if denom > 0:
        alpha_q = -slope * alpha * alpha / denom
        if 0 < alpha_q < 10.0 * opts.step_init:
            fq = fun(x + alpha_q * direction)
            if fq < best[1]:
                best = (alpha_q, fq)
    if best[1] <= f0 + opts.armijo_c * best[0] * slope:
        return best
    alpha = best[0]
    for _ in range(opts.max_backtracks):
        alpha *= opts.backtrack_factor
        f_try = fun(x + alpha * direction)
        if f_try <= f0 + opts.armijo_c * alpha * slope:
            return alpha, f_try
    return None


def minimize_function(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    opts: OptimizerOptions | None = None,
) -> MinimizeResult:
    """Minimize a smooth function from x0; records every accepted iterate.

    Stops when the gradient max-norm drops below grad_tol (0 iterations when
    x0 already qualifies), on iteration budget, or on line-search failure
    (best-so-far returned with the failure flag set).
    """
    opts = opts or OptimizerOptions()
    x = np.array(x0, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("x0 must be a 1-D parameter vector")
    m = x.size
    f = float(fun(x))
    g = np.asarray(grad(x), dtype=np.float64)
    trajectory = [x.copy()]
    h_inv = np.eye(m)
    failed = False
    iters = 0
    while iters < opts.max_iters:
        gnorm = float(np.max(np.abs(g))) if m else 0.0
        if gnorm < opts.grad_tol:
            break
        if opts.method == "quasi_newton":
            direction = -h_inv @ g
            slope = float(np.dot(g, direction))
            if slope >= 0:
                # stale curvature; restart from steepest descent
                h_inv = np.eye(m)
                direction = -g
                slope = float(np.dot(g, direction))
        else:
            direction = -g
            slope = float(np.dot(g, direction))
        found = _line_search(fun, x, f, slope, direction, opts)
        if found is not None and found[1] < f:
            alpha, f_new = found
            step = alpha * direction
            x_new = x + step
            g_new = np.asarray(grad(x_new), dtype=np.float64)
        else:
            # Loss differences have dropped below float resolution. The
            # gradient is still exact, so take the raw quasi-Newton step as
            # long as it keeps shrinking the gradient norm; otherwise stop.
            x_new = x + direction
            g_new = np.asarray(grad(x_new), dtype=np.float64)
            if float(np.max(np.abs(g_new))) < 0.9 * gnorm:
                step = direction
                f_new = float(fun(x_new))
            else:
                failed = found is None
                break
        if opts.method == "quasi_newton":
            y = g_new - g
            sy = float(np.dot(step, y))
            if sy > 1e-12 * float(np.linalg.norm(step) * np.linalg.norm(y) + 1e-300):
                rho = 1.0 / sy
                sy_outer = np.outer(step, y)
                h_inv = (
                    h_inv
                    - rho * (sy_outer @ h_inv + h_inv @ sy_outer.T)
                    + rho * rho * float(y @ h_inv @ y) * np.outer(step, step)
                    + rho * np.outer(step, step)
                )
        x, f, g = x_new, f_new, g_new
        trajectory.append(x.copy())
        iters += 1
    gnorm = float(np.max(np.abs(g))) if m else 0.0
    return MinimizeResult(
        theta=x,
        loss=f,
        trajectory=np.array(trajectory),
        n_iters=iters,
        converged=bool(gnorm < opts.grad_tol),
        line_search_failed=failed,
        grad_norm_inf=gnorm,
    )


def minimize(
    ctx: LossContext, theta0: np.ndarray, opts: OptimizerOptions | None = None
) -> MinimizeResult:
    """Minimize the context's loss starting from theta0."""
    theta0 = np.asarray(theta0, dtype=np.float64)
    if theta0.shape != (ctx.n_params,):
        raise ValidationError("theta0 shape does not match the ansatz")
    return minimize_function(lambda t: loss(ctx, t), lambda t: gradient(ctx, t), theta0, opts)


@dataclass(frozen=True)
class AdiabaticTrack:
    """Continuation samples of the tracked minimum as dt grows from 0."""

    dt: np.ndarray
    theta: np.ndarray
    grad_norm: np.ndarray
    loss: np.ndarray
    dist_inf: np.ndarray
    dist_2: np.ndarray
    continuity_ok: np.ndarray
    halted: bool = False
    halt_reason: str | None = None

    @property
    def n_samples(self) -> int:
        return self.dt.size


def adiabatic_track(
    ansatz: Ansatz,
    hamiltonian: PauliSum,
    theta_star: np.ndarray,
    psi0: StateVector,
    dt_max: float,
    n_steps: int = DEFAULT_TRACK_STEPS,
    opts: OptimizerOptions | None = None,
    jump_guard: float = DEFAULT_JUMP_GUARD,
    kind: str = "real_time",
) -> AdiabaticTrack:
    """Follow the warm-start minimum along a uniform dt grid.

    Each grid point re-minimizes from the previous sample's parameters.
    theta_star must already be a minimum at dt = 0 (gradient below grad_tol).
    A failed minimization flags the sample and halts the track; samples also
    carry a continuity flag (max-norm move below jump_guard) and distances
    from theta_star.
    """
    opts = opts or OptimizerOptions()
    theta_star = np.asarray(theta_star, dtype=np.float64)
    if not (dt_max >= 0):
        raise ValidationError("dt_max must be >= 0")
    if n_steps < 1:
        raise ValidationError("need n_steps >= 1")
    base = LossContext(ansatz, theta_star, hamiltonian, 0.0, psi0, kind=kind)
    g0 = float(np.max(np.abs(gradient(base, theta_star))))
    if g0 >= opts.grad_tol:
        raise ValidationError(
            f"theta_star is not a minimum at dt = 0 (grad norm {g0:.3e})"
        )
    grid = np.array([0.0]) if dt_max == 0 else np.linspace(0.0, dt_max, n_steps + 1)
    dts, thetas, gnorms, losses, ok = [], [], [], [], []
    halted = False
    reason = None
    current = theta_star.copy()
    for dt in grid:
        ctx = base.replace(dt=float(dt))
        result = minimize(ctx, current, opts)
        moved = float(np.max(np.abs(result.theta - current)))
        dts.append(float(dt))
        thetas.append(result.theta)
        gnorms.append(result.grad_norm_inf)
        losses.append(result.loss)
        ok.append(moved < jump_guard)
        if not result.converged:
            halted = True
            reason = (
                "line search failed"
                if result.line_search_failed
                else "iteration budget exhausted"
            ) + f" at dt = {dt:.6g}"
            break
        current = result.theta
    theta_arr = np.array(thetas)
    return AdiabaticTrack(
        dt=np.array(dts),
        theta=theta_arr,
        grad_norm=np.array(gnorms),
        loss=np.array(losses),
        dist_inf=np.max(np.abs(theta_arr - theta_star[None, :]), axis=1),
        dist_2=np.linalg.norm(theta_arr - theta_star[None, :], axis=1),
        continuity_ok=np.array(ok, dtype=bool),
        halted=halted,
        halt_reason=reason,
    )


def track_velocity(track: AdiabaticTrack, index: int) -> np.ndarray:
    """Finite-difference d theta_A / d dt at a track sample.

    Central difference where both neighbors exist, one-sided at the ends.
    """
    k = track.n_samples
    if k < 2:
        raise ValidationError("velocity needs at least 2 track samples")
    if not (0 <= index < k):
        raise ValidationError(f"index {index} out of range for {k} samples")
    lo = max(0, index - 1)
    hi = min(k - 1, index + 1)
    span = track.dt[hi] - track.dt[lo]
    if span <= 0:
        raise ValidationError("track dt grid is not strictly increasing")
    return (track.theta[hi] - track.theta[lo]) / span


def beta_a(ctx: LossContext, track: AdiabaticTrack, index: int) -> float | None:
    """Curvature of the loss along the tracked minimum's direction of motion.

    v^T H v / |v|^2 with v the finite-difference track velocity and H the
    parameter-shift Hessian at the sample. None when the minimum is not
    moving (|v| < 1e-10).
    """
    v = track_velocity(track, index)
    norm = float(np.linalg.norm(v))
    if norm < 1e-10:
        return None
    sample_ctx = ctx.replace(dt=float(track.dt[index]))
    h = hessian(sample_ctx, track.theta[index])
    return float(v @ h @ v) / (norm * norm)


@dataclass(frozen=True)
class MinimumRecord:
    theta: np.ndarray
    loss: float
    distance_inf: float
    origin: str
    converged: bool
    trajectory: np.ndarray


@dataclass(frozen=True)
class JumpReport:
    jumped: bool
    dt: float
    adiabatic_theta: np.ndarray
    adiabatic_loss: float
    minima: tuple[MinimumRecord, ...]
    best_theta: np.ndarray
    best_loss: float
    best_distance_inf: float
    jump_threshold: float
    loss_margin: float


def detect_minima_jump(
    ctx: LossContext,
    theta_star: np.ndarray,
    dt: float,
    n_restarts: int,
    seed: int,
    jump_threshold: float = 0.5,
    loss_margin: float = 1e-3,
    opts: OptimizerOptions | None = None,
    n_workers: int | None = None,
) -> JumpReport:
    """Multistart search for a minimum that undercuts the adiabatic one.

    Minimizes from theta_star (the adiabatic start) and from n_restarts
    uniform draws in [-pi, pi]^M, all at the given dt. A jump is reported
    when some found minimum is farther than jump_threshold (max-norm) from
    the adiabatic minimum AND lower by more than loss_margin. Restart seeds
    derive from the master seed, so reports are reproducible regardless of
    worker count.
    """
    if n_restarts < 1:
        raise ValidationError("need n_restarts >= 1")
    opts = opts or OptimizerOptions()
    theta_star = np.asarray(theta_star, dtype=np.float64)
    step_ctx = ctx.replace(dt=float(dt))
    adiabatic = minimize(step_ctx, theta_star, opts)

    def run_restart(i: int) -> MinimizeResult:
        rng = np.random.default_rng(derive_seed(seed, "restart", i))
        start = rng.uniform(-np.pi, np.pi, size=ctx.n_params)
        return minimize(step_ctx, start, opts)

    if n_workers is not None and n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_restart, range(n_restarts)))
    else:
        results = [run_restart(i) for i in range(n_restarts)]

    records = [
        MinimumRecord(
            theta=adiabatic.theta,
            loss=adiabatic.loss,
            distance_inf=0.0,
            origin="adiabatic",
            converged=adiabatic.converged,
            trajectory=adiabatic.trajectory,
        )
    ]
    for i, res in enumerate(results):
        records.append(
            MinimumRecord(
                theta=res.theta,
                loss=res.loss,
                distance_inf=float(np.max(np.abs(res.theta - adiabatic.theta))),
                origin=f"restart_{i}",
                converged=res.converged,
                trajectory=res.trajectory,
            )
        )
    best = min(records, key=lambda rec: rec.loss)
    jumped = any(
        rec.distance_inf > jump_threshold and rec.loss < adiabatic.loss - loss_margin
        for rec in records
    )
    return JumpReport(
        jumped=jumped,
        dt=float(dt),
        adiabatic_theta=adiabatic.theta,
        adiabatic_loss=adiabatic.loss,
        minima=tuple(records),
        best_theta=best.theta,
        best_loss=best.loss,
        best_distance_inf=best.distance_inf,
        jump_threshold=float(jump_threshold),
        loss_margin=float(loss_margin),
    )


@dataclass(frozen=True)
class AdaptiveSchedule:
    """Adaptive timestep control for compress_run.

    Steps halve when the trained loss stays above loss_threshold and double
    back toward dt_cap after successes. A step below dt_min aborts the run.
    """

    total_time: float
    dt_init: float
    loss_threshold: float = 1e-6
    dt_min: float = 1e-6
    dt_cap: float | None = None
    max_steps: int = 1000

    def __post_init__(self) -> None:
        if self.total_time < 0 or self.dt_init <= 0 or self.dt_min <= 0:
            raise ValidationError("need total_time >= 0, dt_init > 0, dt_min > 0")
        if self.dt_cap is not None and self.dt_cap < self.dt_init:
            raise ValidationError("dt_cap must be >= dt_init")


@dataclass(frozen=True)
class CompressionStep:
    k: int
    dt: float
    theta: np.ndarray
    final_loss: float
    cumulative_time: float
    cumulative_fidelity: float
    iters_used: int
    converged: bool


@dataclass(frozen=True)
class CompressionLog:
    steps: tuple[CompressionStep, ...]
    completed: bool
    reason: str

    @property
    def cumulative_time(self) -> float:
        return self.steps[-1].cumulative_time if self.steps else 0.0

    @property
    def final_fidelity(self) -> float:
        return self.steps[-1].cumulative_fidelity if self.steps else 1.0


def compress_run(
    ansatz: Ansatz,
    hamiltonian: PauliSum,
    psi0: StateVector,
    schedule: Sequence[float] | AdaptiveSchedule,
    opts: OptimizerOptions | None = None,
    jitter_r: float = 0.0,
    seed: int = 0,
    kind: str = "real_time",
) -> CompressionLog:
    """Iterative circuit compression of a full evolution.

    Each step trains U(theta) against e^{-iH dt} applied to the current
    compressed circuit: the previous optimum becomes theta_star of the next
    loss, and training starts from it (from theta = 0 at the first step),
    optionally jittered uniformly within max-norm jitter_r. The log records
    per-step loss and the fidelity of the compressed circuit against exact
    evolution of the accumulated time.
    """
    opts = opts or OptimizerOptions()
    rng = np.random.default_rng(derive_seed(seed, "compress"))
    theta_star = np.zeros(ansatz.n_params)
    base = LossContext(ansatz, theta_star, hamiltonian, 0.0, psi0, kind=kind)

    adaptive = isinstance(schedule, AdaptiveSchedule)
    if not adaptive:
        fixed = [float(dt) for dt in schedule]
        if not fixed:
            raise ValidationError("empty schedule")
        if any(dt < 0 for dt in fixed):
            raise ValidationError("fixed schedule steps must be >= 0")

    steps: list[CompressionStep] = []
    elapsed = 0.0
    k = 0
    dt_next = schedule.dt_init if adaptive else None
    completed = False
    reason = "schedule exhausted"
    while True:
        if adaptive:
            if elapsed >= schedule.total_time - 1e-15 or k >= schedule.max_steps:
                completed = elapsed >= schedule.total_time - 1e-15
                reason = "target time reached" if completed else "step budget exhausted"
                break
            dt = min(dt_next, schedule.total_time - elapsed)
        else:
            if k >= len(fixed):
                completed = True
                break
            dt = fixed[k]

        ctx = base.replace(theta_star=theta_star, dt=float(dt))
        start = theta_star
        if jitter_r > 0:
            start = theta_star + rng.uniform(-jitter_r, jitter_r, size=ansatz.n_params)
        result = minimize(ctx, start, opts)

        if adaptive and result.loss > schedule.loss_threshold:
            dt_next = dt / 2.0
            if dt_next < schedule.dt_min:
                reason = f"loss {result.loss:.3e} above threshold at minimal step"
                break
            continue

        k += 1
        elapsed += dt
        theta_star = result.theta
        compressed = StateVector(
            ansatz.apply_gate_angles(ansatz.gate_angles(theta_star), psi0.amplitudes)
        )
        exact = evolve_real(psi0, hamiltonian, elapsed)
        steps.append(
            CompressionStep(
                k=k,
                dt=float(dt),
                theta=theta_star,
                final_loss=result.loss,
                cumulative_time=elapsed,
                cumulative_fidelity=fidelity(compressed, exact),
                iters_used=result.n_iters,
                converged=result.converged,
            )
        )
        if adaptive:
            cap = schedule.dt_cap if schedule.dt_cap is not None else schedule.dt_init
            dt_next = min(2.0 * dt, cap)
    return CompressionLog(steps=tuple(steps), completed=completed, reason=reason)
