"""Closed-form trainability bounds and their validity predicates.

Every bound is reported as a BoundReport: the numeric value, an exhaustive
list of precondition checks, and an overall valid flag. Values are computed
unconditionally (they are meaningful only when valid); all are >= 0.

Condition margins share one convention: margin > 0 means strictly inside the
allowed region, 0 exactly marginal (still satisfied), < 0 violated. Radius
conditions report their margin on the r^2 scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .loss import LossContext, _lift_string


@dataclass(frozen=True)
class Condition:
    name: str
    satisfied: bool
    margin: float


@dataclass(frozen=True)
class BoundReport:
    value: float
    valid: bool
    conditions: tuple[Condition, ...] = field(default_factory=tuple)
    unbounded: bool = False

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def _condition(name: str, limit: float, actual: float) -> Condition:
    """Check actual <= limit; limit may be +inf for vacuous constraints."""
    margin = limit - actual
    return Condition(name, bool(margin >= 0.0), float(margin))


def _check_radius(r: float) -> float:
    r = float(r)
    if not np.isfinite(r) or r < 0:
        raise ValidationError(f"sampling radius must be >= 0, got {r!r}")
    return r


def _check_r0(r0: float) -> float:
    r0 = float(r0)
    if not (0.0 < r0 < 1.0):
        raise ValidationError(f"reference radius r0 must lie in (0, 1), got {r0!r}")
    return r0


def _check_m(m: int) -> int:
    if int(m) != m or m < 1:
        raise ValidationError(f"parameter count must be a positive integer, got {m!r}")
    return int(m)


def _check_nonneg(value: float, what: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValidationError(f"{what} must be finite and >= 0, got {value!r}")
    return value


def cos2_moment(r: float) -> float:
    """E[cos^2 a] for a uniform on [-r, r]: 1/2 + sin(2r)/(4r); 1 at r = 0."""
    r = _check_radius(r)
    return 0.5 + 0.5 * float(np.sinc(2.0 * r / np.pi))


def cos4_moment(r: float) -> float:
    """E[cos^4 a] for a uniform on [-r, r]; 1 at r = 0."""
    r = _check_radius(r)
    return (
        0.375
        + 0.5 * float(np.sinc(2.0 * r / np.pi))
        + 0.125 * float(np.sinc(4.0 * r / np.pi))
    )


def cos2_variance(r: float) -> float:
    """Var[cos^2 a] = cos4_moment - cos2_moment^2, evaluated stably.

    The closed form (-1 + 4r^2 + cos 4r + r sin 4r)/(32 r^2) cancels

    catastrophically for small r, so below r = 0.05 the even-series head
    4r^4/45 - 16r^6/315 + 64r^8/4725 takes over (relative error < 1e-9 there).
    """
    r = _check_radius(r)
    if r < 0.05:
        r2 = r * r
        return r2 * r2 * (4.0 / 45.0 - r2 * (16.0 / 315.0 - r2 * (64.0 / 4725.0)))
    return (-1.0 + 4.0 * r * r + math.cos(4.0 * r) + r * math.sin(4.0 * r)) / (32.0 * r * r)


def quartic_variance_floor(r: float) -> float:
    """Series lower bound (4r^4/45)(1 - 4r^2/7) on cos2_variance, clamped >= 0."""
    r = _check_radius(r)
    return max(0.0, (4.0 * r**4 / 45.0) * (1.0 - 4.0 * r * r / 7.0))


def overlap_gap(ctx: LossContext) -> float:
    """Gap between target overlaps with the warm start and its first-gate flip.

    |<target|U(theta*)psi0>|^2 - |<target|U(theta*) sigma_1 psi0>|^2, evaluated
    on the effective system of the loss kind. At dt = 0 this is
    1 - |<psi0|sigma_1|psi0>|^2. Dataset losses average the paired-register
    expression over all state pairs, weighted by their squared overlaps.
    """
    if ctx.kind == "unitary_hst":
        return overlap_gap(ctx.replace(kind="unitary_bell"))
    sigma = ctx.ansatz.first_generator
    if sigma is None:
        raise ValidationError("ansatz has no rotation gates")
    star = ctx.eval_ansatz.gate_angles(ctx.theta_star)
    if ctx.kind == "qml":
        inputs = ctx.dataset.amplitudes
        warm = ctx.ansatz.apply_gate_angles(star, inputs)
        flipped = ctx.ansatz.apply_gate_angles(star, sigma.apply(inputs))
        targets = ctx._target
        pair_weight = np.abs(inputs.conj() @ inputs.T) ** 2
        warm_fid = np.abs(targets.conj() @ warm.T) ** 2
        flip_fid = np.abs(targets.conj() @ flipped.T) ** 2
        return float(np.sum((warm_fid - flip_fid) * pair_weight)) / ctx.dataset.n_states**2
    if ctx.kind == "unitary_bell":
        sigma = _lift_string(sigma, ctx.ansatz.n)
    psi = ctx.eval_psi0.amplitudes
    warm = ctx.eval_ansatz.apply_gate_angles(star, psi)
    flipped = ctx.eval_ansatz.apply_gate_angles(star, sigma.apply(psi))
    target = ctx._target
    return float(np.abs(np.vdot(target, warm)) ** 2 - np.abs(np.vdot(target, flipped)) ** 2)


def variance_floor(r: float, m: int, gap: float) -> float:
    """Exact minimized variance lower bound for a given overlap gap.

    cos2_variance(r) * min over xi in [-1, 1] of
    (k^(M-1) gap + (1 - k^(M-1)) xi)^2 with k = cos2_moment(r). The minimizer
    is handled analytically: when the stationary point is feasible the bound
    is exactly 0, otherwise the nearer endpoint is used. M = 1 collapses to
    cos2_variance(r) * gap^2.
    """
    r = _check_radius(r)
    m = _check_m(m)
    gap = float(gap)
    if not np.isfinite(gap) or abs(gap) > 1.0 + 1e-9:
        raise ValidationError(f"overlap gap must lie in [-1, 1], got {gap!r}")
    gap = min(1.0, max(-1.0, gap))
    spread = cos2_variance(r)
    shrink = cos2_moment(r) ** (m - 1)
    center = shrink * gap
    width = 1.0 - shrink
    if width == 0.0:
        return spread * gap * gap
    if abs(center) <= width:
        return 0.0
    return spread * min((center - width) ** 2, (center + width) ** 2)


def _variance_report(
    r: float,
    r0: float,
    m: int,
    step: float,
    region_num: float,
    region_den: float,
    step_limit: float,
    gap_factor: float,
    statement_form: bool,
) -> BoundReport:
    """Shared assembly for the real- and imaginary-time variance bounds."""
    step_cond = _condition("step_within_spectral_window", step_limit, step)
    if m == 1:
        region_limit = math.inf
    elif region_den <= 0.0:
        region_limit = -math.inf
    else:
        region_limit = 3.0 * r0 * r0 * region_num / (2.0 * (m - 1) * region_den)
    region_cond = _condition("radius_within_variance_window", region_limit, r * r)
    warm = (1.0 - r0) if statement_form else (1.0 - r0 * r0)
    value = quartic_variance_floor(r) * (warm * gap_factor) ** 2
    conditions = (step_cond, region_cond)
    return BoundReport(value, all(c.satisfied for c in conditions), conditions)


def real_time_variance_bound(
    r: float,
    r0: float,
    m: int,
    lam_max: float,
    dt: float,
    statement_form: bool = False,
) -> BoundReport:
    """Variance lower bound around a real-time warm start.

    Conditions: dt <= 1/(2 lam_max) and
    r^2 <= 3 r0^2 (1 - 4 lam^2 dt^2) / (2(M-1)(1 - 2 lam^2 dt^2)).
    Value: quartic_variance_floor(r) * [(1 - r0^2)(1 - 4 lam^2 dt^2)]^2.
    The default (1 - r0^2) form is the derived one; statement_form swaps in
    the looser (1 - r0) prefactor.
    """
    r = _check_radius(r)
    r0 = _check_r0(r0)
    m = _check_m(m)
    lam_max = _check_nonneg(lam_max, "lam_max")
    dt = _check_nonneg(dt, "dt")
    shrink = (lam_max * dt) ** 2
    step_limit = math.inf if lam_max == 0.0 else 1.0 / (2.0 * lam_max)
    return _variance_report(
        r, r0, m, dt,
        1.0 - 4.0 * shrink,
        1.0 - 2.0 * shrink,
        step_limit,
        1.0 - 4.0 * shrink,
        statement_form,
    )


def imaginary_time_variance_bound(
    r: float,
    r0: float,
    m: int,
    lam_max: float,
    dtau: float,
    statement_form: bool = False,
) -> BoundReport:
    """Variance lower bound around a normalized imaginary-time warm start.

    Conditions: dtau <= 1/(sqrt(24) lam_max) and
    r^2 <= 3 r0^2 (1 - 24 lam^2 dtau^2) / (2(M-1)(1 - 12 lam^2 dtau^2)).
    Value: quartic_variance_floor(r) * [(1 - r0^2)(1 - 24 lam^2 dtau^2)]^2.
    The quartic series factor (1 - 4r^2/7) is kept: dropping it would exceed
    cos2_variance and break soundness. At dtau = 0 this matches the real-time
    bound at dt = 0.
    """
    r = _check_radius(r)
    r0 = _check_r0(r0)
    m = _check_m(m)
    lam_max = _check_nonneg(lam_max, "lam_max")
    dtau = _check_nonneg(dtau, "dtau")
    shrink = (lam_max * dtau) ** 2
    step_limit = math.inf if lam_max == 0.0 else 1.0 / (math.sqrt(24.0) * lam_max)
    return _variance_report(
        r, r0, m, dtau,
        1.0 - 24.0 * shrink,
        1.0 - 12.0 * shrink,
        step_limit,
        1.0 - 24.0 * shrink,
        statement_form,
    )


def fidelity_variance_bound(r: float, r0: float, m: int, target_fidelity: float) -> BoundReport:
    """Variance lower bound for an arbitrary target with known warm-start fidelity.

    Conditions: F >= 1/2 and r^2 <= (2F - 1)/(2F) * 3 r0^2/(M - 1). The second
    follows from rearranging 1 - (M-1) r^2 / (3 r0^2) >= 1/(2F); at F = 1 it
    matches the real-time dt = 0 region. Value:
    quartic_variance_floor(r) * [(1 - r0^2)(2F - 1)]^2, or 0 when F < 1/2.
    """
    r = _check_radius(r)
    r0 = _check_r0(r0)
    m = _check_m(m)
    f = float(target_fidelity)
    if not np.isfinite(f) or not (-1e-9 <= f <= 1.0 + 1e-9):
        raise ValidationError(f"fidelity must lie in [0, 1], got {f!r}")
    f = min(1.0, max(0.0, f))
    half_cond = Condition("fidelity_at_least_half", f >= 0.5, f - 0.5)
    if f == 0.0:
        region_limit = -math.inf
    elif m == 1:
        region_limit = math.inf
    else:
        region_limit = (2.0 * f - 1.0) / (2.0 * f) * 3.0 * r0 * r0 / (m - 1)
    region_cond = _condition("radius_within_fidelity_window", region_limit, r * r)
    if f < 0.5:
        value = 0.0
    else:
        value = quartic_variance_floor(r) * ((1.0 - r0 * r0) * (2.0 * f - 1.0)) ** 2
    conditions = (half_cond, region_cond)
    return BoundReport(value, all(c.satisfied for c in conditions), conditions)


def convexity_radius(
    mu_min: float,
    epsilon: float,
    m: int,
    lam_max: float,
    dt: float,
    kind: str = "real_time",
) -> BoundReport:
    """Radius of guaranteed approximate convexity around the warm start.

    real_time:      r_c >= (1/M)((mu_min + 2|eps|)/(16M) - lam dt),
                    valid while dt <= (mu_min + 2|eps|)/(16 M lam).
    imaginary_time: the drift term triples (3 lam dtau) and the step window
                    tightens to (mu_min + 2|eps|)/(48 M lam).
    Value clamped at 0.
    """
    m = _check_m(m)
    lam_max = _check_nonneg(lam_max, "lam_max")
    dt = _check_nonneg(dt, "dt")
    mu = float(mu_min)
    if not np.isfinite(mu):
        raise ValidationError(f"non-finite mu_min {mu_min!r}")
    if mu < -1e-8:
        raise ValidationError(f"mu_min is an eigenvalue of a PSD matrix, got {mu!r}")
    mu = max(0.0, mu)
    eps = abs(float(epsilon))
    if kind == "real_time":
        drift, window = 1.0, 16.0
    elif kind == "imaginary_time":
        drift, window = 3.0, 48.0
    else:
        raise ValidationError(f"unknown kind {kind!r}")
    numer = mu + 2.0 * eps
    step_limit = math.inf if lam_max == 0.0 else numer / (window * m * lam_max)
    cond = _condition("step_within_convexity_window", step_limit, dt)
    value = max(0.0, (numer / (16.0 * m) - drift * lam_max * dt) / m)
    return BoundReport(value, cond.satisfied, (cond,))


def adiabatic_shift_bound(
    m: int, lam_max: float, dt: float, beta: float, kind: str = "real_time"
) -> BoundReport:
    """Bound on how far the tracked minimum moves in one step.

    2 sqrt(M) lam dt / beta (real time) or 4 sqrt(M) lam dtau / beta
    (imaginary time), where beta is the smallest nonzero QFI-weighted
    velocity scale. beta <= 0 gives no bound: unbounded flag, infinite value.
    """
    m = _check_m(m)
    lam_max = _check_nonneg(lam_max, "lam_max")
    dt = _check_nonneg(dt, "dt")
    beta = float(beta)
    if kind == "real_time":
        factor = 2.0
    elif kind == "imaginary_time":
        factor = 4.0
    else:
        raise ValidationError(f"unknown kind {kind!r}")
    cond = Condition("velocity_scale_positive", beta > 0.0, beta)
    if beta <= 0.0:
        return BoundReport(math.inf, False, (cond,), unbounded=True)
    return BoundReport(factor * math.sqrt(m) * lam_max * dt / beta, True, (cond,))


def adiabatic_step_limits(
    m: int,
    lam_max: float,
    beta: float,
    eta0: float,
    mu_min: float,
    epsilon: float,
    kind: str = "real_time",
) -> tuple[float, float]:
    """(step limit keeping gradients useful, step limit keeping convexity).

    real_time:      eta0 beta/(2 M lam) and
                    beta (mu+2|eps|) / (32 lam M^{5/2} (1 + beta/(2 M^{3/2}))).
    imaginary_time: eta0 beta/(4 M lam) and
                    beta (mu+2|eps|) / (64 lam M^{5/2} (1 + 3 beta/(4 M^{3/2}))).
    The convexity limit is typically the smaller; both are returned.
    """
    m = _check_m(m)
    lam_max = _check_nonneg(lam_max, "lam_max")
    if lam_max == 0.0:
        raise ValidationError("step limits need lam_max > 0")
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 0.0:
        raise ValidationError(f"velocity scale beta must be > 0, got {beta!r}")
    eta0 = float(eta0)
    if not np.isfinite(eta0) or eta0 <= 0.0:
        raise ValidationError(f"eta0 must be > 0, got {eta0!r}")
    mu = max(0.0, float(mu_min))
    eps = abs(float(epsilon))
    if kind == "real_time":
        grad_den, conv_den, beta_scale = 2.0, 32.0, 0.5
    elif kind == "imaginary_time":
        grad_den, conv_den, beta_scale = 4.0, 64.0, 0.75
    else:
        raise ValidationError(f"unknown kind {kind!r}")
    dt_grad = eta0 * beta / (grad_den * m * lam_max)
    m32 = float(m) ** 1.5
    dt_convex = (
        beta * (mu + 2.0 * eps)
        / (conv_den * lam_max * m32 * m * (1.0 + beta_scale * beta / m32))
    )
    return dt_grad, dt_convex


def imaginary_time_bounds(
    r: float,
    r0: float,
    m: int,
    lam_max: float,
    dtau: float,
    mu_min: float,
    epsilon: float,
    beta: float,
    eta0: float,
) -> dict[str, BoundReport]:
    """All imaginary-time bounds for one parameter set, keyed by role."""
    reports = {
        "variance": imaginary_time_variance_bound(r, r0, m, lam_max, dtau),
        "convexity": convexity_radius(mu_min, epsilon, m, lam_max, dtau, kind="imaginary_time"),
        "tracked_shift": adiabatic_shift_bound(m, lam_max, dtau, beta, kind="imaginary_time"),
    }
    if beta > 0:
        dt_grad, dt_convex = adiabatic_step_limits(
            m, lam_max, beta, eta0, mu_min, epsilon, kind="imaginary_time"
        )
        ok = Condition("velocity_scale_positive", True, beta)
        reports["step_limit_gradient"] = BoundReport(dt_grad, True, (ok,))
        reports["step_limit_convexity"] = BoundReport(dt_convex, True, (ok,))
    else:
        bad = Condition("velocity_scale_positive", False, beta)
        reports["step_limit_gradient"] = BoundReport(math.inf, False, (bad,), unbounded=True)
        reports["step_limit_convexity"] = BoundReport(math.inf, False, (bad,), unbounded=True)
    return reports


def gershgorin_row_bound(a: np.ndarray) -> float:
    """max_i sum_j |A_ij|, an upper bound on the largest eigenvalue."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"need a square matrix, got shape {a.shape}")
    if a.size == 0:
        raise ValidationError("empty matrix")
    return float(np.max(np.sum(np.abs(a), axis=1)))
