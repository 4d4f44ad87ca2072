import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import uniform_moment
from warmstart.bounds import (
    adiabatic_shift_bound,
    adiabatic_step_limits,
    convexity_radius,
    cos2_moment,
    cos2_variance,
    cos4_moment,
    fidelity_variance_bound,
    gershgorin_row_bound,
    imaginary_time_bounds,
    imaginary_time_variance_bound,
    overlap_gap,
    quartic_variance_floor,
    real_time_variance_bound,
    variance_floor,
)
from warmstart.circuits import Ansatz, Rotation, build_hea
from warmstart.errors import ValidationError
from warmstart.loss import LossContext, StabilizerDataset
from warmstart.models import xz_chain
from warmstart.pauli import PauliString
from warmstart.states import basis_state

radii = st.floats(min_value=1e-6, max_value=float(np.pi), allow_nan=False)


@pytest.mark.parametrize("r", [0.01, 0.1, 0.5, 1.0, 2.0, np.pi])
def test_moments_match_quadrature(r):
    assert abs(cos2_moment(r) - uniform_moment(r, 2)) < 1e-12
    assert abs(cos4_moment(r) - uniform_moment(r, 4)) < 1e-12


def test_moments_at_zero():
    assert cos2_moment(0.0) == 1.0
    assert cos4_moment(0.0) == 1.0
    assert cos2_variance(0.0) == 0.0


@given(radii)
def test_variance_identity(r):
    direct = cos4_moment(r) - cos2_moment(r) ** 2
    assert abs(cos2_variance(r) - direct) < 1e-12


def test_frozen_moment_values():
    assert cos2_moment(0.1) == pytest.approx(0.9966733269876531, abs=1e-15)
    assert cos2_variance(0.1) == pytest.approx(8.838230468589767e-06, rel=1e-12)
    assert cos2_variance(0.5) == pytest.approx(0.004812734608212299, rel=1e-12)
    assert cos2_variance(1.0) == pytest.approx(0.04967355886963942, rel=1e-12)
    assert cos2_variance(np.pi) == pytest.approx(0.125, rel=1e-12)


def test_series_branch_agrees_at_crossover():
    # both branches must agree where the evaluation switches over; the gap is
    # the closed form's own cancellation noise (~1e-15 absolute)
    for r in (0.049, 0.0499999, 0.05, 0.0500001, 0.051):
        closed = (-1.0 + 4 * r * r + math.cos(4 * r) + r * math.sin(4 * r)) / (32 * r * r)
        r2 = r * r
        series = r2 * r2 * (4 / 45 - r2 * (16 / 315 - r2 * (64 / 4725)))
        assert abs(closed - series) / series < 1e-8
        assert cos2_variance(r) in (closed, series)


@given(st.floats(min_value=0.0, max_value=2.0, allow_nan=False))
def test_quartic_floor_below_variance(r):
    floor = quartic_variance_floor(r)
    assert floor >= 0.0
    assert floor <= cos2_variance(r) + 1e-18


def variance_floor_grid(r, m, gap, n_grid=200_001):
    spread = cos2_variance(r)
    shrink = cos2_moment(r) ** (m - 1)
    xi = np.linspace(-1.0, 1.0, n_grid)
    return spread * float(np.min((shrink * gap + (1.0 - shrink) * xi) ** 2))


def test_variance_floor_matches_grid_minimization():
    # infeasible stationary point: minimum sits at a grid endpoint, so exact
    a = variance_floor(0.3, 2, 1.0)
    assert abs(a - variance_floor_grid(0.3, 2, 1.0)) < 1e-15
    b = variance_floor(0.3, 2, -1.0)
    assert abs(b - variance_floor_grid(0.3, 2, -1.0)) < 1e-15
    assert a == b
    # feasible stationary point: analytically exactly zero
    c = variance_floor(1.0, 10, 0.4)
    assert c == 0.0
    assert variance_floor_grid(1.0, 10, 0.4) < 1e-8


@given(
    st.floats(min_value=0.01, max_value=1.5, allow_nan=False),
    st.integers(min_value=1, max_value=40),
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
)
def test_variance_floor_never_above_grid(r, m, gap):
    analytic = variance_floor(r, m, gap)
    assert analytic >= 0.0
    assert analytic <= variance_floor_grid(r, m, gap, n_grid=20_001) + 1e-12


def test_variance_floor_special_cases():
    # M = 1: no shrink factor at all
    assert variance_floor(0.7, 1, 0.6) == pytest.approx(cos2_variance(0.7) * 0.36)
    assert variance_floor(0.0, 5, 1.0) == 0.0
    with pytest.raises(ValidationError):
        variance_floor(0.3, 2, 1.1)
    with pytest.raises(ValidationError):
        variance_floor(0.3, 0, 0.5)
    # barely-out-of-range gaps from float noise are clipped, not rejected
    assert variance_floor(0.3, 2, 1.0 + 1e-10) == variance_floor(0.3, 2, 1.0)


def test_real_time_bound_frozen_spot():
    report = real_time_variance_bound(0.1, 0.5, 20, 1.0, 0.0)
    assert report.value == pytest.approx(4.971428571428572e-06, rel=1e-12)
    assert report.valid
    step = report.condition("step_within_spectral_window")
    assert step.satisfied and step.margin == pytest.approx(0.5)
    region = report.condition("radius_within_variance_window")
    assert region.satisfied
    assert region.margin == pytest.approx(3 * 0.25 / (2 * 19) - 0.01)


def test_real_time_bound_value_formula():
    r, r0, m, lam, dt = 0.12, 0.4, 8, 1.3, 0.2
    shrink = (lam * dt) ** 2
    expected = quartic_variance_floor(r) * ((1 - r0 * r0) * (1 - 4 * shrink)) ** 2
    report = real_time_variance_bound(r, r0, m, lam, dt)
    assert report.value == pytest.approx(expected, rel=1e-12)


def test_statement_form_is_weaker():
    derived = real_time_variance_bound(0.1, 0.5, 20, 1.0, 0.1)
    stated = real_time_variance_bound(0.1, 0.5, 20, 1.0, 0.1, statement_form=True)
    assert stated.value < derived.value
    assert stated.value == pytest.approx(derived.value * (0.5 / 0.75) ** 2)


def test_real_time_bound_outside_windows():
    # step beyond the spectral window
    report = real_time_variance_bound(0.1, 0.5, 20, 1.0, 0.6)
    assert not report.valid
    assert not report.condition("step_within_spectral_window").satisfied
    # radius beyond the shrinking region
    wide = real_time_variance_bound(0.5, 0.5, 20, 1.0, 0.0)
    assert not wide.valid
    assert not wide.condition("radius_within_variance_window").satisfied
    # denominator sign flip: the region collapses entirely
    flip = real_time_variance_bound(0.01, 0.5, 20, 1.0, 0.72)
    assert flip.condition("radius_within_variance_window").margin == -math.inf
    # single parameter: no region constraint at all
    single = real_time_variance_bound(0.4, 0.5, 1, 1.0, 0.0)
    assert single.condition("radius_within_variance_window").margin == math.inf
    assert single.valid
    # lam_max = 0: step window is vacuous
    free = real_time_variance_bound(0.05, 0.5, 20, 0.0, 5.0)
    assert free.condition("step_within_spectral_window").margin == math.inf


def test_imaginary_time_matches_real_time_at_zero_step():
    ite = imaginary_time_variance_bound(0.1, 0.5, 20, 1.0, 0.0)
    rt = real_time_variance_bound(0.1, 0.5, 20, 1.0, 0.0)
    assert ite.value == rt.value
    assert ite.valid == rt.valid


def test_imaginary_time_windows_are_tighter():
    r, r0, m, lam, step = 0.05, 0.5, 10, 1.0, 0.15
    ite = imaginary_time_variance_bound(r, r0, m, lam, step)
    rt = real_time_variance_bound(r, r0, m, lam, step)
    # sqrt(24) lam window vs 2 lam window
    assert ite.condition("step_within_spectral_window").margin == pytest.approx(
        1 / math.sqrt(24) - step
    )
    assert ite.value < rt.value
    shrink = (lam * step) ** 2
    expected = quartic_variance_floor(r) * ((1 - r0 * r0) * (1 - 24 * shrink)) ** 2
    assert ite.value == pytest.approx(expected, rel=1e-12)


def test_fidelity_bound_reduces_to_real_time_at_unit_fidelity():
    fid = fidelity_variance_bound(0.1, 0.5, 20, 1.0)
    rt = real_time_variance_bound(0.1, 0.5, 20, 1.0, 0.0)
    assert fid.value == pytest.approx(rt.value, rel=1e-12)
    assert fid.condition("radius_within_fidelity_window").margin == pytest.approx(
        rt.condition("radius_within_variance_window").margin
    )
    assert fid.valid


def test_fidelity_bound_at_and_below_half():
    at_half = fidelity_variance_bound(0.0, 0.5, 20, 0.5)
    assert at_half.value == 0.0
    assert at_half.condition("fidelity_at_least_half").satisfied
    assert at_half.condition("fidelity_at_least_half").margin == 0.0
    below = fidelity_variance_bound(0.1, 0.5, 20, 0.3)
    assert below.value == 0.0
    assert not below.valid
    assert not below.condition("fidelity_at_least_half").satisfied
    zero = fidelity_variance_bound(0.1, 0.5, 20, 0.0)
    assert zero.condition("radius_within_fidelity_window").margin == -math.inf
    # m = 1 keeps the radius unconstrained
    single = fidelity_variance_bound(0.8, 0.5, 1, 0.9)
    assert single.condition("radius_within_fidelity_window").margin == math.inf


def test_fidelity_bound_value_formula():
    r, r0, m, f = 0.05, 0.4, 12, 0.8
    report = fidelity_variance_bound(r, r0, m, f)
    expected = quartic_variance_floor(r) * ((1 - r0 * r0) * (2 * f - 1)) ** 2
    assert report.value == pytest.approx(expected, rel=1e-12)
    limit = (2 * f - 1) / (2 * f) * 3 * r0 * r0 / (m - 1)
    assert report.condition("radius_within_fidelity_window").margin == pytest.approx(
        limit - r * r
    )
    # tolerance clipping at the upper edge
    assert fidelity_variance_bound(r, r0, m, 1.0 + 1e-10).value == pytest.approx(
        fidelity_variance_bound(r, r0, m, 1.0).value
    )
    with pytest.raises(ValidationError):
        fidelity_variance_bound(r, r0, m, 1.1)
    with pytest.raises(ValidationError):
        fidelity_variance_bound(r, r0, m, -0.2)


def test_convexity_radius_frozen_spot():
    report = convexity_radius(0.1, 0.05, 20, 1.0, 1e-4)
    assert report.value == pytest.approx(2.625e-05, rel=1e-12)
    assert report.valid
    cond = report.condition("step_within_convexity_window")
    assert cond.margin == pytest.approx(0.2 / (16 * 20) - 1e-4)


def test_convexity_radius_kinds_and_clamp():
    rt = convexity_radius(0.2, 0.0, 5, 1.0, 1e-4)
    ite = convexity_radius(0.2, 0.0, 5, 1.0, 1e-4, kind="imaginary_time")
    assert rt.value == pytest.approx((0.2 / 80 - 1e-4) / 5)
    assert ite.value == pytest.approx((0.2 / 80 - 3e-4) / 5)
    assert ite.condition("step_within_convexity_window").margin == pytest.approx(
        0.2 / (48 * 5) - 1e-4
    )
    # far past the window the radius clamps to zero and validity drops
    far = convexity_radius(0.2, 0.0, 5, 1.0, 0.5)
    assert far.value == 0.0
    assert not far.valid
    # epsilon enters through its magnitude only
    assert convexity_radius(0.1, -0.05, 4, 1.0, 0.0).value == convexity_radius(
        0.1, 0.05, 4, 1.0, 0.0
    ).value
    with pytest.raises(ValidationError):
        convexity_radius(-0.1, 0.0, 4, 1.0, 0.0)
    with pytest.raises(ValidationError):
        convexity_radius(0.1, 0.0, 4, 1.0, 0.0, kind="nonsense")
    # tiny negative eigenvalues from numerics are treated as zero
    assert convexity_radius(-1e-12, 0.1, 4, 1.0, 0.0).value == convexity_radius(
        0.0, 0.1, 4, 1.0, 0.0
    ).value


def test_shift_bound_factors():
    rt = adiabatic_shift_bound(16, 2.0, 0.1, 0.5)
    assert rt.value == pytest.approx(2 * 4 * 2.0 * 0.1 / 0.5)
    ite = adiabatic_shift_bound(16, 2.0, 0.1, 0.5, kind="imaginary_time")
    assert ite.value == pytest.approx(2 * rt.value)
    assert rt.valid and ite.valid


def test_shift_bound_unbounded_when_velocity_scale_vanishes():
    report = adiabatic_shift_bound(4, 1.0, 0.1, 0.0)
    assert report.unbounded
    assert not report.valid
    assert report.value == math.inf
    assert not report.condition("velocity_scale_positive").satisfied
    with pytest.raises(ValidationError):
        adiabatic_shift_bound(4, 1.0, 0.1, 0.5, kind="nonsense")


def test_step_limits_frozen_spots():
    dt_grad, _ = adiabatic_step_limits(4, 1.0, 1.0, 0.5, 0.0, 0.0)
    assert dt_grad == pytest.approx(0.0625, rel=1e-12)
    _, dt_convex = adiabatic_step_limits(4, 1.0, 1.0, 0.5, 0.1, 0.05)
    assert dt_convex == pytest.approx(0.0001838235294117647, rel=1e-12)


def test_step_limits_imaginary_time_denominators():
    m, lam, beta, eta0, mu, eps = 4, 1.0, 1.0, 0.5, 0.1, 0.05
    dt_grad, dt_convex = adiabatic_step_limits(m, lam, beta, eta0, mu, eps, kind="imaginary_time")
    assert dt_grad == pytest.approx(eta0 * beta / (4 * m * lam))
    m32 = m**1.5
    expected = beta * (mu + 2 * eps) / (64 * lam * m32 * m * (1 + 0.75 * beta / m32))
    assert dt_convex == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValidationError):
        adiabatic_step_limits(m, 0.0, beta, eta0, mu, eps)
    with pytest.raises(ValidationError):
        adiabatic_step_limits(m, lam, 0.0, eta0, mu, eps)
    with pytest.raises(ValidationError):
        adiabatic_step_limits(m, lam, beta, 0.0, mu, eps)


def test_imaginary_time_bundle_keys_and_unbounded_path():
    good = imaginary_time_bounds(0.05, 0.5, 8, 1.0, 0.01, 0.1, 1e-3, 0.5, 0.5)
    assert set(good) == {
        "variance",
        "convexity",
        "tracked_shift",
        "step_limit_gradient",
        "step_limit_convexity",
    }
    assert good["step_limit_gradient"].valid
    bad = imaginary_time_bounds(0.05, 0.5, 8, 1.0, 0.01, 0.1, 1e-3, 0.0, 0.5)
    for key in ("tracked_shift", "step_limit_gradient", "step_limit_convexity"):
        assert bad[key].unbounded
        assert bad[key].value == math.inf
        assert not bad[key].valid


def test_gershgorin_dominates_largest_eigenvalue():
    rng = np.random.default_rng(0)
    for _ in range(10):
        a = rng.standard_normal((6, 6))
        a = (a + a.T) / 2
        assert gershgorin_row_bound(a) >= np.linalg.eigvalsh(a)[-1] - 1e-12
    assert gershgorin_row_bound(np.diag([1.0, -3.0])) == 3.0
    with pytest.raises(ValidationError):
        gershgorin_row_bound(np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        gershgorin_row_bound(np.zeros((0, 0)))


def test_validator_rejections():
    with pytest.raises(ValidationError):
        real_time_variance_bound(-0.1, 0.5, 4, 1.0, 0.0)
    with pytest.raises(ValidationError):
        real_time_variance_bound(0.1, 0.0, 4, 1.0, 0.0)
    with pytest.raises(ValidationError):
        real_time_variance_bound(0.1, 1.0, 4, 1.0, 0.0)
    with pytest.raises(ValidationError):
        real_time_variance_bound(0.1, 0.5, 4, -1.0, 0.0)
    with pytest.raises(ValidationError):
        real_time_variance_bound(0.1, 0.5, 4, 1.0, -0.1)
    with pytest.raises(ValidationError):
        imaginary_time_variance_bound(0.1, 0.5, 2.5, 1.0, 0.0)


def test_overlap_gap_at_zero_step():
    ansatz = build_hea(2, 1, seed=3)  # first gate rotates about Y on qubit 1
    psi0 = basis_state(2)
    ctx = LossContext(ansatz=ansatz, theta_star=np.zeros(4), hamiltonian=xz_chain(2), dt=0.0, psi0=psi0)
    assert overlap_gap(ctx) == pytest.approx(1.0, abs=1e-12)
    # hst and bell kinds agree by construction
    hst = ctx.replace(kind="unitary_hst", dt=0.1)
    bell = ctx.replace(kind="unitary_bell", dt=0.1)
    assert overlap_gap(hst) == pytest.approx(overlap_gap(bell), abs=1e-12)
    # a Z-first circuit leaves basis states fixed: no gap at all
    z_first = Ansatz(
        2,
        (Rotation(PauliString("ZI"), 0), Rotation(PauliString("IY"), 1)),
    )
    z_ctx = LossContext(
        ansatz=z_first, theta_star=np.zeros(2), hamiltonian=xz_chain(2), dt=0.0, psi0=psi0
    )
    assert overlap_gap(z_ctx) == pytest.approx(0.0, abs=1e-12)


def test_overlap_gap_qml_orthogonal_dataset():
    data = StabilizerDataset(2, (("z+", "z+"), ("z-", "z+")))
    ansatz = build_hea(2, 1, seed=3)
    ctx = LossContext(
        ansatz=ansatz,
        theta_star=np.zeros(4),
        hamiltonian=xz_chain(2),
        dt=0.0,
        psi0=basis_state(2),
        kind="qml",
        dataset=data,
    )
    # each orthogonal pair contributes 1/N_s^2, diagonal only
    assert overlap_gap(ctx) == pytest.approx(0.5, abs=1e-12)
