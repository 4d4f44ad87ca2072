import numpy as np
import pytest

from oracles import (
    fd_gradient,
    fd_hessian,
    hst_loss_oracle,
    overlap_loss_oracle,
    qfi_oracle,
    qml_loss_oracle,
    terms_of,
)
from warmstart.circuits import build_hea, build_hva
from warmstart.errors import ValidationError
from warmstart.loss import (
    LossContext,
    StabilizerDataset,
    dataset_orthogonality_defect,
    gradient,
    hessian,
    loss,
    loss_batch,
    mu_min,
    qfi,
    qml_mixed_form_loss,
    sample_stabilizer_dataset,
)
from warmstart.models import xx_chain, xz_chain
from warmstart.pauli import PauliString
from warmstart.states import basis_state


def hea_context(kind, dt, n=2, layers=1, seed=5, dataset=None):
    ansatz = build_hea(n, layers, seed=seed)
    rng = np.random.default_rng(seed)
    theta_star = rng.uniform(-0.5, 0.5, ansatz.n_params)
    return LossContext(
        ansatz=ansatz,
        theta_star=theta_star,
        hamiltonian=xz_chain(n),
        dt=dt,
        psi0=basis_state(n),
        kind=kind,
        dataset=dataset,
    )


def hva_context(kind, dt, n=3, layers=2):
    ansatz = build_hva(xz_chain(n), layers)
    rng = np.random.default_rng(21)
    theta_star = rng.uniform(-0.5, 0.5, ansatz.n_params)
    return LossContext(
        ansatz=ansatz,
        theta_star=theta_star,
        hamiltonian=xz_chain(n),
        dt=dt,
        psi0=basis_state(n),
        kind=kind,
    )


def orthogonal_dataset(n, indices):
    labels = tuple(
        tuple("z-" if (idx >> (n - 1 - q)) & 1 else "z+" for q in range(n))
        for idx in indices
    )
    return StabilizerDataset(n, labels)


@pytest.mark.parametrize("kind,dt", [("real_time", 0.3), ("imaginary_time", 0.4)])
@pytest.mark.parametrize("factory", [hea_context, hva_context])
def test_overlap_losses_match_dense_oracle(kind, dt, factory):
    ctx = factory(kind, dt)
    rng = np.random.default_rng(3)
    for _ in range(3):
        theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
        expected = overlap_loss_oracle(
            ctx.ansatz,
            theta,
            ctx.theta_star,
            terms_of(ctx.hamiltonian),
            dt,
            ctx.psi0.amplitudes,
            kind,
        )
        assert abs(loss(ctx, theta) - expected) < 1e-10


def test_hst_loss_matches_dense_oracle():
    ctx = hea_context("unitary_hst", 0.25)
    rng = np.random.default_rng(4)
    theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
    expected = hst_loss_oracle(
        ctx.ansatz, theta, ctx.theta_star, terms_of(ctx.hamiltonian), ctx.dt
    )
    assert abs(loss(ctx, theta) - expected) < 1e-10


def test_qml_loss_matches_dense_oracle():
    data = sample_stabilizer_dataset(2, 3, seed=8)
    ctx = hea_context("qml", 0.2, dataset=data)
    rng = np.random.default_rng(5)
    theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
    expected = qml_loss_oracle(
        ctx.ansatz,
        theta,
        ctx.theta_star,
        terms_of(ctx.hamiltonian),
        ctx.dt,
        data.amplitudes,
    )
    assert abs(loss(ctx, theta) - expected) < 1e-10


def test_bell_form_equals_hst_form():
    hst = hea_context("unitary_hst", 0.3, n=2, layers=2, seed=12)
    bell = hst.replace(kind="unitary_bell")
    rng = np.random.default_rng(6)
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, hst.n_params)
        assert abs(loss(hst, theta) - loss(bell, theta)) < 1e-12


@pytest.mark.parametrize(
    "kind,dt",
    [
        ("real_time", 0.0),
        ("real_time", 0.3),
        ("imaginary_time", 0.4),
        ("unitary_hst", 0.2),
        ("unitary_bell", 0.2),
        ("qml", 0.15),
    ],
)
def test_loss_zero_at_warm_start_without_evolution(kind, dt):
    dataset = sample_stabilizer_dataset(2, 2, seed=1) if kind == "qml" else None
    ctx = hea_context(kind, 0.0, dataset=dataset)
    # qml states carry 1/sqrt(2) amplitudes, so the fidelity rounds off eps
    tol = 5e-15 if kind == "qml" else 0.0
    assert abs(loss(ctx, ctx.theta_star)) <= tol
    moved = hea_context(kind, dt, dataset=dataset)
    assert 0.0 <= loss(moved, moved.theta_star) <= 1.0


def test_loss_batch_matches_scalar_loss():
    ctx = hva_context("real_time", 0.2)
    rng = np.random.default_rng(9)
    thetas = rng.uniform(-np.pi, np.pi, (6, ctx.n_params))
    batch = loss_batch(ctx, thetas)
    assert batch.shape == (6,)
    for b in range(6):
        assert abs(batch[b] - loss(ctx, thetas[b])) < 1e-14
    with pytest.raises(ValidationError):
        loss_batch(ctx, thetas[0])


@pytest.mark.parametrize(
    "kind,dt",
    [
        ("real_time", 0.3),
        ("imaginary_time", 0.4),
        ("unitary_hst", 0.2),
        ("unitary_bell", 0.2),
        ("qml", 0.15),
    ],
)
def test_gradient_matches_finite_differences(kind, dt):
    dataset = sample_stabilizer_dataset(2, 2, seed=2) if kind == "qml" else None
    ctx = hea_context(kind, dt, dataset=dataset)
    rng = np.random.default_rng(10)
    theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
    fd = fd_gradient(lambda x: loss(ctx, x), theta)
    assert np.max(np.abs(gradient(ctx, theta) - fd)) < 1e-8


def test_gradient_sums_shared_parameter_contributions():
    ctx = hva_context("real_time", 0.25)
    assert len(ctx.ansatz.rotations) > ctx.n_params
    rng = np.random.default_rng(11)
    theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
    fd = fd_gradient(lambda x: loss(ctx, x), theta)
    assert np.max(np.abs(gradient(ctx, theta) - fd)) < 1e-8


@pytest.mark.parametrize("factory", [hea_context, hva_context])
def test_hessian_matches_finite_differences(factory):
    ctx = factory("real_time", 0.3)
    rng = np.random.default_rng(12)
    theta = rng.uniform(-1.0, 1.0, ctx.n_params)
    h = hessian(ctx, theta)
    assert np.array_equal(h, h.T)
    fd = fd_hessian(lambda x: loss(ctx, x), theta)
    assert np.max(np.abs(h - fd)) < 5e-6


def test_qfi_matches_finite_difference_states():
    ansatz = build_hea(2, 1, seed=7)
    rng = np.random.default_rng(13)
    theta = rng.uniform(-np.pi, np.pi, ansatz.n_params)
    psi0 = basis_state(2)
    f = qfi(ansatz, theta, psi0)
    assert np.array_equal(f, f.T)
    fd = qfi_oracle(ansatz, theta, psi0.amplitudes)
    assert np.max(np.abs(f - fd)) < 1e-7


def test_qfi_handles_shared_parameters():
    ansatz = build_hva(xz_chain(3), layers=1)
    rng = np.random.default_rng(14)
    theta = rng.uniform(-np.pi, np.pi, ansatz.n_params)
    psi0 = basis_state(3)
    fd = qfi_oracle(ansatz, theta, psi0.amplitudes)
    assert np.max(np.abs(qfi(ansatz, theta, psi0) - fd)) < 1e-7


@pytest.mark.parametrize("kind", ["real_time", "unitary_bell"])
def test_hessian_at_minimum_is_half_qfi(kind):
    # at theta* with no evolution the loss curvature equals F/2 exactly
    ctx = hea_context(kind, 0.0, n=2, layers=2, seed=17)
    h = hessian(ctx, ctx.theta_star)
    f = qfi(ctx.eval_ansatz, ctx.theta_star, ctx.eval_psi0)
    assert np.max(np.abs(h - f / 2.0)) < 1e-12


def test_mu_min_is_smallest_qfi_eigenvalue():
    ansatz = build_hea(2, 1, seed=19)
    theta = np.full(ansatz.n_params, 0.3)
    psi0 = basis_state(2)
    f = qfi(ansatz, theta, psi0)
    assert mu_min(ansatz, theta, psi0) == pytest.approx(np.linalg.eigvalsh(f)[0])


def test_mixed_form_equals_sampled_loss_on_orthogonal_dataset():
    data = orthogonal_dataset(2, [0, 2, 3])
    ctx = hea_context("qml", 0.2, dataset=data)
    rng = np.random.default_rng(15)
    for _ in range(3):
        theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
        assert abs(qml_mixed_form_loss(ctx, theta) - loss(ctx, theta)) < 1e-10


def test_mixed_form_differs_on_overlapping_dataset():
    data = StabilizerDataset(2, (("z+", "z+"), ("x+", "z+")))
    ctx = hea_context("qml", 0.2, dataset=data)
    rng = np.random.default_rng(16)
    gap = max(
        abs(qml_mixed_form_loss(ctx, theta) - loss(ctx, theta))
        for theta in rng.uniform(-np.pi, np.pi, (5, ctx.n_params))
    )
    assert gap > 1e-4


def test_mixed_form_rejects_other_kinds_and_large_n():
    ctx = hea_context("real_time", 0.1)
    with pytest.raises(ValidationError):
        qml_mixed_form_loss(ctx, ctx.theta_star)


def test_orthogonality_defect_values():
    one = orthogonal_dataset(1, [0])
    assert dataset_orthogonality_defect(one, PauliString("Y")) == 0.0
    assert dataset_orthogonality_defect(one, PauliString("Z")) == 1.0
    two = orthogonal_dataset(1, [0, 1])
    assert dataset_orthogonality_defect(two, PauliString("Z")) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        dataset_orthogonality_defect(two, PauliString("ZZ"))


def test_stabilizer_dataset_sampling():
    a = sample_stabilizer_dataset(3, 5, seed=42)
    b = sample_stabilizer_dataset(3, 5, seed=42)
    assert a.labels == b.labels
    assert a.amplitudes.shape == (5, 8)
    norms = np.linalg.norm(a.amplitudes, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-14
    assert sample_stabilizer_dataset(3, 5, seed=43).labels != a.labels
    with pytest.raises(ValidationError):
        sample_stabilizer_dataset(0, 5, seed=1)
    with pytest.raises(ValidationError):
        StabilizerDataset(2, (("z+",),))
    with pytest.raises(ValidationError):
        StabilizerDataset(1, (("w+",),))


def test_context_validation():
    ansatz = build_hea(2, 1)
    h = xz_chain(2)
    psi0 = basis_state(2)
    good = dict(ansatz=ansatz, theta_star=np.zeros(4), hamiltonian=h, dt=0.1, psi0=psi0)
    LossContext(**good)
    with pytest.raises(ValidationError):
        LossContext(**{**good, "theta_star": np.zeros(3)})
    with pytest.raises(ValidationError):
        LossContext(**{**good, "kind": "nonsense"})
    with pytest.raises(ValidationError):
        LossContext(**{**good, "hamiltonian": xx_chain(3)})
    with pytest.raises(ValidationError):
        LossContext(**{**good, "psi0": basis_state(3)})
    with pytest.raises(ValidationError):
        LossContext(**{**good, "dt": np.nan})
    with pytest.raises(ValidationError):
        LossContext(**{**good, "dt": -0.1, "kind": "imaginary_time"})
    with pytest.raises(ValidationError):
        LossContext(**{**good, "kind": "qml"})
    with pytest.raises(ValidationError):
        LossContext(**{**good, "kind": "qml", "dataset": sample_stabilizer_dataset(3, 2, 1)})
    with pytest.raises(ValidationError):
        LossContext(**{**good, "dataset": sample_stabilizer_dataset(2, 2, 1)})
    big = build_hea(7, 1)
    with pytest.raises(ValidationError):
        LossContext(
            ansatz=big,
            theta_star=np.zeros(big.n_params),
            hamiltonian=xz_chain(7),
            dt=0.1,
            psi0=basis_state(7),
            kind="unitary_hst",
        )
