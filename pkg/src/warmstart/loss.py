"""Compression losses and their exact derivative oracles.

Five loss kinds share one evaluation engine:

- real_time:      1 - |<psi0| U(theta)^dag e^{-iH dt} U(theta*) |psi0>|^2
- imaginary_time: same with the normalized e^{-tau H} target
- unitary_hst:    1 - |Tr[U(theta)^dag e^{-iH dt} U(theta*)]|^2 / 4^n,
                  evaluated column by column (n <= 6)
- unitary_bell:   the same quantity as a single 2n-qubit Bell-pair overlap
- qml:            1 - mean_j |<psi_j| U(theta)^dag e^{-iH dt} U(theta*) |psi_j>|^2
                  over a stabilizer-product dataset

Derivatives use the parameter-shift rule for e^{-i theta P} with P^2 = 1: each
gate contributes L(+pi/4) - L(-pi/4) per gradient component, exactly (the loss
is a degree-1 trigonometric polynomial in 2*theta per gate). Shared parameters
sum their per-gate contributions. The Hessian applies the same identity twice;
the quantum Fisher information comes from analytic generator insertion.

A LossContext is immutable; its target state is computed once and cached, so
the target always matches (theta*, dt, kind). Use `replace` to vary them.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .circuits import Ansatz, ControlledZ, Rotation
from .errors import ValidationError
from .pauli import PauliString, PauliSum
from .states import StateVector, basis_state, bell_pair_state, evolve_imaginary, evolve_real

KINDS = ("real_time", "imaginary_time", "unitary_hst", "unitary_bell", "qml")

_SHIFT = np.pi / 4
MAX_UNITARY_QUBITS = 6
MAX_QFI_PARAMS = 512

_STABILIZER_STATES: dict[str, np.ndarray] = {
    "z+": np.array([1.0, 0.0], dtype=np.complex128),
    "z-": np.array([0.0, 1.0], dtype=np.complex128),
    "x+": np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0),
    "x-": np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0),
    "y+": np.array([1.0, 1.0j], dtype=np.complex128) / np.sqrt(2.0),
    "y-": np.array([1.0, -1.0j], dtype=np.complex128) / np.sqrt(2.0),
}
STABILIZER_LABELS = ("z+", "z-", "x+", "x-", "y+", "y-")


@dataclass(frozen=True)
class StabilizerDataset:
    """N_s product states, each qubit factor one of the six stabilizer states."""

    n: int
    labels: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise ValidationError("dataset must hold at least one state")
        for per_state in self.labels:
            if len(per_state) != self.n:
                raise ValidationError("every state needs one label per qubit")
            for label in per_state:
                if label not in _STABILIZER_STATES:
                    raise ValidationError(f"unknown stabilizer label {label!r}")

    @property
    def n_states(self) -> int:
        return len(self.labels)

    @cached_property
    def amplitudes(self) -> np.ndarray:
        """(N_s, 2^n) matrix of product-state amplitudes."""
        rows = []
        for per_state in self.labels:
            amps = np.array([1.0 + 0.0j])
            for label in per_state:
                amps = np.kron(amps, _STABILIZER_STATES[label])
            rows.append(amps)
        return np.array(rows)


def sample_stabilizer_dataset(n: int, n_states: int, seed: int) -> StabilizerDataset:
    """Draw each qubit factor independently and uniformly from the six states."""
    if n < 1 or n_states < 1:
        raise ValidationError("need n >= 1 and n_states >= 1")
    rng = np.random.default_rng(seed)
    choices = rng.integers(0, 6, size=(n_states, n))
    labels = tuple(tuple(STABILIZER_LABELS[c] for c in row) for row in choices)
    return StabilizerDataset(n, labels)


def dataset_orthogonality_defect(dataset: StabilizerDataset, sigma: PauliString) -> float:
    """Tr[rho_0 sigma rho_0 sigma] for the paired 2n-qubit dataset mixture.

    Equals (1/N_s^2) sum_j |<psi_j|sigma|psi_j>|^2; zero certifies that the
    first-gate orthogonality condition survives the mixed-input rewrite.
    """
    if sigma.n != dataset.n:
        raise ValidationError("sigma and dataset qubit counts differ")
    amps = dataset.amplitudes
    expectations = np.einsum("jd,jd->j", amps.conj(), sigma.apply(amps))
    return float(np.sum(np.abs(expectations) ** 2)) / dataset.n_states**2


def _lift_string(string: PauliString, extra: int) -> PauliString:
    return PauliString(string.axes + "I" * extra)


def _lift_ansatz(ansatz: Ansatz, extra: int) -> Ansatz:
    gates = tuple(
        Rotation(_lift_string(g.generator, extra), g.param_index, g.sign)
        if isinstance(g, Rotation)
        else g
        for g in ansatz.gates
    )
    return Ansatz(ansatz.n + extra, gates, ansatz.n_params)


def _lift_hamiltonian(h: PauliSum, extra: int) -> PauliSum:
    return PauliSum(h.n + extra, tuple((c, _lift_string(s, extra)) for c, s in h.terms))


@dataclass(frozen=True)
class LossContext:
    ansatz: Ansatz
    theta_star: np.ndarray
    hamiltonian: PauliSum
    dt: float
    psi0: StateVector
    kind: str = "real_time"
    dataset: StabilizerDataset | None = None

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta_star, dtype=np.float64)
        if theta.shape != (self.ansatz.n_params,):
            raise ValidationError(
                f"theta* shape {theta.shape} does not match M={self.ansatz.n_params}"
            )
        object.__setattr__(self, "theta_star", theta)
        if self.kind not in KINDS:
            raise ValidationError(f"unknown loss kind {self.kind!r}")
        if self.hamiltonian.n != self.ansatz.n or self.psi0.n != self.ansatz.n:
            raise ValidationError("ansatz, Hamiltonian and psi0 qubit counts differ")
        if not np.isfinite(self.dt):
            raise ValidationError(f"non-finite dt {self.dt!r}")
        if self.kind == "imaginary_time" and self.dt < 0:
            raise ValidationError("imaginary_time needs dt >= 0")
        if self.kind in ("unitary_hst", "unitary_bell") and self.ansatz.n > MAX_UNITARY_QUBITS:
            raise ValidationError(
                f"unitary kinds doubled to 2n qubits are limited to n <= {MAX_UNITARY_QUBITS}"
            )
        if self.kind == "qml":
            if self.dataset is None or self.dataset.n_states == 0:
                raise ValidationError("qml kind needs a non-empty dataset")
            if self.dataset.n != self.ansatz.n:
                raise ValidationError("dataset qubit count differs from ansatz")
        elif self.dataset is not None:
            raise ValidationError(f"kind {self.kind!r} takes no dataset")

    @property
    def n(self) -> int:
        return self.ansatz.n

    @property
    def n_params(self) -> int:
        return self.ansatz.n_params

    def replace(self, **changes) -> "LossContext":
        return dataclasses.replace(self, **changes)

    # Effective system: the bell kind evaluates on 2n qubits with the ansatz
    # and Hamiltonian acting on the first register.
    @cached_property
    def eval_ansatz(self) -> Ansatz:
        if self.kind == "unitary_bell":
            return _lift_ansatz(self.ansatz, self.ansatz.n)
        return self.ansatz

    @cached_property
    def eval_psi0(self) -> StateVector:
        if self.kind == "unitary_bell":
            return bell_pair_state(self.ansatz.n)
        return self.psi0

    @cached_property
    def _target(self) -> np.ndarray:
        """Target amplitudes: (dim,) for overlap kinds, (B, dim) rows otherwise."""
        star = self.ansatz.gate_angles(self.theta_star)
        if self.kind == "real_time":
            pre = StateVector(self.ansatz.apply_gate_angles(star, self.psi0.amplitudes))
            return evolve_real(pre, self.hamiltonian, self.dt).amplitudes
        if self.kind == "imaginary_time":
            pre = StateVector(self.ansatz.apply_gate_angles(star, self.psi0.amplitudes))
            return evolve_imaginary(pre, self.hamiltonian, self.dt).amplitudes
        if self.kind == "unitary_bell":
            lifted_h = _lift_hamiltonian(self.hamiltonian, self.ansatz.n)
            pre = StateVector(
                self.eval_ansatz.apply_gate_angles(star, self.eval_psi0.amplitudes)
            )
            return evolve_real(pre, lifted_h, self.dt).amplitudes
        if self.kind == "unitary_hst":
            dim = self.ansatz.dim
            basis = np.eye(dim, dtype=np.complex128)
            pre = self.ansatz.apply_gate_angles(star, basis)
            rows = [
                evolve_real(StateVector(row), self.hamiltonian, self.dt).amplitudes
                for row in pre
            ]
            return np.array(rows)
        # qml: evolve each dataset state
        pre = self.ansatz.apply_gate_angles(star, self.dataset.amplitudes)
        rows = [
            evolve_real(StateVector(row / np.linalg.norm(row)), self.hamiltonian, self.dt).amplitudes
            for row in pre
        ]
        return np.array(rows)

    def losses_from_angles(self, angles: np.ndarray) -> np.ndarray:
        """Loss for each row of a (B, R) per-gate angle matrix."""
        angles = np.atleast_2d(np.asarray(angles, dtype=np.float64))
        if self.kind in ("real_time", "imaginary_time", "unitary_bell"):
            states = self.eval_ansatz.apply_gate_angles(angles, self.eval_psi0.amplitudes)
            overlaps = states @ self._target.conj()
            return np.clip(1.0 - np.abs(overlaps) ** 2, 0.0, 1.0)
        if self.kind == "unitary_hst":
            dim = self.ansatz.dim
            basis = np.eye(dim, dtype=np.complex128)
            out = np.empty(angles.shape[0])
            for b, row in enumerate(angles):
                cols = self.ansatz.apply_gate_angles(row, basis)
                trace = np.sum(cols.conj() * self._target)
                out[b] = 1.0 - np.abs(trace) ** 2 / dim**2
            return np.clip(out, 0.0, 1.0)
        inputs = self.dataset.amplitudes
        out = np.empty(angles.shape[0])
        for b, row in enumerate(angles):
            states = self.ansatz.apply_gate_angles(row, inputs)
            overlaps = np.einsum("jd,jd->j", states.conj(), self._target)
            out[b] = 1.0 - float(np.mean(np.abs(overlaps) ** 2))
        return np.clip(out, 0.0, 1.0)


def loss(ctx: LossContext, theta: np.ndarray) -> float:
    """Loss value in [0, 1]."""
    angles = ctx.ansatz.gate_angles(np.asarray(theta, dtype=np.float64))
    return float(ctx.losses_from_angles(angles[None, :])[0])


def loss_batch(ctx: LossContext, thetas: np.ndarray) -> np.ndarray:
    """Loss for every row of a (B, M) parameter matrix."""
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 2:
        raise ValidationError("thetas must be a (B, M) matrix")
    return ctx.losses_from_angles(ctx.ansatz.gate_angles(thetas))


def gradient(ctx: LossContext, theta: np.ndarray) -> np.ndarray:
    """Exact parameter-shift gradient, shared parameters summed per gate."""
    base = ctx.ansatz.gate_angles(np.asarray(theta, dtype=np.float64))
    n_rot = base.size
    shifted = np.repeat(base[None, :], 2 * n_rot, axis=0)
    for g in range(n_rot):
        shifted[2 * g, g] += _SHIFT
        shifted[2 * g + 1, g] -= _SHIFT
    values = ctx.losses_from_angles(shifted)
    per_gate = values[0::2] - values[1::2]
    grad = np.zeros(ctx.n_params)
    np.add.at(grad, ctx.ansatz.param_map, per_gate)
    return grad


def hessian(ctx: LossContext, theta: np.ndarray) -> np.ndarray:
    """Double parameter-shift Hessian over logical parameters; exactly symmetric."""
    base = ctx.ansatz.gate_angles(np.asarray(theta, dtype=np.float64))
    n_rot = base.size
    pmap = ctx.ansatz.param_map
    rows = [base]
    for g in range(n_rot):
        for delta in (np.pi / 2, -np.pi / 2):
            row = base.copy()
            row[g] += delta
            rows.append(row)
    pairs = [(g, h) for g in range(n_rot) for h in range(g + 1, n_rot)]
    for g, h in pairs:
        for dg in (_SHIFT, -_SHIFT):
            for dh in (_SHIFT, -_SHIFT):
                row = base.copy()
                row[g] += dg
                row[h] += dh
                rows.append(row)
    values = ctx.losses_from_angles(np.array(rows))
    l0 = values[0]
    hess = np.zeros((ctx.n_params, ctx.n_params))
    for g in range(n_rot):
        second = values[1 + 2 * g] - 2.0 * l0 + values[2 + 2 * g]
        hess[pmap[g], pmap[g]] += second
    offset = 1 + 2 * n_rot
    for k, (g, h) in enumerate(pairs):
        vpp, vpm, vmp, vmm = values[offset + 4 * k : offset + 4 * k + 4]
        cross = vpp - vpm - vmp + vmm
        hess[pmap[g], pmap[h]] += cross
        hess[pmap[h], pmap[g]] += cross
    return hess


def qfi(ansatz: Ansatz, theta: np.ndarray, psi0: StateVector) -> np.ndarray:
    """Pure-state quantum Fisher information over logical parameters.

    Derivative states are built by analytic generator insertion: each gate
    occurrence contributes -i * sign * P applied right after its own
    exponential, then the remaining gates; shared parameters sum occurrences.
    """
    if psi0.n != ansatz.n:
        raise ValidationError("state and ansatz qubit counts differ")
    if ansatz.n_params > MAX_QFI_PARAMS:
        raise ValidationError(f"QFI limited to M <= {MAX_QFI_PARAMS}")
    angles = ansatz.gate_angles(np.asarray(theta, dtype=np.float64))

    def apply_gate(pos: int, v: np.ndarray) -> np.ndarray:
        g = ansatz.gates[pos]
        if isinstance(g, ControlledZ):
            return v * ansatz._cz_signs[pos]
        r = rot_index[pos]
        pv = g.generator.apply(v)
        return np.cos(angles[r]) * v - (1j * g.sign) * np.sin(angles[r]) * pv

    rot_index: dict[int, int] = {}
    r = 0
    for pos, g in enumerate(ansatz.gates):
        if isinstance(g, Rotation):
            rot_index[pos] = r
            r += 1

    after: list[np.ndarray] = []
    v = psi0.amplitudes
    for pos in range(len(ansatz.gates)):
        v = apply_gate(pos, v)
        after.append(v)
    psi = v

    derivs = np.zeros((ansatz.n_params, ansatz.dim), dtype=np.complex128)
    for pos, g in enumerate(ansatz.gates):
        if not isinstance(g, Rotation):
            continue
        w = (-1j * g.sign) * g.generator.apply(after[pos])
        for pos2 in range(pos + 1, len(ansatz.gates)):
            w = apply_gate(pos2, w)
        derivs[g.param_index] += w

    gram = derivs.conj() @ derivs.T
    b = derivs.conj() @ psi
    f = 4.0 * np.real(gram - np.outer(b, b.conj()))
    return (f + f.T) / 2.0


def mu_min(ansatz: Ansatz, theta_star: np.ndarray, psi0: StateVector) -> float:
    """Minimum eigenvalue of the quantum Fisher information at theta*."""
    f = qfi(ansatz, theta_star, psi0)
    return float(np.linalg.eigvalsh(f)[0])


def _dense_unitary(ansatz: Ansatz, angles: np.ndarray) -> np.ndarray:
    basis = np.eye(ansatz.dim, dtype=np.complex128)
    return ansatz.apply_gate_angles(angles, basis).T


def qml_mixed_form_loss(ctx: LossContext, theta: np.ndarray) -> float:
    """The QML loss via its 2n-qubit mixed-state rewrite (dense, n <= 3).

    Builds rho_0 = (1/N_s) sum_j |psi_j><psi_j| (x) |psi_j><psi_j| and returns
    1 - N_s Tr[U rho U^dag E U* rho U*^dag E^dag] with U = U(theta) (x) 1,
    U* = U(theta*) (x) 1, E = e^{-i dt H} (x) 1. Equals the sampled QML loss
    whenever the dataset states are pairwise orthogonal (the rewrite's
    assumption); cross terms appear otherwise.
    """
    if ctx.kind != "qml":
        raise ValidationError("mixed-form loss is defined for the qml kind")
    if ctx.n > 3:
        raise ValidationError("dense mixed-form check limited to n <= 3")
    dim = ctx.ansatz.dim
    eye = np.eye(dim, dtype=np.complex128)
    rho = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for row in ctx.dataset.amplitudes:
        proj = np.outer(row, row.conj())
        rho += np.kron(proj, proj)
    rho /= ctx.dataset.n_states

    u_theta = np.kron(_dense_unitary(ctx.ansatz, ctx.ansatz.gate_angles(theta)), eye)
    u_star = np.kron(_dense_unitary(ctx.ansatz, ctx.ansatz.gate_angles(ctx.theta_star)), eye)
    evo_cols = [
        evolve_real(basis_state(ctx.n, b), ctx.hamiltonian, ctx.dt).amplitudes
        for b in range(dim)
    ]
    evo = np.kron(np.array(evo_cols).T, eye)

    left = u_theta @ rho @ u_theta.conj().T
    right = evo @ u_star @ rho @ u_star.conj().T @ evo.conj().T
    value = 1.0 - ctx.dataset.n_states * np.real(np.trace(left @ right))
    return float(value)
