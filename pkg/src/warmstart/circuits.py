"""Parameterized ansatz circuits built from Pauli rotations and fixed gates.

Gate list order is application order: gates[0] acts on |psi0> first. Each
Rotation applies e^{-i theta * sign * P} for a self-inverse Pauli string P, so
the matrix-free action is cos(theta) v - i sin(theta) sign (P v). Parameters
are logical: several gates may share one `param_index` (the HVA layers do),
and M counts logical parameters, not gates.

The evaluator is batched over parameter sets: `apply_gate_angles` takes a
(B, R) matrix of per-gate angles and a (B, dim) amplitude block, which is what
makes Monte-Carlo landscape sampling cheap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .pauli import PauliString, PauliSum
from .states import StateVector


@dataclass(frozen=True)
class Rotation:
    """e^{-i theta_j * sign * generator}, theta_j = theta[param_index]."""

    generator: PauliString
    param_index: int
    sign: int = 1

    def __post_init__(self) -> None:
        if self.param_index < 0:
            raise ValidationError(f"negative param index {self.param_index}")
        if self.sign not in (-1, 1):
            raise ValidationError(f"rotation sign must be +-1, got {self.sign}")


@dataclass(frozen=True)
class ControlledZ:
    """Fixed CZ entangler between 1-based qubits q1 < q2."""

    q1: int
    q2: int

    def __post_init__(self) -> None:
        if not (1 <= self.q1 < self.q2):
            raise ValidationError(f"need 1 <= q1 < q2, got ({self.q1}, {self.q2})")


Gate = Rotation | ControlledZ


@dataclass(frozen=True)
class Ansatz:
    n: int
    gates: tuple[Gate, ...]
    n_params: int = field(default=-1)

    def __post_init__(self) -> None:
        rotations = [g for g in self.gates if isinstance(g, Rotation)]
        if not rotations:
            raise ValidationError("ansatz needs at least one Rotation")
        for g in self.gates:
            if isinstance(g, Rotation) and g.generator.n != self.n:
                raise ValidationError(
                    f"generator {g.generator.axes!r} does not act on {self.n} qubits"
                )
            if isinstance(g, ControlledZ) and g.q2 > self.n:
                raise ValidationError(f"CZ qubit {g.q2} exceeds n={self.n}")
        used = {g.param_index for g in rotations}
        m = self.n_params if self.n_params != -1 else max(used) + 1
        if used != set(range(m)):
            raise ValidationError(
                f"parameter indices {sorted(used)} must cover 0..{m - 1} exactly"
            )
        object.__setattr__(self, "n_params", m)

    @property
    def dim(self) -> int:
        return 1 << self.n

    @cached_property
    def rotations(self) -> tuple[Rotation, ...]:
        return tuple(g for g in self.gates if isinstance(g, Rotation))

    @cached_property
    def param_map(self) -> np.ndarray:
        """Logical parameter index per rotation gate, length R."""
        return np.array([g.param_index for g in self.rotations], dtype=np.int64)

    @cached_property
    def first_generator(self) -> PauliString:
        return self.rotations[0].generator

    @cached_property
    def _cz_signs(self) -> dict[int, np.ndarray]:
        signs: dict[int, np.ndarray] = {}
        idx = np.arange(self.dim, dtype=np.int64)
        for pos, g in enumerate(self.gates):
            if isinstance(g, ControlledZ):
                both = ((idx >> (self.n - g.q1)) & (idx >> (self.n - g.q2))) & 1
                signs[pos] = (1.0 - 2.0 * both).astype(np.complex128)
        return signs

    def gate_angles(self, theta: np.ndarray) -> np.ndarray:
        """Map logical parameters (..., M) to per-gate angles (..., R)."""
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape[-1] != self.n_params:
            raise ValidationError(
                f"theta has {theta.shape[-1]} entries, ansatz has M={self.n_params}"
            )
        if not np.all(np.isfinite(theta)):
            raise ValidationError("non-finite parameter values")
        return theta[..., self.param_map]

    def apply_gate_angles(self, angles: np.ndarray, amplitudes: np.ndarray) -> np.ndarray:
        """Apply the circuit with explicit per-gate angles.

        angles: (B, R) or (R,); amplitudes: (B, dim) or (dim,). A single
        angle row broadcasts over an amplitude batch and vice versa.
        """
        angles_in = np.asarray(angles, dtype=np.float64)
        v = np.asarray(amplitudes, dtype=np.complex128)
        squeeze = angles_in.ndim == 1 and v.ndim == 1
        angles = np.atleast_2d(angles_in)
        if v.ndim == 1:
            v = np.broadcast_to(v, (angles.shape[0], v.size))
        cos = np.cos(angles)
        sin = np.sin(angles)
        r = 0
        for pos, g in enumerate(self.gates):
            if isinstance(g, Rotation):
                pv = g.generator.apply(v)
                v = cos[:, r, None] * v - (1j * g.sign) * sin[:, r, None] * pv
                r += 1
            else:
                v = v * self._cz_signs[pos]
        return v[0] if squeeze else v


def apply_ansatz(ansatz: Ansatz, theta: np.ndarray, state: StateVector) -> StateVector:
    """U(theta) |state> with gates applied in declared order."""
    if state.n != ansatz.n:
        raise ValidationError("state and ansatz qubit counts differ")
    out = ansatz.apply_gate_angles(ansatz.gate_angles(theta), state.amplitudes)
    return StateVector(out / np.linalg.norm(out))


def apply_ansatz_batch(ansatz: Ansatz, thetas: np.ndarray, state: StateVector) -> np.ndarray:
    """U(theta_b) |state> for every row of thetas; returns (B, dim) amplitudes."""
    if state.n != ansatz.n:
        raise ValidationError("state and ansatz qubit counts differ")
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim != 2:
        raise ValidationError("thetas must be a (B, M) matrix")
    return ansatz.apply_gate_angles(ansatz.gate_angles(thetas), state.amplitudes)


def first_gate_orthogonality(ansatz: Ansatz, state: StateVector) -> float:
    """|<psi0| sigma_1 |psi0>|^2 for the first rotation generator sigma_1.

    Zero means the warm-start orthogonality condition holds.
    """
    if state.n != ansatz.n:
        raise ValidationError("state and ansatz qubit counts differ")
    sigma = ansatz.first_generator
    return float(np.abs(np.vdot(state.amplitudes, sigma.apply(state.amplitudes))) ** 2)


def build_hea(n: int, layers: int, seed: int = 0, shuffle_axes: bool = False) -> Ansatz:
    """Hardware-efficient ansatz: per layer, RY then RZ on every qubit, then a
    CZ chain. M = 2 * n * layers, all parameters independent; the first gate is
    always Rotation(Y_1) so the standard orthogonality anchor holds on basis
    states. `shuffle_axes` redraws rotation axes uniformly from {X, Y, Z}
    (keeping gate 1 fixed); off by default.
    """
    if n < 1 or layers < 1:
        raise ValidationError("need n >= 1 and layers >= 1")
    rng = np.random.default_rng(seed)
    gates: list[Gate] = []
    idx = 0
    for _ in range(layers):
        for q in range(1, n + 1):
            for axis in ("Y", "Z"):
                if shuffle_axes and idx > 0:
                    axis = "XYZ"[rng.integers(3)]
                axes = "I" * (q - 1) + axis + "I" * (n - q)
                gates.append(Rotation(PauliString(axes), idx))
                idx += 1
        for q in range(1, n):
            gates.append(ControlledZ(q, q + 1))
    return Ansatz(n, tuple(gates))


def build_hva(h: PauliSum, layers: int) -> Ansatz:
    """Variational ansatz generated by the Hamiltonian's own terms.

    Terms are grouped by their non-identity axis pattern ("XZ" couplings, "Y"
    fields, ...) in order of first appearance; each group shares one parameter
    per layer, applied as single-term rotations e^{-i theta sign(coeff) P}.
    M = groups * layers. theta = 0 is exactly the identity. Zero-coefficient
    and all-identity terms carry no dynamics and are skipped.
    """
    if layers < 1:
        raise ValidationError("need layers >= 1")
    group_order: list[str] = []
    groups: dict[str, list[tuple[int, PauliString]]] = {}
    for coeff, string in h.terms:
        pattern = "".join(a for a in string.axes if a != "I")
        if coeff == 0.0 or not pattern:
            continue
        if pattern not in groups:
            groups[pattern] = []
            group_order.append(pattern)
        groups[pattern].append((1 if coeff > 0 else -1, string))
    if not group_order:
        raise ValidationError("Hamiltonian has no usable terms for an ansatz")
    gates: list[Gate] = []
    n_groups = len(group_order)
    for layer in range(layers):
        for g, pattern in enumerate(group_order):
            param = layer * n_groups + g
            for sign, string in groups[pattern]:
                gates.append(Rotation(string, param, sign))
    return Ansatz(h.n, tuple(gates))


def serialize_circuit(ansatz: Ansatz) -> str:
    """Circuit text format: `ROT <param-index> <axes>` / `FIXED CZ <q1> <q2>`.

    A rotation with sign -1 serializes with a '-' prefix on the axes string.
    """
    lines = []
    for g in ansatz.gates:
        if isinstance(g, Rotation):
            prefix = "-" if g.sign == -1 else ""
            lines.append(f"ROT {g.param_index} {prefix}{g.generator.axes}")
        else:
            lines.append(f"FIXED CZ {g.q1} {g.q2}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Ansatz:
    """Inverse of serialize_circuit; `#` comments and blank lines allowed."""
    gates: list[Gate] = []
    n: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "ROT" and len(fields) == 3:
            try:
                param = int(fields[1])
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: bad param index {fields[1]!r}") from exc
            axes = fields[2]
            sign = 1
            if axes.startswith("-"):
                sign, axes = -1, axes[1:]
            string = PauliString(axes.upper())
            if n is None:
                n = string.n
            elif string.n != n:
                raise ValidationError(f"line {lineno}: qubit count mismatch")
            gates.append(Rotation(string, param, sign))
        elif fields[:2] == ["FIXED", "CZ"] and len(fields) == 4:
            gates.append(ControlledZ(int(fields[2]), int(fields[3])))
        else:
            raise ValidationError(f"line {lineno}: unrecognized gate line {raw.strip()!r}")
    if n is None:
        raise ValidationError("no rotation gates found")
    return Ansatz(n, tuple(gates))
