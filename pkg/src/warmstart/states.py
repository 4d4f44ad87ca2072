"""Statevectors and matrix-free time evolution.

Evolution never builds a 2^n x 2^n matrix: e^{-iHt} (and the imaginary-time
e^{-tau H} with renormalization) is applied by a scaled-and-squared truncated
Taylor series over `PauliSum.matvec`, with the step split so that
||H||_triangle * step <= 1 per substep. Inside that radius the series terms
decay factorially, so truncation at relative 1e-14 gives ~1e-12 accuracy and
the imaginary-time series never suffers catastrophic cancellation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np

from .errors import NumericFailure, ValidationError
from .pauli import PauliSum

_TERM_CUTOFF = 1e-14
_MAX_TERMS = 80
_DRIFT_TOL = 1e-12


@dataclass(frozen=True)
class StateVector:
    """Unit-norm complex amplitudes over 2^n basis states, qubit 1 = MSB."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size < 2 or amps.size & (amps.size - 1):
            raise ValidationError(f"amplitude count {amps.shape} is not 2^n with n >= 1")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"state norm {norm!r} is not 1 within 1e-12")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size


def basis_state(n: int, index: int = 0) -> StateVector:
    """|index> in the computational basis on n qubits."""
    if not 0 <= index < (1 << n):
        raise ValidationError(f"basis index {index} out of range for n={n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps)


def zero_state(n: int) -> StateVector:
    return basis_state(n, 0)


def from_amplitudes(amplitudes: np.ndarray, normalize: bool = False) -> StateVector:
    amps = np.asarray(amplitudes, dtype=np.complex128)
    if normalize:
        norm = np.linalg.norm(amps)
        if norm == 0.0 or not np.isfinite(norm):
            raise NumericFailure("cannot normalize zero or non-finite amplitudes")
        amps = amps / norm
    return StateVector(amps)


def bell_pair_state(n: int) -> StateVector:
    """n Bell pairs on 2n qubits, ordered A_1..A_n B_1..B_n.

    Equal superposition of |b>_A |b>_B, the maximally entangled resource for
    the Hilbert-Schmidt <-> Bell-overlap identity.
    """
    if n < 1:
        raise ValidationError("need n >= 1")
    dim_a = 1 << n
    amps = np.zeros(dim_a * dim_a, dtype=np.complex128)
    diag = np.arange(dim_a, dtype=np.int64)
    amps[diag * dim_a + diag] = 1.0 / sqrt(dim_a)
    return StateVector(amps)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2."""
    if a.dim != b.dim:
        raise ValidationError("states live on different qubit counts")
    return float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def _taylor_substep(h: PauliSum, prefactor: complex, v: np.ndarray) -> np.ndarray:
    """Truncated series for e^{prefactor * H} v, valid for |prefactor|*||H|| <= 1."""
    acc = v.copy()
    term = v
    for k in range(1, _MAX_TERMS + 1):
        term = (prefactor / k) * h.matvec(term)
        acc += term
        if np.linalg.norm(term) < _TERM_CUTOFF * np.linalg.norm(acc):
            return acc
    raise NumericFailure("Taylor series failed to converge within the term budget")


def _substep_count(h: PauliSum, t: float) -> int:
    return max(1, ceil(abs(t) * h.spectral_bound(mode="triangle")))


def evolve_real(state: StateVector, h: PauliSum, t: float) -> StateVector:
    """e^{-iHt} |state> by substepped truncated Taylor series."""
    if h.n != state.n:
        raise ValidationError("Hamiltonian and state qubit counts differ")
    if not np.isfinite(t):
        raise ValidationError(f"non-finite time {t!r}")
    steps = _substep_count(h, t)
    v = state.amplitudes
    for _ in range(steps):
        v = _taylor_substep(h, -1j * (t / steps), v)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or abs(norm - 1.0) > _DRIFT_TOL:
            raise NumericFailure(f"unitarity drift {abs(norm - 1.0):.3e} exceeds {_DRIFT_TOL}")
        v = v / norm
    return StateVector(v)


def evolve_imaginary(state: StateVector, h: PauliSum, tau: float) -> StateVector:
    """Normalized e^{-tau H} |state>, tau >= 0.

    Renormalizing after every substep keeps all intermediates near unit norm,
    so even tau * ||H|| >> 1 never underflows; the final state equals the
    normalized full product because all substeps commute.
    """
    if h.n != state.n:
        raise ValidationError("Hamiltonian and state qubit counts differ")
    if not np.isfinite(tau) or tau < 0:
        raise ValidationError(f"imaginary time must be finite and >= 0, got {tau!r}")
    steps = _substep_count(h, tau)
    v = state.amplitudes
    for _ in range(steps):
        v = _taylor_substep(h, complex(-(tau / steps)), v)
        norm = np.linalg.norm(v)
        if norm == 0.0 or not np.isfinite(norm):
            raise NumericFailure("imaginary-time norm collapsed; tau * ||H|| too extreme")
        v = v / norm
    return StateVector(v)


def dump_statevector_csv(state: StateVector, path) -> None:
    """Write the amplitude table: columns (basis_index, re, im)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["basis_index", "re", "im"])
        for index, amp in enumerate(state.amplitudes):
            writer.writerow([index, repr(float(amp.real)), repr(float(amp.imag))])


def load_statevector_csv(path) -> StateVector:
    """Read a dump_statevector_csv table back into a StateVector."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["basis_index", "re", "im"]:
            raise ValidationError(f"unexpected statevector header {header!r}")
        entries = [(int(row[0]), float(row[1]), float(row[2])) for row in reader]
    amps = np.zeros(len(entries), dtype=np.complex128)
    for index, re, im in entries:
        amps[index] = re + 1j * im
    return StateVector(amps)
