"""Pauli-string algebra acting directly on statevector amplitudes.

Conventions used throughout the package:

- Qubits are numbered 1..n and qubit 1 is the most significant bit of the
  basis-state index: axes string "XIZ" puts X on qubit 1, Z on qubit 3, and
  basis index 0b100 has qubit 1 in state |1>.
- A Pauli string is I/X/Y/Z per qubit; every string is Hermitian and
  self-inverse, which is what makes e^{-i theta P} = cos(theta) - i sin(theta) P.
- A Pauli sum has real coefficients, so it is a Hermitian operator without
  ever being materialized as a matrix: `matvec` costs O(terms * 2^n).

Action on a basis state is index arithmetic: X/Y flip the qubit's bit, Y/Z
contribute (-1)^bit, and each Y contributes a global factor i.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NumericFailure, ValidationError

AXES = "IXYZ"

# exact mode builds a Krylov eigensolve over 2^n amplitudes; keep it desk-scale
MAX_EXACT_QUBITS = 12


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. "XIZY" on 4 qubits."""

    axes: str

    def __post_init__(self) -> None:
        if not self.axes:
            raise ValidationError("Pauli string needs at least one qubit")
        bad = set(self.axes) - set(AXES)
        if bad:
            raise ValidationError(f"invalid Pauli axes {sorted(bad)} in {self.axes!r}")

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def dim(self) -> int:
        return 1 << self.n

    def weight(self) -> int:
        """Number of non-identity factors."""
        return sum(a != "I" for a in self.axes)

    @cached_property
    def _flip_mask(self) -> int:
        mask = 0
        for q, a in enumerate(self.axes, start=1):
            if a in "XY":
                mask |= 1 << (self.n - q)
        return mask

    @cached_property
    def _permutation(self) -> np.ndarray:
        return np.arange(self.dim, dtype=np.int64) ^ self._flip_mask

    @cached_property
    def _phase(self) -> np.ndarray:
        sign_mask = 0
        n_y = 0
        for q, a in enumerate(self.axes, start=1):
            if a in "YZ":
                sign_mask |= 1 << (self.n - q)
            if a == "Y":
                n_y += 1
        idx = np.arange(self.dim, dtype=np.uint64)
        parity = np.bitwise_count(idx & np.uint64(sign_mask)) & 1
        signs = 1.0 - 2.0 * parity
        return (1j**n_y) * signs.astype(np.complex128)

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """P @ v for one vector or a batch with the amplitude axis last."""
        v = np.asarray(amplitudes)
        if v.shape[-1] != self.dim:
            raise ValidationError(
                f"amplitude axis {v.shape[-1]} does not match 2^{self.n}"
            )
        return (v * self._phase)[..., self._permutation]


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings on a fixed qubit count.

    `n` is stored explicitly so the empty sum (the zero operator) is still a
    well-defined Hamiltonian.
    """

    n: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("qubit count must be >= 1")
        for coeff, string in self.terms:
            if string.n != self.n:
                raise ValidationError(
                    f"term {string.axes!r} has {string.n} qubits, expected {self.n}"
                )
            if not np.isfinite(coeff):
                raise ValidationError(f"non-finite coefficient {coeff!r}")

    @staticmethod
    def from_terms(terms: list[tuple[float, str]], n: int | None = None) -> "PauliSum":
        if not terms and n is None:
            raise ValidationError("empty sum needs an explicit qubit count")
        strings = tuple((float(c), PauliString(a)) for c, a in terms)
        return PauliSum(n if n is not None else strings[0][1].n, strings)

    @property
    def dim(self) -> int:
        return 1 << self.n

    def matvec(self, amplitudes: np.ndarray) -> np.ndarray:
        """H @ v for one vector or a batch with the amplitude axis last."""
        v = np.asarray(amplitudes, dtype=np.complex128)
        out = np.zeros_like(v)
        for coeff, string in self.terms:
            out += coeff * string.apply(v)
        return out

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(self.n, tuple((factor * c, s) for c, s in self.terms))

    def spectral_bound(self, mode: str = "exact") -> float:
        """Largest |eigenvalue| of the sum.

        mode "exact" computes the spectral norm (dense eigensolve for small n,
        matrix-free Lanczos above); mode "triangle" returns sum |coeff|, an
        upper bound that is cheap at any size.
        """
        if mode == "triangle":
            return float(sum(abs(c) for c, _ in self.terms))
        if mode != "exact":
            raise ValidationError(f"unknown spectral mode {mode!r}")
        if self.n > MAX_EXACT_QUBITS:
            raise ValidationError(
                f"exact spectral bound limited to n <= {MAX_EXACT_QUBITS}, got {self.n}"
            )
        if not self.terms:
            return 0.0
        if self.n <= 6:
            dense = self.matvec(np.eye(self.dim, dtype=np.complex128)).T
            return float(np.max(np.abs(np.linalg.eigvalsh(dense))))
        from scipy.sparse.linalg import LinearOperator, eigsh

        op = LinearOperator(
            (self.dim, self.dim),
            matvec=lambda v: self.matvec(np.asarray(v, dtype=np.complex128).ravel()),
            dtype=np.complex128,
        )
        # fixed start vector keeps the iteration deterministic
        v0 = np.full(self.dim, 1.0 / np.sqrt(self.dim))
        vals = eigsh(op, k=1, which="LM", v0=v0, return_eigenvectors=False)
        value = float(np.abs(vals[0]))
        if not np.isfinite(value):
            raise NumericFailure("spectral eigensolve returned non-finite value")
        return value


def parse_hamiltonian(text: str) -> PauliSum:
    """Parse the Hamiltonian text format: one `<coeff> <axes>` per line.

    Blank lines and `#` comments are skipped; a Unicode minus sign is accepted
    in coefficients. All strings must share one qubit count.
    """
    terms: list[tuple[float, PauliString]] = []
    n: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace("−", "-").split()
        if len(fields) != 2:
            raise ValidationError(
                f"line {lineno}: expected '<coeff> <axes>', got {raw.strip()!r}"
            )
        coeff_text, axes = fields
        try:
            coeff = float(coeff_text)
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: bad coefficient {coeff_text!r}") from exc
        string = PauliString(axes.upper())
        if n is None:
            n = string.n
        elif string.n != n:
            raise ValidationError(
                f"line {lineno}: {axes!r} has {string.n} qubits, earlier lines have {n}"
            )
        terms.append((coeff, string))
    if n is None:
        raise ValidationError("no Hamiltonian terms found")
    return PauliSum(n, tuple(terms))


def serialize_hamiltonian(h: PauliSum) -> str:
    """Inverse of parse_hamiltonian; repr() keeps coefficients bit-exact."""
    lines = [f"{coeff!r} {string.axes}" for coeff, string in h.terms]
    return "\n".join(lines) + "\n"
