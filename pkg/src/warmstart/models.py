"""Spin-chain Hamiltonians used throughout the demos and tests."""
from __future__ import annotations

from .errors import ValidationError
from .pauli import PauliString, PauliSum


def _chain(n: int, bond: str, coupling: float, transverse: float) -> PauliSum:
    if n < 1:
        raise ValidationError("need n >= 1")
    terms = []
    for i in range(n - 1):
        axes = "I" * i + bond + "I" * (n - i - 2)
        terms.append((float(coupling), PauliString(axes)))
    if transverse != 0.0:
        for i in range(n):
            axes = "I" * i + "Y" + "I" * (n - i - 1)
            terms.append((float(transverse), PauliString(axes)))
    return PauliSum(n, tuple(terms))


def xz_chain(n: int, coupling: float = 1.0, transverse: float = -0.95) -> PauliSum:
    """Open chain of X_i Z_{i+1} bonds plus a uniform Y field."""
    return _chain(n, "XZ", coupling, transverse)


def xx_chain(n: int, coupling: float = 1.0, transverse: float = -0.95) -> PauliSum:
    """Open chain of X_i X_{i+1} bonds plus a uniform Y field."""
    return _chain(n, "XX", coupling, transverse)
