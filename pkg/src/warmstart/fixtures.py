"""Built-in analytic test instances.

The two-parameter double well is the smallest system whose warm-start
minimum is provably overtaken by a distant competitor as dt grows:

    n = 2, H = X1 X2, psi0 = |00>, U(theta) = RY(theta1) (x) RY(theta2),
    theta* = (0, 0).

With real rotation amplitudes exp(-i theta Y)|0> = cos(theta)|0> +
sin(theta)|1>, the loss closes to

    L(theta; dt) = 1 - cos^2(dt) cos^2(t1) cos^2(t2)
                     - sin^2(dt) sin^2(t1) sin^2(t2).

The warm-start well at (0, 0) has loss sin^2(dt); four copies of the
competitor at (+-pi/2, +-pi/2) have loss cos^2(dt). The competitor
undercuts exactly when dt > pi/4, at max-norm distance pi/2.
"""
from __future__ import annotations

import numpy as np

from .circuits import Ansatz, Rotation
from .errors import ValidationError
from .loss import LossContext
from .pauli import PauliString, PauliSum
from .states import basis_state

JUMP_ONSET_DT = np.pi / 4
WELL_DISTANCE_INF = np.pi / 2


def double_well_ansatz() -> Ansatz:
    return Ansatz(
        2,
        (
            Rotation(PauliString("YI"), 0),
            Rotation(PauliString("IY"), 1),
        ),
    )


def double_well_context(dt: float) -> LossContext:
    """Loss context of the double-well instance at the given timestep."""
    return LossContext(
        ansatz=double_well_ansatz(),
        theta_star=np.zeros(2),
        hamiltonian=PauliSum.from_terms([(1.0, "XX")]),
        dt=float(dt),
        psi0=basis_state(2),
    )


def double_well_loss(theta: np.ndarray, dt: float) -> float:
    """Closed-form loss, the independent check on the simulated one."""
    t1, t2 = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(dt) ** 2, np.sin(dt) ** 2
    return float(
        1.0
        - c * np.cos(t1) ** 2 * np.cos(t2) ** 2
        - s * np.sin(t1) ** 2 * np.sin(t2) ** 2
    )


def double_well_minima(dt: float) -> dict[str, float]:
    """Losses of the warm-start well and the competitor wells."""
    return {
        "warm_start": float(np.sin(dt) ** 2),
        "competitor": float(np.cos(dt) ** 2),
    }


def grid_scan_minimum(dt: float, resolution: int = 401) -> tuple[np.ndarray, float]:
    """Dense grid argmin of the closed-form loss over [-pi, pi]^2.

    Exhaustive oracle for the jump detector: no optimizer involved. Ties
    resolve to the first row-major cell.
    """
    if resolution < 3:
        raise ValidationError("need resolution >= 3")
    axis = np.linspace(-np.pi, np.pi, resolution)
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    c, s = np.cos(dt) ** 2, np.sin(dt) ** 2
    values = 1.0 - c * np.cos(t1) ** 2 * np.cos(t2) ** 2 - s * np.sin(t1) ** 2 * np.sin(t2) ** 2
    flat = int(np.argmin(values))
    i, j = np.unravel_index(flat, values.shape)
    return np.array([axis[i], axis[j]]), float(values[i, j])
