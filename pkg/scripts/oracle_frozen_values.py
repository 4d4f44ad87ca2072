"""Standalone dense-matrix oracles; values printed here are frozen into tests.

Everything below is independent of the package under src/: matrices are built
by explicit Kronecker products and reference results come from numpy/scipy
dense routines or closed-form quadrature.
"""
import numpy as np
from scipy.linalg import expm

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
AX = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron(axes: str) -> np.ndarray:
    m = np.array([[1.0 + 0j]])
    for a in axes:
        m = np.kron(m, AX[a])
    return m


# --- spectral norm of H = X1X2 - 0.95(Y1 + Y2) on 2 qubits ---
H = kron("XX") - 0.95 * (kron("YI") + kron("IY"))
evals = np.linalg.eigvalsh(H)
print("spectral_norm XX-0.95(YI+IY):", repr(float(np.max(np.abs(evals)))))

# --- spectral norm of 0.5X + 0.5Z on 1 qubit (analytic sqrt(0.5)) ---
H1 = 0.5 * X + 0.5 * Z
print("spectral_norm 0.5X+0.5Z:", repr(float(np.max(np.abs(np.linalg.eigvalsh(H1))))),
      "analytic:", repr(float(np.sqrt(0.5))))

# --- cos moments closed forms at the acceptance radii ---
for r in (0.1, 0.5, 1.0, np.pi):
    k = 0.5 + np.sin(2 * r) / (4 * r)
    c = 3 / 8 + np.sin(2 * r) / (4 * r) + np.sin(4 * r) / (32 * r)
    closed = (-1 + 4 * r * r + np.cos(4 * r) + r * np.sin(4 * r)) / (32 * r * r)
    print(f"r={r}: k+={k!r} c+={c!r} c+-k+^2={c - k * k!r} closed={closed!r} diff={c - k * k - closed:.3e}")

# --- evolve oracle: e^{-iHt}|psi> via scipy expm, H = Z, |+>, t=1.3 ---
psi = np.array([1, 1], dtype=complex) / np.sqrt(2)
out = expm(-1j * 1.3 * H1 * 0) @ psi  # placeholder sanity
outZ = expm(-1j * 1.3 * Z) @ psi
print("evolve Z t=1.3 |+>:", outZ)

# --- thm5 closed-form spot value ---
r, r0 = 0.1, 0.5
v = (4 * r**4 / 45) * (1 - 4 * r * r / 7) * ((1 - r0**2) * 1.0) ** 2
print("thm5 dt=0 r=0.1 r0=0.5:", repr(v))

# --- convexity radius spot ---
mu, eps, M, lam, dt = 0.1, 0.05, 20, 1.0, 1e-4
print("convexity radius:", repr((1 / M) * ((mu + 2 * abs(eps)) / (16 * M) - lam * dt)))

# --- adiabatic limits spot ---
M, lam, beta, eta0 = 4, 1.0, 1.0, 0.5
print("dt_grad:", repr(eta0 * beta / (2 * M * lam)))
mu, eps = 0.1, 0.05
print("dt_convex:", repr(beta * (mu + 2 * abs(eps)) / (32 * lam * M**2.5 * (1 + beta / (2 * M**1.5)))))
