"""Small dense linear-algebra helpers shared by the modules.

The matrix exponential is a fixed-order (13/13) Pade approximant with scaling
and squaring, following Higham (2005). The order never changes with the input,
so results are reproducible across scipy versions.
"""

from __future__ import annotations

import numpy as np

# Pade 13/13 numerator coefficients, b_0 .. b_13.
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
# Largest 1-norm for which the order-13 approximant is accurate to double
# precision without scaling.
_THETA13 = 5.371920351148152


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a 13/13 Pade approximant."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expm expects a square matrix")
    a = a.astype(np.result_type(a.dtype, np.float64))
    n = a.shape[0]
    if n == 0:
        return a.copy()
    norm1 = float(np.max(np.sum(np.abs(a), axis=0)))
    if norm1 == 0.0:
        return np.eye(n, dtype=a.dtype)
    s = 0
    if norm1 > _THETA13:
        s = int(np.ceil(np.log2(norm1 / _THETA13)))
        a = a / (2.0 ** s)

    b = _PADE13
    ident = np.eye(n, dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def max_abs(a) -> float:
    """Entrywise max-norm ``max |a_ij|``; the defect measure used throughout."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a)))


def hermiticity_defect(a: np.ndarray) -> float:
    return max_abs(a - a.conj().T)


def idempotency_defect(a: np.ndarray) -> float:
    return max_abs(a @ a - a)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)
