"""Linear charts: from a Gram kernel to orthonormal state coordinates.

A chart is built from the Hermitian positive-definite Gram matrix
``K[i, j] = <eps_i, eps_j>`` of the basis state vectors. With the Cholesky
factor ``K = C C^*`` the chart fixes ``L = (C^*)^{-1}``, so that ``K^{-1} = L L^*``
and ``L^* K L = I``.

State vectors are stored by their coordinates in the orthonormal basis
``eps~``. In those coordinates

* the basis vector ``eps_j`` is column ``j`` of ``C^*`` (upper triangular),
* the dual vector ``phi_j`` is column ``j`` of ``C^{-1}``,
* lifting coefficients ``x`` gives ``C^* x`` and reading them back solves
  ``C^* x = psi``.

Because ``C^*`` is triangular, ``span(eps~_0..eps~_k) = span(eps_0..eps_k)`` for
every ``k``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.spatial.distance import cdist

from .errors import (
    DimensionMismatch,
    IllConditioned,
    NotHermitian,
    NotPositiveDefinite,
    OddDimension,
)
from .linalg import max_abs

TAU_PD = 1e-12
HERMITIAN_RTOL = 1e-12
ILL_CONDITIONED = 1e10


# ---------------------------------------------------------------------------
# Gram kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GramKernel:
    K: np.ndarray
    source: Any = "explicit"

    @property
    def n(self) -> int:
        return self.K.shape[0]


def _points(points) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    return p.reshape(len(p), -1)


def kernel_matrix(name: str, points, params: dict | None = None) -> np.ndarray:
    """Evaluate a named positive kernel on a point list.

    ``gaussian``: exp(-|x-y|^2 / (2 sigma^2)); ``min``: prod_k min(x_k, y_k);
    ``linear``: x.y + c; ``polynomial``: (x.y + c)^degree.
    """
    params = params or {}
    x = _points(points)
    if name == "gaussian":
        sigma = float(params.get("sigma", 1.0))
        return np.exp(-cdist(x, x, "sqeuclidean") / (2.0 * sigma**2))
    if name == "min":
        return np.prod(np.minimum(x[:, None, :], x[None, :, :]), axis=2)
    if name == "linear":
        return x @ x.T + float(params.get("c", 0.0))
    if name == "polynomial":
        return (x @ x.T + float(params.get("c", 1.0))) ** int(params.get("degree", 2))
    raise ValueError(f"unknown kernel {name!r}")


def gram_from_kernel(name: str, points, params: dict | None = None) -> GramKernel:
    return GramKernel(kernel_matrix(name, points, params).astype(complex),
                      {"kernel": name, "params": dict(params or {}), "points": np.asarray(points).tolist()})


# ---------------------------------------------------------------------------
# Charts and states
# ---------------------------------------------------------------------------


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HilbertChart:
    K: np.ndarray
    C: np.ndarray  # lower Cholesky factor, K = C C^*
    L: np.ndarray  # (C^*)^{-1}
    Phi: np.ndarray  # K^{-1}; column j holds the eps-coefficients of phi_j
    cond: float
    gram: GramKernel | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def basis(self) -> np.ndarray:
        """Orthonormal coordinates of ``eps_j``, one per column."""
        return self.C.conj().T

    @property
    def dual_basis(self) -> np.ndarray:
        """Orthonormal coordinates of ``phi_j``, one per column."""
        return self.L.conj().T

    def summary(self) -> dict[str, Any]:
        return {
            "dimension": self.n,
            "condition_number": self.cond,
            "orthonormality_defect": orthonormality_defect(self),
            "dual_pairing_defect": dual_pairing_check(self),
        }


@dataclass(frozen=True, eq=False)
class StateVector:
    """A state: orthonormal coordinates ``coords`` plus an optional discrete part."""

    coords: np.ndarray
    discrete: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=complex).ravel()
        if not np.all(np.isfinite(c)):
            raise ValueError("state coordinates must be finite")
        object.__setattr__(self, "coords", _frozen(c))
        if self.discrete is not None:
            object.__setattr__(self, "discrete", _frozen(np.asarray(self.discrete, dtype=complex).ravel()))

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def normalized(self) -> "StateVector":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalise the zero vector")
        return StateVector(self.coords / nrm, self.discrete)

    def inner(self, other: "StateVector") -> complex:
        """``<self, other>``, conjugate-linear in ``self``."""
        return complex(np.vdot(self.coords, other.coords))


def build_chart(gram: GramKernel | np.ndarray, tau_pd: float = TAU_PD) -> HilbertChart:
    """Factor a Gram kernel into a chart.

    Raises :class:`NotHermitian` or :class:`NotPositiveDefinite`; emits
    :class:`IllConditioned` when the condition number exceeds 1e10.
    """
    if not isinstance(gram, GramKernel):
        gram = GramKernel(np.asarray(gram))
    K = np.asarray(gram.K, dtype=complex)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
        raise DimensionMismatch(f"Gram matrix must be square and non-empty, got {K.shape}")
    if not np.all(np.isfinite(K)):
        raise ValueError("Gram matrix has non-finite entries")
    scale = max_abs(K)
    if max_abs(K - K.conj().T) > HERMITIAN_RTOL * scale:
        raise NotHermitian("Gram matrix is not Hermitian")
    K = 0.5 * (K + K.conj().T)
    eig = np.linalg.eigvalsh(K)
    if eig[0] <= tau_pd * eig[-1]:
        raise NotPositiveDefinite(
            f"smallest eigenvalue {eig[0]:.3e} is not above {tau_pd:g} x largest {eig[-1]:.3e}")
    cond = float(eig[-1] / eig[0])
    if cond > ILL_CONDITIONED:
        warnings.warn(f"Gram matrix condition number {cond:.3e} exceeds {ILL_CONDITIONED:g}",
                      IllConditioned, stacklevel=2)
    C = np.linalg.cholesky(K)
    n = K.shape[0]
    ident = np.eye(n, dtype=complex)
    # L = (C^*)^{-1} = (C^{-1})^*
    Cinv = sla.solve_triangular(C, ident, lower=True)
    L = Cinv.conj().T
    Phi = sla.cho_solve((C, True), ident)
    return HilbertChart(_frozen(K), _frozen(C), _frozen(L), _frozen(Phi), cond, gram)


def _check_dim(chart: HilbertChart, v: np.ndarray, what: str) -> None:
    if v.shape != (chart.n,):
        raise DimensionMismatch(f"{what} has shape {v.shape}, chart dimension is {chart.n}")


def lift(chart: HilbertChart, x: Sequence[complex] | np.ndarray, discrete=None) -> StateVector:
    """Map measurement coefficients to the state ``sum_i x^i eps_i``."""
    x = np.asarray(x, dtype=complex).ravel()
    _check_dim(chart, x, "coefficient vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("coefficients must be finite")
    return StateVector(chart.basis @ x, discrete)


def components(chart: HilbertChart, psi: StateVector) -> np.ndarray:
    """Coefficients ``x^j = <phi_j, psi>`` of a state."""
    _check_dim(chart, psi.coords, "state")
    return sla.solve_triangular(chart.basis, psi.coords, lower=False)


def basis_state(chart: HilbertChart, j: int) -> StateVector:
    """The basis state ``eps_j``."""
    return StateVector(chart.basis[:, j])


def orthonormal_state(chart: HilbertChart, j: int) -> StateVector:
    """The orthonormal basis state ``eps~_j``."""
    e = np.zeros(chart.n, dtype=complex)
    e[j] = 1.0
    return StateVector(e)


def dual_pairing_check(chart: HilbertChart) -> float:
    """``max |<phi_j, eps_k> - delta_jk|``, computed from the stored ``K^{-1}``.

    ``phi_j = sum_i (K^{-1})_{ij} eps_i``, so the pairing matrix is
    ``K^{-1} K``. Degradation for ill-conditioned kernels is reported, not hidden.
    """
    pairing = chart.Phi @ chart.K
    return max_abs(pairing - np.eye(chart.n))


def orthonormality_defect(chart: HilbertChart) -> float:
    """``max |(L^* K L - I)_{ij}|``."""
    return max_abs(chart.L.conj().T @ chart.K @ chart.L - np.eye(chart.n))


# ---------------------------------------------------------------------------
# Complex structure on an even-dimensional real chart
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """Complex structure ``J`` pairing orthonormal basis vectors (2a, 2a+1).

    ``J eps~_{2a} = eps~_{2a+1}`` and ``J eps~_{2a+1} = -eps~_{2a}``. Vectors
    are real orthonormal coordinates of length ``2m``.
    """

    J: np.ndarray

    @property
    def m(self) -> int:
        return self.J.shape[0] // 2

    def to_complex(self, psi) -> np.ndarray:
        """``T(psi)``: components ``psi^{2a} - i psi^{2a+1}`` on ``eps~_{2a}``."""
        psi = np.asarray(psi, dtype=float)
        return psi[0::2] - 1j * psi[1::2]

    def to_complex_conj(self, psi) -> np.ndarray:
        """``T-bar(psi)``: components ``psi^{2a} + i psi^{2a+1}``."""
        psi = np.asarray(psi, dtype=float)
        return psi[0::2] + 1j * psi[1::2]

    def gamma(self, psi, psi_prime) -> complex:
        """Hermitian form ``sum_a (psi^{2a} + i psi^{2a+1})(psi'^{2a} - i psi'^{2a+1})``."""
        return complex(np.sum(self.to_complex_conj(psi) * self.to_complex(psi_prime)))


def complexify(chart: HilbertChart | int) -> ComplexStructure:
    """Complex structure for a real chart of even dimension ``2m``.

    Odd-dimensional charts must be padded with one auxiliary basis element by
    the caller; they are rejected here with :class:`OddDimension`.
    """
    if isinstance(chart, HilbertChart):
        if max_abs(chart.K.imag) > HERMITIAN_RTOL * max_abs(chart.K):
            raise ValueError("complexify expects a real Gram kernel")
        n = chart.n
    else:
        n = int(chart)
    if n % 2:
        raise OddDimension(f"dimension {n} is odd; pad with one auxiliary basis element")
    J = np.zeros((n, n))
    for a in range(n // 2):
        J[2 * a + 1, 2 * a] = 1.0
        J[2 * a, 2 * a + 1] = -1.0
    return ComplexStructure(_frozen(J))
