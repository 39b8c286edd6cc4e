"""Changes of observer: K-unitary maps on coefficients and their unitary images on states."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, InsufficientSamples, NotBijection, NotKUnitary
from .hilbert import HilbertChart, StateVector
from .linalg import expm, max_abs
from .observables import Operator

K_UNITARY_RTOL = 1e-8
SKEW_TOL = 1e-10
MAX_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class GaugeMap:
    """``U`` acts on measurement coefficients, ``U_hat`` on orthonormal state coordinates."""

    U: np.ndarray
    U_hat: np.ndarray
    kind: str = "continuous"
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.U_hat.shape[0]

    def apply(self, psi: StateVector) -> StateVector:
        if psi.n != self.n:
            raise DimensionMismatch(f"state of dimension {psi.n} for a map of dimension {self.n}")
        return StateVector(self.U_hat @ psi.coords, psi.discrete)

    def inverse(self) -> "GaugeMap":
        return GaugeMap(np.linalg.inv(self.U), self.U_hat.conj().T, self.kind, dict(self.params))

    def unitarity_defect(self) -> float:
        return max_abs(self.U_hat.conj().T @ self.U_hat - np.eye(self.n))


@dataclass(frozen=True, eq=False)
class Generator:
    """Infinitesimal generator ``S`` of ``theta -> exp(theta S)``; ``i S`` is self-adjoint when ``skew``."""

    S: np.ndarray
    reconstruction_error: float | None = None

    @property
    def skew(self) -> bool:
        S = np.asarray(self.S)
        return max_abs(S + S.conj().T) <= SKEW_TOL * max(1.0, max_abs(S))

    @property
    def S_hat(self) -> np.ndarray:
        """``i S``, the associated observable."""
        return 1j * np.asarray(self.S)


def k_unitarity_defect(K: np.ndarray, U: np.ndarray) -> float:
    return float(np.linalg.norm(U.conj().T @ K @ U - K, 2) / np.linalg.norm(K, 2))


def lift_gauge(chart: HilbertChart, U) -> GaugeMap:
    """``U_hat = C^* U C^{-*}`` for a coefficient map with ``U^* K U = K``."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (chart.n, chart.n):
        raise DimensionMismatch(f"gauge matrix has shape {U.shape}, chart dimension is {chart.n}")
    defect = k_unitarity_defect(chart.K, U)
    if defect > K_UNITARY_RTOL:
        raise NotKUnitary(f"||U^* K U - K|| / ||K|| = {defect:.3e} exceeds {K_UNITARY_RTOL:g}")
    Ch = chart.basis
    # U_hat = Ch U Ch^{-1}, computed as a triangular solve on the right.
    U_hat = sla.solve_triangular(Ch.T, (Ch @ U).T, lower=True).T
    return GaugeMap(U, U_hat, "continuous")


def k_unitary_from_unitary(chart: HilbertChart, V) -> np.ndarray:
    """Coefficient map ``C^{-*} V C^*`` whose lift is the unitary ``V``."""
    V = np.asarray(V, dtype=complex)
    return sla.solve_triangular(chart.basis, V @ chart.basis, lower=False)


def transform_operator(g: GaugeMap, Y: Operator) -> Operator:
    """``U_hat Y U_hat^*``."""
    if Y.n != g.n:
        raise DimensionMismatch(f"operator of dimension {Y.n} for a map of dimension {g.n}")
    return Operator(g.U_hat @ Y.matrix @ g.U_hat.conj().T)


def discrete_permutation(sigma: Sequence[int]) -> GaugeMap:
    """Permutation map ``upsilon_i -> upsilon_{sigma(i)}`` on ``C^d`` (0-based ``sigma``)."""
    sigma = np.asarray(sigma)
    d = sigma.shape[0] if sigma.ndim == 1 else 0
    if d == 0 or not np.issubdtype(sigma.dtype, np.integer) or sorted(sigma.tolist()) != list(range(d)):
        raise NotBijection(f"{sigma.tolist()} is not a permutation of 0..{max(d - 1, 0)}")
    P = np.zeros((d, d))
    P[sigma, np.arange(d)] = 1.0
    return GaugeMap(P, P.astype(complex), "discrete-permutation", {"sigma": tuple(int(s) for s in sigma)})


def one_param_group(gen: Generator, theta: float, chart: HilbertChart | None = None) -> GaugeMap:
    """``U_hat(theta) = exp(theta S)`` on orthonormal coordinates.

    With a chart, the coefficient map is ``C^{-*} U_hat C^*``; otherwise both
    matrices coincide.
    """
    theta = float(theta)
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    U_hat = expm(theta * np.asarray(gen.S, dtype=complex))
    U = U_hat if chart is None else k_unitary_from_unitary(chart, U_hat)
    return GaugeMap(U, U_hat, "group", {"theta": theta})


def generator_from_group(samples: Iterable[tuple[float, np.ndarray]]) -> Generator:
    """Estimate ``S`` from samples ``(theta, U(theta))`` by finite differences.

    Uses the central difference at the smallest symmetric pair ``(h, -h)`` with
    ``0 < h <= 1e-3``; falls back to a forward difference from the identity at
    the smallest single ``|h| <= 1e-3``. The worst ``||exp(theta S) - U(theta)||``
    over all samples is stored as ``reconstruction_error``.
    """
    samples = [(float(t), np.asarray(U, dtype=complex)) for t, U in samples]
    if not samples:
        raise InsufficientSamples("no samples")
    by_theta = {t: U for t, U in samples}
    small = sorted({abs(t) for t in by_theta if 0 < abs(t) <= MAX_STEP})
    S = None
    for h in small:
        if h in by_theta and -h in by_theta:
            S = (by_theta[h] - by_theta[-h]) / (2 * h)
            break
    if S is None:
        if not small:
            raise InsufficientSamples(f"need a sample with 0 < |theta| <= {MAX_STEP:g}")
        h = small[0]
        t = h if h in by_theta else -h
        n = by_theta[t].shape[0]
        S = (by_theta[t] - np.eye(n)) / t
    # Non-group samples can give a huge S whose exponential overflows; report inf.
    with np.errstate(over="ignore", invalid="ignore"):
        err = max(max_abs(expm(t * S) - U) for t, U in samples)
    return Generator(S, err if np.isfinite(err) else float("inf"))


def symmetry_check(Y: Operator, g: GaugeMap) -> float:
    """``max |[Y, U_hat]_{ij}|``; zero iff ``Y`` is invariant under the map."""
    if Y.n != g.n:
        raise DimensionMismatch(f"operator of dimension {Y.n} for a map of dimension {g.n}")
    return max_abs(Y.matrix @ g.U_hat - g.U_hat @ Y.matrix)


def state_symmetry_defect(g: GaugeMap, psi: StateVector) -> float:
    """``||U_hat psi - psi||``; zero iff ``psi`` is a fixed point."""
    return float(np.linalg.norm(g.apply(psi).coords - psi.coords))
