"""Time evolution by ``U_hat(t) = exp(-i t H / hbar)`` with a self-adjoint ``H``.

Schrodinger picture: ``psi(t) = U_hat(t) psi0``.
Heisenberg picture: ``Y(t) = U_hat(t)^* Y0 U_hat(t)``, so that
``<Y(t) psi0, psi0> = <Y0 psi(t), psi(t)>`` and ``dY/dt = -(1/(i hbar)) [H, Y]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, GridTooCoarse, NotSelfAdjoint, OutOfDomain
from .hilbert import StateVector
from .linalg import expm, max_abs
from .model import basis_functions
from .observables import Operator
from .probability import MeasurementDistribution, projector_distribution

SELF_ADJOINT_TOL = 1e-10
MAX_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    H: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        H = np.array(self.H, dtype=complex, copy=True)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatch(f"Hamiltonian must be square, got {H.shape}")
        if not np.all(np.isfinite(H)):
            raise ValueError("Hamiltonian has non-finite entries")
        if max_abs(H - H.conj().T) > SELF_ADJOINT_TOL * max(1.0, max_abs(H)):
            raise NotSelfAdjoint("Hamiltonian is not self-adjoint")
        if not (float(self.hbar) > 0 and np.isfinite(self.hbar)):
            raise ValueError("hbar must be a positive finite number")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def n(self) -> int:
        return self.H.shape[0]


def propagator(ham: Hamiltonian, t: float) -> np.ndarray:
    """``exp(-i t H / hbar)``."""
    return expm(ham.H * (-1j * float(t) / ham.hbar))


def evolve_state(ham: Hamiltonian, t: float, psi0: StateVector) -> StateVector:
    if psi0.n != ham.n:
        raise DimensionMismatch(f"state of dimension {psi0.n} for a Hamiltonian of dimension {ham.n}")
    return StateVector(propagator(ham, t) @ psi0.coords, psi0.discrete)


def trajectory(ham: Hamiltonian, times: Sequence[float], psi0: StateVector) -> np.ndarray:
    """Rows are ``psi(t_k)`` coordinates."""
    return np.array([evolve_state(ham, t, psi0).coords for t in times])


def _uniform_step(times: np.ndarray) -> float:
    if times.ndim != 1 or times.shape[0] < 3:
        raise ValueError("need a one-dimensional grid of at least three times")
    steps = np.diff(times)
    h = float(steps.mean())
    if h <= 0 or max_abs(steps - h) > 1e-9 * abs(h) + 1e-15:
        raise ValueError("time grid must be uniform and increasing")
    return h


def schrodinger_residual(ham: Hamiltonian, times: Sequence[float], states) -> float:
    """``max_k ||i hbar (psi_{k+1} - psi_{k-1}) / 2h - H psi_k||`` over interior grid points."""
    times = np.asarray(times, dtype=float)
    psi = np.asarray(states, dtype=complex)
    if psi.shape != (times.shape[0], ham.n):
        raise DimensionMismatch(f"trajectory shape {psi.shape} does not match {times.shape[0]} times x {ham.n}")
    h = _uniform_step(times)
    # Slack for grids like t0 + h * k whose measured step rounds just above h.
    if h > MAX_STEP * (1 + 1e-9):
        raise GridTooCoarse(f"grid step {h:g} exceeds {MAX_STEP:g}")
    d = 1j * ham.hbar * (psi[2:] - psi[:-2]) / (2 * h) - psi[1:-1] @ ham.H.T
    return float(np.max(np.linalg.norm(d, axis=1)))


def heisenberg_operator(ham: Hamiltonian, t: float, Y0: Operator) -> Operator:
    """``U_hat(t)^* Y0 U_hat(t)``."""
    if Y0.n != ham.n:
        raise DimensionMismatch(f"operator of dimension {Y0.n} for a Hamiltonian of dimension {ham.n}")
    U = propagator(ham, t)
    return Operator(U.conj().T @ Y0.matrix @ U)


def heisenberg_derivative_defect(ham: Hamiltonian, t: float, Y0: Operator, h: float = 1e-4) -> float:
    """``max |(Y(t+h) - Y(t-h)) / 2h + (1/(i hbar)) [H, Y(t)]|``."""
    Yp = heisenberg_operator(ham, t + h, Y0).matrix
    Ym = heisenberg_operator(ham, t - h, Y0).matrix
    Y = heisenberg_operator(ham, t, Y0).matrix
    comm = ham.H @ Y - Y @ ham.H
    return max_abs((Yp - Ym) / (2 * h) + comm / (1j * ham.hbar))


def stationary_states(ham: Hamiltonian, tol: float = 1e-10) -> list[StateVector]:
    """Orthonormal basis of ``{v : ||H v|| <= tol ||H||}``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    w, V = np.linalg.eigh(ham.H)
    scale = float(np.linalg.norm(ham.H, 2))
    return [StateVector(V[:, k]) for k in range(ham.n) if abs(w[k]) <= tol * scale]


@dataclass(frozen=True, eq=False)
class EnergySpectrum:
    """Distinct energies ``s_k`` with their spectral projections ``P_k``."""

    values: np.ndarray
    projectors: tuple[np.ndarray, ...]

    def reconstruct(self) -> np.ndarray:
        return sum(s * P for s, P in zip(self.values, self.projectors))


def energy_spectrum(ham: Hamiltonian | np.ndarray, tol: float = 1e-9) -> EnergySpectrum:
    """Spectral resolution ``H = sum_k s_k P_k``; eigenvalues closer than ``tol ||H||`` are merged."""
    if not isinstance(ham, Hamiltonian):
        ham = Hamiltonian(ham)
    w, V = np.linalg.eigh(ham.H)
    gap = tol * max(1.0, float(np.max(np.abs(w))))
    groups: list[list[int]] = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[groups[-1][-1]] <= gap:
            groups[-1].append(k)
        else:
            groups.append([k])
    values = np.array([w[g].mean() for g in groups])
    projectors = tuple(V[:, g] @ V[:, g].conj().T for g in groups)
    return EnergySpectrum(values, projectors)


def energy_distribution(spectrum: EnergySpectrum, psi: StateVector) -> MeasurementDistribution:
    """Distribution of measured energies for a unit state."""
    return projector_distribution(spectrum.values, spectrum.projectors, psi)


# ---------------------------------------------------------------------------
# Evaluation of coefficient vectors at times
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EvaluationMap:
    """Row ``k`` of ``E`` maps coefficients to the value at ``times[k]``."""

    times: np.ndarray
    E: np.ndarray

    def matrix(self, k: int) -> np.ndarray:
        return self.E[k:k + 1]

    def apply(self, k: int, x) -> complex:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.E.shape[1],):
            raise DimensionMismatch(f"expected {self.E.shape[1]} coefficients, got {x.shape}")
        return complex(self.E[k] @ x)

    def index_of(self, t: float, atol: float = 1e-12) -> int | None:
        hit = np.flatnonzero(np.abs(self.times - t) <= atol * max(1.0, abs(t)))
        return int(hit[0]) if hit.size else None


def evaluation_map(funcs: Sequence[Callable] | tuple[str, int, float], times: Sequence[float],
                   domain: tuple[float, float] | None = None) -> EvaluationMap:
    """Evaluate basis functions on a time grid.

    ``funcs`` is a list of callables or ``(family, size, period)`` for a
    built-in family. Raises :class:`OutOfDomain` for grid points outside
    ``domain``.
    """
    times = np.asarray(times, dtype=float).ravel()
    if domain is not None and (np.any(times < domain[0]) or np.any(times > domain[1])):
        raise OutOfDomain(f"time grid leaves the basis domain {domain}")
    if isinstance(funcs, tuple) and funcs and isinstance(funcs[0], str):
        family, size, period = funcs
        funcs = basis_functions(family, int(size), float(period))
    E = np.column_stack([np.broadcast_to(f(times), times.shape) for f in funcs]).astype(complex)
    if not np.all(np.isfinite(E)):
        raise OutOfDomain("basis functions are not finite on the time grid")
    return EvaluationMap(times, E)


def translation_generator(family: str, size: int, period: float = 1.0) -> np.ndarray:
    """Coefficient generator ``S`` with ``sum_i (exp(theta S) x)_i e_i(t) = sum_i x_i e_i(t + theta)``."""
    if family == "fourier":
        freqs = ([0] + [s * m for m in range(1, size) for s in (1, -1)])[:size]
        return np.diag([2j * np.pi * k / period for k in freqs])
    if family == "monomial":
        S = np.zeros((size, size), dtype=complex)
        for j in range(1, size):
            S[j - 1, j] = j
        return S
    raise ValueError(f"unknown basis family {family!r}")


def monomial_shift(size: int, theta: float) -> np.ndarray:
    """Exact binomial translation matrix ``U_ij = C(j, i) theta^(j-i)``."""
    U = np.zeros((size, size))
    for j in range(size):
        for i in range(j + 1):
            U[i, j] = comb(j, i) * theta ** (j - i)
    return U


def shift_defect(emap: EvaluationMap, U: np.ndarray, theta: float) -> float:
    """``max |E(t_k) U - E(t_k + theta)|`` over grid points whose shift stays on the grid."""
    worst, hits = 0.0, 0
    for k, t in enumerate(emap.times):
        j = emap.index_of(t + theta)
        if j is None:
            continue
        hits += 1
        worst = max(worst, max_abs(emap.E[k] @ U - emap.E[j]))
    if hits == 0:
        raise ValueError("theta does not map any grid point onto the grid")
    return worst
