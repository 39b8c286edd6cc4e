"""Measurement probabilities ``nu(J) = ||Y_J psi||^2`` and a seeded measurement simulator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NotInConditioningSubspace,
    NotNormalized,
    NotSubset,
    ZeroMassOutcome,
)
from .hilbert import HilbertChart, StateVector
from .observables import Operator, index_set

NORM_TOL = 1e-10
CLAMP = 1e-14
MASS_TOL = 1e-9


def _require_unit(psi: StateVector, n: int) -> None:
    if psi.n != n:
        raise DimensionMismatch(f"state of dimension {psi.n} on a chart of dimension {n}")
    if abs(psi.norm - 1.0) > NORM_TOL:
        raise NotNormalized(f"state norm is {psi.norm!r}, expected 1 within {NORM_TOL:g}")


def _mass(coords: np.ndarray, J: Sequence[int]) -> float:
    # Projection onto eps~_J keeps coordinates J, so its squared norm is a plain sum.
    return float(np.sum(np.abs(coords[list(J)]) ** 2))


def subspace_prob(chart: HilbertChart, psi: StateVector, J: Iterable[int]) -> float:
    """Probability that a unit state is observed within ``H_J``."""
    _require_unit(psi, chart.n)
    return _mass(psi.coords, index_set(J, chart.n))


def conditional_prob(chart: HilbertChart, psi: StateVector, J: Iterable[int], J_sub: Iterable[int]) -> float:
    """Probability of ``H_{J_sub}`` for a unit state known to lie in ``H_J``."""
    _require_unit(psi, chart.n)
    J = index_set(J, chart.n)
    J_sub = index_set(J_sub, chart.n)
    if not set(J_sub) <= set(J):
        raise NotSubset(f"{J_sub} is not contained in {J}")
    outside = np.delete(psi.coords, list(J))
    if np.linalg.norm(outside) > NORM_TOL:
        raise NotInConditioningSubspace(f"state has weight {np.linalg.norm(outside):.3e} outside H_J")
    return _mass(psi.coords, J_sub)


# ---------------------------------------------------------------------------
# Distributions over eigenvalues
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    eigenvalue: float
    probability: float
    J: tuple[int, ...] | None  # None when the cell is not a coordinate subspace


@dataclass(frozen=True, eq=False)
class MeasurementDistribution:
    """Outcomes sorted by eigenvalue, the measured state and one projector per outcome."""

    outcomes: tuple[Outcome, ...]
    psi: StateVector
    projectors: tuple[np.ndarray, ...]

    @property
    def total(self) -> float:
        return float(sum(o.probability for o in self.outcomes))

    def rows(self) -> list[dict]:
        return [{"eigenvalue": o.eigenvalue, "probability": o.probability,
                 "J": list(o.J) if o.J is not None else None} for o in self.outcomes]


def clamp_probability(p: float) -> float:
    """Clamp roundoff negatives down to ``-1e-14``; larger negatives are errors."""
    if p < -CLAMP:
        raise ValueError(f"negative probability {p!r}")
    return max(p, 0.0)


def eigen_distribution(chart: HilbertChart, phi: Operator, psi: StateVector) -> MeasurementDistribution:
    """Distribution of measured eigenvalues of a secondary observable.

    Cells with equal eigenvalue are merged; indices outside every cell carry
    eigenvalue 0 (merged into an existing 0 cell if there is one).
    """
    _require_unit(psi, chart.n)
    if phi.kind != "secondary":
        raise ValueError("eigen_distribution expects a secondary observable")
    cells: dict[float, set[int]] = {}
    for lam, J in zip(phi.params["eigenvalues"], phi.params["sets"]):
        if not J:
            continue
        if np.iscomplexobj(lam) and np.imag(lam) != 0:
            raise ValueError("eigen_distribution needs real eigenvalues")
        cells.setdefault(float(np.real(lam)), set()).update(J)
    covered = set().union(*cells.values()) if cells else set()
    rest = set(range(chart.n)) - covered
    if rest:
        cells.setdefault(0.0, set()).update(rest)
    outcomes, projectors = [], []
    for lam in sorted(cells):
        J = tuple(sorted(cells[lam]))
        outcomes.append(Outcome(lam, clamp_probability(_mass(psi.coords, J)), J))
        p = np.zeros((chart.n, chart.n), dtype=complex)
        p[J, J] = 1.0
        projectors.append(p)
    return MeasurementDistribution(tuple(outcomes), psi, tuple(projectors))


def projector_distribution(values: Sequence[float], projectors: Sequence[np.ndarray],
                           psi: StateVector) -> MeasurementDistribution:
    """Distribution ``||P_k psi||^2`` for a resolution of the identity ``{(s_k, P_k)}``."""
    if abs(psi.norm - 1.0) > NORM_TOL:
        raise NotNormalized(f"state norm is {psi.norm!r}, expected 1 within {NORM_TOL:g}")
    order = np.argsort(values, kind="stable")
    outcomes = []
    for k in order:
        v = projectors[k] @ psi.coords
        outcomes.append(Outcome(float(values[k]), clamp_probability(float(np.vdot(v, v).real)), None))
    return MeasurementDistribution(tuple(outcomes), psi, tuple(np.asarray(projectors[k]) for k in order))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def _cumulative(dist: MeasurementDistribution) -> tuple[np.ndarray, np.ndarray]:
    p = np.array([o.probability for o in dist.outcomes])
    total = p.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"distribution mass {total!r} differs from 1 by more than {MASS_TOL:g}")
    return p, np.cumsum(p) / total


def _draw(p: np.ndarray, cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    if np.any(p[idx] < CLAMP):
        raise ZeroMassOutcome("sampled an outcome with probability below 1e-14")
    return idx


def sample_measurement(dist: MeasurementDistribution, seed: int) -> tuple[float, StateVector]:
    """Draw one outcome; return its eigenvalue and the collapsed unit state."""
    p, cdf = _cumulative(dist)
    k = int(_draw(p, cdf, _rng(seed).random(1))[0])
    post = dist.projectors[k] @ dist.psi.coords
    if np.vdot(post, post).real < CLAMP:
        raise ZeroMassOutcome("sampled cell carries no mass of the state")
    return dist.outcomes[k].eigenvalue, StateVector(post / np.linalg.norm(post))


def sample_outcomes(dist: MeasurementDistribution, seed: int, size: int) -> np.ndarray:
    """Indices (into ``dist.outcomes``) of ``size`` independent draws."""
    p, cdf = _cumulative(dist)
    return _draw(p, cdf, _rng(seed).random(int(size)))
