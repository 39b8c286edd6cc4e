"""Composite systems: Hilbert sums of independent variables and binary tensor products."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch
from .hilbert import GramKernel, HilbertChart, StateVector, build_chart
from .observables import Operator, primary


@dataclass(frozen=True, eq=False)
class SumChart:
    blocks: tuple[HilbertChart, ...]
    chart: HilbertChart
    ranges: tuple[range, ...]

    def projection(self, k: int) -> Operator:
        """``pi_k``: projection onto block ``k``."""
        return primary(self.chart, self.ranges[k])

    def embed(self, k: int, psi: StateVector) -> StateVector:
        """``E_k``: place a block state into the combined space."""
        if psi.n != len(self.ranges[k]):
            raise DimensionMismatch(f"block {k} has dimension {len(self.ranges[k])}, state has {psi.n}")
        c = np.zeros(self.chart.n, dtype=complex)
        c[self.ranges[k].start:self.ranges[k].stop] = psi.coords
        return StateVector(c)

    def decompose(self, psi: StateVector) -> list[StateVector]:
        return [StateVector(psi.coords[r.start:r.stop]) for r in self.ranges]


def hilbert_sum(charts: Sequence[HilbertChart]) -> SumChart:
    """Block-diagonal combination; block ``k`` occupies ``ranges[k]``."""
    charts = tuple(charts)
    if not charts:
        raise ValueError("hilbert_sum needs at least one chart")
    if len(charts) == 1:
        return SumChart(charts, charts[0], (range(charts[0].n),))
    K = sla.block_diag(*[c.K for c in charts])
    ranges, start = [], 0
    for c in charts:
        ranges.append(range(start, start + c.n))
        start += c.n
    return SumChart(charts, build_chart(GramKernel(K, "hilbert_sum")), tuple(ranges))


@dataclass(frozen=True, eq=False)
class TensorChart:
    factors: tuple[HilbertChart, HilbertChart]
    chart: HilbertChart

    @property
    def dims(self) -> tuple[int, int]:
        return self.factors[0].n, self.factors[1].n

    def index(self, i: int, k: int) -> int:
        """Flat index of the pair ``(i, k)``; the second factor runs fastest."""
        return i * self.factors[1].n + k

    def lift_first(self, op: Operator) -> Operator:
        return Operator(np.kron(op.matrix, np.eye(self.factors[1].n)))

    def lift_second(self, op: Operator) -> Operator:
        return Operator(np.kron(np.eye(self.factors[0].n), op.matrix))


def tensor_chart(chart1: HilbertChart, chart2: HilbertChart) -> TensorChart:
    """Chart on the Kronecker kernel ``K1 (x) K2``."""
    n = chart1.n * chart2.n
    # A dense n x n complex matrix must be addressable.
    if n * n * 16 > sys.maxsize:
        raise OverflowError(f"tensor dimension {n} is too large")
    K = np.kron(chart1.K, chart2.K)
    return TensorChart((chart1, chart2), build_chart(GramKernel(K, "tensor")))


def tensor_state(tc: TensorChart, psi1: StateVector, psi2: StateVector) -> StateVector:
    """``psi1 (x) psi2``.

    The Cholesky factor of a Kronecker kernel is the Kronecker product of the
    factors' Cholesky factors, so orthonormal coordinates multiply directly.
    """
    n1, n2 = tc.dims
    if psi1.n != n1 or psi2.n != n2:
        raise DimensionMismatch(f"factor states of dimension ({psi1.n}, {psi2.n}), expected ({n1}, {n2})")
    return StateVector(np.kron(psi1.coords, psi2.coords))
