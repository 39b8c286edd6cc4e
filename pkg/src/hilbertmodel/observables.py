"""Observables as operators on the state space.

All matrices act on orthonormal chart coordinates. A primary observable for an
index set ``J`` is the orthogonal projection onto ``span(eps~_j, j in J)``,
written ``sum_{j in J} <eps~_j, psi> eps~_j``. It coincides with
``span(eps_j, j in J)`` whenever ``J`` is a leading block ``{0..k}`` (the chart
factor is triangular) or the kernel is block-diagonal along ``J``.

The coordinate projector ``sum_{j in J} <phi_j, psi> eps_j`` read in the
non-orthogonal basis is also available through :func:`coordinate_projector`.
It is idempotent, has trace ``|J|`` and the same lattice algebra, but it is only
Hermitian when the Gram kernel does not couple ``J`` with its complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IncompletePartition,
    IndexOutOfRange,
    OverlappingSets,
)
from .hilbert import HilbertChart, StateVector
from .jsonio import encode_matrix
from .linalg import max_abs
from .model import ReductionMatrix

OPERATOR_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray
    kind: str = "general"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator matrix must be square, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "Operator":
        params = dict(self.params)
        if self.kind == "algebra":
            params["u"] = tuple(np.conj(self.params["u"]))
        elif self.kind == "secondary":
            params["eigenvalues"] = tuple(np.conj(self.params["eigenvalues"]))
        kind = self.kind if self.kind in ("primary", "discrete", "algebra", "secondary") else "general"
        return Operator(self.matrix.conj().T, kind, params)

    def apply(self, psi: StateVector) -> StateVector:
        if psi.n != self.n:
            raise DimensionMismatch(f"state of dimension {psi.n} for operator of dimension {self.n}")
        return StateVector(self.matrix @ psi.coords, psi.discrete)

    def __matmul__(self, other: "Operator") -> "Operator":
        _same_dim(self, other)
        return Operator(self.matrix @ other.matrix)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": _plain(self.params), "matrix": encode_matrix(self.matrix)}


def _plain(params: Mapping) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, np.ndarray):
            v = v.tolist()
        if isinstance(v, (tuple, list)):
            v = [_plain_scalar(x) for x in v]
        out[k] = _plain_scalar(v)
    return out


def _plain_scalar(x):
    if isinstance(x, (tuple, list, frozenset, set)):
        return [_plain_scalar(y) for y in (sorted(x) if isinstance(x, (set, frozenset)) else x)]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _same_dim(a: Operator, b: Operator) -> None:
    if a.n != b.n:
        raise DimensionMismatch(f"operators of dimension {a.n} and {b.n}")


def index_set(J: Iterable[int], n: int) -> tuple[int, ...]:
    """Validate and normalise an index subset of ``{0..n-1}``."""
    out = tuple(sorted(set(int(j) for j in J)))
    if out and (out[0] < 0 or out[-1] >= n):
        raise IndexOutOfRange(f"index set {out} not contained in 0..{n - 1}")
    return out


def _projector(n: int, J: Sequence[int]) -> np.ndarray:
    p = np.zeros((n, n), dtype=complex)
    idx = np.asarray(J, dtype=int)
    p[idx, idx] = 1.0
    return p


# ---------------------------------------------------------------------------
# Primary and discrete observables
# ---------------------------------------------------------------------------


def primary(chart: HilbertChart, J: Iterable[int]) -> Operator:
    """Orthogonal projection onto the subspace spanned by ``eps~_j``, ``j in J``."""
    J = index_set(J, chart.n)
    return Operator(_projector(chart.n, J), "primary", {"J": J})


def coordinate_projector(chart: HilbertChart, J: Iterable[int]) -> Operator:
    """``psi -> sum_{j in J} <phi_j, psi> eps_j`` in orthonormal coordinates.

    Entry ``(l, k)`` is ``sum_{j in J} (L^{-1})_{lj} (L)_{jk}``; not Hermitian in
    general (see module docstring).
    """
    J = index_set(J, chart.n)
    idx = list(J)
    m = chart.basis[:, idx] @ chart.dual_basis[:, idx].conj().T
    return Operator(m, "general", {"J": J, "form": "coordinate"})


def recover_index_set(op: Operator | np.ndarray, atol: float = OPERATOR_ATOL) -> tuple[int, ...]:
    """Index set ``J`` with ``op == primary(J)``.

    Raises ``ValueError`` if the operator is not a Hermitian idempotent of that
    form, i.e. its range is not spanned by orthonormal basis vectors.
    """
    m = op.matrix if isinstance(op, Operator) else np.asarray(op)
    if max_abs(m - m.conj().T) > atol or max_abs(m @ m - m) > atol:
        raise ValueError("operator is not a Hermitian idempotent")
    n = m.shape[0]
    J = tuple(j for j in range(n) if abs(m[j, j] - 1.0) <= atol)
    if max_abs(m - _projector(n, J)) > atol:
        raise ValueError("projection range is not spanned by orthonormal basis vectors")
    return J


def discrete_primary(red: ReductionMatrix) -> Operator:
    """Projection on ``C^d`` onto the span of the reduced-value vectors.

    Row ``j`` of ``A`` gives ``rho_j = sum_k A[j, k] upsilon_k``; each is scaled to
    unit length, so the result is ``A^T diag(1/|row_j|) A``. For a reduction onto
    a sub-product of variables this equals ``(s/d) A^T A``. The unnormalised
    ``A^T A`` is kept in ``params["gram_product"]``.
    """
    A = np.asarray(red.A, dtype=float)
    counts = A.sum(axis=1)
    m = A.T @ (A / counts[:, None])
    return Operator(m, "discrete", {
        "retained": red.retained,
        "s": red.s,
        "d": red.d,
        "gram_product": (A.T @ A).astype(int).tolist(),
    })


# ---------------------------------------------------------------------------
# Algebra generated by the one-index projections
# ---------------------------------------------------------------------------


def algebra_element(chart: HilbertChart, u: Sequence[complex]) -> Operator:
    """``u[0] Id + sum_i u[i+1] Y_i`` with ``Y_i`` the projection onto ``eps~_i``.

    Slot 0 multiplies the identity; slots ``1..n`` weight the basis projections.
    """
    u = np.asarray(u, dtype=complex).ravel()
    if u.shape != (chart.n + 1,):
        raise DimensionMismatch(f"expected {chart.n + 1} coefficients (identity slot first), got {u.shape[0]}")
    if not np.all(np.isfinite(u)):
        raise ValueError("algebra coefficients must be finite")
    m = u[0] * np.eye(chart.n, dtype=complex) + np.diag(u[1:])
    return Operator(m, "algebra", {"u": tuple(u)})


def algebra_eigenvalues(op: Operator) -> np.ndarray:
    """Eigenvalue on each ``eps~_i`` of an algebra element: ``u[0] + u[i+1]``."""
    u = np.asarray(op.params["u"])
    return u[0] + u[1:]


def state_functional(chart: HilbertChart, psi: StateVector, Y: Operator) -> complex:
    """``<Y psi, psi>`` (inner product conjugate-linear in its first slot)."""
    if psi.n != chart.n or Y.n != chart.n:
        raise DimensionMismatch("state, operator and chart dimensions differ")
    return complex(np.vdot(Y.matrix @ psi.coords, psi.coords))


# ---------------------------------------------------------------------------
# Secondary observables and spectral measures
# ---------------------------------------------------------------------------


def _disjoint_sets(sets: Sequence[Iterable[int]], n: int) -> list[tuple[int, ...]]:
    out = [index_set(s, n) for s in sets]
    seen: set[int] = set()
    for s in out:
        if seen & set(s):
            raise OverlappingSets(f"index sets overlap on {sorted(seen & set(s))}")
        seen |= set(s)
    return out


def secondary(chart: HilbertChart, eigenvalues: Sequence[float], sets: Sequence[Iterable[int]]) -> Operator:
    """``sum_n lambda_n Y_{J_n}`` over pairwise disjoint index sets."""
    if len(eigenvalues) != len(sets):
        raise DimensionMismatch(f"{len(eigenvalues)} eigenvalues for {len(sets)} index sets")
    Js = _disjoint_sets(sets, chart.n)
    m = np.zeros((chart.n, chart.n), dtype=complex)
    for lam, J in zip(eigenvalues, Js):
        m += lam * _projector(chart.n, J)
    lams = tuple(complex(x) if np.iscomplexobj(x) and np.imag(x) != 0 else float(np.real(x)) for x in eigenvalues)
    return Operator(m, "secondary", {"eigenvalues": lams, "sets": tuple(Js)})


@dataclass(frozen=True)
class SpectralMeasureMap:
    """Labelled partition ``{label: index set}`` of ``{0..n-1}``."""

    cells: Mapping[Hashable, frozenset]

    @classmethod
    def from_sets(cls, cells: Mapping[Hashable, Iterable[int]]) -> "SpectralMeasureMap":
        return cls({k: frozenset(int(j) for j in v) for k, v in cells.items()})

    def validate(self, n: int) -> None:
        seen: set[int] = set()
        for label, cell in self.cells.items():
            index_set(cell, n)
            if seen & cell:
                raise OverlappingSets(f"cell {label!r} overlaps earlier cells on {sorted(seen & cell)}")
            seen |= cell
        missing = set(range(n)) - seen
        if missing:
            raise IncompletePartition(f"indices {sorted(missing)} belong to no cell")


def spectral_measure(chart: HilbertChart, partition: SpectralMeasureMap) -> dict[Hashable, Operator]:
    """The projection-valued family ``P(s) = Y_{chi(s)}``."""
    partition.validate(chart.n)
    return {label: primary(chart, cell) for label, cell in partition.cells.items()}


def spectral_integral(chart: HilbertChart, f: Mapping[Hashable, float], partition: SpectralMeasureMap) -> Operator:
    """``sum_s f(s) P(s)`` for a bounded function on the partition labels."""
    measure = spectral_measure(chart, partition)
    if set(f) != set(measure):
        raise ValueError("f must assign a value to every partition label")
    m = np.zeros((chart.n, chart.n), dtype=complex)
    for label, P in measure.items():
        m += f[label] * P.matrix
    return Operator(m, "general", {"integral_over": sorted(map(str, measure))})


def compose_with_primary(Y_J: Operator, phi: Operator) -> Operator:
    """``Y_J o phi = sum_n lambda_n Y_{J_n & J}`` for a secondary ``phi``."""
    _same_dim(Y_J, phi)
    if Y_J.kind != "primary" or phi.kind != "secondary":
        raise ValueError("compose_with_primary expects a primary and a secondary observable")
    J = set(Y_J.params["J"])
    lams = phi.params["eigenvalues"]
    sets = [tuple(sorted(set(s) & J)) for s in phi.params["sets"]]
    m = np.zeros((phi.n, phi.n), dtype=complex)
    for lam, s in zip(lams, sets):
        m += lam * _projector(phi.n, s)
    return Operator(m, "secondary", {"eigenvalues": tuple(lams), "sets": tuple(sets)})


def commutation_defect(op1: Operator, op2: Operator) -> float:
    """``max |[op1, op2]_{ij}|``."""
    _same_dim(op1, op2)
    return max_abs(op1.matrix @ op2.matrix - op2.matrix @ op1.matrix)
