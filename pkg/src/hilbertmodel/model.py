"""Measurement models: variables, discrete flattening, reductions and assignation.

Index conventions are 0-based throughout the Python API. Model files and the
command line use 1-based indices, matching the usual mathematical listing; the
conversion happens at the I/O boundary only.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import jsonschema
import numpy as np
import scipy.linalg as sla

from .errors import EmptySubset, RankDeficient, SchemaError, DimensionMismatch
from .jsonio import decode_matrix, decode_vector

# ---------------------------------------------------------------------------
# Model specification
# ---------------------------------------------------------------------------

_NUMBER_OR_PAIR = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "items": _NUMBER_OR_PAIR}}
_KERNEL = {
    "type": "object",
    "required": ["name", "points"],
    "properties": {
        "name": {"enum": ["gaussian", "min", "linear", "polynomial"]},
        "params": {"type": "object"},
        "points": {"type": "array", "minItems": 1},
    },
}
_BASIS = {
    "type": "object",
    "required": ["family"],
    "properties": {"family": {"enum": ["monomial", "fourier"]}, "period": {"type": "number"}},
}

MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "continuous": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "basis_size"],
                "properties": {
                    "name": {"type": "string"},
                    "basis_size": {"type": "integer"},
                    "basis": _BASIS,
                    "gram": _MATRIX,
                    "kernel": _KERNEL,
                },
            },
        },
        "discrete": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "cardinality"],
                "properties": {"name": {"type": "string"}, "cardinality": {"type": "integer"}},
            },
        },
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["var", "args", "values"],
                "properties": {
                    "var": {"type": "string"},
                    "args": {"type": "array"},
                    "values": {"type": "array", "items": _NUMBER_OR_PAIR},
                },
            },
        },
        "gram": _MATRIX,
        "kernel": _KERNEL,
        "gauge": _MATRIX,
        "permutation": {"type": "array", "items": {"type": "integer"}},
    },
}


@dataclass(frozen=True)
class ContinuousVar:
    name: str
    basis_size: int
    basis: dict = field(default_factory=lambda: {"family": "monomial"})
    gram: np.ndarray | None = None
    kernel: dict | None = None


@dataclass(frozen=True)
class DiscreteVar:
    name: str
    cardinality: int


@dataclass(frozen=True)
class Sample:
    var: str
    args: np.ndarray  # shape (m, k): one real argument vector per row
    values: np.ndarray  # shape (m,), complex


@dataclass(frozen=True)
class ModelSpec:
    continuous_vars: tuple[ContinuousVar, ...]
    discrete_vars: tuple[DiscreteVar, ...]
    samples: tuple[Sample, ...] = ()
    gram: np.ndarray | None = None
    kernel: dict | None = None
    gauge: np.ndarray | None = None
    permutation: tuple[int, ...] | None = None  # 0-based image of each index

    @property
    def dimension(self) -> int:
        """Total number of continuous basis elements."""
        return sum(v.basis_size for v in self.continuous_vars)

    @property
    def cardinalities(self) -> list[int]:
        return [v.cardinality for v in self.discrete_vars]

    def variable(self, name: str) -> ContinuousVar:
        for v in self.continuous_vars:
            if v.name == name:
                return v
        raise KeyError(name)

    def block_ranges(self) -> list[range]:
        """Index range of each continuous variable inside the combined chart."""
        out, start = [], 0
        for v in self.continuous_vars:
            out.append(range(start, start + v.basis_size))
            start += v.basis_size
        return out


def _args_array(raw: list, where: str) -> np.ndarray:
    rows = []
    for i, a in enumerate(raw):
        if isinstance(a, (int, float)) and not isinstance(a, bool):
            rows.append([float(a)])
        elif isinstance(a, list) and a and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in a
        ):
            rows.append([float(x) for x in a])
        else:
            raise SchemaError(f"{where}[{i}]: expected a real vector")
    if len({len(r) for r in rows}) > 1:
        raise SchemaError(f"{where}: argument vectors have different lengths")
    return np.array(rows, dtype=float).reshape(len(rows), -1)


def parse_model_spec(text: str | dict) -> ModelSpec:
    """Parse and validate a JSON model document.

    Raises :class:`SchemaError` for structural problems and ``ValueError`` for
    out-of-range values (basis size < 1, cardinality < 2, repeated sample
    arguments).
    """
    if isinstance(text, dict):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None
    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{path}: {exc.message}") from None

    cont_raw = doc.get("continuous", [])
    disc_raw = doc.get("discrete", [])
    if not cont_raw and not disc_raw:
        raise SchemaError("model declares no variables")

    continuous = []
    for i, v in enumerate(cont_raw):
        if v["basis_size"] < 1:
            raise ValueError(f"continuous[{i}] ({v['name']}): basis_size must be >= 1")
        gram = decode_matrix(v["gram"], f"continuous[{i}].gram") if "gram" in v else None
        if gram is not None and gram.shape != (v["basis_size"],) * 2:
            raise DimensionMismatch(f"continuous[{i}].gram must be {v['basis_size']}x{v['basis_size']}")
        continuous.append(
            ContinuousVar(v["name"], v["basis_size"], dict(v.get("basis", {"family": "monomial"})),
                          gram, v.get("kernel"))
        )
    discrete = []
    for i, v in enumerate(disc_raw):
        if v["cardinality"] < 2:
            raise ValueError(f"discrete[{i}] ({v['name']}): cardinality must be >= 2")
        discrete.append(DiscreteVar(v["name"], v["cardinality"]))

    names = [v.name for v in continuous] + [v.name for v in discrete]
    if len(set(names)) != len(names):
        raise SchemaError("variable names must be unique")

    samples = []
    cont_names = {v.name for v in continuous}
    for i, s in enumerate(doc.get("samples", [])):
        if s["var"] not in cont_names:
            raise SchemaError(f"samples[{i}]: unknown continuous variable {s['var']!r}")
        args = _args_array(s["args"], f"samples[{i}].args")
        values = decode_vector(s["values"], f"samples[{i}].values")
        if len(values) != len(args):
            raise SchemaError(f"samples[{i}]: {len(args)} args but {len(values)} values")
        if len(np.unique(args, axis=0)) != len(args):
            raise ValueError(f"samples[{i}]: sample arguments must be distinct")
        samples.append(Sample(s["var"], args, values))

    gram = decode_matrix(doc["gram"], "gram") if "gram" in doc else None
    gauge = decode_matrix(doc["gauge"], "gauge") if "gauge" in doc else None
    perm = None
    if "permutation" in doc:
        perm = tuple(int(p) - 1 for p in doc["permutation"])
    return ModelSpec(tuple(continuous), tuple(discrete), tuple(samples), gram,
                     doc.get("kernel"), gauge, perm)


# ---------------------------------------------------------------------------
# Discrete variables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteCode:
    """Lexicographic bijection between value tuples and flat indices.

    The last variable varies fastest, so for cardinalities ``[2, 3]`` the flat
    order is (0,0), (0,1), (0,2), (1,0), (1,1), (1,2).
    """

    cardinalities: tuple[int, ...]

    @property
    def d(self) -> int:
        return math.prod(self.cardinalities)

    def encode(self, values: Sequence[int]) -> int:
        if len(values) != len(self.cardinalities):
            raise DimensionMismatch(f"expected {len(self.cardinalities)} values, got {len(values)}")
        return int(np.ravel_multi_index(tuple(int(v) for v in values), self.cardinalities))

    def decode(self, index: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(int(index), self.cardinalities))

    def tuples(self) -> np.ndarray:
        """All value tuples in flat order, shape ``(d, len(cardinalities))``."""
        grids = np.indices(self.cardinalities).reshape(len(self.cardinalities), -1)
        return grids.T


def flatten_discrete(cardinalities: Sequence[int]) -> DiscreteCode:
    cards = tuple(int(c) for c in cardinalities)
    if not cards:
        raise EmptySubset("at least one discrete variable is required")
    if any(c < 1 for c in cards):
        raise ValueError("cardinalities must be >= 1")
    if math.prod(cards) > sys.maxsize:
        raise OverflowError(f"product of cardinalities {cards} is not representable")
    return DiscreteCode(cards)


@dataclass(frozen=True)
class ReductionMatrix:
    """0/1 matrix with ``A[j, i] = 1`` iff flat state ``i`` reduces to value ``j``."""

    A: np.ndarray
    retained: tuple[int, ...]
    code: DiscreteCode

    @property
    def s(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def reduced_code(self) -> DiscreteCode:
        return DiscreteCode(tuple(self.code.cardinalities[k] for k in self.retained))


def reduction_matrix(code: DiscreteCode, retained: Sequence[int]) -> ReductionMatrix:
    """Reduction onto the variables at positions ``retained`` (0-based)."""
    keep = tuple(sorted(set(int(k) for k in retained)))
    if not keep:
        raise EmptySubset("retained variable set is empty")
    if keep[0] < 0 or keep[-1] >= len(code.cardinalities):
        raise IndexError(f"retained positions {keep} out of range for {len(code.cardinalities)} variables")
    sub_cards = tuple(code.cardinalities[k] for k in keep)
    tuples = code.tuples()
    rows = np.ravel_multi_index(tuple(tuples[:, k] for k in keep), sub_cards)
    a = np.zeros((math.prod(sub_cards), code.d), dtype=np.int64)
    a[rows, np.arange(code.d)] = 1
    return ReductionMatrix(a, keep, code)


# ---------------------------------------------------------------------------
# Assignation of sampled data to basis coefficients
# ---------------------------------------------------------------------------


def basis_functions(family: str, size: int, period: float = 1.0) -> list[Callable[[np.ndarray], np.ndarray]]:
    """Scalar basis functions of one real argument.

    ``monomial`` gives 1, t, t^2, ...; ``fourier`` gives exp(2 pi i k t / period)
    with k = 0, 1, -1, 2, -2, ...
    """
    if family == "monomial":
        return [lambda t, k=k: np.asarray(t, dtype=float) ** k for k in range(size)]
    if family == "fourier":
        freqs = [0] + [s * m for m in range(1, size) for s in (1, -1)]
        freqs = freqs[:size]
        return [lambda t, k=k: np.exp(2j * np.pi * k * np.asarray(t, dtype=float) / period)
                for k in freqs]
    raise ValueError(f"unknown basis family {family!r}")


def design_matrix(var: ContinuousVar, args: np.ndarray) -> np.ndarray:
    """Evaluate a variable's basis at sample arguments, shape ``(m, basis_size)``."""
    args = np.asarray(args, dtype=float)
    if args.ndim == 2:
        if args.shape[1] != 1:
            raise DimensionMismatch("built-in basis families take scalar arguments")
        args = args[:, 0]
    funcs = basis_functions(var.basis.get("family", "monomial"), var.basis_size,
                            float(var.basis.get("period", 1.0)))
    return np.column_stack([f(args) for f in funcs]).astype(complex)


def estimate_components(B: np.ndarray, y: np.ndarray, rtol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Least-squares coefficients ``x`` minimising ``||B x - y||``, and the residual norm.

    Solved through a reduced QR factorisation. Raises :class:`RankDeficient`
    when a diagonal entry of R falls below ``rtol`` times the largest one.
    """
    B = np.asarray(B)
    y = np.asarray(y)
    if B.ndim != 2 or y.shape != (B.shape[0],):
        raise DimensionMismatch(f"design {B.shape} incompatible with samples {y.shape}")
    m, n = B.shape
    if m < n:
        raise RankDeficient(f"{m} samples cannot determine {n} coefficients")
    q, r = np.linalg.qr(B, mode="reduced")
    diag = np.abs(np.diag(r))
    if n and (diag.max() == 0 or diag.min() <= rtol * diag.max()):
        raise RankDeficient("design matrix does not have full column rank")
    x = sla.solve_triangular(r, q.conj().T @ y, lower=False)
    residual = float(np.linalg.norm(B @ x - y))
    return x, residual


def assign_samples(spec: ModelSpec) -> dict[str, tuple[np.ndarray, float]]:
    """Run :func:`estimate_components` for every sampled continuous variable."""
    out = {}
    for s in spec.samples:
        var = spec.variable(s.var)
        out[s.var] = estimate_components(design_matrix(var, s.args), s.values)
    return out


def model_summary(spec: ModelSpec) -> dict[str, Any]:
    code = flatten_discrete(spec.cardinalities) if spec.discrete_vars else None
    return {
        "continuous": [{"name": v.name, "basis_size": v.basis_size} for v in spec.continuous_vars],
        "discrete": [{"name": v.name, "cardinality": v.cardinality} for v in spec.discrete_vars],
        "dimension": spec.dimension,
        "discrete_states": code.d if code else 0,
        "samples": len(spec.samples),
    }
