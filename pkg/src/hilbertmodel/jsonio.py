"""JSON encodings for complex arrays: every complex number is a ``[re, im]`` pair."""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import SchemaError


def _scalar(v: Any, where: str) -> complex:
    if isinstance(v, bool):
        raise SchemaError(f"{where}: expected a number or [re, im], got a boolean")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in v
    ):
        return complex(v[0], v[1])
    raise SchemaError(f"{where}: expected a number or [re, im], got {v!r}")


def decode_vector(data: Any, where: str = "vector") -> np.ndarray:
    if not isinstance(data, list):
        raise SchemaError(f"{where}: expected an array")
    return np.array([_scalar(v, f"{where}[{i}]") for i, v in enumerate(data)], dtype=complex)


def decode_matrix(data: Any, where: str = "matrix") -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise SchemaError(f"{where}: expected a non-empty array of rows")
    rows = [decode_vector(r, f"{where}[{i}]") for i, r in enumerate(data)]
    if len({len(r) for r in rows}) != 1:
        raise SchemaError(f"{where}: rows have different lengths")
    return np.vstack(rows)


def encode_scalar(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(v) -> list[list[float]]:
    return [encode_scalar(z) for z in np.asarray(v).ravel()]


def encode_matrix(m) -> list[list[list[float]]]:
    return [encode_vector(row) for row in np.asarray(m)]


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (set, frozenset)):
            return sorted(o)
        return super().default(o)


def dumps(obj: Any) -> str:
    # json writes floats with repr(), which round-trips doubles exactly.
    return json.dumps(obj, cls=_Encoder, indent=2)
