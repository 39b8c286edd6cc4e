from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hilbertmodel import model
from hilbertmodel.errors import DimensionMismatch, EmptySubset, RankDeficient, SchemaError

from conftest import seeds

WORKED_A = [[1, 0, 0, 1, 0, 0], [0, 1, 0, 0, 1, 0], [0, 0, 1, 0, 0, 1]]


# --- parse_model_spec -------------------------------------------------------


def test_parse_two_discrete_variables():
    spec = model.parse_model_spec(json.dumps(
        {"discrete": [{"name": "D1", "cardinality": 2}, {"name": "D2", "cardinality": 3}]}))
    assert spec.cardinalities == [2, 3]
    assert spec.dimension == 0


def test_parse_minimal_continuous():
    spec = model.parse_model_spec({"continuous": [{"name": "x", "basis_size": 4}]})
    assert spec.dimension == 4 and spec.samples == ()


@pytest.mark.parametrize("doc", [
    {},
    {"continuous": [], "discrete": []},
    {"continuous": [{"name": "x"}]},
    {"continuous": [{"name": "x", "basis_size": "4"}]},
    {"continuous": [{"name": "x", "basis_size": 2}, {"name": "x", "basis_size": 1}]},
    {"continuous": [{"name": "x", "basis_size": 2}], "samples": [{"var": "y", "args": [1], "values": [1]}]},
    {"continuous": [{"name": "x", "basis_size": 2}], "samples": [{"var": "x", "args": [1, 2], "values": [1]}]},
])
def test_parse_schema_errors(doc):
    with pytest.raises(SchemaError):
        model.parse_model_spec(doc)


def test_parse_invalid_json_is_schema_error():
    with pytest.raises(SchemaError):
        model.parse_model_spec("{not json")


@pytest.mark.parametrize("doc", [
    {"discrete": [{"name": "D", "cardinality": 1}]},
    {"continuous": [{"name": "x", "basis_size": 0}]},
    {"continuous": [{"name": "x", "basis_size": 2}], "samples": [{"var": "x", "args": [1, 1], "values": [1, 2]}]},
])
def test_parse_value_errors(doc):
    with pytest.raises(ValueError):
        model.parse_model_spec(doc)


def test_parse_complex_values_and_permutation_is_zero_based():
    spec = model.parse_model_spec({
        "continuous": [{"name": "x", "basis_size": 2}],
        "discrete": [{"name": "D", "cardinality": 3}],
        "samples": [{"var": "x", "args": [0.0, 1.0], "values": [[1, 2], 3]}],
        "permutation": [2, 1, 3],
    })
    assert spec.samples[0].values.tolist() == [1 + 2j, 3 + 0j]
    assert spec.permutation == (1, 0, 2)


def test_parse_per_variable_gram_shape_checked():
    with pytest.raises(DimensionMismatch):
        model.parse_model_spec({"continuous": [{"name": "x", "basis_size": 2, "gram": [[1]]}]})


# --- flatten_discrete -------------------------------------------------------


def test_flatten_matches_worked_listing():
    code = model.flatten_discrete([2, 3])
    assert code.d == 6
    # (1,1)->1, (1,2)->2, (1,3)->3, (2,1)->4, (2,2)->5, (2,3)->6 in 1-based terms
    listing = [code.decode(i) for i in range(6)]
    assert listing == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]


def test_flatten_single_state():
    assert model.flatten_discrete([1]).d == 1


def test_flatten_round_trip_exhaustive():
    code = model.flatten_discrete([3, 2, 2])
    assert code.d == 12
    for t in itertools.product(range(3), range(2), range(2)):
        assert code.decode(code.encode(t)) == t
    assert sorted(code.encode(t) for t in itertools.product(range(3), range(2), range(2))) == list(range(12))


@given(st.lists(st.integers(1, 6), min_size=1, max_size=5))
def test_flatten_bijection(cards):
    code = model.flatten_discrete(cards)
    assert code.d == int(np.prod(cards))
    flat = [code.encode(t) for t in code.tuples()]
    assert flat == list(range(code.d))


def test_flatten_overflow():
    with pytest.raises(OverflowError):
        model.flatten_discrete([2**40, 2**40])


# --- reduction_matrix -------------------------------------------------------


def test_reduction_worked_example():
    red = model.reduction_matrix(model.flatten_discrete([2, 3]), [1])
    assert red.A.tolist() == WORKED_A
    assert (red.s, red.d) == (3, 6)


def test_reduction_retain_all_is_identity():
    red = model.reduction_matrix(model.flatten_discrete([2, 3]), [0, 1])
    assert np.array_equal(red.A, np.eye(6, dtype=int))


def test_reduction_two_binary_retain_first():
    red = model.reduction_matrix(model.flatten_discrete([2, 2]), [0])
    A = red.A
    # States (0,0),(0,1) reduce to 0 and (1,0),(1,1) to 1.
    assert A.tolist() == [[1, 1, 0, 0], [0, 0, 1, 1]]
    assert np.array_equal(A @ A.T, 2 * np.eye(2))
    assert np.array_equal(A.T @ A, np.kron(np.eye(2), np.ones((2, 2))))


def test_reduction_empty_subset():
    with pytest.raises(EmptySubset):
        model.reduction_matrix(model.flatten_discrete([2, 3]), [])


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.data())
def test_reduction_invariants(cards, data):
    code = model.flatten_discrete(cards)
    keep = data.draw(st.sets(st.integers(0, len(cards) - 1), min_size=1))
    red = model.reduction_matrix(code, sorted(keep))
    A = red.A
    assert np.all(A.sum(axis=0) == 1)
    assert np.all(A.sum(axis=1) == red.d // red.s)
    assert np.array_equal(A @ A.T, (red.d // red.s) * np.eye(red.s, dtype=int))
    assert np.linalg.matrix_rank(A) == red.s


@given(st.lists(st.integers(1, 3), min_size=2, max_size=4), st.data())
def test_reduction_composes(cards, data):
    code = model.flatten_discrete(cards)
    J1 = sorted(data.draw(st.sets(st.integers(0, len(cards) - 1), min_size=1)))
    J2 = sorted(data.draw(st.sets(st.sampled_from(J1), min_size=1)))
    first = model.reduction_matrix(code, J1)
    second = model.reduction_matrix(first.reduced_code, [J1.index(k) for k in J2])
    direct = model.reduction_matrix(code, J2)
    assert np.array_equal(second.A @ first.A, direct.A)


# --- estimate_components ----------------------------------------------------


def test_estimate_identity_design():
    y = np.array([1.0, -2.0, 3.5])
    x, r = model.estimate_components(np.eye(3), y)
    np.testing.assert_allclose(x, y, atol=1e-15)
    assert r <= 1e-15


def test_estimate_normal_equations_oracle(rng):
    B = rng.standard_normal((8, 3))
    x0 = rng.standard_normal(3)
    y = B @ x0
    x, r = model.estimate_components(B, y)
    G = B.T @ B
    # Explicit 3x3 inverse by cofactors.
    cof = np.array([[np.linalg.det(np.delete(np.delete(G, i, 0), j, 1)) * (-1) ** (i + j)
                     for j in range(3)] for i in range(3)])
    x_oracle = (cof.T / np.linalg.det(G)) @ (B.T @ y)
    np.testing.assert_allclose(x, x_oracle, atol=1e-8)
    np.testing.assert_allclose(x, x0, atol=1e-8)
    assert r <= 1e-10 * np.linalg.norm(y)


@given(seeds, st.integers(1, 6), st.integers(0, 6))
def test_estimate_residual_orthogonal(seed, n, extra):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n + extra, n)) + 1j * rng.standard_normal((n + extra, n))
    y = rng.standard_normal(n + extra) + 1j * rng.standard_normal(n + extra)
    x, r = model.estimate_components(B, y)
    resid = B @ x - y
    assert np.max(np.abs(B.conj().T @ resid)) <= 1e-8 * np.linalg.norm(y)
    assert abs(np.linalg.norm(resid) - r) <= 1e-12 * max(1.0, r)


def test_estimate_rank_deficient():
    B = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficient):
        model.estimate_components(B, np.ones(3))


def test_assign_samples_recovers_polynomial():
    t = [0.0, 0.5, 1.0, 1.5, 2.0]
    spec = model.parse_model_spec({
        "continuous": [{"name": "x", "basis_size": 3}],
        "samples": [{"var": "x", "args": t, "values": [1 + 2 * s + 3 * s * s for s in t]}],
    })
    x, r = model.assign_samples(spec)["x"]
    np.testing.assert_allclose(x, [1, 2, 3], atol=1e-10)
    assert r <= 1e-10
