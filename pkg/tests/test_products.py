from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hilbertmodel import hilbert, observables, products
from hilbertmodel.errors import DimensionMismatch

from conftest import random_pd, seeds, unit

K2 = np.array([[2.0, 1.0], [1.0, 2.0]])


def test_single_block_is_the_chart():
    c = hilbert.build_chart(K2)
    assert products.hilbert_sum([c]).chart is c


def test_two_block_assembly():
    sc = products.hilbert_sum([hilbert.build_chart(np.eye(2)), hilbert.build_chart(K2)])
    oracle = np.zeros((4, 4))
    oracle[:2, :2] = np.eye(2)
    oracle[2:, 2:] = K2
    np.testing.assert_array_equal(sc.chart.K, oracle)
    np.testing.assert_array_equal(sc.projection(0).matrix + sc.projection(1).matrix, np.eye(4))


def test_cross_block_orthogonality():
    c1, c2 = hilbert.build_chart(K2), hilbert.build_chart(random_pd(3, np.random.default_rng(4)))
    sc = products.hilbert_sum([c1, c2])
    for i in range(2):
        for j in range(3):
            a = sc.embed(0, hilbert.basis_state(c1, i))
            b = sc.embed(1, hilbert.basis_state(c2, j))
            assert abs(a.inner(b)) <= 1e-12
            # Embedded basis states are the combined chart's own basis states.
            np.testing.assert_allclose(b.coords, hilbert.basis_state(sc.chart, 2 + j).coords, atol=1e-12)


def test_sum_decomposition_is_unique(rng):
    charts = [hilbert.build_chart(random_pd(k, rng)) for k in (2, 3, 1)]
    sc = products.hilbert_sum(charts)
    psi = hilbert.StateVector(rng.standard_normal(6) + 1j * rng.standard_normal(6))
    parts = sc.decompose(psi)
    total = sum(sc.embed(k, p).coords for k, p in enumerate(parts))
    np.testing.assert_array_equal(total, psi.coords)
    for k in range(3):
        np.testing.assert_array_equal(sc.projection(k).matrix @ psi.coords, sc.embed(k, parts[k]).coords)
    P = [sc.projection(k).matrix for k in range(3)]
    for k in range(3):
        assert np.array_equal(P[k] @ P[k], P[k])
        for l in range(3):
            if l != k:
                assert not np.any(P[k] @ P[l])


def test_tensor_identity():
    tc = products.tensor_chart(hilbert.build_chart(np.eye(2)), hilbert.build_chart(np.eye(3)))
    np.testing.assert_array_equal(tc.chart.K, np.eye(6))


def test_tensor_kernel_quadruple_loop_oracle():
    K1, K2b = K2, np.array([[1.0, 0.5], [0.5, 1.0]])
    tc = products.tensor_chart(hilbert.build_chart(K1), hilbert.build_chart(K2b))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    assert abs(tc.chart.K[i * 2 + k, j * 2 + l] - K1[i, j] * K2b[k, l]) <= 1e-12
    expected = np.sort(np.outer(np.linalg.eigvalsh(K1), np.linalg.eigvalsh(K2b)).ravel())
    np.testing.assert_allclose(np.linalg.eigvalsh(tc.chart.K), expected, atol=1e-10)


def test_tensor_zero_and_unit_states(rng):
    c1, c2 = hilbert.build_chart(random_pd(3, rng)), hilbert.build_chart(random_pd(2, rng))
    tc = products.tensor_chart(c1, c2)
    a = hilbert.StateVector(unit(rng.standard_normal(3)))
    b = hilbert.StateVector(unit(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
    assert not np.any(products.tensor_state(tc, a, hilbert.StateVector(np.zeros(2))).coords)
    assert products.tensor_state(tc, a, b).norm == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        products.tensor_state(tc, b, a)


def test_tensor_inner_product_factorization_fifty_pairs(rng):
    c1, c2 = hilbert.build_chart(random_pd(4, rng)), hilbert.build_chart(random_pd(3, rng))
    tc = products.tensor_chart(c1, c2)
    for _ in range(50):
        s = [hilbert.StateVector(rng.standard_normal(n) + 1j * rng.standard_normal(n)) for n in (4, 3, 4, 3)]
        lhs = products.tensor_state(tc, s[0], s[1]).inner(products.tensor_state(tc, s[2], s[3]))
        assert abs(lhs - s[0].inner(s[2]) * s[1].inner(s[3])) <= 1e-10


@given(seeds, st.integers(1, 5), st.integers(1, 5))
def test_tensor_state_matches_chart_lift(seed, n1, n2):
    rng = np.random.default_rng(seed)
    c1, c2 = hilbert.build_chart(random_pd(n1, rng)), hilbert.build_chart(random_pd(n2, rng))
    tc = products.tensor_chart(c1, c2)
    x1, x2 = rng.standard_normal(n1), rng.standard_normal(n2)
    via_chart = hilbert.lift(tc.chart, np.kron(x1, x2)).coords
    via_factors = products.tensor_state(tc, hilbert.lift(c1, x1), hilbert.lift(c2, x2)).coords
    assert np.max(np.abs(via_chart - via_factors)) <= 1e-10 * max(1.0, np.linalg.norm(via_chart))
    # Bilinear in each factor.
    a, a2 = hilbert.lift(c1, x1), hilbert.lift(c1, rng.standard_normal(n1))
    b = hilbert.lift(c2, x2)
    lhs = products.tensor_state(tc, hilbert.StateVector(2 * a.coords + a2.coords), b).coords
    rhs = 2 * products.tensor_state(tc, a, b).coords + products.tensor_state(tc, a2, b).coords
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.max(np.abs(rhs))))


def test_lifted_factor_observables_commute(rng):
    c1, c2 = hilbert.build_chart(random_pd(3, rng)), hilbert.build_chart(random_pd(2, rng))
    tc = products.tensor_chart(c1, c2)
    Y = tc.lift_first(observables.primary(c1, [0, 2]))
    Z = tc.lift_second(observables.Operator(rng.standard_normal((2, 2))))
    assert observables.commutation_defect(Y, Z) <= 1e-12


def test_tensor_overflow():
    class Huge:
        n = 2**40
        K = None

    with pytest.raises(OverflowError):
        products.tensor_chart(Huge(), Huge())
