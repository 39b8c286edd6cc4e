from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from hypothesis import given

from hilbertmodel import gauge, hilbert, model, observables, probability
from hilbertmodel.errors import DimensionMismatch, InsufficientSamples, NotBijection, NotKUnitary
from hilbertmodel.linalg import expm, max_abs, random_unitary

from conftest import random_hermitian, random_pd, seeds, unit

K2 = np.array([[2.0, 1.0], [1.0, 2.0]])


def _skew(n, rng):
    return 1j * random_hermitian(n, rng)


# --- lift_gauge ---------------------------------------------------------------


def test_identity_lifts_to_identity(rng):
    c = hilbert.build_chart(random_pd(4, rng))
    g = gauge.lift_gauge(c, np.eye(4))
    np.testing.assert_allclose(g.U_hat, np.eye(4), atol=1e-12)


def test_orthonormal_chart_lift_is_the_map(rng):
    U = random_unitary(3, rng)
    g = gauge.lift_gauge(hilbert.build_chart(np.eye(3)), U)
    np.testing.assert_allclose(g.U_hat, U, atol=1e-14)


def test_components_transform_with_the_coefficient_map(rng):
    c = hilbert.build_chart(K2)
    U = gauge.k_unitary_from_unitary(c, random_unitary(2, rng))
    # Built independently: conjugate the unitary by the Cholesky factor.
    Ch = np.linalg.cholesky(K2).conj().T
    V = Ch @ U @ np.linalg.inv(Ch)
    assert max_abs(V.conj().T @ V - np.eye(2)) <= 1e-12
    g = gauge.lift_gauge(c, U)
    for _ in range(5):
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        moved = g.apply(hilbert.lift(c, x))
        np.testing.assert_allclose(hilbert.components(c, moved), U @ x, atol=1e-10)
        # Second path: apply V to the orthonormal coordinates and read them back.
        np.testing.assert_allclose(np.linalg.solve(Ch, V @ (Ch @ x)), U @ x, atol=1e-10)


def test_scalar_rescaling_rejected():
    c = hilbert.build_chart(K2)
    with pytest.raises(NotKUnitary):
        gauge.lift_gauge(c, 2 * np.eye(2))
    # Unit-modulus rescalings are admissible.
    g = gauge.lift_gauge(c, -np.eye(2))
    np.testing.assert_allclose(g.U_hat, -np.eye(2), atol=1e-14)
    gauge.lift_gauge(c, np.exp(0.3j) * np.eye(2))


def test_lift_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        gauge.lift_gauge(hilbert.build_chart(K2), np.eye(3))


@given(seeds)
def test_lift_is_unitary_and_inverse_restores(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    c = hilbert.build_chart(random_pd(n, rng))
    g = gauge.lift_gauge(c, gauge.k_unitary_from_unitary(c, random_unitary(n, rng)))
    assert g.unitarity_defect() <= 1e-10
    Y = observables.primary(c, [0])
    back = gauge.transform_operator(g.inverse(), gauge.transform_operator(g, Y))
    assert max_abs(back.matrix - Y.matrix) <= 1e-10


# --- transform_operator ---------------------------------------------------------


def test_transform_identity_leaves_operator(rng):
    c = hilbert.build_chart(random_pd(3, rng))
    Y = observables.Operator(random_hermitian(3, rng))
    out = gauge.transform_operator(gauge.lift_gauge(c, np.eye(3)), Y)
    np.testing.assert_allclose(out.matrix, Y.matrix, atol=1e-12)


@given(seeds)
def test_spectrum_and_measured_values_invariant(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    c = hilbert.build_chart(random_pd(n, rng))
    g = gauge.lift_gauge(c, gauge.k_unitary_from_unitary(c, random_unitary(n, rng)))
    Y = observables.Operator(random_hermitian(n, rng))
    Yp = gauge.transform_operator(g, Y)
    np.testing.assert_allclose(np.linalg.eigvalsh(Yp.matrix), np.linalg.eigvalsh(Y.matrix), atol=1e-9)
    assert max_abs(Yp.matrix - Yp.matrix.conj().T) <= 1e-10
    psi = hilbert.StateVector(unit(rng.standard_normal(n) + 1j * rng.standard_normal(n)))
    moved = g.apply(psi)
    assert abs(observables.state_functional(c, moved, Yp) - observables.state_functional(c, psi, Y)) <= 1e-10


def test_probability_invariance(rng):
    n = 5
    c = hilbert.build_chart(random_pd(n, rng))
    g = gauge.lift_gauge(c, gauge.k_unitary_from_unitary(c, random_unitary(n, rng)))
    psi = hilbert.StateVector(unit(rng.standard_normal(n) + 1j * rng.standard_normal(n)))
    J = [0, 3]
    before = probability.subspace_prob(c, psi, J)
    P = gauge.transform_operator(g, observables.primary(c, J)).matrix
    v = P @ g.apply(psi).coords
    assert abs(float(np.vdot(v, v).real) - before) <= 1e-10


def test_transform_dimension_mismatch():
    g = gauge.lift_gauge(hilbert.build_chart(K2), np.eye(2))
    with pytest.raises(DimensionMismatch):
        gauge.transform_operator(g, observables.Operator(np.eye(3)))


# --- discrete_permutation ---------------------------------------------------------


def test_identity_permutation():
    g = gauge.discrete_permutation(range(5))
    np.testing.assert_array_equal(g.U_hat, np.eye(5))


def test_permutation_matches_column_permuted_reduction():
    red = model.reduction_matrix(model.flatten_discrete([2, 3]), [1])
    sigma = [3, 1, 2, 0, 4, 5]
    g = gauge.discrete_permutation(sigma)
    A2 = np.zeros_like(red.A)
    for i, s in enumerate(sigma):
        A2[:, s] = red.A[:, i]
    D = observables.discrete_primary(red)
    D2 = observables.discrete_primary(dataclasses.replace(red, A=A2))
    np.testing.assert_allclose(gauge.transform_operator(g, D).matrix, D2.matrix, atol=1e-15)
    # 1 and 4 share a reduced value, so this relabeling is a symmetry of the reduction.
    assert gauge.symmetry_check(D, g) <= 1e-15
    g2 = gauge.discrete_permutation([1, 0, 2, 3, 4, 5])
    assert gauge.symmetry_check(D, g2) > 0.1


def test_permutation_composed_with_inverse(rng):
    sigma = rng.permutation(7)
    inv = np.argsort(sigma)
    P, Q = gauge.discrete_permutation(sigma).U_hat, gauge.discrete_permutation(inv).U_hat
    np.testing.assert_array_equal(Q @ P, np.eye(7))
    np.testing.assert_array_equal(gauge.discrete_permutation(sigma).inverse().U_hat, Q)


@pytest.mark.parametrize("sigma", [[0, 0, 1], [0, 1, 3], [], [0.0, 1.0]])
def test_permutation_must_be_bijection(sigma):
    with pytest.raises(NotBijection):
        gauge.discrete_permutation(sigma)


# --- one_param_group / generator_from_group ---------------------------------------


def test_group_at_zero_is_identity(rng):
    g = gauge.one_param_group(gauge.Generator(_skew(4, rng)), 0.0)
    np.testing.assert_array_equal(g.U_hat, np.eye(4))


def test_rotation_quarter_turn():
    g = gauge.one_param_group(gauge.Generator(np.array([[0.0, -1.0], [1.0, 0.0]])), np.pi / 2)
    np.testing.assert_allclose(g.U_hat, [[0, -1], [1, 0]], atol=1e-12)


def test_group_law_twenty_pairs(rng):
    gen = gauge.Generator(_skew(6, rng))
    assert gen.skew
    for _ in range(20):
        a, b = rng.uniform(-10, 10, 2)
        lhs = gauge.one_param_group(gen, a + b).U_hat
        rhs = gauge.one_param_group(gen, a).U_hat @ gauge.one_param_group(gen, b).U_hat
        assert max_abs(lhs - rhs) <= 1e-9
        assert gauge.one_param_group(gen, a).unitarity_defect() <= 1e-10


def test_group_through_chart_is_k_unitary(rng):
    c = hilbert.build_chart(random_pd(4, rng))
    g = gauge.one_param_group(gauge.Generator(_skew(4, rng)), 0.7, c)
    assert gauge.k_unitarity_defect(c.K, g.U) <= 1e-10
    np.testing.assert_allclose(gauge.lift_gauge(c, g.U).U_hat, g.U_hat, atol=1e-10)


def test_generator_recovery_central(rng):
    S = _skew(5, rng)
    h = 1e-4
    samples = [(t, expm(t * S)) for t in (-h, h, 0.5, 1.0)]
    gen = gauge.generator_from_group(samples)
    assert max_abs(gen.S - S) / max_abs(S) <= 1e-6
    assert gen.reconstruction_error <= 1e-6


def test_generator_recovery_forward_only(rng):
    S = _skew(3, rng)
    gen = gauge.generator_from_group([(1e-6, expm(1e-6 * S))])
    assert max_abs(gen.S - S) / max_abs(S) <= 1e-5


def test_constant_family_has_zero_generator():
    gen = gauge.generator_from_group([(t, np.eye(3)) for t in (-1e-4, 1e-4, 1.0)])
    assert not np.any(gen.S)
    assert gen.reconstruction_error == 0.0


def test_non_group_samples_report_error(rng):
    samples = [(t, random_unitary(4, rng)) for t in (-1e-4, 1e-4, 0.3)]
    gen = gauge.generator_from_group(samples)
    assert gen.reconstruction_error > 0.1


@pytest.mark.parametrize("thetas", [[], [0.0], [0.5, 1.0]])
def test_generator_needs_small_step(thetas):
    with pytest.raises(InsufficientSamples):
        gauge.generator_from_group([(t, np.eye(2)) for t in thetas])


def test_one_parameter_derivative_matches_commutator(rng):
    n = 4
    S = _skew(n, rng)
    gen = gauge.Generator(S)
    Y = observables.Operator(random_hermitian(n, rng))
    h = 1e-4
    Yp = gauge.transform_operator(gauge.one_param_group(gen, h), Y).matrix
    Ym = gauge.transform_operator(gauge.one_param_group(gen, -h), Y).matrix
    fd = (Yp - Ym) / (2 * h)
    S_hat = gen.S_hat
    assert max_abs(fd - 1j * (Y.matrix @ S_hat - S_hat @ Y.matrix)) <= 1e-6


# --- symmetry_check ----------------------------------------------------------


def test_identity_map_is_a_symmetry_of_everything(rng):
    c = hilbert.build_chart(random_pd(3, rng))
    g = gauge.lift_gauge(c, np.eye(3))
    assert gauge.symmetry_check(observables.Operator(random_hermitian(3, rng)), g) <= 1e-12


def test_block_unitary_preserves_primary(rng):
    n, J = 5, [0, 1]
    c = hilbert.build_chart(random_pd(n, rng))
    V = np.zeros((n, n), dtype=complex)
    V[:2, :2] = random_unitary(2, rng)
    V[2:, 2:] = random_unitary(3, rng)
    g = gauge.lift_gauge(c, gauge.k_unitary_from_unitary(c, V))
    assert gauge.symmetry_check(observables.primary(c, J), g) <= 1e-12
    # A map mixing J with its complement is not a symmetry.
    g2 = gauge.lift_gauge(c, gauge.k_unitary_from_unitary(c, random_unitary(n, rng)))
    assert gauge.symmetry_check(observables.primary(c, J), g2) > 1e-3


def test_fixed_vector_lies_in_generator_kernel(rng):
    n = 4
    Q = random_unitary(n, rng)
    S = Q @ np.diag([0.0, 1j, -2j, 0.5j]) @ Q.conj().T
    gen = gauge.Generator(S)
    g = gauge.one_param_group(gen, 0.9)
    w, V = np.linalg.eig(g.U_hat)
    k = int(np.argmin(np.abs(w - 1)))
    psi = hilbert.StateVector(V[:, k] / np.linalg.norm(V[:, k]))
    assert gauge.state_symmetry_defect(g, psi) <= 1e-10
    assert np.linalg.norm(gen.S_hat @ psi.coords) <= 1e-8
