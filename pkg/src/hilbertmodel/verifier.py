"""Randomised checker: builds finite instances and runs one invariant suite per proposition.

Each suite returns named checks ``(defect, tolerance)``; a report row keeps the
worst ratio over all trials. Suites draw any extra randomness from generators
seeded by ``(seed, n, suite id)``, so reports are reproducible byte for byte.
"""

from __future__ import annotations

import csv
import io
import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import evolution, gauge, hilbert, observables, probability, products
from .hilbert import HilbertChart, StateVector
from .jsonio import dumps, encode_matrix
from .linalg import max_abs, random_unit_vector, random_unitary
from .model import flatten_discrete, reduction_matrix

DEFAULT_SEEDS = tuple(range(10))
DEFAULT_SIZES = (2, 4, 8, 16)
DUMP_MAX_N = 8
FAULTS = ("skip-hermitize",)


@dataclass(frozen=True)
class Check:
    name: str
    defect: float
    tol: float
    witness: np.ndarray | None = None

    @property
    def ratio(self) -> float:
        return self.defect / self.tol


@dataclass(frozen=True, eq=False)
class Instance:
    seed: int
    n: int
    chart: HilbertChart
    states: tuple[StateVector, ...]
    index_sets: tuple[tuple[int, ...], ...]  # pairwise disjoint, covering 0..n-1
    gauge: gauge.GaugeMap
    hamiltonian: evolution.Hamiltonian

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.n, zlib.crc32(name.encode())])

    def subset(self, rng: np.random.Generator) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(rng.random(self.n) < 0.5))


def generate_instance(seed: int, n: int) -> Instance:
    """Random chart with ``K = M^* M + delta I`` (``delta = 1e-6 ||M||_2^2``) plus states, sets, a gauge and a Hamiltonian."""
    if not 2 <= n <= 64:
        raise ValueError("instance size must lie in 2..64")
    rng = np.random.default_rng([int(seed), int(n)])
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    delta = 1e-6 * np.linalg.norm(M, 2) ** 2
    K = M.conj().T @ M + delta * np.eye(n)
    chart = hilbert.build_chart(hilbert.GramKernel(K, {"seed": int(seed)}))
    states = tuple(StateVector(random_unit_vector(n, rng)) for _ in range(3))
    labels = rng.integers(0, 3, size=n)
    sets = tuple(tuple(int(j) for j in np.flatnonzero(labels == k)) for k in range(3))
    U = gauge.k_unitary_from_unitary(chart, random_unitary(n, rng))
    g = gauge.lift_gauge(chart, U)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = (A + A.conj().T) / 2
    H *= rng.uniform(0.5, 2.0) / np.linalg.norm(H, 2)
    return Instance(int(seed), int(n), chart, states, sets, g, evolution.Hamiltonian(H))


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

Suite = Callable[[Instance, frozenset], list[Check]]
REGISTRY: dict[str, tuple[str, Suite]] = {}


def suite(pid: str, module: str):
    def register(fn: Suite) -> Suite:
        if pid in REGISTRY:
            raise ValueError(f"duplicate proposition id {pid}")
        REGISTRY[pid] = (module, fn)
        return fn
    return register


@suite("linear_isometry", "hilbert")
def _linear_isometry(inst: Instance, faults) -> list[Check]:
    c, rng = inst.chart, inst.rng("linear_isometry")
    x, y = random_unit_vector(c.n, rng), random_unit_vector(c.n, rng)
    ip = hilbert.lift(c, x).inner(hilbert.lift(c, y))
    knorm = np.linalg.norm(c.K, 2)
    psi = inst.states[0]
    rebuilt = c.basis @ hilbert.components(c, psi)
    return [
        Check("orthonormality", hilbert.orthonormality_defect(c), 1e-9, c.K),
        Check("dual_pairing", hilbert.dual_pairing_check(c), 1e-9, c.K),
        Check("isometry", abs(ip - np.vdot(x, c.K @ y)) / knorm, 1e-10),
        Check("round_trip", max_abs(hilbert.components(c, hilbert.lift(c, x)) - x), 1e-9),
        Check("basis_expansion", max_abs(rebuilt - psi.coords), 1e-10),
    ]


@suite("complex_structure", "hilbert")
def _complex_structure(inst: Instance, faults) -> list[Check]:
    m2 = inst.n - inst.n % 2
    cs = hilbert.complexify(m2)
    rng = inst.rng("complex_structure")
    a, b = rng.standard_normal(m2), rng.standard_normal(m2)
    lin = cs.gamma(a, b + 2.0 * a) - (cs.gamma(a, b) + 2.0 * cs.gamma(a, a))
    return [
        Check("J_squared", max_abs(cs.J @ cs.J + np.eye(m2)), 1e-15, cs.J),
        Check("norm", abs(cs.gamma(a, a) - a @ a), 1e-12),
        Check("conjugate_symmetry", abs(cs.gamma(a, b) - np.conj(cs.gamma(b, a))), 1e-12),
        Check("complex_linearity", abs(cs.gamma(a, cs.J @ b) + 1j * cs.gamma(a, b)), 1e-12),
        Check("additivity", abs(lin), 1e-12),
    ]


@suite("hilbert_sum", "products")
def _hilbert_sum(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("hilbert_sum")
    m = 2
    B = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    second = hilbert.build_chart(B.conj().T @ B + np.eye(m))
    sc = products.hilbert_sum([inst.chart, second])
    p1, p2 = sc.projection(0).matrix, sc.projection(1).matrix
    e1 = sc.embed(0, hilbert.basis_state(inst.chart, 0))
    e2 = sc.embed(1, hilbert.basis_state(second, 1))
    K_block = max_abs(sc.chart.K[:inst.n, :inst.n] - inst.chart.K) + max_abs(sc.chart.K[:inst.n, inst.n:])
    return [
        Check("idempotent", max(max_abs(p1 @ p1 - p1), max_abs(p2 @ p2 - p2)), 1e-12),
        Check("orthogonal", max_abs(p1 @ p2), 1e-12),
        Check("resolution", max_abs(p1 + p2 - np.eye(sc.chart.n)), 1e-12),
        Check("cross_block_inner", abs(e1.inner(e2)), 1e-12),
        Check("kernel_blocks", K_block, 1e-12, sc.chart.K),
    ]


@suite("tensor_product", "products")
def _tensor_product(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("tensor_product")
    B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    c2 = hilbert.build_chart(B.conj().T @ B + np.eye(2))
    tc = products.tensor_chart(inst.chart, c2)
    worst = 0.0
    for _ in range(5):
        a, a2 = (StateVector(random_unit_vector(inst.n, rng)) for _ in range(2))
        b, b2 = (StateVector(random_unit_vector(2, rng)) for _ in range(2))
        lhs = products.tensor_state(tc, a, b).inner(products.tensor_state(tc, a2, b2))
        worst = max(worst, abs(lhs - a.inner(a2) * b.inner(b2)))
    K1, K2 = inst.chart.K, c2.K
    loop = max(abs(tc.chart.K[tc.index(i, k), tc.index(j, l)] - K1[i, j] * K2[k, l])
               for i in range(inst.n) for j in range(inst.n) for k in range(2) for l in range(2))
    # Lifted tensor state must match the coordinates of the chart built on K1 (x) K2.
    x1, x2 = random_unit_vector(inst.n, rng), random_unit_vector(2, rng)
    via_chart = hilbert.lift(tc.chart, np.kron(x1, x2)).coords
    via_factors = products.tensor_state(tc, hilbert.lift(inst.chart, x1), hilbert.lift(c2, x2)).coords
    scale = max(1.0, np.linalg.norm(via_chart))
    Y = observables.primary(inst.chart, inst.index_sets[0])
    Z = observables.Operator(random_unitary(2, rng))
    comm = observables.commutation_defect(tc.lift_first(Y), tc.lift_second(Z))
    return [
        Check("inner_product_factorization", worst, 1e-10),
        Check("kronecker_entries", loop, 1e-12, tc.chart.K if tc.chart.n <= DUMP_MAX_N else None),
        Check("state_coordinates", max_abs(via_chart - via_factors) / scale, 1e-10),
        Check("lifted_observables_commute", comm, 1e-12),
    ]


def _projection(inst: Instance, J, faults) -> np.ndarray:
    if "skip-hermitize" in faults:
        return observables.coordinate_projector(inst.chart, J).matrix
    return observables.primary(inst.chart, J).matrix


@suite("primary_projection", "observables")
def _primary_projection(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("primary_projection")
    herm = idem = trace = lattice = comm = 0.0
    witness = None
    for _ in range(5):
        J1, J2 = inst.subset(rng), inst.subset(rng)
        P1, P2 = _projection(inst, J1, faults), _projection(inst, J2, faults)
        Pu = _projection(inst, sorted(set(J1) | set(J2)), faults)
        Pi = _projection(inst, sorted(set(J1) & set(J2)), faults)
        h = max_abs(P1 - P1.conj().T)
        if h > herm:
            herm, witness = h, P1
        idem = max(idem, max_abs(P1 @ P1 - P1))
        trace = max(trace, abs(np.trace(P1) - len(J1)))
        lattice = max(lattice, max_abs(Pu - (P1 + P2 - Pi)))
        comm = max(comm, max_abs(P1 @ P2 - P2 @ P1), max_abs(P1 @ P2 - Pi))
    return [
        Check("hermiticity", herm, 1e-10, witness),
        Check("idempotency", idem, 1e-10),
        Check("trace", trace, 1e-9),
        Check("lattice", lattice, 1e-9),
        Check("commutation", comm, 1e-10),
    ]


@suite("discrete_projection", "observables")
def _discrete_projection(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("discrete_projection")
    cards = [int(c) for c in rng.integers(2, 4, size=int(rng.integers(2, 4)))]
    code = flatten_discrete(cards)
    keep1 = [k for k in range(len(cards)) if rng.random() < 0.5] or [0]
    keep2 = [k for k in range(len(cards)) if rng.random() < 0.5] or [len(cards) - 1]
    r1, r2 = reduction_matrix(code, keep1), reduction_matrix(code, keep2)
    D1, D2 = observables.discrete_primary(r1).matrix, observables.discrete_primary(r2).matrix
    AAt = r1.A @ r1.A.T
    return [
        Check("hermiticity", max_abs(D1 - D1.conj().T), 1e-12),
        Check("idempotency", max_abs(D1 @ D1 - D1), 1e-12, D1 if code.d <= DUMP_MAX_N else None),
        Check("trace", abs(np.trace(D1) - r1.s), 1e-12),
        Check("row_gram", max_abs(AAt - (r1.d // r1.s) * np.eye(r1.s)), 1e-12),
        Check("column_sums", max_abs(r1.A.sum(axis=0) - 1), 1e-12),
        Check("commutation", max_abs(D1 @ D2 - D2 @ D1), 1e-12),
    ]


@suite("commutative_algebra", "observables")
def _commutative_algebra(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("commutative_algebra")
    c = inst.chart
    u = rng.standard_normal(c.n + 1) + 1j * rng.standard_normal(c.n + 1)
    v = rng.standard_normal(c.n + 1) + 1j * rng.standard_normal(c.n + 1)
    Yu, Yv = observables.algebra_element(c, u), observables.algebra_element(c, v)
    eu, ev = observables.algebra_eigenvalues(Yu), observables.algebra_eigenvalues(Yv)
    prod = np.diag(eu * ev)
    eig = max(max_abs(Yu.matrix @ hilbert.orthonormal_state(c, i).coords
                      - eu[i] * hilbert.orthonormal_state(c, i).coords) for i in range(c.n))
    psi = inst.states[0]
    f = observables.state_functional(c, psi, Yu)
    f_adj = observables.state_functional(c, psi, Yu.adjoint())
    pos = observables.state_functional(c, psi, Yu @ Yu.adjoint())
    return [
        Check("product", max_abs((Yu @ Yv).matrix - prod), 1e-10),
        Check("commutative", observables.commutation_defect(Yu, Yv), 1e-10),
        Check("adjoint", max_abs(Yu.adjoint().matrix - observables.algebra_element(c, np.conj(u)).matrix), 1e-12),
        Check("eigenpairs", eig, 1e-10),
        Check("functional_hermitian", abs(f_adj - np.conj(f)), 1e-12),
        Check("functional_positive", max(0.0, -pos.real) + abs(pos.imag), 1e-12),
    ]


def _partition(inst: Instance) -> observables.SpectralMeasureMap:
    cells = {f"s{k}": J for k, J in enumerate(inst.index_sets) if J}
    return observables.SpectralMeasureMap.from_sets(cells)


@suite("spectral_measure", "observables")
def _spectral_measure(inst: Instance, faults) -> list[Check]:
    c, psi = inst.chart, inst.states[1]
    part = _partition(inst)
    P = observables.spectral_measure(c, part)
    mats = list(P.values())
    total = sum(p.matrix for p in mats)
    ortho = max((max_abs(a.matrix @ b.matrix) for i, a in enumerate(mats) for b in mats[i + 1:]), default=0.0)
    probs = {k: float(np.linalg.norm(p.matrix @ psi.coords) ** 2) for k, p in P.items()}
    # Refinement: split the largest cell in two and compare summed probabilities.
    label = max(part.cells, key=lambda k: len(part.cells[k]))
    cell = sorted(part.cells[label])
    refine = 0.0
    if len(cell) > 1:
        cells = {k: v for k, v in part.cells.items() if k != label}
        cells["a"], cells["b"] = cell[: len(cell) // 2], cell[len(cell) // 2:]
        fine = observables.spectral_measure(c, observables.SpectralMeasureMap.from_sets(cells))
        pa = np.linalg.norm(fine["a"].matrix @ psi.coords) ** 2
        pb = np.linalg.norm(fine["b"].matrix @ psi.coords) ** 2
        refine = abs(pa + pb - probs[label])
    recovered = max(0.0 if observables.recover_index_set(P[k]) == tuple(sorted(part.cells[k])) else 1.0
                    for k in P)
    return [
        Check("resolution_of_identity", max_abs(total - np.eye(c.n)), 1e-12),
        Check("orthogonality", ortho, 1e-12),
        Check("probability_total", abs(sum(probs.values()) - 1.0), 1e-12),
        Check("refinement_additivity", refine, 1e-12),
        Check("projection_is_primary", recovered, 0.5),
    ]


@suite("spectral_integral", "observables")
def _spectral_integral(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("spectral_integral")
    part = _partition(inst)
    f = {k: float(rng.standard_normal()) for k in part.cells}
    op = observables.spectral_integral(inst.chart, f, part)
    norm = float(np.max(np.abs(np.linalg.eigvalsh(op.matrix))))
    fmax = max(abs(v) for v in f.values())
    expected = sum(f[k] * observables.primary(inst.chart, part.cells[k]).matrix for k in part.cells)
    ones = observables.spectral_integral(inst.chart, {k: 1.0 for k in part.cells}, part)
    return [
        Check("norm_bound", max(0.0, norm - fmax), 1e-10),
        Check("weighted_sum", max_abs(op.matrix - expected), 1e-12),
        Check("unit_function", max_abs(ones.matrix - np.eye(inst.n)), 1e-12),
    ]


@suite("normal_secondary", "observables")
def _normal_secondary(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("normal_secondary")
    lams = rng.standard_normal(len(inst.index_sets))
    phi = observables.secondary(inst.chart, lams, inst.index_sets)
    m = phi.matrix
    expected = np.sort(np.concatenate([np.full(len(J), lam) for lam, J in zip(lams, inst.index_sets)]))
    got = np.sort(np.linalg.eigvalsh(m))
    J = inst.subset(rng)
    comp = observables.compose_with_primary(observables.primary(inst.chart, J), phi)
    direct = sum(lam * observables.primary(inst.chart, sorted(set(Jn) & set(J))).matrix
                 for lam, Jn in zip(lams, inst.index_sets))
    return [
        Check("normality", max_abs(m @ m.conj().T - m.conj().T @ m), 1e-12),
        Check("self_adjoint", max_abs(m - m.conj().T), 1e-12),
        Check("spectrum", max_abs(got - expected), 1e-9),
        Check("compose_with_primary", max_abs(comp.matrix - direct), 1e-12),
    ]


@suite("probability_law", "probability")
def _probability_law(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("probability_law")
    c, psi = inst.chart, inst.states[0]
    J1, J2, J3 = inst.index_sets
    nu = lambda J: probability.subspace_prob(c, psi, J)
    add = abs(nu(sorted(set(J1) | set(J2))) - nu(J1) - nu(J2))
    sub = [j for j in J1 if rng.random() < 0.5]
    mono = max(0.0, nu(sub) - nu(J1))
    lams = rng.standard_normal(3)
    dist = probability.eigen_distribution(c, observables.secondary(c, lams, inst.index_sets), psi)
    basis_dep = 0.0
    for J in inst.index_sets:
        if not J:
            continue
        # Random orthonormal basis of H_J: a unitary rotation inside the subspace.
        W = np.zeros((c.n, len(J)), dtype=complex)
        W[list(J), :] = random_unitary(len(J), rng)
        alt = float(np.sum(np.abs(W.conj().T @ psi.coords) ** 2))
        basis_dep = max(basis_dep, abs(alt - nu(J)))
    return [
        Check("additivity", add, 1e-10),
        Check("total", abs(nu(range(c.n)) - 1.0), 1e-12),
        Check("monotonicity", mono, 1e-12),
        Check("eigen_total", abs(dist.total - 1.0), 1e-10),
        Check("basis_independence", basis_dep, 1e-12),
    ]


@suite("conditional_probability", "probability")
def _conditional_probability(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("conditional_probability")
    c = inst.chart
    J = inst.subset(rng) or (0,)
    J1 = tuple(j for j in J if rng.random() < 0.7) or J[:1]
    J2 = tuple(j for j in J1 if rng.random() < 0.7)
    P = observables.primary(c, J).matrix
    v = P @ inst.states[2].coords
    if np.linalg.norm(v) < 1e-8:
        v = P @ np.ones(c.n)
    psi = StateVector(v / np.linalg.norm(v))
    p_full = probability.conditional_prob(c, psi, J, J)
    p1 = probability.conditional_prob(c, psi, J, J1)
    p2 = probability.conditional_prob(c, psi, J, J2)
    chain = 0.0
    if p1 > 1e-12:
        psi1 = StateVector(observables.primary(c, J1).matrix @ psi.coords / np.sqrt(p1))
        chain = abs(probability.conditional_prob(c, psi1, J1, J2) * p1 - p2)
    ratio = abs(p1 - probability.subspace_prob(c, psi, J1) / probability.subspace_prob(c, psi, J))
    return [
        Check("certain_event", abs(p_full - 1.0), 1e-10),
        Check("chain_rule", chain, 1e-10),
        Check("ratio", ratio, 1e-10),
    ]


@suite("wigner_transport", "gauge")
def _wigner_transport(inst: Instance, faults) -> list[Check]:
    c, g, psi = inst.chart, inst.gauge, inst.states[0]
    rng = inst.rng("wigner_transport")
    x = hilbert.components(c, psi)
    x_new = hilbert.components(c, g.apply(psi))
    consistency = max_abs(x_new - g.U @ x) / (np.linalg.norm(g.U, 2) * np.linalg.norm(x))
    lams = rng.standard_normal(3)
    Y = observables.secondary(c, lams, inst.index_sets)
    Yt = gauge.transform_operator(g, Y)
    spec = max_abs(np.sort(np.linalg.eigvalsh(Yt.matrix)) - np.sort(np.linalg.eigvalsh(Y.matrix)))
    J = inst.index_sets[0]
    PJ = observables.primary(c, J)
    moved = g.apply(psi).coords
    prob_t = float(np.linalg.norm(gauge.transform_operator(g, PJ).matrix @ moved) ** 2)
    back = gauge.transform_operator(g.inverse(), Yt)
    measured = abs(np.vdot(Yt.matrix @ moved, moved) - np.vdot(Y.matrix @ psi.coords, psi.coords))
    scaled = 0.0
    try:
        gauge.lift_gauge(c, 2.0 * np.eye(c.n))
        scaled = 1.0
    except gauge.NotKUnitary:
        pass
    return [
        Check("unitarity", g.unitarity_defect(), 1e-10, g.U_hat),
        Check("component_consistency", consistency, 1e-10),
        Check("spectrum", spec, 1e-9),
        Check("probability_invariance", abs(prob_t - probability.subspace_prob(c, psi, J)), 1e-10),
        Check("measured_value_invariance", measured, 1e-10),
        Check("round_trip", max_abs(back.matrix - Y.matrix), 1e-10),
        Check("rescaling_rejected", scaled, 0.5),
    ]


@suite("one_parameter_group", "gauge")
def _one_parameter_group(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("one_parameter_group")
    n = inst.n
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    S = (A - A.conj().T) / 2
    S /= np.linalg.norm(S, 2)
    gen = gauge.Generator(S)
    t1, t2 = rng.uniform(-10, 10, size=2)
    U = lambda t: gauge.one_param_group(gen, t).U_hat
    group = max_abs(U(t1) @ U(t2) - U(t1 + t2))
    Y = observables.primary(inst.chart, inst.index_sets[0])
    h = 1e-4
    move = lambda t: gauge.transform_operator(gauge.one_param_group(gen, t), Y).matrix
    deriv = max_abs((move(h) - move(-h)) / (2 * h) - 1j * (Y.matrix @ gen.S_hat - gen.S_hat @ Y.matrix))
    rec = gauge.generator_from_group([(t, U(t)) for t in (-h, h, 0.5)])
    # A rotation inside H_J commutes with Y_J; its fixed vectors lie in ker S.
    J = inst.index_sets[0]
    B = np.zeros((n, n), dtype=complex)
    if len(J) >= 2:
        G = rng.standard_normal((len(J), len(J))) + 1j * rng.standard_normal((len(J), len(J)))
        B[np.ix_(J, J)] = (G - G.conj().T) / 2
    sym = gauge.symmetry_check(Y, gauge.one_param_group(gauge.Generator(B), 0.8))
    fixed = np.zeros(n, dtype=complex)
    fixed[[j for j in range(n) if j not in J][:1] or [0]] = 1.0
    g_fixed = gauge.one_param_group(gauge.Generator(B), 0.8)
    kernel = (np.linalg.norm(B @ fixed) if gauge.state_symmetry_defect(g_fixed, StateVector(fixed)) < 1e-12
              else 0.0)
    return [
        Check("group_law", group, 1e-9),
        Check("unitary", max_abs(U(t1).conj().T @ U(t1) - np.eye(n)), 1e-10),
        Check("identity_at_zero", max_abs(U(0.0) - np.eye(n)), 1e-15),
        Check("commutator_derivative", deriv, 1e-6),
        Check("generator_recovery", max_abs(rec.S - S) / max_abs(S), 1e-6),
        Check("invariant_observable", sym, 1e-12),
        Check("fixed_vector_in_kernel", kernel, 1e-8),
    ]


@suite("unitary_evolution", "evolution")
def _unitary_evolution(inst: Instance, faults) -> list[Check]:
    rng = inst.rng("unitary_evolution")
    ham, psi = inst.hamiltonian, inst.states[0]
    ts = np.linspace(-10, 10, 11)
    norm = max(abs(evolution.evolve_state(ham, t, psi).norm - psi.norm) for t in ts)
    t, s = rng.uniform(-10, 10, size=2)
    group = max_abs(evolution.propagator(ham, t) @ evolution.propagator(ham, s) - evolution.propagator(ham, t + s))
    Y0 = observables.secondary(inst.chart, rng.standard_normal(3), inst.index_sets)
    t0 = float(rng.uniform(-2, 2))
    deriv = evolution.heisenberg_derivative_defect(ham, t0, Y0, 1e-4)
    Yt = evolution.heisenberg_operator(ham, t0, Y0).matrix
    pt = evolution.evolve_state(ham, t0, psi).coords
    expect = abs(np.vdot(Yt @ psi.coords, psi.coords) - np.vdot(Y0.matrix @ pt, pt))
    c = 3.7
    scaled = evolution.Hamiltonian(c * ham.H, c * ham.hbar)
    hbar_inv = max_abs(evolution.propagator(scaled, t0) - evolution.propagator(ham, t0))
    grid = t0 + 5e-4 * np.arange(5)
    resid = evolution.schrodinger_residual(ham, grid, evolution.trajectory(ham, grid, psi))
    return [
        Check("norm_conservation", norm, 1e-10),
        Check("group_law", group, 1e-9),
        Check("heisenberg_derivative", deriv, 1e-6),
        Check("picture_equivalence", expect, 1e-10),
        Check("hbar_rescaling", hbar_inv, 1e-12),
        Check("schrodinger_residual", resid, 1e-5),
    ]


@suite("energy_distribution", "evolution")
def _energy_distribution(inst: Instance, faults) -> list[Check]:
    ham, psi = inst.hamiltonian, inst.states[1]
    spec = evolution.energy_spectrum(ham)
    dist = evolution.energy_distribution(spec, psi)
    resolution = max_abs(sum(spec.projectors) - np.eye(ham.n))
    # Shift the lowest energy to zero so a stationary state exists.
    shifted = evolution.Hamiltonian(ham.H - spec.values[0] * np.eye(ham.n), ham.hbar)
    stat = evolution.stationary_states(shifted, 1e-9)
    fixed = max((np.linalg.norm(evolution.evolve_state(shifted, 3.0, v).coords - v.coords) for v in stat),
                default=1.0)
    return [
        Check("reconstruction", max_abs(spec.reconstruct() - ham.H), 1e-9),
        Check("resolution_of_identity", resolution, 1e-9),
        Check("probability_total", abs(dist.total - 1.0), 1e-10),
        Check("stationary_fixed", fixed, 1e-8),
    ]


# ---------------------------------------------------------------------------
# Runner and report
# ---------------------------------------------------------------------------


@dataclass
class ReportRow:
    proposition_id: str
    module: str
    trials: int = 0
    max_defect: float = 0.0
    tolerance: float = 0.0
    worst_check: str = ""
    passed: bool = True
    seed: int | None = None
    n: int | None = None
    counterexample: dict | None = None
    _rank: tuple = field(default=(-1, 0.0), repr=False)

    def as_dict(self) -> dict:
        d = {
            "proposition_id": self.proposition_id,
            "module": self.module,
            "trials": self.trials,
            "max_defect": self.max_defect,
            "tolerance": self.tolerance,
            "worst_check": self.worst_check,
            "pass": self.passed,
            "seed": self.seed,
            "n": self.n,
        }
        if self.counterexample is not None:
            d["counterexample"] = self.counterexample
        return d


@dataclass
class VerifyReport:
    rows: list[ReportRow]
    seeds: tuple[int, ...]
    sizes: tuple[int, ...]
    faults: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def row(self, pid: str) -> ReportRow:
        for r in self.rows:
            if r.proposition_id == pid:
                return r
        raise KeyError(pid)

    def to_json(self) -> str:
        return dumps({
            "seeds": list(self.seeds),
            "sizes": list(self.sizes),
            "faults": list(self.faults),
            "pass": self.passed,
            "propositions": [r.as_dict() for r in self.rows],
        })

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(["proposition_id", "trials", "max_defect", "tolerance", "pass", "worst_check", "seed", "n"])
        for r in self.rows:
            w.writerow([r.proposition_id, r.trials, repr(float(r.max_defect)), repr(float(r.tolerance)),
                        "pass" if r.passed else "FAIL", r.worst_check, r.seed, r.n])
        return buf.getvalue()


def _exception_check(exc: Exception) -> Check:
    return Check(f"raised {type(exc).__name__}: {exc}", float("inf"), 0.0)


def run_all(seeds: Sequence[int] = DEFAULT_SEEDS, sizes: Sequence[int] = DEFAULT_SIZES,
            faults: Iterable[str] = ()) -> VerifyReport:
    """Run every registered suite on every ``(seed, n)`` instance."""
    seeds, sizes = tuple(int(s) for s in seeds), tuple(int(n) for n in sizes)
    if not seeds or not sizes:
        raise ValueError("seeds and sizes must be non-empty")
    faults = frozenset(faults)
    unknown = faults - set(FAULTS)
    if unknown:
        raise ValueError(f"unknown fault(s) {sorted(unknown)}; known: {list(FAULTS)}")
    rows = {pid: ReportRow(pid, module) for pid, (module, _) in REGISTRY.items()}
    for seed in seeds:
        for n in sizes:
            inst = generate_instance(seed, n)
            for pid, (_, fn) in REGISTRY.items():
                try:
                    checks = fn(inst, faults)
                except Exception as exc:  # a crash is a failed row, not an abort
                    checks = [_exception_check(exc)]
                _absorb(rows[pid], checks, inst)
    ordered = [rows[pid] for pid in sorted(rows)]
    return VerifyReport(ordered, seeds, sizes, tuple(sorted(faults)))


def _absorb(row: ReportRow, checks: list[Check], inst: Instance) -> None:
    row.trials += 1
    for chk in checks:
        ok = chk.defect <= chk.tol
        ratio = chk.ratio if chk.tol > 0 else float("inf")
        # Failures outrank passes; within each class the larger ratio wins.
        rank = (0 if ok else 1, ratio)
        row.passed = row.passed and ok
        if rank <= row._rank:
            continue
        row._rank = rank
        row.max_defect, row.tolerance, row.worst_check = float(chk.defect), float(chk.tol), chk.name
        row.seed, row.n = inst.seed, inst.n
        row.counterexample = None
        if not ok:
            row.counterexample = {"seed": inst.seed, "n": inst.n, "check": chk.name}
            if chk.witness is not None and inst.n <= DUMP_MAX_N:
                row.counterexample["matrix"] = encode_matrix(chk.witness)
