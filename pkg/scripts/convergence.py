"""Finite-difference convergence of the Schrodinger residual and the Heisenberg derivative.

Both use central differences, so halving the step should divide the defect by
about 4 until roundoff (about eps / h) takes over.

    python3 scripts/convergence.py --n 6 --seed 1
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from hilbertmodel import evolution, hilbert, observables


@dataclass
class Config:
    n: int = 6
    seed: int = 0
    hbar: float = 1.0
    scale: float = 2.0  # spectral norm of H
    steps: tuple[float, ...] = (1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5, 1e-5, 1e-6)


def hermitian(n, rng):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


def run(cfg: Config) -> list[tuple[float, float, float]]:
    rng = np.random.default_rng(cfg.seed)
    H = hermitian(cfg.n, rng)
    ham = evolution.Hamiltonian(H * (cfg.scale / np.linalg.norm(H, 2)), cfg.hbar)
    v = rng.standard_normal(cfg.n) + 1j * rng.standard_normal(cfg.n)
    psi = hilbert.StateVector(v / np.linalg.norm(v))
    Y0 = observables.Operator(hermitian(cfg.n, rng))
    rows = []
    for h in cfg.steps:
        times = 0.5 + h * np.arange(9)
        res = evolution.schrodinger_residual(ham, times, evolution.trajectory(ham, times, psi))
        der = evolution.heisenberg_derivative_defect(ham, 0.5, Y0, h)
        rows.append((h, res, der))
    return rows


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=Config.n)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--hbar", type=float, default=Config.hbar)
    a = p.parse_args(argv)
    rows = run(Config(a.n, a.seed, a.hbar))
    print(f"{'h':>10} {'schrodinger':>12} {'ratio':>6} {'heisenberg':>12} {'ratio':>6}")
    prev = None
    for h, res, der in rows:
        r1 = f"{prev[0] / res:6.2f}" if prev else ""
        r2 = f"{prev[1] / der:6.2f}" if prev else ""
        print(f"{h:10.3g} {res:12.3e} {r1:>6} {der:12.3e} {r2:>6}")
        prev = (res, der)


if __name__ == "__main__":
    main()
