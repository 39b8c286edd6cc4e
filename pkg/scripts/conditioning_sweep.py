"""Chart defects against the condition number of the Gram matrix.

Shows how the orthonormality and dual-pairing defects, and the idempotency of
the oblique coordinate projector, grow with ``cond``.

    python3 scripts/conditioning_sweep.py --n 16 --trials 5
"""

from __future__ import annotations

import argparse
import warnings
from dataclasses import dataclass

import numpy as np

from hilbertmodel import hilbert, observables
from hilbertmodel.errors import IllConditioned
from hilbertmodel.linalg import idempotency_defect, random_unitary


@dataclass
class Config:
    n: int = 16
    trials: int = 5
    seed: int = 0
    conds: tuple[float, ...] = (1e0, 1e2, 1e4, 1e6, 1e8, 1e10, 1e11)  # build_chart refuses 1e12


def gram_with_cond(n: int, cond: float, rng: np.random.Generator) -> np.ndarray:
    Q = random_unitary(n, rng)
    K = (Q * np.logspace(0, -np.log10(cond), n)) @ Q.conj().T
    return (K + K.conj().T) / 2


def run(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for cond in cfg.conds:
        ortho = dual = idem = 0.0
        for _ in range(cfg.trials):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IllConditioned)
                c = hilbert.build_chart(gram_with_cond(cfg.n, cond, rng))
            ortho = max(ortho, hilbert.orthonormality_defect(c))
            dual = max(dual, hilbert.dual_pairing_check(c))
            Y = observables.coordinate_projector(c, np.flatnonzero(rng.random(cfg.n) < 0.5)).matrix
            idem = max(idem, idempotency_defect(Y))
        rows.append((cond, ortho, dual, idem))
    return rows


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=Config.n)
    p.add_argument("--trials", type=int, default=Config.trials)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args(argv)
    print(f"{'cond':>8} {'L*KL-I':>10} {'dual':>10} {'oblique idem':>13}")
    for cond, ortho, dual, idem in run(Config(a.n, a.trials, a.seed)):
        print(f"{cond:8.0e} {ortho:10.2e} {dual:10.2e} {idem:13.2e}")


if __name__ == "__main__":
    main()
