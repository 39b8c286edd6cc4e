from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_pd(n: int, rng: np.random.Generator, cond_floor: float = 1e-6) -> np.ndarray:
    """Hermitian PD matrix ``M^* M + delta I`` with condition number at most about ``1/cond_floor``."""
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return M.conj().T @ M + cond_floor * np.linalg.norm(M, 2) ** 2 * np.eye(n)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=12)


@st.composite
def chart_and_subset(draw, min_n: int = 1, max_n: int = 12):
    from hilbertmodel import hilbert

    n = draw(st.integers(min_n, max_n))
    rng = np.random.default_rng(draw(seeds))
    chart = hilbert.build_chart(random_pd(n, rng))
    J = draw(st.sets(st.integers(0, n - 1)))
    return chart, tuple(sorted(J)), rng


# One line per acceptance criterion, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
