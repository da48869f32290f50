import numpy as np
import pytest

from specmult.symbol import Symbol

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_matrix(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_symbol(rng, partition, decay: float = 0.0) -> Symbol:
    """Gaussian blocks scaled by (1 + lambda)^-decay."""
    return Symbol(
        partition,
        tuple(random_matrix(rng, lv.dim) * (1.0 + lv.lam) ** (-decay) for lv in partition.levels),
    )
