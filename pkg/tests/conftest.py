import numpy as np
import pytest

from susyband.entanglement import pair_structures
from susyband.models import kitaev_chain
from susyband.susy_pair import build_pair


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (A + A.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture(scope="session")
def kitaev60():
    km = kitaev_chain(1.0, 0.7, 60)
    pair = build_pair(km.q_closed)
    return km, pair, pair_structures(pair)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} {title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
