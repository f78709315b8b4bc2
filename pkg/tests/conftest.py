import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line per test; printed in the terminal summary."""

    def record(label, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}".rstrip())
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, q):
    psi = rng.normal(size=2**q) + 1j * rng.normal(size=2**q)
    return psi / np.linalg.norm(psi)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    qm, r = np.linalg.qr(z)
    return qm * (np.diag(r) / np.abs(np.diag(r)))
