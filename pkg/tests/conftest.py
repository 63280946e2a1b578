import numpy as np
import pytest

from qzec.quantum_core import DensityOperator, PureState

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KETP = np.array([1, 1], dtype=complex) / np.sqrt(2)
KETM = np.array([1, -1], dtype=complex) / np.sqrt(2)


def dm(vec) -> DensityOperator:
    return DensityOperator.from_pure(PureState(np.asarray(vec, dtype=complex)))


def superop_apply(ops, rho):
    """Channel action through the row-major vectorization vec(A X B) = (A kron B^T) vec(X)."""
    d = rho.shape[0]
    s = sum(np.kron(e, e.conj()) for e in ops)
    return (s @ rho.reshape(-1)).reshape(d, d)


def projector_onto(vecs):
    q, _ = np.linalg.qr(np.column_stack(vecs))
    return q @ q.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
