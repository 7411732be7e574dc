import numpy as np
import pytest

from foqcs.pauli_algebra import ModelSpec

MODELS = ("xyz", "xxz", "ising")


def random_spec(model: str, n: int, rng: np.random.Generator) -> ModelSpec:
    """Signed random couplings of order one."""
    v = rng.uniform(-1.5, 1.5, size=4)
    if model == "xyz":
        return ModelSpec("xyz", n, g=v[0], jx=v[1], jy=v[2], jz=v[3])
    if model == "xxz":
        return ModelSpec("xxz", n, j=v[0], jz=v[1])
    return ModelSpec("ising", n, g=v[0], j=v[1])


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) < tol:
        return np.allclose(a, b, atol=tol)
    phase = a[k] / b[k]
    return abs(abs(phase) - 1) < tol and np.allclose(a, phase * b, atol=tol)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# criterion number -> one-line verdict, filled by test_acceptance
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
