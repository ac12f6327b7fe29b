import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_system(rng, N, m=1, n=1, scale=0.5, D=False, complex_=True):
    """Random triple (or quadruple) with spectral radius ``scale``."""
    from qrational.statespace import StateSpace

    def draw(*shape):
        out = rng.standard_normal(shape)
        if complex_:
            out = out + 1j * rng.standard_normal(shape)
        return out

    A = draw(N, N)
    rho = np.max(np.abs(np.linalg.eigvals(A))) if N else 1.0
    A = A * scale / rho
    return StateSpace(draw(m, N), A, draw(N, n), draw(m, n) if D else None)


# ---------------------------------------------------------- acceptance log

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record a verdict line for one acceptance criterion; returns ``record(n, title, ok, detail)``."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
