import numpy as np
import pytest

from collisionlab.states import random_density


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rand_hermitian(d, rng):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (x + x.conj().T) / 2


def rand_state(d, rng, full=False):
    rank = d if full else int(rng.integers(1, d + 1))
    return random_density(d, rng, rank)


def classical_spectrum(p, q, eps):
    """sup{R : P_p[log p/q <= R] <= eps} by enumerating the breakpoints."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    m = p > 0
    vals = np.log2(p[m]) - np.log2(q[m])
    probs = p[m]
    order = np.argsort(vals)
    cdf = np.cumsum(probs[order])
    j = np.searchsorted(cdf, eps + 1e-12, side="right")
    return float(vals[order][j])


# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
