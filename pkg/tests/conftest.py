import sys

import numpy as np
import pytest

from hsfc import OperatorHandle, QuadratureConfig


def diag01():
    return np.diag([0.0, 1.0])


def jordan2():
    return np.array([[0.0, 1.0], [0.0, 0.0]])


def symmetric8(seed=20261019):
    """8x8 real symmetric matrix with spectrum in [0, 50], smallest eigenvalue 0."""
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.uniform(0.0, 50.0, 8))
    lam[0] = 0.0
    q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    m = (q * lam) @ q.T
    return 0.5 * (m + m.T)


MATRICES = {"diag01": diag01, "sym8": symmetric8, "jordan2": jordan2}


@pytest.fixture(scope="session")
def operators():
    return {name: OperatorHandle(build(), spectral_floor=0.0).with_growth()
            for name, build in MATRICES.items()}


@pytest.fixture
def cfg():
    return QuadratureConfig(tol=1e-8)


def rel_close(a, b, rel, atol=0.0):
    return abs(a - b) <= rel * abs(b) + atol


def richardson(A, h0, levels=6):
    """Richardson table for A(h) with an error expansion in integer powers of h."""
    T = [[A(h0 / 2 ** j)] for j in range(levels)]
    for j in range(1, levels):
        for m in range(1, j + 1):
            T[j].append((2 ** m * T[j][m - 1] - T[j - 1][m - 1]) / (2 ** m - 1))
    return T[-1][-1]


def left_derivative_at_zero(jet, r, h0=1e-3):
    """r-th derivative of ``jet`` at 0 from samples at x < 0 only."""
    if r == 0:
        return richardson(lambda h: jet(-h).real, h0)
    F = lambda x: jet(x, r - 1).real
    return richardson(lambda h: (F(-h) - F(-2 * h)) / h, h0)


def central_derivative(fn, x, h=1e-3, levels=6):
    """Central difference of a scalar function, Richardson-extrapolated from step h."""
    return richardson(lambda s: (fn(x + s) - fn(x - s)) / (2 * s), h, levels)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.REPORT, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
