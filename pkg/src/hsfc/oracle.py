"""Ground truth that does not go through the plane integral.

``matrix_function_oracle`` uses the eigendecomposition (or the closed form
for a 2x2 Jordan block) and ``estimate_growth`` fits the constants of the
resolvent bound from singular values on a sample grid.
"""

from __future__ import annotations

import numpy as np

from .errors import GrowthError, PreconditionError
from .hs_engine import GrowthEstimate, OperatorHandle
from .jets import Domain, Jet

MAX_EIGVEC_COND = 1e8
ALPHA_LATTICE = np.arange(0, 33) * 0.25
SLACK = 1.05


def _real_points(f: Jet, ev: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.any(np.abs(ev.imag) > 1e-9 * scale):
        raise PreconditionError("oracle needs a real spectrum")
    x = ev.real.copy()
    if f.domain is Domain.HALF_LINE:
        if np.any(x < -1e-9 * scale):
            raise PreconditionError(f"half-line {f.label} applied to a spectrum reaching below 0")
        x = np.maximum(x, 0.0)
    return x


def _jordan_pair(m: np.ndarray):
    if m.shape != (2, 2) or m[1, 0] != 0 or m[0, 0] != m[1, 1] or m[0, 1] == 0:
        return None
    return m[0, 0], m[0, 1]


def matrix_function_oracle(H: OperatorHandle, f: Jet) -> np.ndarray:
    """``f(H)`` from the spectral decomposition.

    Diagonalizable ``H``: ``V diag(f(lambda_i)) V^-1``, refusing eigenbases
    with condition number above 1e8. A 2x2 block ``[[l, m], [0, l]]`` gives
    ``f(l) I + m f'(l) E_12``.
    """
    m = H.entries
    jordan = _jordan_pair(m)
    if jordan is not None:
        lam, mu = jordan
        x = _real_points(f, np.array([lam]))
        d = f.derivatives(x, 1)[:, 0]
        return np.array([[d[0], mu * d[1]], [0.0, d[0]]], dtype=complex)
    ev, V = np.linalg.eig(m)
    if np.linalg.cond(V) > MAX_EIGVEC_COND:
        raise PreconditionError("matrix is defective or has an ill-conditioned eigenbasis")
    fx = f(_real_points(f, ev))
    return (V * fx) @ np.linalg.inv(V)


def default_growth_grid(H: OperatorHandle) -> np.ndarray:
    """Sample points with ``|Im z|`` in ``[1e-4, 10]`` and ``|Re z|`` up to 4 spectral radii."""
    ev = H.eigenvalues
    reach = 4.0 * max(1.0, float(np.max(np.abs(ev))))
    im = np.logspace(-4, 1, 21)
    re = np.union1d(np.linspace(-reach, reach, 33), np.round(ev.real, 12))
    X, Y = np.meshgrid(re, np.concatenate([-im, im]))
    return (X + 1j * Y).ravel()


def random_growth_grid(H: OperatorHandle, rng: np.random.Generator, size: int = 2000) -> np.ndarray:
    """Random points in the same ranges as :func:`default_growth_grid`."""
    reach = 4.0 * max(1.0, float(np.max(np.abs(H.eigenvalues))))
    re = rng.uniform(-reach, reach, size)
    im = 10.0 ** rng.uniform(-4, 1, size) * rng.choice([-1.0, 1.0], size)
    return re + 1j * im


def resolvent_norms(H: OperatorHandle, grid) -> np.ndarray:
    """Spectral norms ``||(z - H)^-1||_2 = 1 / s_min(z - H)``."""
    z = np.asarray(grid, dtype=complex).ravel()
    A = z[:, None, None] * np.eye(H.dim) - H.entries
    smin = np.linalg.svd(A, compute_uv=False)[:, -1]
    with np.errstate(divide="ignore"):
        return 1.0 / smin


def estimate_growth(H: OperatorHandle, grid=None) -> GrowthEstimate:
    """Fit ``(c, alpha)`` in the resolvent bound on a sample grid.

    For each alpha on the quarter-integer lattice the ratio
    ``g(z) = ||R(z)|| |y| (|y| / <z>)^alpha`` must not grow toward the real
    axis: its maximum over the decade closest to the axis may exceed the
    maximum elsewhere by at most the 5% slack. The least such alpha is
    returned with ``c = 1.05 * max g``.
    """
    z = default_growth_grid(H) if grid is None else np.asarray(grid, dtype=complex).ravel()
    y = np.abs(z.imag)
    if np.any(y == 0):
        raise PreconditionError("growth grid must avoid the real axis")
    norms = resolvent_norms(H, z)
    jb = np.sqrt(1.0 + np.abs(z) ** 2)
    fine = y <= 10.0 * y.min()
    if np.all(fine):
        raise PreconditionError("growth grid needs |Im z| spread over more than one decade")
    for alpha in ALPHA_LATTICE:
        g = norms * y * (y / jb) ** alpha
        if not np.all(np.isfinite(g)):
            break
        if g[fine].max() <= SLACK * g[~fine].max():
            worst = int(np.argmax(g))
            return GrowthEstimate(SLACK * float(g[worst]), float(alpha), complex(z[worst]))
    raise GrowthError("no growth exponent alpha <= 8 fits the resolvent samples")
