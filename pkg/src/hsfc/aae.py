"""Almost-analytic extensions and their d-bar derivatives.

For a whole-line jet ``f`` and Taylor order ``n`` the extension is

    f~(x, y) = sigma(x, y) * sum_{r<=n} f^(r)(x) (iy)^r / r!,
    sigma(x, y) = psi(y / <x>),

and ``dbar f~ = (d/dx + i d/dy) f~ / 2``. Differentiating the Taylor sum
telescopes, leaving

    dbar f~ = sigma f^(n+1)(x) (iy)^n / (2 n!)
              + (sum_{r<=n} f^(r)(x) (iy)^r / r!) (sigma_x + i sigma_y) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OrderError, PreconditionError
from .jets import Jet, bump


def default_psi() -> Jet:
    return bump(1.0, 2.0)


def alternate_psi() -> Jet:
    """A second, genuinely different cutoff used to check cutoff independence."""
    return bump(1.2, 1.8)


def sigma_field(psi: Jet, x, y):
    """``sigma = psi(y/<x>)`` and its partial derivatives in x and y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    jb = np.sqrt(1.0 + x * x)
    s = y / jb
    d = psi.derivatives(s, 1).real
    value, dpsi = d[0], d[1]
    dx = dpsi * (-x * y / jb ** 3)
    dy = dpsi / jb
    return value, dx, dy


def _taylor_sum(derivs: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    iy = 1j * y
    acc = np.zeros(y.shape, dtype=complex)
    power = np.ones(y.shape, dtype=complex)
    for r in range(n + 1):
        acc += derivs[r] * power / math.factorial(r)
        power = power * iy
    return acc


@dataclass(frozen=True)
class AlmostAnalytic:
    source: Jet
    n: int
    psi: Jet = field(default_factory=default_psi)

    def __post_init__(self):
        if self.n < 0:
            raise PreconditionError(f"Taylor order must be nonnegative, got {self.n}")
        if self.psi.plateau is None or self.psi.support is None:
            raise PreconditionError("psi must be a cutoff bump")

    def f_tilde(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        shape = x.shape
        x, y = x.reshape(-1), y.reshape(-1)
        if not self.source.supports_order(self.n):
            raise OrderError(f"{self.source.label} cannot supply order {self.n}")
        sigma, _, _ = sigma_field(self.psi, x, y)
        derivs = self.source.derivatives(x, self.n)
        out = (_taylor_sum(derivs, y, self.n) * sigma).reshape(shape)
        return out[()] if out.ndim == 0 else out

    def dbar(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        shape = x.shape
        x, y = x.reshape(-1), y.reshape(-1)
        n = self.n
        if not self.source.supports_order(n + 1):
            raise OrderError(f"{self.source.label} cannot supply order {n + 1} for d-bar")
        sigma, sx, sy = sigma_field(self.psi, x, y)
        derivs = self.source.derivatives(x, n + 1)
        remainder = 0.5 * sigma * derivs[n + 1] * (1j * y) ** n / math.factorial(n)
        edge = (sx != 0) | (sy != 0)
        out = remainder.astype(complex)
        if np.any(edge):
            taylor = _taylor_sum(derivs[:, edge], y[edge], n)
            out[edge] += 0.5 * taylor * (sx[edge] + 1j * sy[edge])
        out = out.reshape(shape)
        return out[()] if out.ndim == 0 else out


def f_tilde(a: AlmostAnalytic, x, y):
    return a.f_tilde(x, y)


def dbar_f_tilde(a: AlmostAnalytic, x, y):
    return a.dbar(x, y)
