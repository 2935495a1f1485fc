"""Helffer-Sjostrand functional calculus for square matrices with real spectrum.

``f(H) = -(1/pi) * integral over C of dbar f~(z) (z - H)^-1 dx dy``

The strip ``|y| <= s_psi <x>`` that carries ``dbar f~`` is mapped onto a
rectangle by ``x = c + L tan(theta)`` and ``y = t <x>``, so the cutoff edges
sit on the grid lines ``|t| = const`` and the infinite x-range needs no
truncation. The rectangle is integrated by the adaptive tree in
:mod:`hsfc.quadrature`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.linalg

from . import aae
from .errors import (
    DomainError,
    OrderError,
    PreconditionError,
    QuadratureError,
    SingularResolventError,
)
from .jets import Domain, Jet
from .quadrature import integrate_1d, integrate_2d
from .seeley import make_seeley_coefficients, seeley_extend

SPECTRUM_ATOL = 1e-9


@dataclass(frozen=True)
class GrowthEstimate:
    """Constants in ``||(z-H)^-1|| <= c |Im z|^-1 (<z>/|Im z|)^alpha``."""

    c: float
    alpha: float
    worst_sample: complex | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.c > 0:
            raise PreconditionError(f"growth constant c must be positive, got {self.c}")
        if not self.alpha >= 0:
            raise PreconditionError(f"growth exponent alpha must be nonnegative, got {self.alpha}")

    def bound(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        y = np.abs(z.imag)
        return self.c / y * (np.sqrt(1.0 + np.abs(z) ** 2) / y) ** self.alpha


@dataclass(frozen=True, eq=False)
class OperatorHandle:
    entries: np.ndarray
    spectral_floor: float | None = None
    growth: GrowthEstimate | None = None

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise PreconditionError(f"operator must be a nonempty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise PreconditionError("operator entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.spectral_floor is not None:
            ev = self.eigenvalues
            if np.any(np.abs(ev.imag) > SPECTRUM_ATOL) or np.any(ev.real < self.spectral_floor - SPECTRUM_ATOL):
                raise PreconditionError(
                    f"spectrum {np.round(ev, 12).tolist()} is not contained in "
                    f"[{self.spectral_floor}, inf)"
                )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.entries)

    @property
    def is_real(self) -> bool:
        return not np.any(self.entries.imag)

    def with_growth(self, grid=None) -> "OperatorHandle":
        from .oracle import estimate_growth

        return replace(self, growth=estimate_growth(self, grid))

    def with_floor(self, floor: float) -> "OperatorHandle":
        return replace(self, spectral_floor=floor)


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs for the plane integral.

    ``n=None`` picks the Taylor order from the operator's growth exponent.
    ``x_margin`` scales the compactification length relative to the
    spread of the spectrum.
    """

    tol: float = 1e-8
    n: int | None = None
    max_depth: int = 40
    y_floor: float = 1e-10
    x_margin: float = 1.0
    max_cells: int = 100000

    def __post_init__(self):
        if not self.tol > 0:
            raise PreconditionError(f"tol must be positive, got {self.tol}")
        if self.n is not None and self.n < 0:
            raise PreconditionError(f"Taylor order must be nonnegative, got {self.n}")
        if not self.y_floor >= 0:
            raise PreconditionError(f"y_floor must be nonnegative, got {self.y_floor}")
        if not self.x_margin > 0:
            raise PreconditionError(f"x_margin must be positive, got {self.x_margin}")


@dataclass
class HSResult:
    matrix: np.ndarray
    error: float
    n: int
    cells: int
    evaluations: int
    band_error: float


def resolvent(H: OperatorHandle, z: complex) -> np.ndarray:
    """``(zI - H)^-1`` by pivoted LU with one refinement step if needed."""
    A = complex(z) * np.eye(H.dim) - H.entries
    if np.linalg.cond(A) > 1e14:
        raise SingularResolventError(f"z={z} is too close to the spectrum (condition > 1e14)")
    lu = scipy.linalg.lu_factor(A)
    eye = np.eye(H.dim, dtype=complex)
    R = scipy.linalg.lu_solve(lu, eye)
    limit = 1e-10 * np.linalg.norm(R)
    resid = A @ R - eye
    if np.linalg.norm(resid) > limit:
        R = R - scipy.linalg.lu_solve(lu, resid)
        if np.linalg.norm(A @ R - eye) > limit:
            raise SingularResolventError(f"resolvent at z={z} failed the residual check")
    return R


def choose_taylor_order(g: GrowthEstimate) -> int:
    """Smallest integer order strictly above alpha, plus one for margin."""
    return int(math.ceil(g.alpha)) + 1


def _resolve_order(H: OperatorHandle, cfg: QuadratureConfig) -> int:
    if H.growth is None:
        raise PreconditionError("operator has no growth estimate; call with_growth() first")
    n = choose_taylor_order(H.growth) if cfg.n is None else cfg.n
    if not n > H.growth.alpha:
        raise PreconditionError(f"Taylor order n={n} must exceed the growth exponent alpha={H.growth.alpha}")
    return n


def _check_spectrum_real(H: OperatorHandle) -> np.ndarray:
    ev = H.eigenvalues
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.any(np.abs(ev.imag) > 1e-6 * scale):
        raise PreconditionError("the spectrum of H is not real")
    return ev.real


def _band_mass(f: Jet, H: OperatorHandle, n: int) -> float:
    """Constant ``B`` with ``band(y_floor) <= B * y_floor^(n - alpha)``.

    Inside ``|y| < y_floor`` we have ``|dbar f~| <= |f^(n+1)(x)| |y|^n / (2 n!)``
    and the growth bound on the resolvent, which integrate to
    ``c / (pi n! (n - alpha)) * int |f^(n+1)| <x>^alpha dx`` per unit of
    ``y_floor^(n - alpha)``.
    """
    g = H.growth
    p = n - g.alpha

    def weight(u):
        one_m = 1.0 - u * u
        x = u / one_m
        jac = (1.0 + u * u) / (one_m * one_m)
        return np.abs(f.derivatives(x, n + 1)[n + 1]) * (1.0 + x * x) ** (g.alpha / 2) * jac

    try:
        mass = integrate_1d(weight, [-1.0, 0.0, 1.0], 1e-6, max_intervals=4000).value
    except QuadratureError:
        return math.inf
    return g.c / (math.pi * math.factorial(n) * p) * float(abs(mass))


def _band_floor(f: Jet, H: OperatorHandle, n: int, cfg: QuadratureConfig) -> tuple[float, float]:
    """Pick ``y_floor`` (at most ``cfg.y_floor``) whose band bound is below ``tol/10``."""
    if cfg.y_floor == 0.0:
        return 0.0, 0.0
    p = n - H.growth.alpha
    mass = _band_mass(f, H, n)
    if not math.isfinite(mass):
        return 0.0, 0.0
    y_floor = cfg.y_floor
    if mass * y_floor ** p > 0.1 * cfg.tol:
        y_floor = (0.1 * cfg.tol / mass) ** (1.0 / p)
    return y_floor, mass * y_floor ** p


def hs_apply_detailed(f: Jet, H: OperatorHandle, cfg: QuadratureConfig | None = None,
                      psi: Jet | None = None) -> HSResult:
    """:func:`hs_apply` returning the error estimate and tree statistics too."""
    cfg = QuadratureConfig() if cfg is None else cfg
    psi = aae.default_psi() if psi is None else psi
    if f.domain is not Domain.WHOLE_LINE:
        raise DomainError(f"{f.label} is a half-line jet; use gamma_apply or extend it first")
    if not f.beta < 0:
        raise PreconditionError(f"HS integrand needs beta < 0, {f.label} has beta={f.beta}")
    n = _resolve_order(H, cfg)
    if not f.supports_order(n + 1):
        raise OrderError(f"{f.label} supports order {f.max_order}, HS with n={n} needs {n + 1}")
    ev = _check_spectrum_real(H)
    ext = aae.AlmostAnalytic(f, n, psi)

    lo, hi = float(ev.min()), float(ev.max())
    center = 0.5 * (lo + hi)
    scale = cfg.x_margin * max(1.0, 0.5 * (hi - lo))
    reach = psi.support[1]
    dim = H.dim
    eye = np.eye(dim)
    Hm = H.entries
    y_floor, band = _band_floor(f, H, n, cfg)
    symmetric = f.real_valued and H.is_real

    def integrand(theta, t):
        x = center + scale * np.tan(theta)
        jb = np.sqrt(1.0 + x * x)
        y = t * jb
        out = np.zeros((len(theta), dim, dim), dtype=complex)
        live = (np.abs(t) < reach) & (np.abs(y) >= y_floor)
        if not np.any(live):
            return out
        xl, yl = x[live], y[live]
        w = ext.dbar(xl, yl) * (scale / np.cos(theta[live]) ** 2) * jb[live] * (-1.0 / math.pi)
        nz = w != 0
        if np.any(nz):
            z = xl[nz] + 1j * yl[nz]
            R = np.linalg.inv(z[:, None, None] * eye - Hm)
            block = np.zeros((len(xl), dim, dim), dtype=complex)
            block[nz] = w[nz, None, None] * R
            out[live] = block
        return out

    x_pts = {-0.5 * math.pi, 0.5 * math.pi}
    for p in list(f.breakpoints) + list(ev):
        x_pts.add(math.atan((p - center) / scale))
    t_edges = sorted(t for t in {0.0, *psi.plateau, *psi.support} if 0.0 <= t <= reach)
    if not symmetric:
        t_edges = sorted({-t for t in t_edges} | set(t_edges))

    halves = 1.0 if not symmetric else 2.0
    budget = cfg.tol - band
    res = integrate_2d(
        integrand,
        sorted(x_pts),
        t_edges,
        (dim, dim),
        budget / halves,
        max_depth=cfg.max_depth,
        max_cells=cfg.max_cells,
    )
    value = np.asarray(res.value)
    if symmetric:
        value = 2.0 * value.real + 0j
    return HSResult(value, halves * res.error + band, n, res.cells, res.evaluations, band)


def hs_apply(f: Jet, H: OperatorHandle, cfg: QuadratureConfig | None = None,
             psi: Jet | None = None) -> np.ndarray:
    """``f(H)`` via the Helffer-Sjostrand integral.

    Requires a whole-line ``f`` with ``beta < 0`` and an operator carrying a
    growth estimate. The Frobenius error estimate of the result is at most
    ``cfg.tol``; :class:`QuadratureError` is raised otherwise.
    """
    return hs_apply_detailed(f, H, cfg, psi).matrix


def gamma_apply_detailed(f: Jet, H: OperatorHandle, cfg: QuadratureConfig | None = None,
                         K: int | None = None, phi: Jet | None = None,
                         psi: Jet | None = None) -> HSResult:
    cfg = QuadratureConfig() if cfg is None else cfg
    if H.spectral_floor is None:
        raise PreconditionError("gamma_apply needs an operator with a spectral floor")
    if H.spectral_floor < 0:
        raise PreconditionError(f"gamma_apply needs spectral floor >= 0, got {H.spectral_floor}")
    if f.domain is not Domain.HALF_LINE:
        raise PreconditionError(f"gamma_apply expects a half-line jet, got {f.label}")
    if not f.beta < 0:
        raise PreconditionError(f"gamma_apply needs beta < 0, {f.label} has beta={f.beta}")
    n = _resolve_order(H, cfg)
    K = n + 3 if K is None else K
    if K < n + 2:
        raise PreconditionError(f"truncation K={K} must be at least n + 2 = {n + 2}")
    extended = seeley_extend(f, phi, make_seeley_coefficients(K), order=n)
    return hs_apply_detailed(extended, H, replace(cfg, n=n), psi)


def gamma_apply(f: Jet, H: OperatorHandle, cfg: QuadratureConfig | None = None,
                K: int | None = None, phi: Jet | None = None,
                psi: Jet | None = None) -> np.ndarray:
    """Apply a half-line function to ``H`` with spectrum in ``[0, inf)``.

    ``f`` is extended to the whole line with a truncated Seeley sum of
    length ``K`` (default ``n + 3``) and cutoff ``phi``, then passed to
    :func:`hs_apply`. The result does not depend on the extension.
    """
    return gamma_apply_detailed(f, H, cfg, K, phi, psi).matrix
