"""Seeley extension of half-line functions to the whole line.

The extension reflects scaled copies of a cut-off function across zero,

    (E f)(x) = sum_k a_k phi(b_k x) f(b_k x)    for x < 0,

with nodes ``b_k = -2**k``. The weights ``a_k`` make the first ``K``
moments ``sum_k a_k b_k**n`` equal to one, so every derivative of order
``< K`` matches across zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import PreconditionError
from .jets import Domain, Jet, cutoff, jet_product

MAX_TRUNCATION = 64
MOMENT_TARGET = 1e-12  # aim for the float moments
LATTICE_MAX_K = 12  # beyond this no float64 vector reaches the target


def _exact_moments(a, b, K: int) -> list[Fraction]:
    return [sum(Fraction(x) * Fraction(bk) ** n for x, bk in zip(a, b)) - 1 for n in range(K)]


def _moment_preserving_floats(a: tuple[Fraction, ...], b: tuple[int, ...]) -> list[float]:
    """Float64 weights whose moments stay closest to one.

    Rounding each ``a_k`` to nearest leaves moment errors of order
    ``ulp(a_k) * |b_k|**n``, about 2e-9 for ``K = 8``. Moving each weight by a
    few hundred ulps can cancel these errors. The search is a closest-vector
    problem on the lattice spanned by single-ulp steps, solved by LLL with
    Kannan's embedding. Falls back to nearest rounding when that is better.
    """
    K = len(a)
    near = [float(x) for x in a]
    r0 = _exact_moments(near, b, K)
    best = (max(abs(r) for r in r0), near)
    if best[0] <= MOMENT_TARGET or K > LATTICE_MAX_K:
        return near

    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    ulp = [Fraction(math.ulp(x)) for x in near]
    scale = 1 / min(ulp)
    rows = [[int(scale * u * Fraction(bk) ** n) for n in range(K)] + [0] for u, bk in zip(ulp, b)]
    rows.append([round(scale * r) for r in r0] + [int(scale * Fraction(MOMENT_TARGET))])
    basis = DomainMatrix([[ZZ(v) for v in row] for row in rows], (K + 1, K + 1), ZZ)
    _, T = basis.lll_transform()
    T = T.to_Matrix()
    for i in range(K + 1):
        if abs(T[i, K]) != 1:
            continue
        sign = int(T[i, K])
        cand = [Fraction(x) + int(T[i, k]) * sign * u for k, (x, u) in enumerate(zip(near, ulp))]
        if any(Fraction(float(c)) != c for c in cand):
            continue
        score = max(abs(r) for r in _exact_moments(cand, b, K))
        if score < best[0]:
            best = (score, [float(c) for c in cand])
    return best[1]


@dataclass(frozen=True)
class SeeleyCoefficients:
    a: tuple[Fraction, ...]
    b: tuple[int, ...]

    @property
    def K(self) -> int:
        return len(self.a)

    @cached_property
    def a_float(self) -> np.ndarray:
        """Float64 weights, chosen so the float moments stay within about 1e-12 of one."""
        return np.array(_moment_preserving_floats(self.a, self.b))

    def moment_residuals(self, count: int | None = None) -> list[Fraction]:
        """Exact ``sum_k a_k b_k**n - 1`` for ``n < count`` (default ``K``)."""
        count = self.K if count is None else count
        return [sum(a * Fraction(b) ** n for a, b in zip(self.a, self.b)) - 1
                for n in range(count)]

    def float_moment_residuals(self, count: int | None = None) -> np.ndarray:
        count = self.K if count is None else count
        b = np.array(self.b, dtype=float)
        return np.array([math.fsum(self.a_float * b ** n) - 1.0 for n in range(count)])

    def weighted_sum(self, n: int) -> float:
        """``sum_k |a_k| |b_k|**n``, the factor in the extension bound."""
        return math.fsum(abs(a) * abs(b) ** n for a, b in zip(self.a_float, self.b))


def make_seeley_coefficients(K: int) -> SeeleyCoefficients:
    """Exact solution of the K x K Vandermonde moment system.

    The system ``sum_k a_k b_k**n = 1 (n < K)`` asks for a quadrature rule on
    the nodes ``b_k`` that reproduces ``p(1)`` for every polynomial of degree
    below ``K``, so its unique solution is the Lagrange basis evaluated at 1:
    ``a_k = prod_{j != k} (1 - b_j) / (b_k - b_j)``.
    """
    if not isinstance(K, (int, np.integer)) or not 1 <= K <= MAX_TRUNCATION:
        raise PreconditionError(f"truncation K must be an integer in [1, {MAX_TRUNCATION}], got {K!r}")
    K = int(K)
    b = tuple(-(2 ** k) for k in range(K))
    a = []
    for k in range(K):
        w = Fraction(1)
        for j in range(K):
            if j != k:
                w *= Fraction(1 - b[j], b[k] - b[j])
        a.append(w)
    return SeeleyCoefficients(tuple(a), b)


def seeley_cutoff(plateau_end: float = 1.0, support_end: float = 2.0,
                  left_support: float = -1.0) -> Jet:
    """Cutoff that is 1 on ``[0, plateau_end]`` and vanishes beyond ``support_end`` and below ``left_support``."""
    return cutoff(left_support, 0.0, plateau_end, support_end)


def _check_cutoff(phi: Jet) -> None:
    if phi.plateau is None or phi.support is None:
        raise PreconditionError("extension cutoff must be a cutoff jet with known plateau and support")
    lp, rp = phi.plateau
    ls, rs = phi.support
    if lp > 0.0 or rp < 1.0:
        raise PreconditionError(f"extension cutoff must equal 1 on [0, 1], plateau is [{lp}, {rp}]")
    if ls < -1.0 or rs > 2.0:
        raise PreconditionError(f"extension cutoff support ({ls}, {rs}) must lie in [-1, 2]")


def seeley_extend(
    f: Jet,
    phi: Jet | None = None,
    coeffs: SeeleyCoefficients | None = None,
    order: int | None = None,
) -> Jet:
    """Extend a half-line jet to the whole line.

    ``order`` is the highest Taylor order the caller will use downstream; it
    requires ``K >= order + 2``. The extension supports derivatives up to
    ``K - 1``, the highest order that still matches across zero.
    """
    if f.domain is not Domain.HALF_LINE:
        raise PreconditionError("seeley_extend expects a half-line jet")
    phi = seeley_cutoff() if phi is None else phi
    _check_cutoff(phi)
    coeffs = make_seeley_coefficients(8) if coeffs is None else coeffs
    if order is not None and coeffs.K < order + 2:
        raise PreconditionError(f"truncation K={coeffs.K} too small for order {order}; need K >= {order + 2}")
    phi_f = jet_product(phi.restrict_to_half_line(), f)
    a = coeffs.a_float
    b = np.array(coeffs.b, dtype=float)
    reach = phi.support[1]
    orders = [m for m in (f.max_order, phi.max_order, coeffs.K - 1) if m is not None]
    max_order = min(orders)

    def evaluator(x, r_max):
        out = np.zeros((r_max + 1,) + x.shape, dtype=complex)
        right = x >= 0
        if np.any(right):
            out[:, right] = f.evaluator(x[right], r_max)
        left = ~right
        if np.any(left):
            xl = x[left]
            acc = np.zeros((r_max + 1,) + xl.shape, dtype=complex)
            powers = np.arange(r_max + 1)
            for k in range(coeffs.K):
                # only terms with b_k x inside supp(phi) contribute
                hit = -b[k] * xl < reach
                if not np.any(hit):
                    break
                d = phi_f.evaluator(b[k] * xl[hit], r_max)
                scale = a[k] * b[k] ** powers
                acc[:, hit] += scale[:, None] * d
            out[:, left] = acc
        return out

    bps = {0.0} | set(f.breakpoints)
    for p in phi.breakpoints:
        if p > 0:
            bps.update(p / bk for bk in coeffs.b)
    return Jet(
        evaluator,
        domain=Domain.WHOLE_LINE,
        max_order=max_order,
        beta=f.beta,
        real_valued=f.real_valued and phi.real_valued,
        breakpoints=tuple(sorted(bps)),
        label=f"E[{f.label}; K={coeffs.K}]",
    )


def scale_jet(f: Jet, a: float) -> Jet:
    """``(T_a f)(x) = f(a x)`` for ``a > 1`` on the half line."""
    a = float(a)
    if not a > 1.0:
        raise PreconditionError(f"scale_jet needs a > 1, got {a}")
    if f.domain is not Domain.HALF_LINE:
        raise PreconditionError("scale_jet expects a half-line jet")

    def evaluator(x, order):
        d = f.evaluator(a * x, order)
        return d * (a ** np.arange(order + 1)).reshape((-1,) + (1,) * x.ndim)

    return Jet(
        evaluator,
        domain=Domain.HALF_LINE,
        max_order=f.max_order,
        beta=f.beta,
        real_valued=f.real_valued,
        breakpoints=tuple(p / a for p in f.breakpoints),
        label=f"T_{a}[{f.label}]",
    )


def multiply_by_cutoff(phi: Jet, f: Jet) -> Jet:
    """``(S_phi f)(x) = phi(x) f(x)``; keeps ``f``'s domain."""
    if f.domain is Domain.HALF_LINE:
        phi = phi.restrict_to_half_line()
    return jet_product(phi, f)


def cutoff_multiplier_constant(phi: Jet, n: int, samples: int = 20001) -> float:
    """Sampled constant ``c`` with ``||S_phi f||_n <= c ||f||_n`` on the half line.

    Leibniz gives ``c = max_m sum_{r=m}^{n} C(r, m) d_{r-m}`` where
    ``d_j = sup_{x >= 0} |phi^(j)(x)| <x>^j``.
    """
    hi = phi.support[1] if phi.support is not None else 50.0
    x = np.linspace(0.0, hi, samples)
    d = np.abs(phi.derivatives(x, n)) * (1.0 + x * x) ** (np.arange(n + 1)[:, None] / 2)
    sup = d.max(axis=1)
    return max(sum(math.comb(r, m) * sup[r - m] for r in range(m, n + 1)) for m in range(n + 1))


def extension_bound_constant(phi: Jet, coeffs: SeeleyCoefficients, n: int) -> float:
    """``1 + c_phi * sum_k |a_k| |b_k|**n``, bounding ``||E f||_n / ||f||_n``."""
    return 1.0 + cutoff_multiplier_constant(phi, n) * coeffs.weighted_sum(n)
