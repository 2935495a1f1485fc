"""Weighted norms ``||f||_n = sum_{r<=n} int |f^(r)(x)| <x>^(r-1) dx``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, OrderError, PreconditionError
from .jets import Domain, Jet
from .quadrature import integrate_1d


@dataclass(frozen=True)
class NormResult:
    value: float
    estimated_error: float
    terms: dict[int, float] = field(default_factory=dict)


def _to_compact(x: float) -> float:
    # inverse of x = u / (1 - u^2) on (-1, 1)
    if x == 0:
        return 0.0
    return (math.sqrt(1.0 + 4.0 * x * x) - 1.0) / (2.0 * x)


def _parse_line(line) -> Domain:
    if isinstance(line, Domain):
        return line
    try:
        return Domain(line)
    except ValueError:
        raise PreconditionError(f"line must be 'whole' or 'half', got {line!r}") from None


def an_norm(f: Jet, n: int, line: Domain | str = Domain.WHOLE_LINE, tol: float = 1e-8) -> NormResult:
    """Weighted norm over the whole line or over ``[0, inf)``.

    Each term is integrated on the compactified axis ``x = u / (1 - u^2)``,
    with extra grading at ``u = +-1`` when ``beta > -1``.
    Term ``r`` gets the tolerance ``tol / 2**(r+1)``, so the budget for the
    first terms does not depend on ``n`` and the value is monotone in ``n``.
    """
    line = _parse_line(line)
    if n < 0:
        raise PreconditionError(f"norm order must be nonnegative, got {n}")
    if not f.supports_order(n):
        raise OrderError(f"{f.label} supports order {f.max_order}, norm needs {n}")
    if not f.beta < 0:
        raise PreconditionError(f"norm needs decay exponent beta < 0, {f.label} has beta={f.beta}")
    if not tol > 0:
        raise PreconditionError(f"tolerance must be positive, got {tol}")
    if f.domain is Domain.HALF_LINE and line is Domain.WHOLE_LINE:
        raise DomainError(f"{f.label} lives on the half line; extend it before taking the whole-line norm")

    # grade the ends with u = 1 - (1 - |v|)^p so a slow tail <x>^(beta-1),
    # which behaves like (1-u)^(-beta-1) near u = 1, becomes bounded in v
    p = 1 if f.beta <= -1.0 else math.ceil(2.0 / -f.beta)
    lo = 0.0 if line is Domain.HALF_LINE else -1.0
    points = {lo, 0.0, 1.0}
    for bp in f.breakpoints:
        u = _to_compact(bp)
        points.add(math.copysign(1.0 - (1.0 - abs(u)) ** (1.0 / p), u))
    points = sorted(q for q in points if lo <= q <= 1.0)

    terms: dict[int, float] = {}
    errors = []
    for r in range(n + 1):
        def integrand(v, r=r):
            w = 1.0 - np.abs(v)
            gap = w ** p  # 1 - |u|, kept exact near the ends
            u = np.sign(v) * (1.0 - gap)
            one_m = gap * (2.0 - gap)
            x = u / one_m
            jac = (1.0 + u * u) / (one_m * one_m) * p * w ** (p - 1)
            d = np.abs(f.derivatives(x, r)[r])
            return d * (1.0 + x * x) ** ((r - 1) / 2.0) * jac

        res = integrate_1d(integrand, points, tol / 2 ** (r + 1))
        terms[r] = float(abs(res.value))
        errors.append(res.error)
    return NormResult(math.fsum(terms.values()), math.fsum(errors), terms)
