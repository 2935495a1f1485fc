"""Smooth functions represented by exact derivative evaluators.

A :class:`Jet` wraps a vectorized evaluator ``(x, order) -> array`` that
returns every derivative ``f, f', ..., f^(order)`` at the points ``x``.
Nothing in the package differentiates numerically; each builtin knows its
derivatives in closed form or through an exact recurrence.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import CatalogError, DomainError, OrderError, PreconditionError

Evaluator = Callable[[np.ndarray, int], np.ndarray]


class Domain(enum.Enum):
    WHOLE_LINE = "whole"
    HALF_LINE = "half"

    def intersect(self, other: "Domain") -> "Domain":
        if Domain.HALF_LINE in (self, other):
            return Domain.HALF_LINE
        return Domain.WHOLE_LINE


def japanese_bracket(z):
    """Return ``<z> = (1 + |z|^2)^(1/2)``; works elementwise on arrays."""
    return np.sqrt(1.0 + np.abs(z) ** 2)


@dataclass(frozen=True)
class Jet:
    """A smooth function known through its derivatives.

    ``evaluator(x, order)`` must return a complex array of shape
    ``(order + 1,) + x.shape`` holding ``f^(r)(x)`` for ``r = 0..order``.
    ``beta`` is the claimed decay exponent, ``|f^(r)(x)| <= c_r <x>^(beta - r)``.
    ``breakpoints`` lists abscissae where the function (or one of its
    derivatives) changes character; quadrature seeds subdivisions there.
    ``plateau``/``support`` are only set for cutoff bumps.
    """

    evaluator: Evaluator
    domain: Domain = Domain.WHOLE_LINE
    max_order: int | None = None
    beta: float = -1.0
    decay_constants: tuple[float, ...] | None = None
    real_valued: bool = True
    breakpoints: tuple[float, ...] = ()
    label: str = ""
    plateau: tuple[float, float] | None = None
    support: tuple[float, float] | None = None

    def supports_order(self, order: int) -> bool:
        return self.max_order is None or order <= self.max_order

    def derivatives(self, x, order: int) -> np.ndarray:
        """All derivatives up to ``order`` at ``x``, shape ``(order+1,) + shape(x)``."""
        if order < 0:
            raise OrderError(f"derivative order must be nonnegative, got {order}")
        if not self.supports_order(order):
            raise OrderError(
                f"{self.label or 'jet'} supports derivatives up to order "
                f"{self.max_order}, requested {order}"
            )
        x = np.asarray(x, dtype=float)
        if self.domain is Domain.HALF_LINE and np.any(x < 0):
            raise DomainError(
                f"half-line jet {self.label!r} evaluated at x < 0; extend it first"
            )
        return self.evaluator(x, order)

    def __call__(self, x, r: int = 0):
        out = self.derivatives(x, r)[r]
        return out[()] if out.ndim == 0 else out

    def restrict_to_half_line(self) -> "Jet":
        return replace(
            self,
            domain=Domain.HALF_LINE,
            breakpoints=tuple(p for p in self.breakpoints if p >= 0),
            label=f"{self.label}|half" if self.label else "half",
        )


def _zero_evaluator(x, order):
    return np.zeros((order + 1,) + x.shape, dtype=complex)


def zero() -> Jet:
    return Jet(_zero_evaluator, beta=-math.inf, label="zero")


def gz(z: complex, domain: Domain = Domain.WHOLE_LINE) -> Jet:
    """Resolvent function ``g_z(x) = 1/(z - x)``.

    Derivatives are ``r! (z - x)^-(r+1)``.
    """
    z = complex(z)
    if z.imag == 0.0:
        if domain is Domain.WHOLE_LINE:
            raise PreconditionError("gz needs a non-real z on the whole line")
        if z.real >= 0.0:
            raise PreconditionError("gz on the half line needs z outside [0, inf)")

    def evaluator(x, order):
        w = 1.0 / (z - x)
        out = np.empty((order + 1,) + x.shape, dtype=complex)
        term = w
        for r in range(order + 1):
            out[r] = term
            term = term * w * (r + 1)
        return out

    return Jet(
        evaluator,
        domain=domain,
        beta=-1.0,
        real_valued=False,
        label=f"gz({z})",
    )


@lru_cache(maxsize=None)
def _bracket_polys(beta: float, order: int) -> tuple[np.polynomial.Polynomial, ...]:
    # f^(r) = p_r(x) <x>^(beta - 2r), p_{r+1} = (1+x^2) p_r' + (beta - 2r) x p_r
    one_plus_x2 = np.polynomial.Polynomial([1.0, 0.0, 1.0])
    x = np.polynomial.Polynomial([0.0, 1.0])
    polys = [np.polynomial.Polynomial([1.0])]
    for r in range(order):
        p = polys[-1]
        polys.append(one_plus_x2 * p.deriv() + (beta - 2 * r) * x * p)
    return tuple(polys)


def bracket(beta: float) -> Jet:
    """``<x>^beta``; lies in the slowly decreasing algebra when ``beta < 0``."""
    beta = float(beta)

    def evaluator(x, order):
        polys = _bracket_polys(beta, order)
        jb2 = 1.0 + x * x
        out = np.empty((order + 1,) + x.shape, dtype=complex)
        for r, p in enumerate(polys):
            out[r] = p(x) * jb2 ** ((beta - 2 * r) / 2)
        return out

    return Jet(evaluator, beta=beta, label=f"bracket({beta})")


def exp_decay(t: float) -> Jet:
    """Half-line ``e^(-t x)`` for ``t > 0`` (heat semigroup symbol)."""
    t = float(t)
    if not t > 0:
        raise PreconditionError(f"exp needs t > 0, got {t}")

    def evaluator(x, order):
        e = np.exp(-t * x)
        return np.stack([(-t) ** r * e for r in range(order + 1)]).astype(complex)

    return Jet(
        evaluator,
        domain=Domain.HALF_LINE,
        beta=-1.0,
        breakpoints=(0.0,),
        label=f"exp({t})",
    )


@lru_cache(maxsize=None)
def _q_poly(m: int) -> tuple[int, ...]:
    """Integer coefficients of q_m with h^(m)(t) = q_m(1/t) exp(-1/t)."""
    if m == 0:
        return (1,)
    q = _q_poly(m - 1)
    dq = [j * c for j, c in enumerate(q)][1:]
    diff = [c - (dq[j] if j < len(dq) else 0) for j, c in enumerate(q)]
    return (0, 0) + tuple(diff)


def _h_derivatives(t: np.ndarray, order: int, shift=0.0) -> np.ndarray:
    """Derivatives of ``h(t) = exp(-1/t)`` times ``exp(shift)`` (``h = 0`` for ``t <= 0``).

    ``shift`` is a per-point constant. Scaling both stacks of a quotient by the
    same pointwise constant leaves its derivatives unchanged and avoids
    underflow when both edges are close.
    """
    out = np.zeros((order + 1,) + t.shape)
    pos = t > 0
    if not np.any(pos):
        return out
    u = 1.0 / t[pos]
    log_u = np.log(u)
    offset = np.broadcast_to(shift, t.shape)[pos]
    for m in range(order + 1):
        acc = np.zeros_like(u)
        for j, c in enumerate(_q_poly(m)):
            if c:
                acc += float(c) * np.exp(j * log_u - u + offset)
        out[m][pos] = acc
    return out


def _smooth_quotient(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Derivatives of ``A / (A + B)`` from stacked derivatives of A and B."""
    s = a + b
    q = np.empty_like(a)
    for r in range(a.shape[0]):
        acc = a[r].copy()
        for m in range(1, r + 1):
            acc -= math.comb(r, m) * s[m] * q[r - m]
        q[r] = acc / s[0]
    return q


def _signed(d: np.ndarray, sign: float) -> np.ndarray:
    # derivatives of g(sign * s) given derivatives of g at sign * s
    powers = sign ** np.arange(d.shape[0])
    return d * powers.reshape((-1,) + (1,) * (d.ndim - 1))


def cutoff(
    left_support: float,
    left_plateau: float,
    right_plateau: float,
    right_support: float,
) -> Jet:
    """Smooth cutoff equal to 1 on the plateau and 0 outside the support.

    Each edge is ``h(d_out) / (h(d_out) + h(d_in))`` with ``h(t) = exp(-1/t)``,
    where ``d_out`` is the distance to the support edge and ``d_in`` the
    distance to the plateau edge.
    """
    ls, lp, rp, rs = map(float, (left_support, left_plateau, right_plateau, right_support))
    if not (ls < lp <= rp < rs):
        raise PreconditionError(
            f"cutoff needs support ({ls}, {rs}) strictly containing plateau [{lp}, {rp}]"
        )

    def evaluator(x, order):
        shape = x.shape
        x = x.reshape(-1)
        out = np.zeros((order + 1, x.size))
        out[0][(x >= lp) & (x <= rp)] = 1.0
        right = (x > rp) & (x < rs)
        if np.any(right):
            s = x[right]
            shift = np.minimum(1.0 / (rs - s), 1.0 / (s - rp))
            a = _signed(_h_derivatives(rs - s, order, shift), -1.0)
            b = _h_derivatives(s - rp, order, shift)
            out[:, right] = _smooth_quotient(a, b)
        left = (x > ls) & (x < lp)
        if np.any(left):
            s = x[left]
            shift = np.minimum(1.0 / (s - ls), 1.0 / (lp - s))
            a = _h_derivatives(s - ls, order, shift)
            b = _signed(_h_derivatives(lp - s, order, shift), -1.0)
            out[:, left] = _smooth_quotient(a, b)
        return out.reshape((order + 1,) + shape).astype(complex)

    return Jet(
        evaluator,
        beta=-math.inf,
        breakpoints=tuple(sorted({ls, lp, rp, rs})),
        label=f"cutoff({ls},{lp},{rp},{rs})",
        plateau=(lp, rp),
        support=(ls, rs),
    )


def bump(inner: float, outer: float, center: float = 0.0) -> Jet:
    """Symmetric bump: 1 on ``|s - center| <= inner``, 0 on ``|s - center| >= outer``."""
    inner, outer, center = float(inner), float(outer), float(center)
    if inner > outer:
        raise PreconditionError(f"bump needs inner <= outer, got {inner} > {outer}")
    if inner == outer or inner < 0:
        raise PreconditionError(f"bump needs 0 <= inner < outer, got ({inner}, {outer})")
    jet = cutoff(center - outer, center - inner, center + inner, center + outer)
    return replace(jet, label=f"bump({inner},{outer},{center})")


def jet_product(f: Jet, g: Jet) -> Jet:
    """Pointwise product; derivatives by the Leibniz rule."""
    domain = f.domain.intersect(g.domain)
    orders = [m for m in (f.max_order, g.max_order) if m is not None]

    def evaluator(x, order):
        fd = f.evaluator(x, order)
        gd = g.evaluator(x, order)
        out = np.zeros_like(fd)
        for r in range(order + 1):
            for m in range(r + 1):
                out[r] += math.comb(r, m) * fd[r - m] * gd[m]
        return out

    if domain is Domain.HALF_LINE:
        bps = {p for p in f.breakpoints + g.breakpoints if p >= 0}
    else:
        bps = set(f.breakpoints + g.breakpoints)
    return Jet(
        evaluator,
        domain=domain,
        max_order=min(orders) if orders else None,
        beta=f.beta + g.beta,
        real_valued=f.real_valued and g.real_valued,
        breakpoints=tuple(sorted(bps)),
        label=f"({f.label})*({g.label})",
    )


def jet_sum(f: Jet, g: Jet, alpha: complex = 1.0) -> Jet:
    """``alpha * f + g``."""
    domain = f.domain.intersect(g.domain)
    orders = [m for m in (f.max_order, g.max_order) if m is not None]

    def evaluator(x, order):
        return alpha * f.evaluator(x, order) + g.evaluator(x, order)

    bps = set(f.breakpoints + g.breakpoints)
    if domain is Domain.HALF_LINE:
        bps = {p for p in bps if p >= 0}
    return Jet(
        evaluator,
        domain=domain,
        max_order=min(orders) if orders else None,
        beta=max(f.beta, g.beta),
        real_valued=f.real_valued and g.real_valued and complex(alpha).imag == 0,
        breakpoints=tuple(sorted(bps)),
        label=f"{alpha}*({f.label})+({g.label})",
    )


def make_builtin(name: str, **params) -> Jet:
    """Build a catalog function by name.

    Names: ``gz`` (``z`` or ``re``/``im``), ``bracket`` (``beta``),
    ``exp`` (``t``), ``bump`` (``inner``, ``outer``, optional ``center``)
    and ``zero``.
    """
    try:
        if name == "gz":
            if "z" in params:
                z = complex(params.pop("z"))
            else:
                z = complex(float(params.pop("re", 0.0)), float(params.pop("im", 0.0)))
            domain = Domain(params.pop("domain", Domain.WHOLE_LINE))
            jet = gz(z, domain)
        elif name == "bracket":
            jet = bracket(params.pop("beta"))
        elif name == "exp":
            jet = exp_decay(params.pop("t"))
        elif name == "bump":
            jet = bump(params.pop("inner"), params.pop("outer"), params.pop("center", 0.0))
        elif name == "zero":
            jet = zero()
        else:
            raise CatalogError(f"unknown builtin {name!r}")
    except KeyError as exc:
        raise CatalogError(f"builtin {name!r} is missing parameter {exc.args[0]!r}") from None
    if params:
        raise CatalogError(f"unexpected parameters for {name!r}: {sorted(params)}")
    return jet


_SPEC_RE = re.compile(r"^\s*([a-z]+)\s*(?::(.*))?$")


def parse_jet_spec(spec: str) -> Jet:
    """Parse a catalog string such as ``gz:re=0,im=2`` or ``bracket:beta=-1``."""
    m = _SPEC_RE.match(spec)
    if not m:
        raise CatalogError(f"malformed function spec {spec!r}")
    name, rest = m.group(1), m.group(2)
    params: dict[str, float] = {}
    if rest and rest.strip():
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise CatalogError(f"malformed parameter {item!r} in {spec!r}")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise CatalogError(f"parameter {key.strip()!r} is not a number: {value!r}") from None
    return make_builtin(name, **params)
