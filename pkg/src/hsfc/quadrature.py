"""Adaptive Gauss-Kronrod quadrature in one and two dimensions.

Both integrators refine globally: every round they split the cells with the
largest error estimates until the summed estimate drops below the requested
tolerance. Integrands are evaluated in vectorized batches.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError, QuadratureError

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def thread_count() -> int:
    """Worker count from ``HSFC_THREADS`` (0 or unset means automatic)."""
    raw = os.environ.get("HSFC_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(os.cpu_count() or 1, 8)
    return n


def compensated_sum(terms: np.ndarray) -> np.ndarray:
    """Neumaier summation along axis 0, elementwise over the remaining axes."""
    terms = np.asarray(terms)
    if terms.shape[0] == 0:
        return np.zeros(terms.shape[1:], dtype=terms.dtype)
    if np.iscomplexobj(terms):
        return compensated_sum(terms.real) + 1j * compensated_sum(terms.imag)
    total = np.zeros(terms.shape[1:])
    comp = np.zeros(terms.shape[1:])
    for term in terms:
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
    return total + comp


@dataclass
class QuadResult:
    value: complex | np.ndarray
    error: float
    cells: int
    evaluations: int
    info: dict = field(default_factory=dict)


def _select_for_split(err: np.ndarray, tol: float) -> np.ndarray:
    """Largest-error cells whose refinement should bring the total under tol."""
    order = np.argsort(-err, kind="stable")
    excess = err.sum() - 0.5 * tol
    cum = np.cumsum(err[order])
    count = int(np.searchsorted(cum, excess)) + 1
    return order[:max(1, min(count, len(order)))]


def integrate_1d(
    func: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    tol: float,
    max_depth: int = 60,
    max_intervals: int = 20000,
) -> QuadResult:
    """Integrate ``func`` over ``[breakpoints[0], breakpoints[-1]]``.

    ``func`` maps an array of abscissae to values of the same shape. The
    interior breakpoints seed the initial subdivision. Raises
    :class:`DivergenceError` when the unresolved error sits at an end of the
    range (a non-decaying tail on a compactified axis) and
    :class:`QuadratureError` otherwise.
    """
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    if len(pts) < 2:
        return QuadResult(0.0, 0.0, 0, 0)
    lo, hi = pts[:-1].copy(), pts[1:].copy()
    depth = np.zeros(len(lo), dtype=int)
    lo_end, hi_end = pts[0], pts[-1]

    def evaluate(a, b):
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        x = mid[:, None] + half[:, None] * NODES[None, :]
        with np.errstate(all="ignore"):
            fx = np.asarray(func(x.ravel())).reshape(x.shape)
        k = (fx * KRONROD_WEIGHTS).sum(axis=1) * half
        g = (fx * GAUSS_WEIGHTS).sum(axis=1) * half
        e = np.abs(k - g)
        # a non-finite sample marks the interval as unresolved
        bad = ~np.isfinite(k) | ~np.isfinite(e)
        k[bad] = 0.0
        e[bad] = np.inf
        return k, e

    est, err = evaluate(lo, hi)
    evaluations = 15 * len(lo)
    while err.sum() > tol:
        pick = _select_for_split(err, tol)
        # stop at max_depth or when bisection no longer separates the nodes
        splittable = (depth[pick] < max_depth) & (
            hi[pick] - lo[pick] > 1e-12 * np.maximum(1.0, np.abs(lo[pick]))
        )
        hopeless = np.any(err[pick[~splittable]] > tol)
        pick = pick[splittable]
        if hopeless or len(pick) == 0 or len(lo) + len(pick) > max_intervals:
            worst = int(np.argmax(err))
            at_end = lo[worst] == lo_end or hi[worst] == hi_end
            cls = DivergenceError if at_end else QuadratureError
            raise cls(
                f"1-D quadrature stalled at error {err.sum():.3g} > tol {tol:.3g} "
                f"(worst interval [{lo[worst]:.6g}, {hi[worst]:.6g}])"
            )
        keep = np.ones(len(lo), dtype=bool)
        keep[pick] = False
        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        new_depth = np.concatenate([depth[pick], depth[pick]]) + 1
        new_est, new_err = evaluate(new_lo, new_hi)
        evaluations += 15 * len(new_lo)
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        depth = np.concatenate([depth[keep], new_depth])
        est = np.concatenate([est[keep], new_est])
        err = np.concatenate([err[keep], new_err])
    order = np.argsort(lo, kind="stable")
    value = compensated_sum(est[order][:, None])[0]
    return QuadResult(value, float(err.sum()), len(lo), evaluations)


class _Cells:
    """Leaf cells of the 2-D tree, stored column-wise."""

    def __init__(self, bounds, levels, est, err, ex, ey):
        self.bounds = bounds  # (n, 4): x0, x1, y0, y1
        self.levels = levels  # (n, 2): refinement level per axis
        self.est = est
        self.err = err
        self.ex = ex
        self.ey = ey

    def __len__(self):
        return len(self.err)

    def take(self, idx):
        return _Cells(self.bounds[idx], self.levels[idx], self.est[idx],
                      self.err[idx], self.ex[idx], self.ey[idx])

    @staticmethod
    def concat(parts):
        return _Cells(*(np.concatenate([getattr(p, a) for p in parts])
                        for a in ("bounds", "levels", "est", "err", "ex", "ey")))


def _split_cells(bounds, levels, ex, ey, max_depth):
    """Bisect along the axis carrying the larger error, or both when comparable."""
    x0, x1, y0, y1 = bounds.T
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    can_x = levels[:, 0] < max_depth
    can_y = levels[:, 1] < max_depth
    split_x = can_x & ((ex >= 0.5 * ey) | ~can_y)
    split_y = can_y & ((ey >= 0.5 * ex) | ~can_x)
    out_b, out_l = [], []
    for sx, sy in ((True, True), (True, False), (False, True)):
        m = (split_x == sx) & (split_y == sy)
        if not np.any(m):
            continue
        xs = [(x0[m], xm[m]), (xm[m], x1[m])] if sx else [(x0[m], x1[m])]
        ys = [(y0[m], ym[m]), (ym[m], y1[m])] if sy else [(y0[m], y1[m])]
        lv = levels[m] + np.array([int(sx), int(sy)])
        for a, b in xs:
            for c, d in ys:
                out_b.append(np.stack([a, b, c, d], axis=1))
                out_l.append(lv)
    if not out_b:
        return np.empty((0, 4)), np.empty((0, 2), dtype=int)
    return np.concatenate(out_b), np.concatenate(out_l)


def integrate_2d(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_breaks: Sequence[float],
    y_breaks: Sequence[float],
    value_shape: tuple[int, ...],
    tol: float,
    max_depth: int = 40,
    max_cells: int = 100000,
    chunk_cells: int = 64,
    retire_fraction: float = 1e-6,
) -> QuadResult:
    """Adaptive tensor Gauss-Kronrod cubature of an array-valued integrand.

    ``func(x, y)`` receives flat node arrays of length N and returns an array
    of shape ``(N,) + value_shape``. The error of a cell is the Frobenius
    norm of the difference between the 15x15 Kronrod and 7x7 Gauss tensor
    estimates; mixed rules give per-axis error shares that decide which axis
    to bisect. Cells whose error falls below ``retire_fraction * tol`` are
    folded into a running sum and dropped from the tree.
    """
    xb = np.unique(np.asarray(x_breaks, dtype=float))
    yb = np.unique(np.asarray(y_breaks, dtype=float))
    gx, gy = np.meshgrid(np.arange(len(xb) - 1), np.arange(len(yb) - 1), indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    bounds = np.stack([xb[gx], xb[gx + 1], yb[gy], yb[gy + 1]], axis=1)
    levels = np.zeros((len(bounds), 2), dtype=int)

    wkk = np.outer(KRONROD_WEIGHTS, KRONROD_WEIGHTS).ravel()
    wgg = np.outer(GAUSS_WEIGHTS, GAUSS_WEIGHTS).ravel()
    wgk = np.outer(GAUSS_WEIGHTS, KRONROD_WEIGHTS).ravel()
    wkg = np.outer(KRONROD_WEIGHTS, GAUSS_WEIGHTS).ravel()
    rule = np.stack([wkk, wgg, wgk, wkg])  # (4, 225)
    nx = np.repeat(NODES, 15)
    ny = np.tile(NODES, 15)
    workers = thread_count()
    executor = ThreadPoolExecutor(workers) if workers > 1 else None
    evaluations = 0

    def eval_chunk(b):
        hx = 0.5 * (b[:, 1] - b[:, 0])
        hy = 0.5 * (b[:, 3] - b[:, 2])
        x = (0.5 * (b[:, 0] + b[:, 1]))[:, None] + hx[:, None] * nx[None, :]
        y = (0.5 * (b[:, 2] + b[:, 3]))[:, None] + hy[:, None] * ny[None, :]
        with np.errstate(all="ignore"):
            fv = np.asarray(func(x.ravel(), y.ravel()))
        fv = fv.reshape((len(b), 225, -1))
        sums = np.einsum("rn,cnv->rcv", rule, fv) * (hx * hy)[None, :, None]
        kk, gg, gk, kg = sums
        err = np.linalg.norm(kk - gg, axis=1)
        ex = np.linalg.norm(kk - gk, axis=1)
        ey = np.linalg.norm(kk - kg, axis=1)
        # a non-finite sample marks the cell as unresolved
        bad = ~np.isfinite(kk).all(axis=1) | ~np.isfinite(err)
        if np.any(bad):
            kk[bad] = 0.0
            err[bad] = ex[bad] = ey[bad] = np.inf
        return kk, err, ex, ey

    def evaluate(b, lv):
        nonlocal evaluations
        evaluations += 225 * len(b)
        chunks = [b[i:i + chunk_cells] for i in range(0, len(b), chunk_cells)]
        if executor is not None and len(chunks) > 1:
            results = list(executor.map(eval_chunk, chunks))
        else:
            results = [eval_chunk(c) for c in chunks]
        kk, err, ex, ey = (np.concatenate([r[i] for r in results]) for i in range(4))
        return _Cells(b, lv, kk, err, ex, ey)

    retired_terms: list[np.ndarray] = []
    retired_err = 0.0
    frozen: list[_Cells] = []
    frozen_err = 0.0
    try:
        cells = evaluate(bounds, levels)
        while True:
            small = cells.err <= retire_fraction * tol
            if np.any(small):
                done = cells.take(small)
                retired_terms.append(done.est)
                retired_err += float(done.err.sum())
                cells = cells.take(~small)
            total_err = float(cells.err.sum()) + retired_err + frozen_err
            if total_err <= tol or len(cells) == 0:
                break
            if len(cells) + sum(len(f) for f in frozen) > max_cells:
                raise QuadratureError(
                    f"2-D quadrature exceeded {max_cells} cells at error "
                    f"{total_err:.3g} > tol {tol:.3g}"
                )
            budget = tol - retired_err - frozen_err
            pick = _select_for_split(cells.err, max(budget, 0.0))
            sel = cells.take(pick)
            stuck = (sel.levels >= max_depth).all(axis=1)
            if np.any(stuck):
                frozen.append(sel.take(stuck))
                frozen_err += float(sel.err[stuck].sum())
                if frozen_err > tol:
                    worst = sel.bounds[stuck][int(np.argmax(sel.err[stuck]))]
                    raise QuadratureError(
                        f"2-D quadrature hit max depth {max_depth} with unresolved "
                        f"error {frozen_err:.3g} > tol {tol:.3g} near cell {worst.tolist()}"
                    )
                sel = sel.take(~stuck)
            keep = np.ones(len(cells), dtype=bool)
            keep[pick] = False
            parts = [cells.take(keep)]
            if len(sel):
                nb, nl = _split_cells(sel.bounds, sel.levels, sel.ex, sel.ey, max_depth)
                parts.append(evaluate(nb, nl))
            cells = _Cells.concat(parts)
    finally:
        if executor is not None:
            executor.shutdown()

    leaves = _Cells.concat([cells] + frozen) if frozen else cells
    order = np.lexsort((leaves.bounds[:, 2], leaves.bounds[:, 0]))
    terms = [leaves.est[order]] + retired_terms
    total = compensated_sum(np.concatenate(terms)) if len(leaves) or retired_terms else None
    if total is None:
        total = np.zeros(int(np.prod(value_shape)), dtype=complex)
    error = float(leaves.err.sum()) + retired_err
    return QuadResult(
        total.reshape(value_shape),
        error,
        len(leaves) + sum(len(t) for t in retired_terms),
        evaluations,
        info={"frozen_error": frozen_err},
    )
