import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hsfc import (
    Domain,
    PreconditionError,
    an_norm,
    bracket,
    bump,
    exp_decay,
    gz,
    jet_sum,
    make_seeley_coefficients,
    multiply_by_cutoff,
    scale_jet,
    seeley_cutoff,
    seeley_extend,
    zero,
)
from hsfc.seeley import extension_bound_constant

from conftest import central_derivative, left_derivative_at_zero


def half_line_catalog():
    return {
        "exp": exp_decay(1.0),
        "bracket": bracket(-1.0).restrict_to_half_line(),
        "bump": bump(1.0, 2.0).restrict_to_half_line(),
        "zero": zero().restrict_to_half_line(),
        "gz": gz(-1.0, Domain.HALF_LINE),
    }


# --- coefficients -------------------------------------------------------------

def test_coefficient_examples():
    c1 = make_seeley_coefficients(1)
    assert c1.a == (1,) and c1.b == (-1,)
    c2 = make_seeley_coefficients(2)
    assert c2.a == (3, -2) and c2.b == (-1, -2)
    assert make_seeley_coefficients(3).moment_residuals() == [0, 0, 0]


@pytest.mark.parametrize("K", [1, 2, 5, 9, 16])
def test_coefficients_match_independent_exact_solve(K):
    V = sp.Matrix(K, K, lambda n, k: sp.Integer(-(2 ** k)) ** n)
    sol = V.LUsolve(sp.ones(K, 1))
    c = make_seeley_coefficients(K)
    assert [Fraction(int(s.p), int(s.q)) for s in sol] == list(c.a)


@pytest.mark.parametrize("K", range(1, 17))
def test_b_nodes_and_exact_moments(K):
    c = make_seeley_coefficients(K)
    assert c.b == tuple(-(2 ** k) for k in range(K))
    assert all(x > y for x, y in zip(c.b, c.b[1:]))
    assert all(isinstance(a, Fraction) for a in c.a)
    assert all(r == 0 for r in c.moment_residuals())


@pytest.mark.parametrize("K", range(1, 10))
def test_float_weights_keep_moments(K):
    c = make_seeley_coefficients(K)
    bound = 1e-12 if K <= 8 else 5e-12
    assert np.abs(c.float_moment_residuals()).max() <= bound
    exact = np.array([float(a) for a in c.a])
    np.testing.assert_allclose(c.a_float, exact, rtol=1e-11, atol=0)


def test_float_weights_beat_nearest_rounding():
    c = make_seeley_coefficients(8)
    b = [Fraction(v) for v in c.b]

    def worst(weights):
        return max(abs(sum(Fraction(float(x)) * bk ** n for x, bk in zip(weights, b)) - 1) for n in range(8))

    nearest = worst(c.a)
    assert nearest > 1e-9  # rounding to nearest alone misses the target
    assert worst(c.a_float) <= 1e-12


@pytest.mark.parametrize("K", [0, 65, -3, 2.5])
def test_coefficient_range(K):
    with pytest.raises(PreconditionError):
        make_seeley_coefficients(K)


# --- extension ----------------------------------------------------------------

def test_extension_examples():
    f = exp_decay(1.0)
    assert seeley_extend(f)(0.7) == pytest.approx(math.exp(-0.7), rel=1e-15)
    e2 = seeley_extend(f, coeffs=make_seeley_coefficients(2))
    assert e2(-0.5).real == pytest.approx(3 * math.exp(-0.5) - 2 * math.exp(-1), rel=1e-14)
    for K in (1, 4, 12):
        assert seeley_extend(f, coeffs=make_seeley_coefficients(K))(-3.0) == 0


def test_extension_errors():
    with pytest.raises(PreconditionError):
        seeley_extend(bracket(-1.0))
    with pytest.raises(PreconditionError):
        seeley_extend(exp_decay(1.0), coeffs=make_seeley_coefficients(4), order=3)
    with pytest.raises(PreconditionError):
        seeley_extend(exp_decay(1.0), phi=seeley_cutoff(plateau_end=0.8))
    with pytest.raises(PreconditionError):
        seeley_extend(exp_decay(1.0), phi=bump(1.0, 2.0))


def test_compact_tail_is_exactly_zero():
    xs = -np.geomspace(2.0, 1e6, 200)
    for f in half_line_catalog().values():
        ext = seeley_extend(f, coeffs=make_seeley_coefficients(10))
        assert np.all(ext.derivatives(xs, 4) == 0)


def test_left_side_matches_finite_sum_on_plateau():
    # for |x| <= 2^-K every b_k x sits on the plateau of phi
    c = make_seeley_coefficients(8)
    ext = seeley_extend(exp_decay(1.0), coeffs=c)
    xs = -np.linspace(1e-6, 2.0 ** -8, 9)
    for r in range(5):
        want = sum(float(a) * b ** r * (-1) ** r * np.exp(-b * xs) for a, b in zip(c.a, c.b))
        np.testing.assert_allclose(ext.derivatives(xs, r)[r].real, want, rtol=1e-11)


def test_derivative_matching_at_zero():
    ext = seeley_extend(exp_decay(1.0), coeffs=make_seeley_coefficients(8))
    for r in range(5):
        assert abs(left_derivative_at_zero(ext, r) - (-1) ** r) <= 1e-5


def test_left_limits_match_up_to_order_K_minus_1():
    # the K-th left derivative is of size sum |a_k| 2^{kK}, so the limit is taken at a tiny x
    K = 8
    ext = seeley_extend(exp_decay(1.0), coeffs=make_seeley_coefficients(K))
    left = ext.derivatives(np.array([-1e-300]), K - 1)[:, 0].real
    np.testing.assert_allclose(left, [(-1) ** r for r in range(K)], rtol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.sampled_from(["exp", "bracket", "bump", "gz"]),
       st.sampled_from(["exp", "bracket", "bump", "gz"]))
def test_extension_is_linear(alpha, i, j):
    cat = half_line_catalog()
    f, g = cat[i], cat[j]
    c = make_seeley_coefficients(7)
    xs = np.linspace(-2.5, 3.0, 64)
    lhs = seeley_extend(jet_sum(f, g, alpha), coeffs=c).derivatives(xs, 3)
    rhs = alpha * seeley_extend(f, coeffs=c).derivatives(xs, 3) + seeley_extend(g, coeffs=c).derivatives(xs, 3)
    scale = np.abs(rhs).max(axis=1, keepdims=True) + 1e-300
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * scale + 1e-15)


def test_extension_is_smooth_by_finite_differences():
    ext = seeley_extend(exp_decay(1.0), coeffs=make_seeley_coefficients(8))
    for x in (-1.7, -0.9, -0.3, -0.05, -0.004):
        for r in range(1, 5):
            fd = central_derivative(lambda s: ext(s, r - 1).real, x, h=1e-5)
            assert abs(fd - ext(x, r).real) <= 1e-6 * max(1.0, abs(ext(x, r)))


# --- scale and multiply ---------------------------------------------------------

def test_scale_examples():
    f = exp_decay(1.0)
    assert scale_jet(f, 2)(1.0) == pytest.approx(math.exp(-2), rel=1e-15)
    assert scale_jet(f, 2)(1.0, 1) == pytest.approx(-2 * math.exp(-2), rel=1e-15)
    z = scale_jet(zero().restrict_to_half_line(), 3.5)
    assert np.all(z.derivatives(np.linspace(0, 9, 10), 3) == 0)
    for a in (1.0, 0.5, -2.0):
        with pytest.raises(PreconditionError):
            scale_jet(f, a)
    with pytest.raises(PreconditionError):
        scale_jet(bracket(-1), 2)


def test_multiply_examples():
    f = exp_decay(1.0)
    phi = bump(1.0, 2.0)
    s = multiply_by_cutoff(phi, f)
    assert s.domain is Domain.HALF_LINE
    assert s(0.5) == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert s(3.0) == 0
    psi = phi(1.5).real
    assert 0 < psi < 1
    assert s(1.5) == pytest.approx(psi * math.exp(-1.5), rel=1e-14)


# --- norm bounds ------------------------------------------------------------------

@pytest.mark.parametrize("name", ["exp", "bracket", "bump", "zero", "gz"])
def test_scaling_norm_bound(name):
    f = half_line_catalog()[name]
    tol = 1e-8
    scaled = an_norm(scale_jet(f, 2), 3, "half", tol).value
    base = an_norm(f, 3, "half", tol).value
    assert scaled <= 8 * base + tol


@pytest.mark.parametrize("name", ["exp", "bracket", "bump", "gz"])
def test_extension_norm_bound(name):
    f = half_line_catalog()[name]
    n, K = 2, 6
    c = make_seeley_coefficients(K)
    C = extension_bound_constant(seeley_cutoff(), c, n)
    ext = an_norm(seeley_extend(f, coeffs=c), n, "whole", 1e-7).value
    base = an_norm(f, n, "half", 1e-7).value
    assert ext <= C * base + 1e-6
    assert ext / base < C
