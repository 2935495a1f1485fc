import math

import numpy as np
import pytest

from hsfc import (
    DomainError,
    GrowthEstimate,
    OperatorHandle,
    OrderError,
    PreconditionError,
    QuadratureConfig,
    QuadratureError,
    SingularResolventError,
    alternate_psi,
    bracket,
    bump,
    choose_taylor_order,
    exp_decay,
    gamma_apply,
    gz,
    hs_apply,
    jet_sum,
    matrix_function_oracle,
    resolvent,
)
from hsfc.hs_engine import gamma_apply_detailed, hs_apply_detailed

from conftest import diag01, jordan2

TOL = 1e-8


def fro(a):
    return float(np.linalg.norm(a))


def handle(m, floor=0.0):
    return OperatorHandle(np.asarray(m, dtype=float), spectral_floor=floor).with_growth()


# --- resolvent --------------------------------------------------------------------

def test_resolvent_examples():
    np.testing.assert_allclose(resolvent(OperatorHandle(diag01()), 1j),
                               np.diag([-1j, (-1 - 1j) / 2]), atol=1e-15)
    np.testing.assert_allclose(resolvent(OperatorHandle(np.zeros((1, 1))), 1j), [[-1j]], atol=1e-15)
    np.testing.assert_allclose(resolvent(OperatorHandle(jordan2()), 1.0), [[1, 1], [0, 1]], atol=1e-15)


def test_resolvent_residual(operators):
    for H in operators.values():
        for z in (2j, -1 + 1j, 3 + 0.5j, 17 + 1e-3j):
            R = resolvent(H, z)
            res = (z * np.eye(H.dim) - H.entries) @ R - np.eye(H.dim)
            assert fro(res) <= 1e-10 * fro(R)


def test_resolvent_singular():
    with pytest.raises(SingularResolventError):
        resolvent(OperatorHandle(diag01()), 1.0)
    with pytest.raises(SingularResolventError):
        resolvent(OperatorHandle(diag01()), 1e-17j)


# --- configuration ------------------------------------------------------------------

def test_choose_taylor_order_examples():
    assert choose_taylor_order(GrowthEstimate(1.0, 0.0)) == 1
    assert choose_taylor_order(GrowthEstimate(1.0, 1.0)) == 2
    assert choose_taylor_order(GrowthEstimate(1.0, 2.5)) == 4


@pytest.mark.parametrize("kwargs", [dict(tol=0.0), dict(n=-1), dict(y_floor=-1e-3), dict(x_margin=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(PreconditionError):
        QuadratureConfig(**kwargs)


def test_operator_validation():
    with pytest.raises(PreconditionError):
        OperatorHandle(np.zeros((2, 3)))
    with pytest.raises(PreconditionError):
        OperatorHandle(np.array([[np.nan]]))
    with pytest.raises(PreconditionError):
        OperatorHandle(np.diag([-1.0, 1.0]), spectral_floor=0.0)
    H = OperatorHandle(np.diag([2.0, 3.0]))
    with pytest.raises(Exception):
        H.spectral_floor = 1.0


# --- worked examples -----------------------------------------------------------------

def test_hs_examples():
    H = handle(diag01())
    got = hs_apply(gz(2j), H, QuadratureConfig(tol=TOL))
    assert fro(got - np.diag([1 / 2j, 1 / (2j - 1)])) <= TOL
    got = hs_apply(bump(0.25, 0.5, center=-2.5), H, QuadratureConfig(tol=TOL))
    assert fro(got) <= TOL
    got = hs_apply(bracket(-1), handle(np.zeros((1, 1))), QuadratureConfig(tol=TOL))
    assert abs(got[0, 0] - 1) <= TOL


def test_gamma_examples():
    cfg = QuadratureConfig(tol=TOL)
    H = handle(diag01())
    got = gamma_apply(exp_decay(1.0), H, cfg)
    assert fro(got - np.diag([1, math.exp(-1)])) <= TOL
    restricted = gamma_apply(bracket(-1).restrict_to_half_line(), H, cfg)
    assert fro(restricted - hs_apply(bracket(-1), H, cfg)) <= 2 * TOL
    J = handle(jordan2())
    got = gamma_apply(exp_decay(1.0), J, cfg)
    assert fro(got - np.array([[1, -1], [0, 1]])) <= TOL


def test_reported_error_within_tolerance(operators):
    res = hs_apply_detailed(bracket(-1), operators["diag01"], QuadratureConfig(tol=TOL))
    assert res.error <= TOL
    assert res.n == 1 and res.cells > 0 and res.evaluations > 0
    assert 0 <= res.band_error <= res.error
    res = gamma_apply_detailed(exp_decay(1.0), operators["jordan2"], QuadratureConfig(tol=TOL))
    assert res.error <= TOL
    assert res.n == 2


# --- invariants ------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["diag01", "sym8", "jordan2"])
def test_resolvent_identity_off_axis_point(operators, name):
    H = operators[name]
    w = 3 + 0.5j
    got = hs_apply(gz(w), H, QuadratureConfig(tol=TOL))
    assert fro(got - resolvent(H, w)) <= TOL


@pytest.mark.parametrize("name", ["diag01", "jordan2"])
def test_linearity(operators, name):
    H = operators[name]
    cfg = QuadratureConfig(tol=TOL)
    f, g, alpha = bracket(-1), gz(-1 + 1j), 0.7 - 2j
    lhs = hs_apply(jet_sum(f, g, alpha), H, cfg)
    rhs = alpha * hs_apply(f, H, cfg) + hs_apply(g, H, cfg)
    assert fro(lhs - rhs) <= 2 * TOL


@pytest.mark.parametrize("name", ["diag01", "jordan2"])
def test_order_independence(operators, name):
    H = operators[name]
    n = choose_taylor_order(H.growth)
    a = hs_apply(bracket(-1), H, QuadratureConfig(tol=TOL, n=n))
    b = hs_apply(bracket(-1), H, QuadratureConfig(tol=TOL, n=n + 1))
    c = hs_apply(bracket(-1), H, QuadratureConfig(tol=TOL, n=n), psi=alternate_psi())
    assert fro(a - b) <= 2 * TOL
    assert fro(a - c) <= 2 * TOL


def test_agrees_with_oracle_on_non_normal_diagonalizable():
    V = np.array([[1.0, 1.0], [0.0, 1.0]])
    H = handle(V @ diag01() @ np.linalg.inv(V))
    got = hs_apply(bracket(-1), H, QuadratureConfig(tol=TOL))
    want = V @ np.diag([1, 2 ** -0.5]) @ np.linalg.inv(V)
    assert fro(got - want) <= 10 * TOL
    assert fro(matrix_function_oracle(H, bracket(-1)) - want) <= 1e-14


def test_shifted_spectrum_gamma():
    H = handle(np.diag([0.5, 4.0]), floor=0.25)
    got = gamma_apply(exp_decay(0.5), H, QuadratureConfig(tol=TOL))
    assert fro(got - np.diag(np.exp([-0.25, -2.0]))) <= 10 * TOL


def test_thread_count_does_not_change_result(operators, monkeypatch):
    H = operators["sym8"]
    cfg = QuadratureConfig(tol=1e-6)
    monkeypatch.setenv("HSFC_THREADS", "1")
    a = hs_apply(bracket(-1), H, cfg)
    monkeypatch.setenv("HSFC_THREADS", "4")
    b = hs_apply(bracket(-1), H, cfg)
    assert np.array_equal(a, b)


# --- errors ------------------------------------------------------------------------------

def test_hs_errors():
    cfg = QuadratureConfig(tol=TOL)
    bare = OperatorHandle(diag01())
    with pytest.raises(PreconditionError):
        hs_apply(bracket(-1), bare, cfg)
    H = handle(jordan2())
    with pytest.raises(PreconditionError):
        hs_apply(bracket(-1), H, QuadratureConfig(n=1))
    with pytest.raises(DomainError):
        hs_apply(exp_decay(1.0), H, cfg)
    with pytest.raises(PreconditionError):
        hs_apply(bracket(0.5), H, cfg)
    from hsfc import Jet
    capped = Jet(bracket(-1).evaluator, max_order=1, beta=-1.0)
    with pytest.raises(OrderError):
        hs_apply(capped, H, cfg)
    rot = OperatorHandle(np.array([[0.0, -1.0], [1.0, 0.0]]))
    rot = OperatorHandle(rot.entries, growth=GrowthEstimate(1.05, 0.0))
    with pytest.raises(PreconditionError):
        hs_apply(bracket(-1), rot, cfg)


def test_gamma_errors():
    cfg = QuadratureConfig(tol=TOL)
    with pytest.raises(PreconditionError):
        gamma_apply(exp_decay(1.0), OperatorHandle(diag01()).with_growth(), cfg)
    H = handle(diag01())
    with pytest.raises(PreconditionError):
        gamma_apply(bracket(-1), H, cfg)
    with pytest.raises(PreconditionError):
        gamma_apply(exp_decay(1.0), H, cfg, K=2)


def test_non_convergence_is_reported():
    H = handle(diag01())
    cfg = QuadratureConfig(tol=1e-14, max_cells=50)
    with pytest.raises(QuadratureError) as info:
        hs_apply(gz(2j), H, cfg)
    assert info.value.exit_code == 3
