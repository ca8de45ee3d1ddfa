import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from qlbm.chebsolver import (
    ChebyshevPoly, ParameterError, SpectralOverflowError, clenshaw_apply, clenshaw_solve,
    degree_for, inverse_poly, poly_sup_error, sup_grid,
)
from qlbm.timesystem import assemble, forward_solve, relative_error

from conftest import system


def _toy(seed=0, d=6, nt=4, W=1):
    rng = np.random.default_rng(seed)
    A = sp.csr_matrix(0.5 * rng.random((d, d)) / d + 0.5 * np.eye(d))
    return assemble(A, rng.random(d), rng.random(d), nt, W, 0.5)


def _svd(s):
    return np.linalg.svd(s.matrix().toarray())


def test_parameter_errors():
    with pytest.raises(ParameterError):
        inverse_poly(1.0, 11)
    with pytest.raises(ParameterError):
        inverse_poly(10.0, 10)


def test_odd_coefficients():
    p = inverse_poly(37.0, 301)
    assert np.all(p.coeffs[0::2] == 0)
    x = np.linspace(-1, 1, 101)
    assert np.allclose(p(-x), -p(x), atol=1e-14)


def test_value_at_one():
    p = inverse_poly(100.0, 1001)
    assert abs(p(1.0) - 1 / 100) <= poly_sup_error(p)


def test_sup_error_examples():
    assert poly_sup_error(inverse_poly(10.0, 101)) <= 0.05
    assert poly_sup_error(inverse_poly(1.5, 51)) <= 1e-6


def test_sup_error_decreases_with_degree():
    errs = [poly_sup_error(inverse_poly(50.0, degree_for(50.0, c))) for c in (1, 3, 10)]
    assert errs[0] + 1e-12 >= errs[1] and errs[1] + 1e-12 >= errs[2]


def test_degree_one_against_calculus():
    kappa, a1 = 4.0, 0.7
    p = ChebyshevPoly(kappa, 1, np.array([0.0, a1]))
    # |a1 x - 1/(kappa x)| is monotone on each side of its root, so the max sits at an endpoint
    exact = max(abs(a1 * x - 1 / (kappa * x)) for x in (1 / kappa, 1.0))
    assert poly_sup_error(p) == pytest.approx(exact, abs=1e-10)


def test_grid_endpoints():
    g = sup_grid(20.0)
    assert g.size == 10_000 and g.min() == pytest.approx(0.05) and g.max() == pytest.approx(1.0)


def test_gks_beats_rectified():
    assert poly_sup_error(inverse_poly(10.0, 101)) < 0.01 * poly_sup_error(inverse_poly(10.0, 101, "rectified"))


@given(st.floats(1.5, 200.0), st.integers(0, 200))
def test_bounded_on_approximation_interval(kappa, half):
    p = inverse_poly(kappa, 2 * half + 1)
    x = sup_grid(kappa, 2001)
    assert np.max(np.abs(p(x))) <= 1.0 + poly_sup_error(p, 2001) + 1e-12


def test_single_term_and_zero_poly():
    s = _toy()
    alpha = 3.0
    one = ChebyshevPoly(2.0, 1, np.array([0.0, 1.0]))
    assert np.allclose(clenshaw_apply(s, alpha, one), s.rmatvec(s.b_L) / alpha, atol=1e-15)
    zero = ChebyshevPoly(2.0, 5, np.zeros(6))
    assert np.all(clenshaw_apply(s, alpha, zero) == 0)


@pytest.mark.parametrize("degree", [3, 9, 41])
def test_clenshaw_matches_svd_evaluation(degree):
    s = _toy(1)
    u, sv, vt = _svd(s)
    alpha = sv[0] * 1.05
    p = inverse_poly(5.0, degree)
    direct = vt.T @ (p(sv / alpha) * (u.T @ s.b_L))
    assert np.allclose(clenshaw_apply(s, alpha, p), direct, atol=1e-10)


def test_error_bounded_by_sup_error():
    s = _toy(2)
    u, sv, vt = _svd(s)
    alpha = sv[0] * 1.01
    y = forward_solve(s)
    for kappa in (1.2 * alpha / sv[-1], 3 * alpha / sv[-1]):
        p = inverse_poly(kappa, degree_for(kappa, 3))
        err = relative_error(clenshaw_solve(s, alpha, p), y)
        bound = kappa * poly_sup_error(p) * np.linalg.norm(s.b_L) / np.linalg.norm(y) / alpha
        assert err <= bound * (1 + 1e-9)


def test_scaling_covariance():
    s = _toy(3)
    sv = np.linalg.svd(s.matrix().toarray(), compute_uv=False)
    alpha = sv[0] * 1.01
    kappa = 2 * alpha / sv[-1]
    ya = clenshaw_solve(s, alpha, inverse_poly(kappa, degree_for(kappa, 40)))
    yb = clenshaw_solve(s, 2 * alpha, inverse_poly(2 * kappa, degree_for(2 * kappa, 40)))
    assert relative_error(ya, yb) <= 1e-10
    assert relative_error(ya, forward_solve(s)) <= 1e-10


def test_deterministic():
    s = system(4, False, 4, 1)
    p = inverse_poly(50.0, 201)
    assert np.array_equal(clenshaw_apply(s, 2.5, p), clenshaw_apply(s, 2.5, p))


def test_overflow_detected():
    s = system(4, False, 4, 1)
    with pytest.raises(SpectralOverflowError):
        clenshaw_apply(s, 1.0, inverse_poly(50.0, 1001))


def test_channel_solve_accurate_when_resolved():
    s = system(4, False, 8, 1)
    sv = np.linalg.svd(s.matrix().toarray(), compute_uv=False)
    alpha = 32.0
    kappa = 1.5 * alpha / sv[-1]
    y = clenshaw_solve(s, alpha, inverse_poly(kappa, degree_for(kappa, 10)))
    assert relative_error(y, forward_solve(s)) <= 1e-3
