import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splinebounds.errors import (
    DegreeTooHighError,
    InvalidDomainError,
    InvalidSmoothnessError,
    OutOfDomainError,
)
from splinebounds.spline_core import (
    KnotSequence,
    SplineFunction,
    SplineSpace,
    basis_matrix,
    embed_polynomial,
    eval_basis,
    eval_spline,
    insert_breakpoint,
    polynomial_test_function,
    uniform_knots,
)

rng = np.random.default_rng(1234)


def random_knots(N, a=0.0, b=1.0):
    inner = np.sort(rng.uniform(a, b, N))
    return KnotSequence(np.concatenate([[a], inner, [b]]))


# --- knot sequences ----------------------------------------------------------------

def test_uniform_knots_quarter():
    ks = uniform_knots(0, 1, 3)
    np.testing.assert_allclose(ks.breakpoints, [0, 0.25, 0.5, 0.75, 1])
    assert ks.h == pytest.approx(0.25)


def test_single_interval_h_hat_doubles():
    ks = uniform_knots(0, 2, 0)
    assert ks.breakpoints.tolist() == [0, 2]
    assert ks.h == 2 and ks.h_hat == 4


def test_two_intervals_both_are_end_intervals():
    ks = uniform_knots(0, 1, 1)
    assert ks.h == 0.5 and ks.h_hat == 1.0


def test_h_hat_formula_on_random_knots():
    ks = random_knots(6)
    d = np.diff(ks.breakpoints)
    assert ks.h_hat == pytest.approx(max(2 * d[0], *d[1:-1], 2 * d[-1]))
    assert ks.h_hat >= ks.h >= ks.h_min > 0


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 1.0), (0.0, np.inf), (np.nan, 1.0)])
def test_invalid_domain(a, b):
    with pytest.raises(InvalidDomainError):
        uniform_knots(a, b, 2)


def test_nonincreasing_breakpoints_rejected():
    with pytest.raises(InvalidDomainError):
        KnotSequence(np.array([0.0, 0.5, 0.5, 1.0]))


# --- spaces -------------------------------------------------------------------------

def count_basis_functions(space):
    # brute force: number of B-splines on the open knot vector
    return len(space.knot_vector) - space.p - 1


def test_dimension_quadratic_c1():
    space = SplineSpace(uniform_knots(0, 1, 3), 2, 1)
    assert space.dim == 6 == count_basis_functions(space)


def test_dimension_discontinuous():
    space = SplineSpace(uniform_knots(0, 1, 3), 2, -1)
    assert space.dim == 12 == (3 + 1) * (2 + 1)


@pytest.mark.parametrize("p", range(6))
def test_dimension_no_interior_knots(p):
    assert SplineSpace(uniform_knots(0, 1, 0), p, p - 1).dim == p + 1


def test_dimension_formula_grid():
    for N in range(9):
        ks = uniform_knots(0, 1, N)
        for p in range(7):
            for k in range(-1, p):
                space = SplineSpace(ks, p, k)
                assert space.dim == N * (p - k) + p + 1 == count_basis_functions(space)


@pytest.mark.parametrize("p,k", [(2, 2), (2, -2), (0, 0)])
def test_invalid_smoothness(p, k):
    with pytest.raises(InvalidSmoothnessError):
        SplineSpace(uniform_knots(0, 1, 2), p, k)


# --- basis evaluation -----------------------------------------------------------------

SPACES = [(N, p, k) for N in (0, 1, 4) for p in range(5) for k in range(-1, p)]


@pytest.mark.parametrize("N,p,k", SPACES)
def test_partition_of_unity_and_derivative_sum(N, p, k):
    space = SplineSpace(random_knots(N), p, k)
    x = rng.uniform(0, 1, 1000)
    B0 = basis_matrix(space, x, 0)
    assert np.max(np.abs(B0.sum(axis=1) - 1.0)) <= 1e-12
    assert B0.min() >= -1e-14
    B1 = basis_matrix(space, x, 1)
    assert np.max(np.abs(B1.sum(axis=1))) <= 1e-12 * max(1.0, np.abs(B1).max())


@pytest.mark.parametrize("p,k", [(1, 0), (3, 2), (3, -1)])
def test_left_endpoint_interpolatory(p, k):
    space = SplineSpace(uniform_knots(0, 1, 3), p, k)
    first, vals = eval_basis(space, 0.0, 0)
    assert first == 0
    assert vals[0] == 1.0 and np.count_nonzero(vals) == 1


def test_out_of_domain():
    space = SplineSpace(uniform_knots(0, 1, 3), 2, 1)
    with pytest.raises(OutOfDomainError):
        eval_basis(space, 1.5)


def test_constant_and_zero_coefficients():
    space = SplineSpace(random_knots(4), 3, 1)
    x = rng.uniform(0, 1, 50)
    assert np.allclose(SplineFunction(space, np.ones(space.dim))(x), 1.0)
    assert np.all(SplineFunction(space, np.zeros(space.dim))(x) == 0.0)


def test_embedded_identity_has_unit_slope():
    space = SplineSpace(random_knots(5), 3, 2)
    f = embed_polynomial(space, [0.0, 1.0])
    x = rng.uniform(0, 1, 50)
    np.testing.assert_allclose(f(x, 1), 1.0, atol=1e-12)
    assert eval_spline(f, 0.3, 1) == pytest.approx(1.0)


def test_embed_constant_gives_unit_coefficients():
    space = SplineSpace(random_knots(3), 4, 1)
    np.testing.assert_allclose(embed_polynomial(space, [1.0]).coefficients, 1.0)


def test_embed_linear_p1_greville_by_interpolation():
    # independent oracle: interpolate x at the break points of a hat basis
    ks = random_knots(4)
    space = SplineSpace(ks, 1, 0)
    coeffs = np.linalg.solve(basis_matrix(space, ks.breakpoints), ks.breakpoints)
    np.testing.assert_allclose(embed_polynomial(space, [0, 1]).coefficients, coeffs, atol=1e-14)
    np.testing.assert_allclose(space.greville, coeffs, atol=1e-14)


@pytest.mark.parametrize("p,k", [(2, 0), (3, 2), (4, -1), (5, 3)])
def test_embed_top_monomial_pointwise(p, k):
    space = SplineSpace(random_knots(5), p, k)
    a = np.zeros(p + 1)
    a[-1] = 1.0
    x = rng.uniform(0, 1, 200)
    assert np.max(np.abs(embed_polynomial(space, a)(x) - x**p)) <= 1e-12


def test_embed_degree_too_high():
    space = SplineSpace(uniform_knots(0, 1, 2), 2, 1)
    with pytest.raises(DegreeTooHighError):
        embed_polynomial(space, [0, 0, 0, 1])


@pytest.mark.parametrize("p,k", [(2, 1), (3, 1), (4, 2), (3, -1), (5, 4)])
def test_smoothness_jumps(p, k):
    space = SplineSpace(random_knots(4), p, k)
    f = SplineFunction(space, rng.normal(size=space.dim))
    scale = np.abs(f.coefficients).max()
    for d in range(k + 1):
        ref = max(scale, np.abs(f(space.knots.breakpoints[1:-1], d)).max())
        assert np.max(np.abs(f.jumps(d))) <= 1e-9 * ref
    assert np.min(np.abs(f.jumps(k + 1))) > 1e-8


@pytest.mark.parametrize("p,k", [(1, 0), (3, 1), (3, 2), (4, -1)])
def test_knot_insertion_preserves_values(p, k):
    space = SplineSpace(random_knots(4), p, k)
    f = SplineFunction(space, rng.normal(size=space.dim))
    g = insert_breakpoint(f, 0.4321)
    assert g.space.dim == space.dim + (p - k)
    x = rng.uniform(0, 1, 100)
    assert np.max(np.abs(f(x) - g(x))) <= 1e-10


def test_derivative_matches_basis_derivatives():
    space = SplineSpace(random_knots(5), 4, 2)
    f = SplineFunction(space, rng.normal(size=space.dim))
    x = rng.uniform(0, 1, 100)
    np.testing.assert_allclose(f.derivative()(x), f(x, 1), rtol=1e-10, atol=1e-10)


def test_right_limit_convention():
    space = SplineSpace(uniform_knots(0, 1, 1), 1, -1)
    f = SplineFunction(space, np.array([0.0, 0.0, 1.0, 1.0]))
    assert f(0.5)[0] == 1.0
    assert f(0.5, side="left")[0] == 0.0


def test_test_function_derivatives_match_finite_differences():
    u = polynomial_test_function([0.3, -1.0, 2.0, 0.5])
    x = np.linspace(0.1, 0.9, 9)
    eps = 1e-5
    for d in range(3):
        fd = (u(x + eps, d) - u(x - eps, d)) / (2 * eps)
        np.testing.assert_allclose(u(x, d + 1), fd, rtol=1e-6, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(N=st.integers(0, 6), p=st.integers(0, 5), data=st.data())
def test_partition_of_unity_property(N, p, data):
    k = data.draw(st.integers(-1, p - 1)) if p > 0 else -1
    space = SplineSpace(uniform_knots(-1.0, 2.0, N), p, k)
    x = np.linspace(-1.0, 2.0, 37)
    assert np.max(np.abs(basis_matrix(space, x).sum(axis=1) - 1)) <= 1e-12
