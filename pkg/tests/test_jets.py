import numpy as np
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from hscalc.jets import Jet, polynomial

X = sp.Symbol("x")
POINTS = np.array([-1.3, -0.2, 0.0, 0.7, 2.5])


def sympy_jet(expr, order):
    """Normalized Taylor coefficients c_k = f^(k)/k! at POINTS, by sympy."""
    out = np.zeros((order + 1, POINTS.size), dtype=complex)
    d = expr
    for k in range(order + 1):
        fn = sp.lambdify(X, d, "numpy")
        out[k] = np.broadcast_to(fn(POINTS), POINTS.shape) / sp.factorial(k)
        d = sp.diff(d, X)
    return out


def test_rational_expression_matches_sympy():
    order = 6
    x = Jet.variable(POINTS, order)
    got = ((x * x + 3.0) / (x * x + 1.0) - x * 2.0).c
    want = sympy_jet((X**2 + 3) / (X**2 + 1) - 2 * X, order)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_exp_and_power_match_sympy():
    order = 5
    x = Jet.variable(POINTS, order)
    got = ((x * x * -0.5).exp() * (x * x + 1.0).power(-0.75)).c
    want = sympy_jet(sp.exp(-X**2 / 2) * (1 + X**2) ** sp.Rational(-3, 4), order)
    np.testing.assert_allclose(got, want, rtol=1e-11, atol=1e-12)


def test_derivatives_are_factorial_scaled():
    x = Jet.variable(np.array([2.0]), 3)
    d = (x * x * x).derivatives()
    np.testing.assert_allclose(d[:, 0], [8.0, 12.0, 12.0, 6.0])


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=5), st.floats(-2, 2))
def test_polynomial_jet_is_horner(coeffs, x0):
    c = polynomial(coeffs, np.array([x0]), len(coeffs)).derivatives()[:, 0]
    p = np.polynomial.Polynomial(coeffs)
    for k in range(len(coeffs) + 1):
        assert abs(c[k] - p.deriv(k)(x0)) <= 1e-9 * (1 + abs(p.deriv(k)(x0)))


@given(st.floats(0.1, 3.0), st.floats(-1.0, 1.0))
def test_reciprocal_is_inverse(a, b):
    x = Jet.variable(np.array([b]), 6)
    f = x * x * a + 1.0
    prod = (f * f.reciprocal()).c[:, 0]
    np.testing.assert_allclose(prod, [1, 0, 0, 0, 0, 0, 0], atol=1e-12)
