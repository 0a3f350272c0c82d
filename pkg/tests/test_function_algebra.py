import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from hscalc import (
    ExtendedElement,
    an_norm,
    approx_char,
    bracket_power,
    bump,
    difference_quotient,
    extended_inverse,
    from_callable,
    gamma_join,
    japanese_bracket,
    rational,
    rejoin_avoiding,
    resolvent_function,
    smooth_step,
    zero_function,
)
from hscalc.errors import (
    EndpointHitsLambdaError,
    FiniteDifferenceWarning,
    HSCalcError,
    ScalarEqualsLambdaError,
    ValueAttainedError,
)
from hscalc.functions import custom_table, exp_poly, poly

FAMILY = [
    rational([1], [1, 0, 1]),
    bracket_power(-1.0),
    bump(-1, 3),
    approx_char(-1, 3, 0.25),
    resolvent_function(1 + 2j),
    exp_poly([0, 0, -0.5]),
]


def test_japanese_bracket_values():
    assert japanese_bracket(0.0) == 1.0
    assert japanese_bracket(np.sqrt(3.0)) == pytest.approx(2.0, rel=1e-15)
    assert japanese_bracket(3 + 4j) == pytest.approx(np.sqrt(26.0), rel=1e-15)


@pytest.mark.parametrize("f", FAMILY, ids=lambda f: f.name)
def test_supplied_derivatives_match_central_differences(f):
    xs = np.array([-2.3, -0.4, 0.9, 2.6])
    h = 1e-5
    fd = (f(xs + h) - f(xs - h)) / (2 * h)
    np.testing.assert_allclose(f.deriv_eval(1, xs), fd, atol=1e-7)


def test_compact_support_is_respected():
    f = bump(-1, 3)
    xs = np.array([-5.0, -1.0, 3.0, 7.5])
    assert np.all(f.derivs(xs, 4) == 0)


def test_an_norm_of_zero_is_zero():
    assert an_norm(zero_function(), 3) == 0.0


def test_an_norm_closed_form():
    # int (1+x^2)^(-3/2) dx = [x / sqrt(1+x^2)] = 2
    assert an_norm(rational([1], [1, 0, 1]), 0) == pytest.approx(2.0, abs=1e-6)


def test_an_norm_char_against_1d_quadrature():
    chi = approx_char(0, 1, 0.25)
    oracle = quad(lambda x: abs(chi(x)) / np.sqrt(1 + x * x), -0.25, 1.25, limit=200, epsabs=1e-12)[0]
    assert an_norm(chi, 0) == pytest.approx(oracle, rel=1e-7)


def test_an_norm_with_estimate():
    val, est = an_norm(bracket_power(-1.0), 2, full_output=True)
    assert est >= 0 and np.isfinite(val)


@given(st.floats(-3, 3).filter(lambda c: abs(c) > 1e-3))
def test_an_norm_homogeneity(c):
    f = rational([1], [1, 0, 1])
    assert an_norm(f * c, 1) == pytest.approx(abs(c) * an_norm(f, 1), rel=1e-6)


def test_an_norm_triangle_inequality():
    for f, g in [(FAMILY[0], FAMILY[2]), (FAMILY[1], FAMILY[3]), (FAMILY[4], -FAMILY[0])]:
        assert an_norm(f + g, 2) <= an_norm(f, 2) + an_norm(g, 2) + 1e-6


def test_smooth_step_values():
    psi = smooth_step(0.0, 1.0)
    assert psi(0.5) == 1.0
    assert psi(-2.0) == 0.0
    assert psi(-0.5) == pytest.approx(0.5, abs=1e-15)


def test_smooth_step_rejects_nonpositive_width():
    with pytest.raises(HSCalcError):
        smooth_step(0.0, 0.0)


def test_approx_char_values():
    chi = approx_char(0, 1, 0.1)
    assert chi(0.5) == 1.0
    assert chi(2.0) == 0.0
    v = chi(-0.05)
    assert 0 < v < 1
    assert v == pytest.approx(smooth_step(0.0, 0.1)(-0.05), abs=1e-15)


def test_approx_char_rejects_inverted_interval():
    with pytest.raises(HSCalcError):
        approx_char(1, 0, 0.1)


def test_difference_quotient_of_square():
    g = difference_quotient(poly([0, 0, 1]), 0.0)
    xs = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(g(xs), xs, atol=1e-14)
    assert g(0.0) == 0.0


def test_difference_quotient_of_resolvent():
    f = resolvent_function(1j)
    g = difference_quotient(f, 0.0)
    want = 1 / (1j - 1) - 1 / 1j
    assert g(1.0) == pytest.approx(want, abs=1e-14)


@pytest.mark.parametrize("s", [-0.7, 0.0, 1.3])
def test_difference_quotient_at_s_is_derivative(s):
    f = FAMILY[0]
    g = difference_quotient(f, s)
    assert g(s) == pytest.approx(f.deriv_eval(1, s), abs=1e-14)
    # higher derivatives: g^(m)(s) = f^(m+1)(s)/(m+1)
    for m in range(1, 4):
        assert g.deriv_eval(m, s) == pytest.approx(f.deriv_eval(m + 1, s) / (m + 1), rel=1e-10, abs=1e-12)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.floats(-1.5, 1.5))
def test_difference_quotient_is_polynomial_division(coeffs, s):
    p = np.polynomial.Polynomial(coeffs)
    q = (p - p(s)) // np.polynomial.Polynomial([-s, 1])
    g = difference_quotient(poly(coeffs), s)
    xs = np.array([-2.0, s - 0.05, s, s + 0.3, 2.5])
    np.testing.assert_allclose(np.real(g(xs)), q(xs), atol=1e-11 * (1 + np.abs(coeffs).sum()))


def test_gamma_join_values():
    assert gamma_join(1, 1j, 0) == pytest.approx(1)
    assert gamma_join(1, 1j, 1) == pytest.approx(1j)
    assert gamma_join(1, 1j, 0.5) == pytest.approx(np.exp(1j * np.pi / 4))


@given(st.complex_numbers(max_magnitude=10).filter(lambda z: abs(z) > 1e-3),
       st.complex_numbers(max_magnitude=10).filter(lambda z: abs(z) > 1e-3))
def test_gamma_join_never_vanishes(z, w):
    vals = gamma_join(z, w, np.linspace(0, 1, 201))
    assert np.min(np.abs(vals)) >= min(abs(z), abs(w)) * (1 - 1e-12)


def test_rejoin_returns_f_when_lambda_is_avoided():
    f = rational([1], [1, 0, 1])
    assert rejoin_avoiding(f, (-1, 1), 5.0) is f


def test_rejoin_identity_through_zero():
    f = poly([0, 1])
    h = rejoin_avoiding(f, (-1, 1), 0.0)
    xs = np.linspace(-3, 3, 60001)
    assert h(-1.0) == pytest.approx(-1.0)
    assert h(1.0) == pytest.approx(1.0)
    assert np.min(np.abs(h(xs))) > 0.1
    outside = np.abs(xs) >= 1
    np.testing.assert_allclose(h(xs[outside]), xs[outside], atol=1e-14)


def test_rejoin_endpoint_equal_to_lambda():
    with pytest.raises(EndpointHitsLambdaError):
        rejoin_avoiding(poly([0, 1]), (0, 1), 0.0)


def test_extended_inverse_examples():
    one = extended_inverse(ExtendedElement(1.0))
    assert one.scalar == 1.0 and one(np.array([0.3]))[0] == pytest.approx(1.0)
    phi = ExtendedElement(1.0, rational([1], [1, 0, 1]))
    psi = extended_inverse(phi)
    xs = np.linspace(-20, 20, 81)
    np.testing.assert_allclose(psi(xs) * phi(xs), 1.0, atol=1e-13)
    assert psi(0.0) == pytest.approx(0.5)
    two = extended_inverse(ExtendedElement(2.0), 1.0)
    assert two.scalar == 1.0


def test_extended_inverse_errors():
    with pytest.raises(ScalarEqualsLambdaError):
        extended_inverse(ExtendedElement(1.0, bump(0, 1)), 1.0)
    with pytest.raises(ValueAttainedError):
        extended_inverse(ExtendedElement(0.0, approx_char(0, 1, 0.2)), 1.0)


@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_extended_product_is_pointwise(w, z):
    a = ExtendedElement(w, FAMILY[0])
    b = ExtendedElement(z, FAMILY[3])
    xs = np.linspace(-4, 4, 33)
    np.testing.assert_allclose((a * b)(xs), (w + FAMILY[0](xs)) * (z + FAMILY[3](xs)), atol=1e-12)


def test_bracket_power_decay_constants():
    f = bracket_power(-1.0)
    xs = np.concatenate([-np.geomspace(1e-2, 1e4, 400), np.geomspace(1e-2, 1e4, 400)])
    d = f.derivs(xs, 4)
    for r in range(5):
        ratio = np.abs(d[r]) * japanese_bracket(xs) ** (1 + r)
        assert np.max(ratio) < 30  # a finite c_r, uniform over the grid


def test_symbol_stability_of_products():
    f = rational([1], [1, 0, 1])
    g = rational([0, 0, 1], [1, 0, 1])
    xs = np.linspace(-1e3, 1e3, 20001)
    d = (f * g).derivs(xs, 3)
    for r in range(4):
        assert np.max(np.abs(d[r]) * japanese_bracket(xs) ** (r + 1)) < 10


def test_from_callable_warns():
    with pytest.warns(FiniteDifferenceWarning):
        f = from_callable(np.sin)
    assert f.deriv_eval(1, 0.3) == pytest.approx(np.cos(0.3), abs=1e-5)


def test_custom_table_interpolates():
    xs = np.linspace(-4, 4, 81)
    f = custom_table(xs, np.exp(-xs**2))
    assert f(0.55) == pytest.approx(np.exp(-0.55**2), abs=1e-5)
    assert f(10.0) == 0.0
