import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hscalc import (
    bracket_power,
    fit_resolvent_bound,
    make_test_operator,
    oracle_apply,
    read_matrix,
    resolvent,
    resolvent_function,
    spectral_norm,
    write_matrix,
    zero_function,
)
from hscalc.errors import HSCalcError, RealShiftInsideSpectrumError, SingularConditionerError


def test_resolvent_examples():
    np.testing.assert_allclose(resolvent([[0.0]], 1j), [[-1j]])
    np.testing.assert_allclose(resolvent(np.diag([1.0, 2.0]), 3.0), np.diag([0.5, 1.0]))


def test_resolvent_residual_on_random_operator():
    T = make_test_operator([-1.5, 0.2, 0.9, 3.0], "unitary", seed=4)
    z = 1 + 2j
    R = resolvent(T.H, z)
    assert np.linalg.norm((z * np.eye(4) - T.H) @ R - np.eye(4)) < 1e-10


def test_resolvent_rejects_real_point_in_enclosure():
    with pytest.raises(RealShiftInsideSpectrumError):
        resolvent(np.diag([0.0, 1.0]), 0.5, enclosure=(0.0, 1.0))


@given(st.complex_numbers(max_magnitude=5).filter(lambda z: abs(z.imag) > 0.1),
       st.complex_numbers(max_magnitude=5).filter(lambda z: abs(z.imag) > 0.1))
def test_first_resolvent_identity(z1, z2):
    T = make_test_operator([-1, 0, 1, 2], "jordan_like", delta=0.1, seed=7)
    R1, R2 = resolvent(T.H, z1), resolvent(T.H, z2)
    lhs = R1 - R2
    rhs = (z2 - z1) * R1 @ R2
    assert np.linalg.norm(lhs - rhs) <= 1e-8 * max(np.linalg.norm(R1), np.linalg.norm(R2), 1e-300) * (1 + abs(z1 - z2))


@pytest.mark.parametrize("cond", ["identity", "unitary", "jordan_like"])
@pytest.mark.parametrize("d", [1, 3, 8])
def test_factory_invariants(cond, d):
    eigs = np.linspace(-2, 3, d)
    T = make_test_operator(eigs, cond, seed=d, delta=0.1)
    assert np.linalg.norm(T.P @ T.P_inv - np.eye(d)) <= 1e-12 * d
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(T.H).real), eigs, atol=1e-8 * T.kappa)
    if cond == "jordan_like" and d > 1:
        assert T.kappa == pytest.approx(10.0, rel=1e-8)


def test_factory_examples():
    np.testing.assert_array_equal(make_test_operator([0.0], "unitary").H, [[0]])
    np.testing.assert_array_equal(make_test_operator([1.0, 2.0], "identity").H, np.diag([1, 2]))


def test_factory_errors():
    with pytest.raises(SingularConditionerError):
        make_test_operator([0, 1], "given", P=[[1, 1], [1, 1]])
    with pytest.raises(HSCalcError):
        make_test_operator([], "unitary")
    with pytest.raises(HSCalcError):
        make_test_operator([0, 1], "wobbly")


def test_oracle_examples():
    np.testing.assert_allclose(oracle_apply(make_test_operator([0.0], "identity"), resolvent_function(1j)), [[-1j]])
    T = make_test_operator([1.0, 2.0], "identity")
    np.testing.assert_allclose(oracle_apply(T, bracket_power(-1.0)), np.diag([2**-0.5, 5**-0.5]))
    np.testing.assert_array_equal(oracle_apply(T, zero_function()), np.zeros((2, 2)))


@pytest.mark.parametrize("z", [1j, 0.5 - 2j, -3 + 0.2j])
def test_oracle_matches_resolvent(z):
    T = make_test_operator([-1, 0, 1, 2], "jordan_like", delta=0.1, seed=7)
    R = resolvent(T.H, z)
    assert np.linalg.norm(oracle_apply(T, resolvent_function(z)) - R) <= 1e-8 * np.linalg.norm(R)


@given(st.integers(0, 1000))
def test_spectral_norm_against_svd(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    s = spectral_norm(M)
    assert s == pytest.approx(np.linalg.norm(M, 2), rel=1e-6)
    assert s <= np.linalg.norm(M) * (1 + 1e-12)


def test_fit_scalar_is_exact():
    fit = fit_resolvent_bound([[0.0]], enclosure=(0.0, 0.0))
    assert fit.alpha == 0.0
    assert fit.c == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fit_normal_operator(seed):
    T = make_test_operator([-2, -0.5, 1, 3], "unitary", seed=seed)
    fit = fit_resolvent_bound(T.H, enclosure=T.enclosure)
    assert fit.alpha <= 0.05
    assert fit.c <= 1.05


def test_fit_non_normal_dominates_grid():
    T = make_test_operator([-1, 0, 1, 2], "jordan_like", delta=0.1, seed=7)
    fit = fit_resolvent_bound(T.H, enclosure=T.enclosure)
    assert fit.alpha >= 0 and fit.c >= 1
    assert np.all(fit.norms <= fit.bound(fit.zs) * (1 + 1e-12))


def test_fit_rejects_real_grid():
    with pytest.raises(HSCalcError):
        fit_resolvent_bound([[0.0]], np.array([1.0 + 0j]))


def test_matrix_round_trip_is_bit_exact():
    rng = np.random.default_rng(3)
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    buf = io.StringIO()
    write_matrix(M, buf)
    buf.seek(0)
    text = buf.getvalue()
    assert text.splitlines()[0] == "4"
    np.testing.assert_array_equal(read_matrix(io.StringIO(text)), M)


def test_matrix_reader_rejects_short_file():
    with pytest.raises(HSCalcError):
        read_matrix(io.StringIO("3\n1,0 0,0 0,0\n"))
