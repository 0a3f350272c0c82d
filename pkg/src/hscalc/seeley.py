"""Seeley's extension from the half line [0, inf) to the whole line.

With b_k = -2^k and exact rationals a_k solving sum_k a_k b_k^m = 1 for
m = 0..K, a half-line function f is extended by

    (E f)(x) = sum_k a_k phi(b_k x) f(b_k x)   for x < 0,

which matches f and its first K derivatives at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import HSCalcError
from .functions import CkFunction, HalfLineFunction, approx_char, weighted_norm

MAX_K = 24


@dataclass(frozen=True)
class SeeleyCoefficients:
    K: int
    a: tuple[Fraction, ...]
    b: tuple[int, ...]

    def moment_residuals(self) -> list[Fraction]:
        """sum_k a_k b_k^m - 1 for m = 0..K, in exact arithmetic."""
        return [sum(ak * Fraction(bk) ** m for ak, bk in zip(self.a, self.b)) - 1
                for m in range(self.K + 1)]

    def weight_sum(self, n: int) -> Fraction:
        """sum_k |a_k| |b_k|^n, the constant in the extension bound."""
        return sum(abs(ak) * abs(bk) ** n for ak, bk in zip(self.a, self.b))

    def as_floats(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([float(ak) for ak in self.a]), np.array(self.b, dtype=float))


def _solve_exact(A: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals."""
    n = len(rhs)
    M = [row[:] + [r] for row, r in zip(A, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                factor = M[r][col]
                M[r] = [v - factor * w for v, w in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def seeley_coefficients(K: int) -> SeeleyCoefficients:
    """Solve the (K+1)x(K+1) Vandermonde moment system exactly."""
    if K < 0:
        raise HSCalcError("K must be non-negative")
    if K > MAX_K:
        raise HSCalcError(f"K = {K} too large (max {MAX_K})")
    b = [-(2**k) for k in range(K + 1)]
    A = [[Fraction(bk) ** m for bk in b] for m in range(K + 1)]
    a = _solve_exact(A, [Fraction(1)] * (K + 1))
    return SeeleyCoefficients(K, tuple(a), tuple(b))


def default_cutoff(max_order: int = 16) -> CkFunction:
    """phi = 1 on [0, 1], 0 for x >= 2 and x <= -1."""
    return approx_char(0.0, 1.0, 1.0, max_order=max_order)


def alternate_cutoff(max_order: int = 16) -> CkFunction:
    """Same plateau as default_cutoff, glued with exp(-1/t^2) instead of exp(-1/t)."""
    return approx_char(0.0, 1.0, 1.0, kernel="exp2", max_order=max_order)


def seeley_extend(fplus: CkFunction, coeffs: SeeleyCoefficients,
                  phi: Optional[CkFunction] = None) -> CkFunction:
    if phi is None:
        phi = default_cutoff()
    _check_cutoff(phi)
    a, b = coeffs.as_floats()
    max_order = min(fplus.max_order, phi.max_order, coeffs.K)
    reach = 2.0  # phi vanishes beyond 2, so |b_k x| >= 2 terms drop out

    def jetfn(x, k):
        pos = x >= 0
        neg = ~pos
        out = None
        if pos.any():
            vals = fplus.jet(x[pos], k)
            out = np.zeros((k + 1, x.size), dtype=vals.dtype)
            out[:, pos] = vals
        if neg.any():
            xn = x[neg]
            acc = None
            for ak, bk in zip(a, b):
                s = bk * xn
                live = s < reach
                if not live.any():
                    continue
                term = np.zeros((k + 1, xn.size), dtype=complex)
                fj = fplus.jet(s[live], k)
                pj = phi.jet(s[live], k)
                prod = np.zeros_like(fj, dtype=np.result_type(fj, pj))
                for r in range(k + 1):
                    prod[r] = np.einsum("j...,j...->...", fj[: r + 1], pj[r::-1])
                term[:, live] = ak * prod * (bk ** np.arange(k + 1))[:, None]
                acc = term if acc is None else acc + term
            if acc is None:
                acc = np.zeros((k + 1, xn.size))
            if out is None:
                out = np.zeros((k + 1, x.size), dtype=complex)
            elif not np.iscomplexobj(out):
                out = out.astype(complex)
            out[:, neg] = acc
            if not np.iscomplexobj(fplus.jet(np.array([0.0]), 0)):
                out = out.real
        return out

    support = None
    if fplus.support is not None:
        support = (-reach, fplus.support[1])
    return CkFunction(jetfn, max_order, fplus.decay_beta, support, f"E[{fplus.name}]")


def _check_cutoff(phi: CkFunction) -> None:
    probe = np.array([0.0, 0.25, 0.5, 1.0, 2.0, 2.5, 4.0])
    vals = np.asarray(phi(probe))
    want = np.array([1, 1, 1, 1, 0, 0, 0], dtype=float)
    if not np.allclose(vals, want, atol=1e-12):
        raise HSCalcError("cutoff must equal 1 on [0, 1] and vanish for x >= 2")


def scale_op(a: float, f: CkFunction) -> HalfLineFunction:
    """(T_a f)(x) = f(a x) for a > 0."""
    if not a > 0:
        raise HSCalcError("T_a maps the half line to itself only for a > 0")
    g = f.compose_affine(a, 0.0)
    return HalfLineFunction(g.jetfn, g.max_order, g.decay_beta, g.support, f"T{a}[{f.name}]")


def multiply_op(phi: CkFunction, f: CkFunction) -> HalfLineFunction:
    """(S_phi f)(x) = phi(x) f(x)."""
    return HalfLineFunction.restrict(phi * f)


def aplus_norm(fplus: CkFunction, n: int, tol: float = 1e-8, full_output: bool = False):
    """sum_{r<=n} int_0^inf |f^(r)| <x>^(r-1) dx."""
    return weighted_norm(fplus, n, 0.0, tol, full_output)


def exp_half_line(rate: float = 1.0, power: int = 1, *, max_order: int = 16) -> HalfLineFunction:
    """s -> exp(-rate * s**power) on [0, inf)."""
    from .functions import exp_poly

    coeffs = [0.0] * power + [-rate]
    f = exp_poly(coeffs, max_order=max_order, name=f"exp(-{rate}s^{power})")
    return HalfLineFunction.restrict(f)


def half_line_rational(num, den, *, max_order: int = 16, name: str = "rational+") -> HalfLineFunction:
    """p(s)/q(s) on [0, inf); q may vanish on the negative axis only."""
    from .jets import polynomial

    num, den = list(num), list(den)
    nz = [i for i, c in enumerate(den) if c != 0]
    if not nz:
        raise HSCalcError("denominator is identically zero")
    roots = np.roots(list(reversed(den[: nz[-1] + 1]))) if nz[-1] > 0 else np.array([])
    if np.any((np.abs(np.imag(roots)) < 1e-14) & (np.real(roots) >= 0)):
        raise HSCalcError("denominator vanishes on [0, inf)")

    def jetfn(x, k):
        return (polynomial(num, x, k) / polynomial(den, x, k)).c

    dn = max((i for i, c in enumerate(num) if c != 0), default=-1)
    beta = float(dn - nz[-1]) if dn >= 0 else -np.inf
    return HalfLineFunction(jetfn, max_order, beta, None if dn >= 0 else (0.0, 0.0), name)
