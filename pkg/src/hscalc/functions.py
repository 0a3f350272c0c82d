"""Smooth functions on the real line and the algebras built from them.

Every function carries a jet evaluator returning normalized Taylor
coefficients up to a requested order, so derivatives are exact up to
rounding. Built-in families cover rational functions, powers of the
Japanese bracket, C-infinity steps, plateaus and bumps, and exponentials
of polynomials.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    EndpointHitsLambdaError,
    FiniteDifferenceWarning,
    HSCalcError,
    NonConvergenceError,
    OrderExceededError,
    ScalarEqualsLambdaError,
    ValueAttainedError,
)
from .jets import Jet, polynomial

DEFAULT_ORDER = 16

JetFn = Callable[[np.ndarray, int], np.ndarray]


def japanese_bracket(x):
    """Return (1 + |x|^2)^(1/2); works for real or complex input."""
    return np.sqrt(1.0 + np.abs(x) ** 2)


@dataclass(frozen=True, eq=False)
class CkFunction:
    """A smooth function given by its derivatives up to ``max_order``.

    ``decay_beta`` is the exponent beta with |f^(r)| <= c_r <x>^(beta - r);
    compactly supported functions set ``support`` to an interval and
    ``decay_beta`` to -inf.
    """

    jetfn: JetFn
    max_order: int
    decay_beta: float = -1.0
    support: Optional[tuple[float, float]] = None
    name: str = "f"

    @property
    def is_compact(self) -> bool:
        return self.support is not None

    def jet(self, x, order: int) -> np.ndarray:
        """Normalized Taylor coefficients f^(r)(x)/r!, shape (order+1, N)."""
        if order > self.max_order:
            raise OrderExceededError(
                f"{self.name}: order {order} exceeds available order {self.max_order}"
            )
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        if self.support is None:
            return self.jetfn(x, order)
        a, b = self.support
        inside = (x >= a) & (x <= b)
        if inside.all():
            return self.jetfn(x, order)
        if not inside.any():
            return np.zeros((order + 1, x.size))
        vals = self.jetfn(x[inside], order)
        out = np.zeros((order + 1, x.size), dtype=vals.dtype)
        out[:, inside] = vals
        return out

    def derivs(self, x, order: int) -> np.ndarray:
        c = self.jet(x, order)
        fact = np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
        return c * fact[:, None]

    def deriv_eval(self, r: int, x):
        d = self.derivs(x, r)[r]
        return d.reshape(np.shape(x)) if np.ndim(x) else d[0]

    def __call__(self, x):
        return self.deriv_eval(0, x)

    # -- algebra -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, CkFunction):
            c = other
            return CkFunction(
                lambda x, k: _shift0(self.jet(x, k), c),
                self.max_order,
                max(self.decay_beta, 0.0) if c != 0 else self.decay_beta,
                None if c != 0 else self.support,
                f"({self.name}+{c})",
            )
        support = None
        if self.support is not None and other.support is not None:
            support = (min(self.support[0], other.support[0]), max(self.support[1], other.support[1]))
        f, g = self, other
        return CkFunction(
            lambda x, k: f.jet(x, k) + g.jet(x, k),
            min(f.max_order, g.max_order),
            max(f.decay_beta, g.decay_beta),
            support,
            f"({f.name}+{g.name})",
        )

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, CkFunction):
            c = other
            f = self
            return CkFunction(
                lambda x, k: f.jet(x, k) * c,
                f.max_order,
                f.decay_beta,
                f.support,
                f"{c}*{f.name}",
            )
        f, g = self, other
        support = f.support or g.support
        if f.support is not None and g.support is not None:
            lo, hi = max(f.support[0], g.support[0]), min(f.support[1], g.support[1])
            support = (lo, max(lo, hi))
        return CkFunction(
            lambda x, k: (Jet(f.jet(x, k)) * Jet(g.jet(x, k))).c,
            min(f.max_order, g.max_order),
            f.decay_beta + g.decay_beta,
            support,
            f"{f.name}*{g.name}",
        )

    __rmul__ = __mul__

    def compose_affine(self, a: float, b: float = 0.0) -> "CkFunction":
        """x -> f(a x + b)."""
        f = self

        def jetfn(x, k):
            c = f.jet(a * x + b, k)
            return c * (a ** np.arange(k + 1))[:, None]

        support = None
        if f.support is not None and a != 0:
            ends = sorted(((f.support[0] - b) / a, (f.support[1] - b) / a))
            support = (ends[0], ends[1])
        return CkFunction(jetfn, f.max_order, f.decay_beta, support, f"{f.name}({a}x+{b})")

    def with_name(self, name: str) -> "CkFunction":
        return CkFunction(self.jetfn, self.max_order, self.decay_beta, self.support, name)


def _shift0(c: np.ndarray, value) -> np.ndarray:
    out = c.astype(np.result_type(c, np.asarray(value)), copy=True)
    out[0] = out[0] + value
    return out


class HalfLineFunction(CkFunction):
    """A smooth function on [0, inf); derivatives at 0 are one-sided."""

    def jet(self, x, order: int) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        if np.any(x < 0):
            raise HSCalcError(f"{self.name} is only defined on [0, inf)")
        return super().jet(x, order)

    @classmethod
    def restrict(cls, f: CkFunction) -> "HalfLineFunction":
        return cls(f.jetfn, f.max_order, f.decay_beta, f.support, f.name)


@dataclass(frozen=True, eq=False)
class ExtendedElement:
    """An element (z, f) of C + A, evaluating pointwise to z + f(x)."""

    scalar: complex
    function: CkFunction = field(default_factory=lambda: zero_function())

    def __call__(self, x):
        return self.scalar + self.function(x)

    def __add__(self, other):
        if isinstance(other, ExtendedElement):
            return ExtendedElement(self.scalar + other.scalar, self.function + other.function)
        return ExtendedElement(self.scalar + other, self.function)

    def __sub__(self, other):
        if isinstance(other, ExtendedElement):
            return ExtendedElement(self.scalar - other.scalar, self.function - other.function)
        return ExtendedElement(self.scalar - other, self.function)

    def __mul__(self, other):
        if isinstance(other, ExtendedElement):
            w, f = self.scalar, self.function
            z, g = other.scalar, other.function
            return ExtendedElement(w * z, g * w + f * z + f * g)
        return ExtendedElement(self.scalar * other, self.function * other)


# -- built-in families ---------------------------------------------------------


def zero_function(max_order: int = DEFAULT_ORDER) -> CkFunction:
    return CkFunction(
        lambda x, k: np.zeros((k + 1, x.size)),
        max_order,
        -np.inf,
        (0.0, 0.0),
        "0",
    )


def rational(num: Sequence[complex], den: Sequence[complex], *, max_order: int = DEFAULT_ORDER,
             name: str = "rational") -> CkFunction:
    """p(x)/q(x) with coefficients listed in ascending powers."""
    num = list(num)
    den = list(den)
    dn = _degree(num)
    dd = _degree(den)
    if dd < 0:
        raise HSCalcError("denominator is identically zero")
    roots = np.roots(list(reversed(den[: dd + 1]))) if dd > 0 else np.array([])
    if np.any(np.abs(np.imag(roots)) < 1e-14):
        raise HSCalcError("denominator vanishes on the real axis")

    def jetfn(x, k):
        return (polynomial(num, x, k) / polynomial(den, x, k)).c

    beta = float(dn - dd) if dn >= 0 else -np.inf
    return CkFunction(jetfn, max_order, beta, None if dn >= 0 else (0.0, 0.0), name)


def _degree(coeffs) -> int:
    nz = [i for i, c in enumerate(coeffs) if c != 0]
    return nz[-1] if nz else -1


def poly(coeffs: Sequence[complex], *, max_order: int = DEFAULT_ORDER, name: str = "poly") -> CkFunction:
    """Polynomial (not in A; useful in tests and as an S^0 factor)."""
    coeffs = list(coeffs)
    return CkFunction(lambda x, k: polynomial(coeffs, x, k).c, max_order,
                      float(max(_degree(coeffs), 0)), None, name)


def resolvent_function(z: complex, *, max_order: int = DEFAULT_ORDER) -> CkFunction:
    """g_z(x) = (z - x)^(-1) for non-real z."""
    if np.imag(z) == 0:
        raise HSCalcError("g_z needs a non-real z")
    return rational([1.0], [z, -1.0], max_order=max_order, name=f"g_{z}")


def bracket_power(beta: float, *, max_order: int = DEFAULT_ORDER) -> CkFunction:
    """<x>^beta."""

    def jetfn(x, k):
        t = Jet.variable(x, k)
        return (1.0 + t * t).power(0.5 * beta).c

    return CkFunction(jetfn, max_order, float(beta), None, f"<x>^{beta}")


def exp_poly(coeffs: Sequence[float], *, max_order: int = DEFAULT_ORDER, name: str = "exp_poly") -> CkFunction:
    """exp(p(x)); p must tend to -inf in both directions to be in A."""
    coeffs = list(coeffs)
    return CkFunction(lambda x, k: polynomial(coeffs, x, k).exp().c, max_order, -1.0, None, name)


# Glue kernels: smooth s on [0, 1] with s = 0 near 0, s = 1 near 1, all
# derivatives vanishing at both ends. Outside (cut, 1 - cut) the
# kernel is replaced by its plateau; the discarded part is below 1e-200.
GLUE_KERNELS = ("exp", "exp2")


def _glue_cut(order: int, kernel: str) -> float:
    m = 30.0 + 40.0 * order
    return 1.0 / m if kernel == "exp" else 1.0 / math.sqrt(m)


def glue_jet(t, order: int, kernel: str = "exp") -> np.ndarray:
    """Normalized Taylor coefficients (in t) of the glue kernel."""
    if kernel not in GLUE_KERNELS:
        raise HSCalcError(f"unknown glue kernel {kernel!r}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    cut = _glue_cut(order, kernel)
    out = np.zeros((order + 1, t.size))
    out[0] = t >= 1.0 - cut
    inside = (t > cut) & (t < 1.0 - cut)
    if inside.any():
        tj = Jet.variable(t[inside], order)
        sj = 1.0 - tj
        if kernel == "exp":
            a = (-tj.reciprocal()).exp()
            b = (-sj.reciprocal()).exp()
        else:
            a = (-(tj * tj).reciprocal()).exp()
            b = (-(sj * sj).reciprocal()).exp()
        out[:, inside] = (a / (a + b)).c
    return out


def smooth_step(a: float, eps: float, *, kernel: str = "exp", max_order: int = DEFAULT_ORDER) -> CkFunction:
    """psi_{a,eps}: 0 on (-inf, a-eps], 1 on [a, inf), smooth in between."""
    if not eps > 0:
        raise HSCalcError("smooth_step needs eps > 0")
    scale = (1.0 / eps) ** np.arange(max_order + 1)

    def jetfn(x, k):
        return glue_jet((x - (a - eps)) / eps, k, kernel) * scale[: k + 1, None]

    return CkFunction(jetfn, max_order, 0.0, None, f"psi_{a},{eps}")


def approx_char(a: float, b: float, eps: float, *, kernel: str = "exp",
                max_order: int = DEFAULT_ORDER) -> CkFunction:
    """Plateau equal to 1 on [a, b] with support [a - eps, b + eps]."""
    if a > b:
        raise HSCalcError(f"interval inverted: [{a}, {b}]")
    up = smooth_step(a, eps, kernel=kernel, max_order=max_order)
    down = smooth_step(b + eps, eps, kernel=kernel, max_order=max_order)
    return CkFunction(
        lambda x, k: up.jetfn(x, k) - down.jetfn(x, k),
        max_order,
        -np.inf,
        (a - eps, b + eps),
        f"chi_[{a},{b}],{eps}",
    )


def bump(a: float, b: float, *, max_order: int = DEFAULT_ORDER) -> CkFunction:
    """exp(1 - 1/(1-u^2)) with u mapping [a, b] onto [-1, 1]; peak value 1."""
    if not b > a:
        raise HSCalcError(f"interval inverted: [{a}, {b}]")
    cut = 1.0 / (30.0 + 40.0 * max_order)

    def jetfn(x, k):
        u = (2.0 * x - a - b) / (b - a)
        out = np.zeros((k + 1, x.size))
        inside = 1.0 - u * u > cut
        if inside.any():
            t = Jet.variable(x[inside], k)
            uj = (t * 2.0 - (a + b)) / (b - a)
            w = 1.0 - uj * uj
            out[:, inside] = (1.0 - w.reciprocal()).exp().c
        return out

    return CkFunction(jetfn, max_order, -np.inf, (a, b), f"bump[{a},{b}]")


def from_callable(fn: Callable, *, max_order: int = 4, h: Optional[float] = None,
                  decay_beta: float = -1.0, support=None, name: str = "custom") -> CkFunction:
    """Wrap a plain callable; derivatives come from central differences."""
    warnings.warn(
        f"{name}: derivatives approximated by finite differences; expect lost digits",
        FiniteDifferenceWarning,
        stacklevel=2,
    )

    def jetfn(x, k):
        out = []
        for r in range(k + 1):
            if r == 0:
                out.append(np.asarray(fn(x)))
                continue
            step = h if h is not None else np.finfo(float).eps ** (1.0 / (r + 2)) * np.maximum(1.0, np.abs(x))
            acc = 0.0
            for j in range(r + 1):
                acc = acc + (-1) ** j * math.comb(r, j) * np.asarray(fn(x + (0.5 * r - j) * step))
            out.append(acc / step**r / math.factorial(r))
        return np.array(out)

    return CkFunction(jetfn, max_order, decay_beta, support, name)


def custom_table(xs: Sequence[float], ys: Sequence[complex], *, degree: int = 5,
                 name: str = "table") -> CkFunction:
    """Spline through tabulated values, zero outside the table range."""
    from scipy.interpolate import make_interp_spline

    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys)
    spl = make_interp_spline(xs, ys, k=degree)
    warnings.warn(
        f"{name}: derivatives from degree-{degree} spline interpolation",
        FiniteDifferenceWarning,
        stacklevel=2,
    )

    def jetfn(x, k):
        return np.array([spl(x, nu=r) / math.factorial(r) if r <= degree else np.zeros_like(x)
                         for r in range(k + 1)])

    return CkFunction(jetfn, degree - 1, -np.inf, (float(xs[0]), float(xs[-1])), name)


# -- norms -----------------------------------------------------------------------


_GL16_X, _GL16_W = np.polynomial.legendre.leggauss(16)


def _derivative_weight_integrals(f: CkFunction, n: int, lo: float, hi: float, tol: float):
    """sum_r int_lo^hi |f^(r)| <x>^(r-1) dx on a graded set of breakpoints.

    Each segment uses composite 16-point Gauss-Legendre, vectorized over all
    nodes, with the panel count doubled until two passes agree. The |.| kinks
    cap the rate at second order, which is why the passes start fine.
    """
    edges = [lo, hi]
    for e in (0.0, -1.0, 1.0):
        if lo < e < hi:
            edges.append(e)
    for s in (1.0, -1.0):
        m = 2.0
        while m < max(abs(lo), abs(hi)):
            if lo < s * m < hi:
                edges.append(s * m)
            m *= 2.0
    edges = np.array(sorted(set(edges)))
    weights = np.arange(n + 1) - 1.0
    seg_tol = tol / (len(edges) - 1)

    def seg(u, v, panels):
        cuts = np.linspace(u, v, panels + 1)
        half = 0.5 * np.diff(cuts)
        xs = (0.5 * (cuts[:-1] + cuts[1:]))[:, None] + half[:, None] * _GL16_X[None, :]
        ws = (half[:, None] * _GL16_W[None, :]).ravel()
        xs = xs.ravel()
        d = np.abs(f.derivs(xs, n)) * (1.0 + xs * xs)[None, :] ** (0.5 * weights[:, None])
        return float(np.sum(d @ ws))

    total = 0.0
    err = 0.0
    for u, v in zip(edges[:-1], edges[1:]):
        panels = 16
        prev = seg(u, v, panels)
        while True:
            panels *= 2
            cur = seg(u, v, panels)
            diff = abs(cur - prev)
            prev = cur
            if diff <= max(seg_tol, 1e-13 * abs(cur)) or panels >= 1 << 14:
                break
        total += cur
        err += diff
    return total, err


def _tail_bound(f: CkFunction, n: int, X: float, lower_only: bool = False) -> float:
    beta = f.decay_beta
    if beta >= 0:
        raise NonConvergenceError(f"{f.name} does not decay (beta={beta}); norm diverges")
    beta = max(beta, -8.0)
    side = np.linspace(0.5 * X, X, 65)
    xs = side if lower_only else np.concatenate([side, -side])
    d = np.abs(f.derivs(xs, n))
    br = japanese_bracket(xs)
    ends = 1 if lower_only else 2
    total = 0.0
    for r in range(n + 1):
        c_r = np.max(d[r] * br ** (r - beta))
        total += ends * c_r * X**beta / (-beta)
    return float(total)


def weighted_norm(f: CkFunction, n: int, lo: float, tol: float = 1e-8,
                  full_output: bool = False, x_max: float = 1e12):
    """Shared driver for the A_n norm (lo=-inf) and the half-line norm (lo=0)."""
    if n > f.max_order:
        raise OrderExceededError(f"{f.name}: norm order {n} exceeds {f.max_order}")
    if f.is_compact:
        a, b = f.support
        a = max(a, lo)
        if b <= a:
            return (0.0, 0.0) if full_output else 0.0
        val, err = _derivative_weight_integrals(f, n, a, b, tol)
        return (val, err) if full_output else val
    half = lo == 0.0
    X = 16.0
    while True:
        tail = _tail_bound(f, n, X, lower_only=half)
        if tail <= tol / 10:
            break
        X *= 2.0
        if X > x_max:
            raise NonConvergenceError(f"{f.name}: norm tail above {tol / 10:g} at |x| = {x_max:g}")
    val, err = _derivative_weight_integrals(f, n, 0.0 if half else -X, X, tol)
    return (val, err + tail) if full_output else val


def an_norm(f: CkFunction, n: int, tol: float = 1e-8, full_output: bool = False):
    """||f||_n = sum_{r<=n} int |f^(r)(x)| <x>^(r-1) dx over the real line.

    The infinite range is truncated at |x| = X once a tail bound built from
    the decay exponent drops below tol/10; with ``full_output`` the tail
    bound is folded into the returned error estimate.
    """
    return weighted_norm(f, n, -np.inf, tol, full_output)


# -- constructions -----------------------------------------------------------------

_NEAR = 0.1
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def difference_quotient(f: CkFunction, s: float) -> CkFunction:
    """g_s(x) = (f(x) - f(s)) / (x - s), with g_s(s) = f'(s).

    Near s the quotient is evaluated as int_0^1 f'(s + t(x - s)) dt, which
    differentiates to g_s^(m)(x) = int_0^1 t^m f^(m+1)(s + t(x-s)) dt and
    avoids cancellation.
    """
    if f.max_order < 2:
        raise OrderExceededError("difference_quotient needs max_order >= 2")
    is_complex = np.iscomplexobj(f.jet(np.array([s]), 0))
    fs = complex(f(s)) if is_complex else float(f(s))

    def jetfn(x, k):
        out = np.zeros((k + 1, x.size), dtype=complex)
        dx = x - s
        near = np.abs(dx) < _NEAR
        far = ~near
        if far.any():
            num = Jet(f.jet(x[far], k))
            den = Jet.variable(x[far], k) - s
            out[:, far] = ((num - fs) / den).c
        if near.any():
            pts = s + np.outer(dx[near], _GL_T)  # (M, Q)
            c = f.jet(pts.ravel(), k + 1).reshape(k + 2, *pts.shape)
            for m in range(k + 1):
                # normalized: g^(m)/m! = (m+1) int t^m c_{m+1} dt
                out[m, near] = (m + 1) * (c[m + 1] * (_GL_T**m * _GL_W)).sum(axis=1)
        return out if is_complex else out.real

    beta = max(f.decay_beta, 0.0) - 1.0
    return CkFunction(jetfn, f.max_order - 1, beta, None, f"dq[{f.name}]@{s}")


def gamma_join(z: complex, w: complex, alpha):
    """Join z to w without passing through 0: modulus and argument interpolate linearly."""
    if z == 0 or w == 0:
        raise HSCalcError("gamma_join endpoints must be nonzero")
    alpha = np.asarray(alpha, dtype=float)
    rho = (1.0 - alpha) * abs(z) + alpha * abs(w)
    theta = (1.0 - alpha) * np.angle(z) + alpha * np.angle(w)
    out = rho * np.exp(1j * theta)
    return out if out.ndim else complex(out)


def _gamma_curve(f_a: complex, f_b: complex, lam: complex, a: float, b: float, max_order: int) -> CkFunction:
    z, w = f_a - lam, f_b - lam
    r0, r1 = abs(z), abs(w) - abs(z)
    t0, t1 = np.angle(z), np.angle(w) - np.angle(z)

    def jetfn(x, k):
        t = (Jet.variable(x, k) - a) / (b - a)
        rho = t * r1 + r0
        phase = (t * (1j * t1) + 1j * t0).exp()
        return (rho * phase + lam).c

    return CkFunction(jetfn, max_order, 0.0, None, "gamma")


def _certified_nonzero(vals: np.ndarray, xs: np.ndarray, slopes: np.ndarray) -> bool:
    """True if a function sampled on xs provably avoids 0 between samples."""
    dx = np.max(np.diff(xs))
    lip = np.max(np.abs(slopes))
    return bool(np.min(np.abs(vals)) > 0.5 * lip * dx * 1.01)


def rejoin_avoiding(f: CkFunction, interval: tuple[float, float], lam: complex,
                    grid: int = 4001) -> CkFunction:
    """Modify f on [a, b] so that it never takes the value lam there.

    The result agrees with f outside [a, b] and to all orders at a and b;
    inside, f is blended into the curve gamma_join(f(a)-lam, f(b)-lam, .)+lam.
    """
    a, b = map(float, interval)
    xs = np.linspace(a, b, grid)
    d = f.derivs(xs, 1)
    if _certified_nonzero(d[0] - lam, xs, d[1]):
        return f
    fa, fb = complex(f(a)), complex(f(b))
    ma, mb = abs(fa - lam), abs(fb - lam)
    if ma == 0 or mb == 0:
        raise EndpointHitsLambdaError(f"f({a if ma == 0 else b}) equals {lam}")
    g = _gamma_curve(fa, fb, lam, a, b, f.max_order)
    eps = 0.25 * (b - a)
    for _ in range(60):
        left = np.linspace(a, a + eps, 1001)
        right = np.linspace(b - eps, b, 1001)
        ok = (np.max(np.abs(f(left) - fa)) < 0.5 * ma and np.max(np.abs(g(left) - fa)) < 0.5 * ma
              and np.max(np.abs(f(right) - fb)) < 0.5 * mb and np.max(np.abs(g(right) - fb)) < 0.5 * mb)
        if ok:
            break
        eps *= 0.5
    else:
        raise NonConvergenceError("could not find a blending width for rejoin_avoiding")
    chi = approx_char(a + eps, b - eps, eps, max_order=f.max_order)
    h = f + chi * (g - f)
    return h.with_name(f"rejoin[{f.name}]")


def extended_inverse(phi: ExtendedElement, lam: complex = 0.0, window: Optional[float] = None,
                     grid: int = 20001) -> ExtendedElement:
    """Return (phi - lam)^(-1) as an element (1/(z - lam), mu) of C + A."""
    z = complex(phi.scalar) - lam
    if z == 0:
        raise ScalarEqualsLambdaError("scalar part equals lambda; the inverse is not in C + A")
    f = phi.function
    if f.is_compact:
        lo, hi = f.support
    else:
        X = window or _decay_window(f, abs(z))
        lo, hi = -X, X
    xs = np.linspace(lo, hi, grid)
    d = f.derivs(xs, 1)
    if not _certified_nonzero(d[0] + z, xs, d[1]):
        raise ValueAttainedError(f"{lam} lies in the closure of the range of phi")

    def jetfn(x, k):
        fj = Jet(f.jet(x, k))
        return ((-fj) / ((fj + z) * z)).c

    mu = CkFunction(jetfn, f.max_order, f.decay_beta, f.support, f"mu[{f.name}]")
    return ExtendedElement(1.0 / z, mu)


def _decay_window(f: CkFunction, level: float) -> float:
    """|x| beyond which |f| stays below level/4 (by the decay estimate)."""
    X = 8.0
    while X < 1e12:
        side = np.linspace(X, 4 * X, 257)
        if np.max(np.abs(f(np.concatenate([side, -side])))) < 0.25 * level:
            return X
        X *= 4.0
    raise NonConvergenceError(f"{f.name} does not decay below {0.25 * level:g}")
