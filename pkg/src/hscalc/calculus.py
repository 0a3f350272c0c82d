"""f(H) by quadrature of the Helffer-Sjostrand area integral

    f(H) = -1/pi  \\iint  dF/dzbar (x, y) (z - H)^{-1} dx dy,

together with the disc/contour split for bounded operators, the
extended (scalar + function) calculus and the semi-bounded calculus
obtained through Seeley's extension.

The area integral is discretized with a tensor midpoint rule in
coordinates (x, w) where y = 2 w^p <x>, w in (0, 1): the cut-off tau
depends on w alone, so its support is exactly covered. The default p = 2
crowds the y-cells toward the real axis where the integrand varies
fastest; p = 1 gives the plain midpoint rule. Compactly supported f use a
uniform x-grid over the support; decaying f use x = sinh(u) over a
window whose tail contribution is bounded a priori, with centre and
scale of the map fitted to where the derivatives of f concentrate. Each refinement level
halves both mesh widths; the error estimate is the Frobenius difference
of the last two levels plus the tail bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .almost_analytic import AlmostAnalytic, default_taylor_order
from .errors import (
    HSCalcError,
    NonConvergenceError,
    NonConvergenceWarning,
    OrderExceededError,
    SpectrumError,
)
from .functions import (
    CkFunction,
    ExtendedElement,
    HalfLineFunction,
    _tail_bound,
    approx_char,
    japanese_bracket,
)
from .operators import TestOperator, as_matrix, fit_resolvent_bound, resolvent_batch
from .seeley import (
    SeeleyCoefficients,
    alternate_cutoff,
    exp_half_line,
    seeley_coefficients,
    seeley_extend,
)

CHUNK = 1 << 16
MAX_NX = 1 << 14


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization of the area integral.

    nx=None picks the starting x-resolution from the function's derivative
    scale; ``levels`` counts grids including the first one.
    """

    nx: Optional[int] = None
    ny: int = 32
    levels: int = 4
    target_tol: float = 1e-4
    x_window: Optional[tuple[float, float]] = None
    y_grading: int = 2

    def __post_init__(self):
        if self.y_grading < 1:
            raise HSCalcError("y_grading must be >= 1")
        if self.nx is not None and self.nx < 4:
            raise HSCalcError("nx must be >= 4")
        if self.ny < 4:
            raise HSCalcError("ny must be >= 4")
        if self.levels < 2:
            raise HSCalcError("at least two levels are needed for an error estimate")


@dataclass
class CalculusResult:
    value: np.ndarray
    error_estimate: float
    levels_used: int
    n_used: int
    cells: int = 0
    converged: bool = True
    tail_bound: float = 0.0
    extras: dict = field(default_factory=dict)

    def summary(self) -> str:
        return f"levels={self.levels_used} est={self.error_estimate:.3e} n={self.n_used} cells={self.cells}"


@dataclass(frozen=True)
class OperatorInfo:
    H: np.ndarray
    enclosure: Optional[tuple[float, float]]
    c: float
    alpha: float


def operator_info(H, bound: Optional[tuple[float, float]] = None,
                  enclosure: Optional[tuple[float, float]] = None) -> OperatorInfo:
    """Matrix plus spectral enclosure and resolvent-bound constants.

    A TestOperator is diagonalizable, so its resolvent obeys the bound with
    alpha = 0 and c = kappa(P). Plain matrices get a fitted bound unless
    ``bound=(c, alpha)`` is given.
    """
    if isinstance(H, TestOperator):
        c, alpha = bound if bound is not None else (H.kappa, 0.0)
        return OperatorInfo(H.H, enclosure or H.enclosure, c, alpha)
    M = as_matrix(H)
    if bound is None:
        r = float(np.linalg.norm(M, 2))
        fit = fit_resolvent_bound(M, enclosure=enclosure or (-r, r))
        bound = (fit.c, fit.alpha)
    return OperatorInfo(M, enclosure, bound[0], bound[1])


def _feature_scale(f: CkFunction, xs: np.ndarray, stretch: np.ndarray, order: int) -> float:
    d = np.abs(f.derivs(xs, order))
    m0 = d[0].max()
    if m0 == 0:
        return np.inf
    scales = []
    for k in range(1, order + 1):
        mk = np.max(d[k] * stretch**k)
        if mk > 0:
            scales.append((m0 / mk) ** (1.0 / k))
    return min(scales) if scales else np.inf


def _pow2_at_least(v: float, lo: int = 32, hi: int = MAX_NX) -> int:
    v = max(v, lo)
    return int(min(hi, 2 ** math.ceil(math.log2(v))))


def _count(f: CkFunction, order: int, x: np.ndarray, stretch: np.ndarray, width: float) -> int:
    scale = _feature_scale(f, x, stretch, order)
    return _pow2_at_least(8.0 * width / scale if np.isfinite(scale) else 32)


def _sinh_map(f: CkFunction, order: int, X: float, pilot: int = 4097):
    """Centre c and scale a for x = c + a sinh(u) covering [-X, X] with the fewest cells.

    c sits where the derivatives concentrate; a is scanned over powers of
    two. A smooth map keeps the midpoint rule spectrally accurate, which a
    piecewise-uniform grid would not.
    """
    u = np.linspace(-np.arcsinh(X), np.arcsinh(X), pilot)
    x = np.sinh(u)
    d = np.abs(f.derivs(x, order))
    m0 = d[0].max()
    c = 0.0
    if m0 > 0:
        rho = sum((d[k] / m0) ** (1.0 / k) for k in range(1, order + 1))
        c = float(x[np.argmax(rho)])
    best = None
    for a in 2.0 ** -np.arange(7):
        lo, hi = np.arcsinh((-X - c) / a), np.arcsinh((X - c) / a)
        t = np.linspace(lo, hi, pilot)
        n = _count(f, order, c + a * np.sinh(t), a * np.cosh(t), hi - lo)
        if best is None or n < best[0]:
            best = (n, c, float(a), float(lo), float(hi))
    return best


class _AreaGrid:
    """Uniform midpoint grid in (t, w), mirrored in y.

    t is x itself for compactly supported f and u with x = c + a sinh(u)
    otherwise; y = 2 w^p <x>.
    """

    def __init__(self, f: CkFunction, n: int, quad: QuadratureSpec, info: OperatorInfo):
        self.compact = f.is_compact or quad.x_window is not None
        self.tail = 0.0
        self.c, self.a = 0.0, 1.0
        tol = quad.target_tol
        if self.compact:
            lo, hi = quad.x_window if quad.x_window is not None else f.support
            if f.support is not None:
                lo, hi = max(lo, f.support[0]), min(hi, f.support[1])
            self.lo, self.hi = float(lo), float(hi)
            if quad.nx is None:
                pilot = np.linspace(self.lo, self.hi, 4097)
                nx0 = _count(f, n + 1, pilot, np.ones_like(pilot), self.hi - self.lo)
        else:
            X = 8.0
            const = 6.0 * info.c / np.pi
            while True:
                self.tail = const * _tail_bound(f, n + 1, X)
                if self.tail <= tol / 10:
                    break
                X *= 2.0
                if X > 1e12:
                    raise NonConvergenceError(f"{f.name}: tail of the area integral does not fall below tolerance")
            nx0, self.c, self.a, self.lo, self.hi = _sinh_map(f, n + 1, X)
        self.nx0 = quad.nx if quad.nx is not None else nx0
        self.ny0 = quad.ny
        self.p = quad.y_grading

    def level(self, level: int):
        nx = self.nx0 * 2**level
        ny = self.ny0 * 2**level
        h = (self.hi - self.lo) / nx
        t = self.lo + (np.arange(nx) + 0.5) * h
        if self.compact:
            x, jx = t, np.full(nx, h)
        else:
            x, jx = self.c + self.a * np.sinh(t), self.a * np.cosh(t) * h
        # v = 2 w^p crowds the y-cells toward the real axis for p > 1
        dw = 1.0 / ny
        w = (np.arange(ny) + 0.5) * dw
        v = 2.0 * w**self.p
        jv = 2.0 * self.p * w ** (self.p - 1) * dw
        br = japanese_bracket(x)
        X = np.repeat(x, ny)
        Y = (v[None, :] * br[:, None]).ravel()
        J = ((jx * br)[:, None] * jv[None, :]).ravel()
        return nx, ny, X, Y, J


def _accumulate(H: np.ndarray, zs: np.ndarray, w: np.ndarray) -> np.ndarray:
    d = H.shape[0]
    acc = np.zeros((d, d), dtype=complex)
    for s in range(0, zs.size, CHUNK):
        R = resolvent_batch(H, zs[s : s + CHUNK])
        acc += (w[s : s + CHUNK] @ R.reshape(R.shape[0], d * d)).reshape(d, d)
    return acc


def _area_sum(F: AlmostAnalytic, H: np.ndarray, X: np.ndarray, Y: np.ndarray, J: np.ndarray):
    total = 0.0
    cells = 0
    for sign in (1.0, -1.0):
        w = (-1.0 / np.pi) * F.dbar(X, sign * Y) * J
        live = w != 0
        cells += int(live.sum())
        total = total + _accumulate(H, X[live] + 1j * sign * Y[live], w[live])
    return total, cells


def _roundoff_floor(value: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.linalg.norm(value)))


def _resolve_n(n, f: CkFunction, info: OperatorInfo) -> int:
    if n is None or n == "auto":
        n = default_taylor_order(info.alpha)
        n = min(n, f.max_order - 1)
    n = int(n)
    if n <= info.alpha:
        raise OrderExceededError(f"Taylor order n = {n} must exceed alpha = {info.alpha:g}")
    if n + 1 > f.max_order:
        raise OrderExceededError(f"{f.name} carries {f.max_order} derivatives; n = {n} needs {n + 1}")
    return n


def _refine(levels: int, tol: float, step) -> tuple[np.ndarray, float, int, int, bool]:
    prev = None
    est = np.inf
    value = None
    cells = 0
    used = 0
    for lev in range(levels):
        value, cells = step(lev)
        used = lev + 1
        if prev is not None:
            est = float(np.linalg.norm(value - prev)) + _roundoff_floor(value)
            if est <= tol:
                return value, est, used, cells, True
        prev = value
    return value, est, used, cells, False


def hs_apply(f: CkFunction, H, n=None, quad: QuadratureSpec = QuadratureSpec(), *,
             kernel: str = "exp", bound: Optional[tuple[float, float]] = None) -> CalculusResult:
    """Compute f(H) from the area integral, refining until the estimate meets quad.target_tol.

    If the tolerance is not met after ``quad.levels`` grids the last value is
    returned with ``converged=False`` and a NonConvergenceWarning.
    """
    info = H if isinstance(H, OperatorInfo) else operator_info(H, bound)
    n = _resolve_n(n, f, info)
    if f.is_compact and f.support[1] <= f.support[0]:
        d = info.H.shape[0]
        return CalculusResult(np.zeros((d, d), dtype=complex), 0.0, 0, n)
    F = AlmostAnalytic(f, n, kernel)
    grid = _AreaGrid(f, n, quad, info)
    tol = quad.target_tol

    def step(lev):
        _, _, X, Y, J = grid.level(lev)
        return _area_sum(F, info.H, X, Y, J)

    value, est, used, cells, ok = _refine(quad.levels, max(tol - grid.tail, tol / 2), step)
    est += grid.tail
    if not ok:
        warnings.warn(f"hs_apply({f.name}): estimate {est:.2e} above tolerance {tol:.1e}",
                      NonConvergenceWarning, stacklevel=2)
    return CalculusResult(value, est, used, n, cells, ok, grid.tail,
                          {"nx": grid.nx0 * 2 ** (used - 1), "ny": grid.ny0 * 2 ** (used - 1)})


def hs_apply_extended(phi: ExtendedElement, H, n=None, quad: QuadratureSpec = QuadratureSpec(),
                      **kw) -> CalculusResult:
    """phi(H) = (function part)(H) + (scalar part) I."""
    info = H if isinstance(H, OperatorInfo) else operator_info(H, kw.pop("bound", None))
    res = hs_apply(phi.function, info, n, quad, **kw)
    d = info.H.shape[0]
    value = res.value + phi.scalar * np.eye(d)
    return replace(res, value=value)


def hs_contour_apply(f: CkFunction, B, eps: float, quad: QuadratureSpec = QuadratureSpec(),
                     n=None, *, enclosure: Optional[tuple[float, float]] = None,
                     compactify: bool = True, kernel: str = "exp") -> CalculusResult:
    """f(B) for bounded B as a circle contour integral plus a disc area integral.

    The disc is centred at (l+u)/2 with radius (u-l)/2 + eps, where [l, u]
    encloses the spectrum. Non-compact f are first multiplied by the plateau
    chi_[l,u],eps/2, which does not change f(B).
    """
    if not eps > 0:
        raise HSCalcError("eps must be positive")
    info = operator_info(B, enclosure=enclosure)
    if info.enclosure is None:
        raise SpectrumError("hs_contour_apply needs a spectral enclosure [l, u]")
    lo, hi = info.enclosure
    if compactify and not f.is_compact:
        f = f * approx_char(lo, hi, 0.5 * eps, max_order=f.max_order)
    n = _resolve_n(n, f, info)
    F = AlmostAnalytic(f, n, kernel)
    c0 = 0.5 * (lo + hi)
    rho = 0.5 * (hi - lo) + eps
    if quad.nx is not None:
        nx0 = quad.nx
    else:
        pilot = np.linspace(c0 - rho, c0 + rho, 4097)
        scale = _feature_scale(f, pilot, np.ones_like(pilot), n + 1)
        nx0 = _pow2_at_least(8.0 * np.pi * rho / scale if np.isfinite(scale) else 32)
    H = info.H

    def step(lev):
        nx = nx0 * 2**lev
        ny = quad.ny * 2**lev
        m = 4 * nx
        theta = 2.0 * np.pi * np.arange(m) / m
        zb = c0 + rho * np.exp(1j * theta)
        wb = F.evaluate(zb.real, zb.imag) * (rho * np.exp(1j * theta)) / m
        live = wb != 0
        boundary = _accumulate(H, zb[live], wb[live])
        dphi = np.pi / nx
        phi = -0.5 * np.pi + (np.arange(nx) + 0.5) * dphi
        deta = 1.0 / ny
        eta = (np.arange(ny) + 0.5) * deta
        X = np.repeat(c0 + rho * np.sin(phi), ny)
        Y = (rho * np.cos(phi)[:, None] * eta[None, :]).ravel()
        J = np.repeat(rho**2 * np.cos(phi) ** 2, ny) * dphi * deta
        area, cells = _area_sum(F, H, X, Y, J)
        return boundary + area, cells + int(live.sum())

    value, est, used, cells, ok = _refine(quad.levels, quad.target_tol, step)
    if not ok:
        warnings.warn(f"hs_contour_apply({f.name}): estimate {est:.2e} above tolerance",
                      NonConvergenceWarning, stacklevel=2)
    return CalculusResult(value, est, used, n, cells, ok)


def rectangle_contour_identity(B, lo: float, hi: float, delta: float = 0.5,
                               tol: float = 1e-13) -> tuple[np.ndarray, float]:
    """(1/2 pi i) \\oint (z - B)^{-1} dz around |Re z - c| < (hi-lo)/2, |Im z| < delta.

    Each side uses composite Gauss-Legendre, doubled until two passes agree.
    """
    H = B.H if isinstance(B, TestOperator) else as_matrix(B)
    corners = [complex(lo, -delta), complex(hi, -delta), complex(hi, delta), complex(lo, delta)]
    prev = None
    for panels in (4, 8, 16, 32, 64, 128):
        nodes, weights = np.polynomial.legendre.leggauss(16)
        zs, ws = [], []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            edges = np.linspace(0.0, 1.0, panels + 1)
            for s, t in zip(edges[:-1], edges[1:]):
                tau = 0.5 * (s + t) + 0.5 * (t - s) * nodes
                zs.append(a + (b - a) * tau)
                ws.append(0.5 * (t - s) * weights * (b - a))
        zs = np.concatenate(zs)
        ws = np.concatenate(ws) / (2j * np.pi)
        value = _accumulate(H, zs, ws)
        if prev is not None and np.linalg.norm(value - prev) <= tol:
            return value, float(np.linalg.norm(value - prev))
        prev = value
    return value, float(np.linalg.norm(value - prev))


def char_one_check(B, lo: float, hi: float, eps: float, quad: QuadratureSpec = QuadratureSpec(),
                   *, delta: float = 0.5, enclosure: Optional[tuple[float, float]] = None,
                   details: bool = False):
    """Deviation of chi_[lo,hi],eps (B) from I, by area quadrature and by a rectangle contour."""
    info = operator_info(B, enclosure=enclosure)
    if info.enclosure is None:
        raise SpectrumError("char_one_check needs a spectral enclosure")
    l, u = info.enclosure
    if not (lo < l and hi > u):
        raise SpectrumError(f"[{lo}, {hi}] does not strictly enclose the spectrum [{l}, {u}]")
    if not 0 < delta < 1:
        raise HSCalcError("rectangle half-height must lie in (0, 1)")
    d = info.H.shape[0]
    chi = approx_char(lo, hi, eps)
    area = hs_apply(chi, info, None, quad)
    dev_area = float(np.linalg.norm(area.value - np.eye(d)))
    contour, _ = rectangle_contour_identity(info.H, lo, hi, delta)
    dev_contour = float(np.linalg.norm(contour - np.eye(d)))
    worst = max(dev_area, dev_contour)
    if details:
        return worst, dev_area, dev_contour, area
    return worst


def _semibounded_info(H) -> OperatorInfo:
    info = operator_info(H)
    if info.enclosure is None:
        raise SpectrumError("semi-bounded calculus needs a spectral enclosure; pass a TestOperator")
    if info.enclosure[0] < -1e-12:
        raise SpectrumError(f"spectrum reaches {info.enclosure[0]} < 0")
    return info


def semibounded_apply(fplus: CkFunction, H, seeley: Optional[SeeleyCoefficients] = None, n=None,
                      quad: QuadratureSpec = QuadratureSpec(), *, check_extension: bool = True,
                      enclosure: Optional[tuple[float, float]] = None) -> CalculusResult:
    """gamma_H(f+) = (E f+)(H) for H with spectrum in [0, inf).

    The extension matches n + 1 derivatives at 0, the fewest the area
    integral needs: every extra order multiplies the derivatives on (-2, 0)
    by powers of 2^K and slows the quadrature down sharply.

    With ``check_extension`` a second extension (same coefficients, cutoff
    built on the other glue kernel) is applied as well and the gap between the two results is reported in
    ``extras["extension_gap"]``.
    """
    info = operator_info(H, enclosure=enclosure) if enclosure else _semibounded_info(H)
    if info.enclosure[0] < -1e-12:
        raise SpectrumError(f"spectrum reaches {info.enclosure[0]} < 0")
    n_used = default_taylor_order(info.alpha) if n in (None, "auto") else int(n)
    coeffs = seeley or seeley_coefficients(n_used + 1)
    F = seeley_extend(fplus, coeffs)
    res = hs_apply(F, info, n_used, quad)
    if check_extension:
        other = hs_apply(seeley_extend(fplus, coeffs, alternate_cutoff()), info, n_used, quad)
        gap = float(np.linalg.norm(res.value - other.value))
        res.extras["extension_gap"] = gap
        res.extras["extension_estimate"] = other.error_estimate
        if gap > 2 * quad.target_tol:
            warnings.warn(f"two Seeley extensions disagree by {gap:.2e}", NonConvergenceWarning,
                          stacklevel=2)
    return res


def heat_semigroup(H, n_power: int, t: float, quad: QuadratureSpec = QuadratureSpec(), n=None,
                   **kw) -> CalculusResult:
    """exp(-H^n_power t) := gamma_H(exp(-s^n_power t)) for 0 < t <= 1."""
    if not 0 < t <= 1:
        raise HSCalcError(f"t = {t} outside (0, 1]")
    if n_power < 1:
        raise HSCalcError("n_power must be >= 1")
    fplus = exp_half_line(t, n_power)
    return semibounded_apply(fplus, H, None, n, quad, **kw)


def as_half_line(f: CkFunction) -> HalfLineFunction:
    return f if isinstance(f, HalfLineFunction) else HalfLineFunction.restrict(f)
