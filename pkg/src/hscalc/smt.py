"""Spectral mapping checks on operators with a known eigendecomposition.

The computed phi(H) is never handed to an eigensolver. Instead it is pulled
back through the conditioner, Delta = P^{-1} phi(H) P, and both inclusions
of the spectral mapping theorem become statements about Delta: it must be
diagonal, and its diagonal must be phi(eigs).
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .almost_analytic import AlmostAnalytic
from .calculus import (
    CalculusResult,
    QuadratureSpec,
    _AreaGrid,
    _area_sum,
    _resolve_n,
    hs_apply,
    hs_apply_extended,
    operator_info,
)
from .errors import HSCalcError, NotAnEigenvalueError, SpectrumError
from .functions import (
    CkFunction,
    ExtendedElement,
    approx_char,
    difference_quotient,
    rejoin_avoiding,
    resolvent_function,
)
from .jets import Jet
from .operators import TestOperator, oracle_apply

Element = Union[CkFunction, ExtendedElement]


def _as_extended(phi: Element) -> ExtendedElement:
    return phi if isinstance(phi, ExtendedElement) else ExtendedElement(0.0, phi)


def _element_name(phi: ExtendedElement) -> str:
    if phi.scalar == 0:
        return phi.function.name
    return f"({phi.scalar:g}, {phi.function.name})"


@dataclass(frozen=True)
class SmtReport:
    operator_id: str
    function_id: str
    forward_defect: float
    reverse_defect: float
    offdiag_norm: float
    quad_estimate: float
    kappa: float = 1.0

    def ok(self, tol: float, factor: float = 10.0) -> bool:
        """Defects within factor * tol * kappa(P)."""
        bar = factor * tol * self.kappa
        return max(self.forward_defect, self.reverse_defect, self.offdiag_norm) <= bar

    @classmethod
    def csv_header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def csv_row(self) -> list:
        return [getattr(self, name) for name in self.csv_header()]


def spectral_mapping_report(phi: Element, T: TestOperator, value: np.ndarray, estimate: float = 0.0,
                            operator_id: Optional[str] = None) -> SmtReport:
    """Defects of an already computed phi(H) = ``value``.

    Delta = P^{-1} value P. offdiag_norm is the Frobenius norm of its
    off-diagonal part, reverse_defect the worst |Delta_ii - phi(lambda_i)|,
    forward_defect the worst distance of a diagonal entry to
    phi(sigma(H)) together with the scalar part of phi.
    """
    phi = _as_extended(phi)
    delta = T.P_inv @ value @ T.P
    diag = np.diag(delta)
    off = float(np.linalg.norm(delta - np.diag(diag)))
    expected = np.asarray(phi(T.eigs), dtype=complex)
    reverse = float(np.max(np.abs(diag - expected)))
    targets = np.append(expected, complex(phi.scalar))
    forward = float(np.max(np.min(np.abs(diag[:, None] - targets[None, :]), axis=1)))
    return SmtReport(operator_id or T.label, _element_name(phi), forward, reverse, off,
                     float(estimate), T.kappa)


def verify_spectral_mapping(phi: Element, T: TestOperator, n=None,
                            quad: QuadratureSpec = QuadratureSpec(), *,
                            operator_id: Optional[str] = None) -> SmtReport:
    if not isinstance(T, TestOperator):
        raise SpectrumError("spectral mapping checks need a TestOperator with known eigenvectors")
    phi = _as_extended(phi)
    res = hs_apply_extended(phi, T, n, quad)
    return spectral_mapping_report(phi, T, res.value, res.error_estimate, operator_id)


def verify_batch(pairs: Iterable[tuple[Element, TestOperator]], n=None,
                 quad: QuadratureSpec = QuadratureSpec(), *, workers: int = 4) -> list[SmtReport]:
    """Run independent checks concurrently; the result is sorted by (operator, function)."""
    pairs = list(pairs)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        reports = list(pool.map(lambda p: verify_spectral_mapping(p[0], p[1], n, quad), pairs))
    return sorted(reports, key=lambda r: (r.operator_id, r.function_id))


def write_reports(reports: Sequence[SmtReport], fh: TextIO) -> None:
    w = csv.writer(fh)
    w.writerow(SmtReport.csv_header())
    for r in reports:
        w.writerow(r.csv_row())


# -- approximate eigenvectors --------------------------------------------------


@dataclass(frozen=True)
class EigvecResidual:
    residual: float
    factorized: float
    path_gap: float
    estimate: float


def _eigen_index(T: TestOperator, s: float) -> int:
    i = int(np.argmin(np.abs(T.eigs - s)))
    if abs(T.eigs[i] - s) > 1e-12 * max(1.0, abs(s)):
        raise NotAnEigenvalueError(f"{s} is not an eigenvalue of {T.label}")
    return i


def approx_eigvec_residual(f: Element, T: TestOperator, s: float,
                           quad: QuadratureSpec = QuadratureSpec(), n=None, *,
                           details: bool = False):
    """||f(H) v - f(s) v|| for the unit eigenvector v of s.

    The factorized path computes the same vector as g_s(H) k_s(H) (H + i) v
    with g_s the difference quotient of f at s and k_s = (1, (s+i) g_{-i}),
    i.e. k_s(x) = 1 - (s+i)/(x+i).
    """
    i = _eigen_index(T, s)
    s = float(T.eigs[i])
    phi = _as_extended(f)
    v = T.eigvec(i)
    res = hs_apply_extended(phi, T, n, quad)
    direct = res.value @ v - complex(phi(s)) * v
    residual = float(np.linalg.norm(direct))
    if not details:
        return residual

    info = operator_info(T)
    d = T.dim
    f0 = phi.function
    if f0.is_compact and f0.support[1] <= f0.support[0]:
        fact = np.zeros(d, dtype=complex)
        est = res.error_estimate
    else:
        g = hs_apply(difference_quotient(f0, s), info, n, quad)
        k = hs_apply_extended(ExtendedElement(1.0, resolvent_function(-1j) * (s + 1j)), info, n, quad)
        w = T.H @ v + 1j * v
        fact = g.value @ (k.value @ w)
        nw = float(np.linalg.norm(w))
        est = (res.error_estimate
               + g.error_estimate * np.linalg.norm(k.value, 2) * nw
               + np.linalg.norm(g.value, 2) * k.error_estimate * nw)
    return EigvecResidual(residual, float(np.linalg.norm(fact)),
                          float(np.linalg.norm(direct - fact)), float(est))


# -- convergence study ---------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    nx: int
    ny: int
    error: float
    estimate: float
    seconds: float


def convergence_table(f: CkFunction, T: TestOperator, levels: int = 4, n=None,
                      quad: QuadratureSpec = QuadratureSpec()) -> list[ConvergenceRow]:
    """Frobenius error against the exact P f(eigs) P^{-1} on successive grids.

    The estimate column is the difference to the previous level (nan on the
    first row), plus the a priori tail bound for non-compact f.
    """
    if levels < 3:
        raise HSCalcError("a convergence study needs at least 3 levels")
    info = operator_info(T)
    n = _resolve_n(n, f, info)
    exact = oracle_apply(T, f)
    rows = []
    if f.is_compact and f.support[1] <= f.support[0]:
        for lev in range(levels):
            rows.append(ConvergenceRow(lev, 0, 0, float(np.linalg.norm(exact)), 0.0, 0.0))
        return rows
    F = AlmostAnalytic(f, n)
    grid = _AreaGrid(f, n, quad, info)
    prev = None
    for lev in range(levels):
        t0 = time.perf_counter()
        nx, ny, X, Y, J = grid.level(lev)
        value, _ = _area_sum(F, info.H, X, Y, J)
        dt = time.perf_counter() - t0
        est = float("nan") if prev is None else float(np.linalg.norm(value - prev)) + grid.tail
        rows.append(ConvergenceRow(lev, nx, ny, float(np.linalg.norm(value - exact)), est, dt))
        prev = value
    return rows


def error_ratios(rows: Sequence[ConvergenceRow]) -> list[float]:
    return [a.error / b.error if b.error > 0 else float("inf") for a, b in zip(rows, rows[1:])]


def write_table(rows: Sequence[ConvergenceRow], fh: TextIO) -> None:
    w = csv.writer(fh)
    w.writerow([f.name for f in fields(ConvergenceRow)])
    for r in rows:
        w.writerow(list(asdict(r).values()))


# -- bounded-operator exclusion ------------------------------------------------


@dataclass(frozen=True)
class ExclusionResult:
    residual: float
    estimate: float
    eps: float
    rejoined: int
    g: CkFunction


def _flat_margin(f: CkFunction, x0: float, direction: float, start: float) -> float:
    """Largest step h <= start with |f - f(x0)| < |f(x0)|/2 on the segment toward direction."""
    f0 = complex(f(x0))
    h = start
    for _ in range(60):
        seg = x0 + direction * np.linspace(0.0, h, 513)
        if np.max(np.abs(f(seg) - f0)) < 0.5 * abs(f0):
            return h
        h *= 0.5
    raise HSCalcError(f"{f.name} varies too fast near {x0}")


def _reciprocal_on(chi: CkFunction, fhat: CkFunction) -> CkFunction:
    """chi / fhat, set to 0 outside the support of chi."""
    lo, hi = chi.support

    def jetfn(x, k):
        out = np.zeros((k + 1, x.size), dtype=complex)
        inside = (x > lo) & (x < hi)
        if inside.any():
            out[:, inside] = (Jet(chi.jet(x[inside], k)) / Jet(fhat.jet(x[inside], k))).c
        return out

    return CkFunction(jetfn, min(chi.max_order, fhat.max_order), -np.inf, (lo, hi),
                      f"chi/{fhat.name}")


def bounded_exclusion_check(phi: Element, T: TestOperator, quad: QuadratureSpec = QuadratureSpec(),
                            n=None) -> ExclusionResult:
    """Build g with (phi(H) - pi) g(H) = I following the exclusion argument for bounded H.

    f, the function part of phi, may vanish, but only away from the spectrum.
    Zeros in each gap between neighbouring eigenvalues are removed with
    rejoin_avoiding, the ends are padded by eps on which f stays away from
    0, and g = chi_[l-eps, u+eps], eps / fhat.
    """
    phi = _as_extended(phi)
    f = phi.function
    eigs = np.unique(T.eigs)
    vals = np.abs(np.asarray(f(eigs), dtype=complex))
    if np.any(vals == 0) or np.min(vals) < 1e-12:
        raise SpectrumError("phi takes its scalar value on the spectrum")
    l, u = float(eigs[0]), float(eigs[-1])
    span = max(u - l, 1.0)
    eps = min(_flat_margin(f, l, -1.0, 0.25 * span), _flat_margin(f, u, 1.0, 0.25 * span)) / 2
    fhat = f
    rejoined = 0
    for a, b in zip(eigs[:-1], eigs[1:]):
        ha = _flat_margin(f, a, 1.0, 0.25 * (b - a))
        hb = _flat_margin(f, b, -1.0, 0.25 * (b - a))
        new = rejoin_avoiding(fhat, (a + ha, b - hb), 0.0)
        rejoined += new is not fhat
        fhat = new
    chi = approx_char(l - eps, u + eps, eps, max_order=f.max_order)
    g = _reciprocal_on(chi, fhat)
    info = operator_info(T)
    fr = hs_apply(f, info, n, quad)
    gr = hs_apply(g, info, n, quad)
    d = T.dim
    residual = float(np.linalg.norm(fr.value @ gr.value - np.eye(d)))
    est = (fr.error_estimate * np.linalg.norm(gr.value, 2)
           + gr.error_estimate * np.linalg.norm(fr.value, 2))
    return ExclusionResult(residual, float(est), float(eps), int(rejoined), g)
