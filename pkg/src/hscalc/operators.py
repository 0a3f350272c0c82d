"""Dense complex matrices with known real spectrum, and their resolvents."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np
import scipy.linalg

from .errors import (
    HSCalcError,
    RealShiftInsideSpectrumError,
    SingularConditionerError,
    SingularShiftError,
)
from .functions import CkFunction, japanese_bracket

PIVOT_RTOL = 1e-14


def as_matrix(M) -> np.ndarray:
    A = np.array(M, dtype=complex, ndmin=2)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise HSCalcError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise HSCalcError("matrix has non-finite entries")
    A.setflags(write=False)
    return A


def resolvent(H, z: complex, enclosure: Optional[tuple[float, float]] = None) -> np.ndarray:
    """(zI - H)^{-1} by LU with partial pivoting and one refinement step."""
    H = np.asarray(H, dtype=complex)
    z = complex(z)
    if z.imag == 0 and enclosure is not None and enclosure[0] <= z.real <= enclosure[1]:
        raise RealShiftInsideSpectrumError(f"z = {z.real} lies inside the spectral enclosure {enclosure}")
    d = H.shape[0]
    A = z * np.eye(d) - H
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    scale = max(np.abs(A).max(), 1.0)
    if np.min(np.abs(np.diag(lu))) <= PIVOT_RTOL * scale:
        raise SingularShiftError(f"zI - H is numerically singular at z = {z}")
    eye = np.eye(d, dtype=complex)
    R = scipy.linalg.lu_solve((lu, piv), eye, check_finite=False)
    R = R + scipy.linalg.lu_solve((lu, piv), eye - A @ R, check_finite=False)
    return R


def resolvent_batch(H, zs: np.ndarray) -> np.ndarray:
    """Stack of resolvents (z_j I - H)^{-1}, shape (N, d, d).

    LAPACK LU inversion (getrf/getri) on the whole stack plus one Newton
    refinement step R += R (I - A R). Callers never pass real z here.
    """
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    zs = np.asarray(zs, dtype=complex).ravel()
    if d == 1:
        return (1.0 / (zs - H[0, 0]))[:, None, None]
    A = zs[:, None, None] * np.eye(d) - H
    R = np.linalg.inv(A)
    E = -(A @ R)
    E[:, np.arange(d), np.arange(d)] += 1.0
    R += R @ E
    return R


def spectral_norm(M, steps: int = 50, tol: float = 1e-8) -> float:
    """||M||_2 by power iteration on M^* M, started from a fixed vector.

    Power iteration only approaches the norm from below, so if it has not
    settled after ``steps`` iterations the exact LAPACK value is used.
    """
    M = np.asarray(M, dtype=complex)
    if not np.any(M):
        return 0.0
    G = M.conj().T @ M
    v = np.ones(M.shape[1], dtype=complex) + 0.1j * np.arange(M.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(steps):
        w = G @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            break
        new = float(np.real(np.vdot(v, w)))
        v = w / nrm
        if abs(new - lam) <= tol * max(new, 1e-300):
            lam = new
            break
        lam = new
    else:
        return float(np.linalg.norm(M, 2))
    lam = max(lam, float(np.real(np.vdot(v, G @ v))))
    return float(np.sqrt(max(lam, 0.0)))


@dataclass(frozen=True, eq=False)
class TestOperator:
    """H = P diag(eigs) P^{-1} with the spectrum known exactly."""

    __test__ = False  # keep pytest from collecting this class

    eigs: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    H: np.ndarray = field(repr=False)
    label: str = "T"

    @property
    def dim(self) -> int:
        return self.eigs.size

    @property
    def kappa(self) -> float:
        """Condition number ||P||_2 ||P^{-1}||_2."""
        s = np.linalg.svd(self.P, compute_uv=False)
        return float(s[0] / s[-1])

    @property
    def enclosure(self) -> tuple[float, float]:
        return float(self.eigs.min()), float(self.eigs.max())

    def eigvec(self, i: int) -> np.ndarray:
        v = self.P[:, i]
        return v / np.linalg.norm(v)


def _random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def make_test_operator(eigs: Sequence[float], conditioner="unitary", *, seed: int = 0,
                       delta: float = 0.1, P=None, label: Optional[str] = None) -> TestOperator:
    """Build H = P diag(eigs) P^{-1}.

    conditioner is "identity", "unitary" (normal H), "jordan_like" (P with
    singular values spread geometrically from 1 down to delta, so that
    kappa(P) = 1/delta and the eigenvectors are nearly dependent) or "given"
    (use ``P``).
    """
    eigs = np.asarray(eigs, dtype=float).ravel()
    if eigs.size == 0 or not np.all(np.isfinite(eigs)):
        raise HSCalcError("eigs must be a nonempty list of finite reals")
    d = eigs.size
    rng = np.random.default_rng(seed)
    if conditioner == "identity":
        Pm = np.eye(d, dtype=complex)
    elif conditioner == "unitary":
        Pm = _random_unitary(d, rng)
    elif conditioner == "jordan_like":
        if not 0 < delta <= 1:
            raise HSCalcError("jordan_like needs 0 < delta <= 1")
        U = _random_unitary(d, rng)
        V = _random_unitary(d, rng)
        s = np.geomspace(1.0, delta, d) if d > 1 else np.ones(1)
        Pm = (U * s) @ V.conj().T
    elif conditioner == "given":
        if P is None:
            raise HSCalcError("conditioner 'given' needs P")
        Pm = np.array(P, dtype=complex)
    else:
        raise HSCalcError(f"unknown conditioner {conditioner!r}")
    if Pm.shape != (d, d):
        raise HSCalcError("P has the wrong shape")
    s = np.linalg.svd(Pm, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SingularConditionerError("conditioner P is singular")
    P_inv = np.linalg.solve(Pm, np.eye(d))
    if conditioner in ("identity", "unitary"):
        P_inv = Pm.conj().T.copy()
    H = (Pm * eigs) @ P_inv
    for arr in (eigs, Pm, P_inv, H):
        arr.setflags(write=False)
    default = f"{conditioner}[" + ",".join(f"{e:g}" for e in eigs) + "]"
    return TestOperator(eigs, Pm, P_inv, H, label or default)


def oracle_apply(T: TestOperator, f) -> np.ndarray:
    """Exact f(H) = P diag(f(eigs)) P^{-1}; f may be a CkFunction or callable."""
    vals = np.asarray(f(T.eigs), dtype=complex)
    return (T.P * vals) @ T.P_inv


@dataclass(frozen=True)
class ResolventBoundFit:
    c: float
    alpha: float
    zs: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    max_ratio: float = 1.0

    def bound(self, z) -> np.ndarray:
        z = np.asarray(z)
        y = np.abs(z.imag)
        return self.c / y * (japanese_bracket(z) / y) ** self.alpha


def bound_grid(enclosure: tuple[float, float], n_re: int = 41, n_im: int = 31) -> np.ndarray:
    lo, hi = enclosure
    re = np.linspace(lo - 10.0, hi + 10.0, n_re)
    im = np.geomspace(1e-3, 1e2, n_im)
    X, Y = np.meshgrid(re, np.concatenate([im, -im]))
    return (X + 1j * Y).ravel()


def fit_resolvent_bound(H, zs=None, *, enclosure: Optional[tuple[float, float]] = None) -> ResolventBoundFit:
    """Fit ||(z-H)^{-1}|| <= c |Im z|^{-1} (<z>/|Im z|)^alpha on a grid.

    alpha is the least-squares slope of the upper envelope of
    log(||R|| |Im z|) against log(<z>/|Im z|), clipped at 0; c is then the
    smallest constant making the bound hold at every grid point.
    """
    H = as_matrix(H)
    if zs is None:
        if enclosure is None:
            raise HSCalcError("fit_resolvent_bound needs a z-grid or a spectral enclosure")
        zs = bound_grid(enclosure)
    zs = np.asarray(zs, dtype=complex).ravel()
    if np.any(zs.imag == 0):
        raise HSCalcError("resolvent-bound grid touches the real axis")
    Rs = resolvent_batch(H, zs)
    norms = np.array([spectral_norm(R) for R in Rs])
    y = np.abs(zs.imag)
    L = np.log(norms * y)
    q = np.log(japanese_bracket(zs) / y)
    # upper envelope in bins of q
    edges = np.linspace(q.min(), q.max() + 1e-12, 16)
    idx = np.digitize(q, edges)
    qs, Ls = [], []
    for b in np.unique(idx):
        sel = idx == b
        j = np.argmax(L[sel])
        qs.append(q[sel][j])
        Ls.append(L[sel][j])
    alpha = 0.0
    if len(qs) >= 2:
        alpha = max(0.0, float(np.polyfit(qs, Ls, 1)[0]))
    c = float(np.exp(np.max(L - alpha * q)))
    ratio = float(np.max(norms / (c / y * np.exp(alpha * q))))
    return ResolventBoundFit(c, alpha, zs, norms, ratio)


# -- matrix text format --------------------------------------------------------


def write_matrix(M, fh: TextIO) -> None:
    """First line d, then d rows of d entries "re,im" (17 significant digits)."""
    M = np.asarray(M, dtype=complex)
    d = M.shape[0]
    fh.write(f"{d}\n")
    for row in M:
        fh.write(" ".join(f"{v.real:.17g},{v.imag:.17g}" for v in row) + "\n")


def read_matrix(fh: TextIO) -> np.ndarray:
    lines = [ln for ln in (s.strip() for s in fh) if ln]
    if not lines:
        raise HSCalcError("empty matrix file")
    d = int(lines[0])
    if len(lines) - 1 != d:
        raise HSCalcError(f"expected {d} rows, found {len(lines) - 1}")
    M = np.empty((d, d), dtype=complex)
    for i, line in enumerate(lines[1:]):
        items = line.split()
        if len(items) != d:
            raise HSCalcError(f"row {i} has {len(items)} entries, expected {d}")
        for j, item in enumerate(items):
            re, im = item.split(",")
            M[i, j] = complex(float(re), float(im))
    return M
