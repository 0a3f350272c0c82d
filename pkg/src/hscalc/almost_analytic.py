"""Almost-analytic extensions and their d-bar derivative.

For f on the real line and a Taylor order n,

    F(x, y) = (sum_{r<=n} f^(r)(x) (iy)^r / r!) * tau(x, y),

where tau(x, y) = theta(|y| / <x>) is 1 for |y| <= <x> and 0 for
|y| >= 2<x>. Its d-bar derivative is

    dF/dzbar = 1/2 f^(n+1)(x) (iy)^n / n! * tau + P(x, y) * dtau/dzbar,

with P the Taylor sum; both terms are evaluated in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OrderExceededError
from .functions import CkFunction, glue_jet, japanese_bracket


def _theta(u, kernel: str, order: int = 1) -> np.ndarray:
    """theta(u) = 1 - s(u - 1) and its derivative, shape (2, N)."""
    c = glue_jet(np.asarray(u) - 1.0, order, kernel)
    out = -c
    out[0] += 1.0
    return out


def cutoff_tau(x, y, kernel: str = "exp"):
    """tau(x, y): 1 on |y| <= <x>, 0 on |y| >= 2<x>, smooth in between."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    u = np.abs(np.broadcast_to(y, shape)) / japanese_bracket(np.broadcast_to(x, shape))
    val = _theta(u.ravel(), kernel, 0)[0].reshape(shape)
    return val if val.ndim else float(val)


def _dbar_tau(x: np.ndarray, y: np.ndarray, kernel: str):
    """tau and dtau/dzbar on flat arrays.

    The glue is flat near u = 0, so the |y| kink never shows up: the
    y-derivative uses sign(y) and is zero wherever tau is identically 1.
    """
    br = japanese_bracket(x)
    ay = np.abs(y)
    u = ay / br
    th = _theta(u, kernel, 1)
    tau, dth = th[0], th[1]
    tau_x = dth * (-ay * x / br**3)
    tau_y = dth * np.sign(y) / br
    return tau, 0.5 * (tau_x + 1j * tau_y)


@dataclass(frozen=True)
class AlmostAnalytic:
    """The almost-analytic extension of ``base`` with Taylor order ``order``."""

    base: CkFunction
    order: int = 2
    kernel: str = "exp"

    def __post_init__(self):
        if self.order + 1 > self.base.max_order:
            raise OrderExceededError(
                f"Taylor order {self.order} needs {self.order + 1} derivatives; "
                f"{self.base.name} carries {self.base.max_order}"
            )

    def _taylor(self, c: np.ndarray, y: np.ndarray) -> np.ndarray:
        iy = 1j * y
        acc = np.zeros(y.shape, dtype=complex)
        for r in range(self.order, -1, -1):
            acc = acc * iy + c[r]
        return acc

    def evaluate(self, x, y):
        """F(x, y) at broadcast points."""
        x, y, shape = _flat(x, y)
        c = self.base.jet(x, self.order)
        br = japanese_bracket(x)
        tau = _theta(np.abs(y) / br, self.kernel, 0)[0]
        out = self._taylor(c, y) * tau
        return _shaped(out, shape)

    def dbar(self, x, y):
        """dF/dzbar at broadcast points."""
        x, y, shape = _flat(x, y)
        out = self._dbar_flat(x, y)
        return _shaped(out, shape)

    def _dbar_flat(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        n = self.order
        c = self.base.jet(x, n + 1)
        tau, dtau = _dbar_tau(x, y, self.kernel)
        # 1/2 f^(n+1)/n! (iy)^n with f^(n+1)/n! = (n+1) c_{n+1}
        core = 0.5 * (n + 1) * c[n + 1] * (1j * y) ** n * tau
        glue = dtau != 0
        if glue.any():
            core[glue] += self._taylor(c[:, glue], y[glue]) * dtau[glue]
        return core


def _flat(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    return (np.broadcast_to(x, shape).ravel(), np.broadcast_to(y, shape).ravel(), shape)


def _shaped(out: np.ndarray, shape):
    out = out.reshape(shape)
    return out if out.ndim else complex(out)


def aa_eval(F: AlmostAnalytic, x, y):
    return F.evaluate(x, y)


def aa_dbar(F: AlmostAnalytic, x, y):
    return F.dbar(x, y)


def default_taylor_order(alpha: float = 0.0) -> int:
    """Smallest order strictly above alpha, plus one for quadrature headroom."""
    return int(np.ceil(alpha)) + 2
