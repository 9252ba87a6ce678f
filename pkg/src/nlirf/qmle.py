"""Gaussian quasi-maximum likelihood for the first-order double-autoregressive model.

The objective is the standard Gaussian quasi log-likelihood of Ling
(2007): with conditional variance v_t = alpha + beta * y_{t-1}^2,

    L(rho, alpha, beta) = sum_{t=2}^T -1/2 [ ln v_t + (y_t - rho*y_{t-1})^2 / v_t ].

Maximization is by exhaustive search over a rectangular lattice. The
search exploits that, for fixed (alpha, beta), the objective is an exact
quadratic in rho, so each (alpha, beta) pair costs one pass over the data
and the whole rho axis comes for free. This makes the default 120^3
lattice tractable without any parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .models import DarParams, TimeSeries

__all__ = ["GridSpec", "QmleResult", "dar_quasi_loglik", "qmle_grid_search", "DEFAULT_GRID"]


@dataclass(frozen=True)
class GridSpec:
    """Rectangular lattice over (rho, alpha, beta).

    ``step`` may be a single positive real (shared by all axes) or one
    step per axis; the latter keeps the lattice well-defined under axis
    rescalings such as mapping alpha to c^2 * alpha.
    """

    lower: tuple = (0.01, 0.01, 0.01)
    upper: tuple = (1.20, 1.20, 1.20)
    step: object = 0.01

    def __post_init__(self) -> None:
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("lower and upper must be 3-vectors (rho, alpha, beta)")
        if not (lo < hi).all():
            raise ValueError("lower must be strictly below upper componentwise")
        st = np.asarray(self.step, dtype=float)
        if st.ndim == 0:
            st = np.full(3, float(st))
        if st.shape != (3,) or not (st > 0).all():
            raise ValueError("step must be a positive real or 3-vector of positive reals")
        if lo[1] <= 0:
            raise ValueError("alpha grid must start above 0")
        object.__setattr__(self, "lower", tuple(lo))
        object.__setattr__(self, "upper", tuple(hi))
        object.__setattr__(self, "step", tuple(st))

    def axis(self, i: int) -> np.ndarray:
        n = int(round((self.upper[i] - self.lower[i]) / self.step[i])) + 1
        return self.lower[i] + self.step[i] * np.arange(n)


DEFAULT_GRID = GridSpec()


@dataclass(frozen=True)
class QmleResult:
    params: DarParams
    loglik: float
    grid_argmax_on_boundary: bool


def dar_quasi_loglik(params: DarParams, series: TimeSeries) -> float:
    """Gaussian quasi log-likelihood of a DAR(1) parameter point."""
    y = series.y
    x, yy = y[:-1], y[1:]
    v = params.alpha + params.beta * x * x
    resid = yy - params.rho * x
    return float(-0.5 * np.sum(np.log(v) + resid * resid / v))


def qmle_grid_search(series: TimeSeries, grid: GridSpec = DEFAULT_GRID) -> QmleResult:
    """Exhaustive lattice argmax of the quasi log-likelihood.

    Ties are broken toward the lexicographically smallest (rho, alpha,
    beta). The returned log-likelihood is re-evaluated at the argmax with
    ``dar_quasi_loglik`` so it is exactly the objective at those
    parameters.
    """
    y = series.y
    x, yy = y[:-1], y[1:]
    x2 = x * x
    y2 = yy * yy
    xy = x * yy

    rhos = grid.axis(0)
    alphas = grid.axis(1)
    betas = grid.axis(2)
    r = rhos[:, None]  # (n_rho, 1) against (1, n_beta) blocks

    candidates = []  # (loglik, rho_idx, alpha_idx, beta_idx), one per alpha slice
    for ia, a in enumerate(alphas):
        v = a + betas[:, None] * x2[None, :]  # (n_beta, T-1)
        logdet = np.log(v).sum(axis=1)
        inv = 1.0 / v
        syy = inv @ y2
        sxy = inv @ xy
        sxx = inv @ x2
        # quadratic in rho: sum (y - rho x)^2 / v = syy - 2 rho sxy + rho^2 sxx
        ll = -0.5 * (logdet[None, :] + syy[None, :] - 2.0 * r * sxy[None, :] + r * r * sxx[None, :])
        flat = int(np.argmax(ll))  # C order: first max is smallest (rho, beta)
        ir, ib = divmod(flat, len(betas))
        candidates.append((float(ll[ir, ib]), ir, ia, ib))

    best = max(candidates, key=lambda c: (c[0], -c[1], -c[2], -c[3]))
    _, ir, ia, ib = best
    params = DarParams(rho=float(rhos[ir]), alpha=float(alphas[ia]), beta=float(betas[ib]))
    on_boundary = (
        ir in (0, len(rhos) - 1) or ia in (0, len(alphas) - 1) or ib in (0, len(betas) - 1)
    )
    return QmleResult(
        params=params,
        loglik=dar_quasi_loglik(params, series),
        grid_argmax_on_boundary=on_boundary,
    )
