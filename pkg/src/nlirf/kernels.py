"""Kernel estimators for conditional law of a univariate Markov series.

Provides the kernel density, conditional CDF, conditional quantile and
Nadaraya-Watson regression estimators, plus the estimated nonlinear
autoregressive map ``g_hat(y, eps) = Q_hat(Phi(eps) | y)`` obtained by
inverting the estimated conditional distribution at a Gaussian rank.

All conditional estimators pair the regressor ``y_{t-1}`` with the
response ``y_t`` (t = 2..T) and weight observations with a kernel in the
conditioning variable. They refuse to extrapolate: when the kernel mass
at the conditioning point is too thin the operation raises
:class:`InsufficientLocalData` instead of returning a meaningless value.
The default mass rule requires the weight sum to reach five times the
largest single weight, i.e. roughly five effective neighbours.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import ndtr

from .models import TimeSeries

__all__ = [
    "KernelConfig",
    "ConditionalEstimate",
    "InsufficientLocalData",
    "ClampedShockWarning",
    "silverman_bandwidth",
    "kde",
    "cond_cdf",
    "cond_quantile",
    "g_hat",
    "nadaraya_watson",
]

# effective shock range; Phi(eps) must stay numerically inside (0, 1)
EPS_CLAMP = 6.0

# weight-sum threshold when KernelConfig.min_weight_sum is None,
# in units of the largest single kernel weight at the conditioning point
_DEFAULT_MASS_MULTIPLE = 5.0

_CHUNK_CELLS = 4_000_000  # max weight-matrix cells held at once


class InsufficientLocalData(ValueError):
    """Raised when the kernel mass near the conditioning point is too thin."""


class ClampedShockWarning(UserWarning):
    """Emitted when a shock is clamped to the invertible range [-6, 6]."""


def _gaussian(u: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)


def _epanechnikov(u: np.ndarray) -> np.ndarray:
    out = 0.75 * (1.0 - u * u)
    return np.where(np.abs(u) <= 1.0, out, 0.0)


_KERNELS = {"gaussian": _gaussian, "epanechnikov": _epanechnikov}


@dataclass(frozen=True)
class KernelConfig:
    """Kernel family, bandwidth (explicit or ``"silverman"``), and mass threshold.

    ``min_weight_sum=None`` selects the adaptive default of five times the
    largest single weight at the conditioning point; an explicit positive
    float is used as an absolute threshold on the kernel weight sum.
    """

    kernel: str = "gaussian"
    bandwidth: Union[float, str] = "silverman"
    min_weight_sum: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kernel not in _KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}, expected one of {sorted(_KERNELS)}")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "silverman":
                raise ValueError(f"unknown bandwidth rule {self.bandwidth!r}")
        elif not (isinstance(self.bandwidth, (int, float)) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth!r}")
        if self.min_weight_sum is not None and not self.min_weight_sum > 0:
            raise ValueError("min_weight_sum must be positive when given")

    def to_json_obj(self) -> dict:
        return {
            "kernel": self.kernel,
            "bandwidth": self.bandwidth,
            "min_weight_sum": self.min_weight_sum,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "KernelConfig":
        extra = set(obj) - {"kernel", "bandwidth", "min_weight_sum"}
        if extra:
            raise ValueError(f"unknown kernel config keys: {sorted(extra)}")
        return cls(**obj)


@dataclass(frozen=True)
class ConditionalEstimate:
    """A conditional estimate plus local-mass diagnostics."""

    value: float
    effective_weight: float
    bandwidth_used: float


def silverman_bandwidth(data: Sequence[float]) -> float:
    """Rule-of-thumb bandwidth 1.06 * sd(data) * T^(-1/5).

    The T^(-1/5) decay keeps T*b_T^(5/3) -> infinity, the rate regime in
    which the kernel estimators here are consistent and asymptotically
    normal.
    """
    x = np.asarray(data, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least 2 observations for a bandwidth")
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise ValueError("data is constant; bandwidth undefined")
    return 1.06 * sd * x.size ** (-0.2)


def _resolve_bandwidth(cfg: KernelConfig, conditioning: np.ndarray) -> float:
    if cfg.bandwidth == "silverman":
        return silverman_bandwidth(conditioning)
    return float(cfg.bandwidth)


def kde(data: Sequence[float], at: float, cfg: KernelConfig = KernelConfig()) -> float:
    """Kernel density estimate (1/(T*b)) * sum K((y_t - at)/b) at a point."""
    x = np.asarray(data, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    b = _resolve_bandwidth(cfg, x)
    k = _KERNELS[cfg.kernel]
    return float(np.sum(k((x - at) / b)) / (x.size * b))


# ---------------------------------------------------------------------------
# batch machinery shared with the IRF engine
# ---------------------------------------------------------------------------

@dataclass
class _QuantilePrep:
    """Series preprocessed for conditional-quantile inversion.

    ``x`` are conditioning values and ``v`` the responses, jointly sorted
    by response (stable), so a weighted quantile is a cumulative-weight
    scan.
    """

    x: np.ndarray
    v: np.ndarray
    bandwidth: float
    kernel: str
    min_weight_sum: Optional[float]

    @classmethod
    def from_series(cls, series: TimeSeries, cfg: KernelConfig) -> "_QuantilePrep":
        y = series.y
        if series.T < 3:
            raise ValueError("need at least 3 observations")
        x, v = y[:-1], y[1:]
        order = np.argsort(v, kind="stable")
        return cls(
            x=np.ascontiguousarray(x[order]),
            v=np.ascontiguousarray(v[order]),
            bandwidth=_resolve_bandwidth(cfg, x),
            kernel=cfg.kernel,
            min_weight_sum=cfg.min_weight_sum,
        )


def _mass_ok(sum_w: np.ndarray, max_w: np.ndarray, threshold: Optional[float]) -> np.ndarray:
    if threshold is None:
        return (max_w > 0) & (sum_w >= _DEFAULT_MASS_MULTIPLE * max_w) & np.isfinite(sum_w)
    return (max_w > 0) & (sum_w >= threshold) & np.isfinite(sum_w)


def _quantile_at_point(prep: _QuantilePrep, y0: float, alphas: np.ndarray):
    """Weighted quantiles at one conditioning point for many levels.

    Returns (values, ok, sum_w); when the local mass check fails, ok is
    False and values are NaN.
    """
    k = _KERNELS[prep.kernel]
    w = k((prep.x - y0) / prep.bandwidth)
    sum_w, max_w = float(w.sum()), float(w.max())
    ok = bool(_mass_ok(np.array(sum_w), np.array(max_w), prep.min_weight_sum))
    if not ok:
        return np.full(len(alphas), np.nan), np.zeros(len(alphas), bool), sum_w
    cw = np.cumsum(w)
    idx = np.searchsorted(cw, np.asarray(alphas) * sum_w, side="left")
    idx = np.minimum(idx, len(cw) - 1)
    return prep.v[idx], np.ones(len(alphas), bool), sum_w


def _quantile_batch(prep: _QuantilePrep, ys: np.ndarray, alphas: np.ndarray):
    """Weighted quantiles for paired (conditioning point, level) arrays."""
    m = len(prep.x)
    n = len(ys)
    values = np.full(n, np.nan)
    ok = np.zeros(n, bool)
    chunk = max(16, _CHUNK_CELLS // m)
    k = _KERNELS[prep.kernel]
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        w = k((prep.x[None, :] - ys[lo:hi, None]) / prep.bandwidth)
        sum_w = w.sum(axis=1)
        max_w = w.max(axis=1)
        good = _mass_ok(sum_w, max_w, prep.min_weight_sum)
        cw = np.cumsum(w, axis=1)
        ge = cw >= (alphas[lo:hi] * sum_w)[:, None]
        idx = ge.argmax(axis=1)
        idx[~ge[:, -1]] = m - 1
        vals = prep.v[idx]
        vals[~good] = np.nan
        values[lo:hi] = vals
        ok[lo:hi] = good
    return values, ok


def _nw_batch(series: TimeSeries, cfg: KernelConfig, points: np.ndarray, lag: int):
    """Nadaraya-Watson estimates of E[y_{t+lag} | y_t = p] at many points."""
    y = series.y
    T = series.T
    if lag < 1:
        raise ValueError("lag must be >= 1 (lag 0 is the identity, handled by callers)")
    if T <= lag + 2:
        raise ValueError(f"series too short (T={T}) for lag {lag}")
    x, targets = y[: T - lag], y[lag:]
    b = _resolve_bandwidth(cfg, x)
    k = _KERNELS[cfg.kernel]
    m = len(x)
    n = len(points)
    values = np.full(n, np.nan)
    ok = np.zeros(n, bool)
    weights = np.full(n, np.nan)
    chunk = max(16, _CHUNK_CELLS // m)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        w = k((x[None, :] - points[lo:hi, None]) / b)
        sum_w = w.sum(axis=1)
        max_w = w.max(axis=1)
        good = _mass_ok(sum_w, max_w, cfg.min_weight_sum)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = (w @ targets) / sum_w
        vals[~good] = np.nan
        values[lo:hi] = vals
        ok[lo:hi] = good
        weights[lo:hi] = sum_w
    return values, ok, weights, b


# ---------------------------------------------------------------------------
# public single-point operations
# ---------------------------------------------------------------------------

def cond_cdf(
    series: TimeSeries, z: float, y: float, cfg: KernelConfig = KernelConfig()
) -> ConditionalEstimate:
    """Kernel estimate of P[y_t < z | y_{t-1} = y].

    Weighted share of responses below z; exactly 0 (resp. 1) in the far
    left (right) tail of z, and nondecreasing in z for fixed data.
    """
    prep = _QuantilePrep.from_series(series, cfg)
    k = _KERNELS[prep.kernel]
    w = k((prep.x - y) / prep.bandwidth)
    cw = np.cumsum(w)
    sum_w, max_w = float(cw[-1]), float(w.max())
    if not _mass_ok(np.array(sum_w), np.array(max_w), cfg.min_weight_sum):
        raise InsufficientLocalData(
            f"kernel mass {sum_w:.3g} at y={y:.6g} is below the local-data threshold"
        )
    # count strictly smaller responses on the cumulative scale: bounds in
    # [0, 1] and monotonicity in z then hold exactly, not just in theory
    idx = int(np.searchsorted(prep.v, z, side="left"))
    value = 0.0 if idx == 0 else float(cw[idx - 1] / sum_w)
    return ConditionalEstimate(value=value, effective_weight=sum_w, bandwidth_used=prep.bandwidth)


def cond_quantile(
    series: TimeSeries, alpha: float, y: float, cfg: KernelConfig = KernelConfig()
) -> ConditionalEstimate:
    """Kernel-weighted conditional quantile of y_t given y_{t-1} = y.

    Exact minimizer of the kernel-weighted check loss: responses are
    scanned in ascending order and the first whose cumulative normalized
    weight reaches alpha is returned (first index on ties).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    prep = _QuantilePrep.from_series(series, cfg)
    vals, ok, sum_w = _quantile_at_point(prep, y, np.array([alpha]))
    if not ok[0]:
        raise InsufficientLocalData(
            f"kernel mass {sum_w:.3g} at y={y:.6g} is below the local-data threshold"
        )
    return ConditionalEstimate(value=float(vals[0]), effective_weight=sum_w, bandwidth_used=prep.bandwidth)


def g_hat(
    series: TimeSeries, y: float, eps: float, cfg: KernelConfig = KernelConfig()
) -> float:
    """Estimated nonlinear AR map: the conditional Phi(eps)-quantile at y.

    Shocks beyond +-6 are clamped (with a ClampedShockWarning) so the
    Gaussian rank stays numerically inside (0, 1). Nondecreasing in eps
    for fixed y and data.
    """
    if not math.isfinite(eps):
        raise ValueError("eps must be finite")
    if abs(eps) > EPS_CLAMP:
        warnings.warn(
            f"shock {eps:.3g} clamped to [-{EPS_CLAMP:.0f}, {EPS_CLAMP:.0f}]",
            ClampedShockWarning,
            stacklevel=2,
        )
        eps = math.copysign(EPS_CLAMP, eps)
    return cond_quantile(series, float(ndtr(eps)), y, cfg).value


def nadaraya_watson(
    series: TimeSeries, h: int, y: float, cfg: KernelConfig = KernelConfig()
) -> ConditionalEstimate:
    """Nadaraya-Watson estimate of the h-step prediction E[y_{t+h} | y_t = y]."""
    values, ok, weights, b = _nw_batch(series, cfg, np.array([float(y)]), lag=h)
    if not ok[0]:
        raise InsufficientLocalData(
            f"kernel mass {weights[0]:.3g} at y={y:.6g} is below the local-data threshold"
        )
    return ConditionalEstimate(value=float(values[0]), effective_weight=float(weights[0]), bandwidth_used=b)
