"""Data-generating processes and exact impulse-response oracles.

The models here serve two roles: they simulate trajectories that the
nonparametric estimators consume, and they expose the true one-step map
``g(y, eps)`` together with closed-form or Monte Carlo impulse responses
used as ground truth in tests and benchmarks.

Conventions
-----------
* Innovations are i.i.d. standard normal, one vector per time step,
  consumed in time order with components in index order. Identical
  (model, T, y0, seed) inputs therefore produce bitwise-identical paths.
* A shock of size ``delta`` perturbs the innovation entering at the first
  simulated step only; all later innovations are shared between the
  shocked and baseline paths (common random numbers), so a zero shock
  yields an exactly zero response at every horizon.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "DarParams",
    "VarParams",
    "Dar1",
    "GaussianAr1",
    "GaussianVar1",
    "CondGaussian",
    "ModelSpec",
    "TimeSeries",
    "ShockSequence",
    "IrfCurve",
    "LyapunovEstimate",
    "simulate",
    "transition_g",
    "iterate_g",
    "true_irf",
    "lyapunov_exponent",
    "model_to_json",
    "model_from_json",
]


# ---------------------------------------------------------------------------
# Core containers
# ---------------------------------------------------------------------------

@dataclass
class TimeSeries:
    """Ordered real-valued observations, stored as a (T, n) array.

    ``origin`` records where the data came from (a seed string for
    simulated data, a file path for ingested data).
    """

    values: np.ndarray
    origin: str = ""

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValueError(f"series values must be 1-D or 2-D, got shape {v.shape}")
        if v.shape[0] < 2:
            raise ValueError(f"series needs at least 2 observations, got {v.shape[0]}")
        if not np.isfinite(v).all():
            raise ValueError("series contains non-finite values")
        self.values = v

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def y(self) -> np.ndarray:
        """The observations as a flat vector; only defined for univariate series."""
        if self.n != 1:
            raise ValueError(f"series is {self.n}-dimensional, expected univariate")
        return self.values[:, 0]

    def to_csv(self, path) -> None:
        """Write as CSV with header ``t,y1,...,yn`` and t = 1..T."""
        cols = ",".join(f"y{i + 1}" for i in range(self.n))
        with open(path, "w", newline="") as fh:
            fh.write(f"t,{cols}\n")
            for t in range(self.T):
                row = ",".join(f"{x:.17g}" for x in self.values[t])
                fh.write(f"{t + 1},{row}\n")


@dataclass
class ShockSequence:
    """A reproducible block of standard-normal innovations, one row per step."""

    draws: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        d = np.asarray(self.draws, dtype=float)
        if d.ndim == 1:
            d = d[:, None]
        if not np.isfinite(d).all():
            raise ValueError("shock draws contain non-finite values")
        self.draws = d

    @classmethod
    def from_seed(cls, horizon: int, dim: int, seed: int) -> "ShockSequence":
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        rng = np.random.default_rng(seed)
        return cls(draws=rng.standard_normal((horizon, dim)), seed=seed)

    def __len__(self) -> int:
        return self.draws.shape[0]


@dataclass
class IrfCurve:
    """Impulse response values for horizons 1..H with Monte Carlo errors.

    ``values[h-1]`` is the response at horizon h (a scalar for univariate
    processes, a vector otherwise). ``mc_se`` holds per-horizon Monte
    Carlo standard errors; exact (closed-form) entries carry zero.
    ``route`` tags how the curve was produced and ``meta`` echoes the
    request plus any per-horizon method details.
    """

    horizons: np.ndarray
    values: np.ndarray
    mc_se: np.ndarray
    route: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.horizons = np.asarray(self.horizons, dtype=int)
        self.values = np.asarray(self.values, dtype=float)
        self.mc_se = np.asarray(self.mc_se, dtype=float)
        if len(self.horizons) != len(self.values):
            raise ValueError("horizons and values length mismatch")
        if not np.isfinite(self.values).all():
            raise ValueError("IRF values must be finite")


# ---------------------------------------------------------------------------
# Model specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DarParams:
    """Parameters of the first-order double-autoregressive model."""

    rho: float
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("DAR parameters must be finite")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")


@dataclass(frozen=True)
class Dar1:
    """y_t = rho*y_{t-1} + sqrt(alpha + beta*y_{t-1}^2) * eps_t."""

    params: DarParams

    @classmethod
    def of(cls, rho: float, alpha: float, beta: float) -> "Dar1":
        return cls(DarParams(rho, alpha, beta))

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class GaussianAr1:
    """y_t = rho*y_{t-1} + sigma*eps_t with |rho| < 1."""

    rho: float
    sigma: float

    def __post_init__(self) -> None:
        if abs(self.rho) >= 1:
            raise ValueError(f"|rho| must be < 1, got {self.rho}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def dim(self) -> int:
        return 1


@dataclass
class VarParams:
    """Autoregressive matrix A and invertible shock loading D of a VAR(1)."""

    A: np.ndarray
    D: np.ndarray

    def __post_init__(self) -> None:
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        if A.shape[0] != A.shape[1] or D.shape != A.shape:
            raise ValueError(f"A and D must be square of equal size, got {A.shape}, {D.shape}")
        if np.max(np.abs(np.linalg.eigvals(A))) >= 1:
            raise ValueError("spectral radius of A must be < 1")
        if abs(np.linalg.det(D)) < 1e-14:
            raise ValueError("D must be invertible")
        self.A, self.D = A, D

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class GaussianVar1:
    """y_t = A*y_{t-1} + D*eps_t with stable A and invertible D."""

    params: VarParams

    @property
    def dim(self) -> int:
        return self.params.n


@dataclass(frozen=True)
class CondGaussian:
    """y_t = drift(y_{t-1}) + scale(y_{t-1}) * eps_t with caller-supplied functions.

    The drift and scale are treated as black boxes; positivity of the
    scalar scale is checked pointwise at evaluation (a global check is
    not possible for arbitrary callables). Intended for univariate use.
    """

    drift: Callable[[float], float]
    scale: Callable[[float], float]

    @property
    def dim(self) -> int:
        return 1


ModelSpec = Union[Dar1, GaussianAr1, GaussianVar1, CondGaussian]

# Lyapunov stationarity guard: simulate() refuses DAR(1) parameters whose
# estimated exponent is positive at this many standard errors.
_LYAPUNOV_GUARD_SE = 3.0
_LYAPUNOV_GUARD_DRAWS = 10_000
_LYAPUNOV_GUARD_SEED = 20_406_001


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    std_error: float

    @property
    def is_negative(self) -> bool:
        """True when the exponent is negative at the guard's confidence level."""
        return self.value + _LYAPUNOV_GUARD_SE * self.std_error < 0


# ---------------------------------------------------------------------------
# Transition maps
# ---------------------------------------------------------------------------

def _as_state(model: ModelSpec, y) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (model.dim,):
        raise ValueError(f"state must have shape ({model.dim},), got {y.shape}")
    if not np.isfinite(y).all():
        raise ValueError("state contains non-finite values")
    return y


def transition_g(model: ModelSpec, y_prev, eps) -> np.ndarray:
    """One-step map g(y_prev; eps) of the model's autoregressive representation."""
    y = _as_state(model, y_prev)
    e = np.atleast_1d(np.asarray(eps, dtype=float))
    if e.shape != (model.dim,):
        raise ValueError(f"shock must have shape ({model.dim},), got {e.shape}")
    if not np.isfinite(e).all():
        raise ValueError("shock contains non-finite values")

    if isinstance(model, Dar1):
        p = model.params
        return np.array([p.rho * y[0] + math.sqrt(p.alpha + p.beta * y[0] ** 2) * e[0]])
    if isinstance(model, GaussianAr1):
        return np.array([model.rho * y[0] + model.sigma * e[0]])
    if isinstance(model, GaussianVar1):
        p = model.params
        return p.A @ y + p.D @ e
    if isinstance(model, CondGaussian):
        s = float(model.scale(y[0]))
        if not (math.isfinite(s) and s > 0):
            raise ValueError(f"scale function must be finite and positive, got {s} at y={y[0]}")
        m = float(model.drift(y[0]))
        if not math.isfinite(m):
            raise ValueError(f"drift function returned non-finite value at y={y[0]}")
        return np.array([m + s * e[0]])
    raise TypeError(f"unknown model type {type(model).__name__}")


def iterate_g(model: ModelSpec, y0, shocks: ShockSequence) -> np.ndarray:
    """Recursively composed path: path[k] = g(path[k-1]; shocks[k]), path of length H."""
    if len(shocks) == 0:
        raise ValueError("shock sequence is empty")
    y = _as_state(model, y0)
    path = np.empty((len(shocks), model.dim))
    for k in range(len(shocks)):
        y = transition_g(model, y, shocks.draws[k])
        path[k] = y
    return path


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def lyapunov_exponent(params: DarParams, M: int = 1_000_000, seed: int = 0) -> LyapunovEstimate:
    """Monte Carlo estimate of E log|rho + sqrt(beta)*eps| with its standard error.

    A negative exponent is the strict-stationarity condition of the DAR(1)
    model. With beta = 0 the expectation is log|rho| exactly and the
    standard error is zero.
    """
    if M < 10_000:
        raise ValueError(f"need at least 10^4 draws, got {M}")
    if params.beta == 0:
        # degenerate case: no randomness, the expectation is log|rho| exactly
        # (white noise, rho = 0, gives -inf: trivially stationary)
        value = math.log(abs(params.rho)) if params.rho != 0 else -math.inf
        return LyapunovEstimate(value=value, std_error=0.0)
    rng = np.random.default_rng(seed)
    draws = np.log(np.abs(params.rho + math.sqrt(params.beta) * rng.standard_normal(M)))
    return LyapunovEstimate(
        value=float(np.mean(draws)),
        std_error=float(np.std(draws, ddof=1) / math.sqrt(M)),
    )


def _check_dar_stationary(params: DarParams) -> None:
    est = lyapunov_exponent(params, M=_LYAPUNOV_GUARD_DRAWS, seed=_LYAPUNOV_GUARD_SEED)
    if not est.is_negative:
        raise ValueError(
            "DAR(1) parameters fail the stationarity condition: estimated "
            f"Lyapunov exponent {est.value:.4f} (se {est.std_error:.4f}) is not "
            "negative at 3 standard errors"
        )


def simulate(model: ModelSpec, T: int, y0, seed: int, burn_in: int = 0) -> TimeSeries:
    """Simulate a length-T trajectory y_1..y_T starting from the state y0.

    One standard-normal innovation vector is drawn per step, in time
    order; the initial state itself is not part of the returned series.
    ``burn_in`` extra steps are simulated and discarded up front.
    """
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if isinstance(model, Dar1):
        _check_dar_stationary(model.params)
    y = _as_state(model, y0)
    n = model.dim
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((T + burn_in, n))

    out = np.empty((T + burn_in, n))
    if isinstance(model, Dar1):
        # scalar loop; math ops on floats are much faster than numpy scalars
        p = model.params
        yv = float(y[0])
        e = eps[:, 0].tolist()
        for t in range(T + burn_in):
            yv = p.rho * yv + math.sqrt(p.alpha + p.beta * yv * yv) * e[t]
            out[t, 0] = yv
    elif isinstance(model, GaussianAr1):
        yv = float(y[0])
        e = eps[:, 0].tolist()
        for t in range(T + burn_in):
            yv = model.rho * yv + model.sigma * e[t]
            out[t, 0] = yv
    else:
        for t in range(T + burn_in):
            y = transition_g(model, y, eps[t])
            out[t] = y
    return TimeSeries(values=out[burn_in:], origin=f"simulated:{type(model).__name__}:seed={seed}")


# ---------------------------------------------------------------------------
# True impulse responses
# ---------------------------------------------------------------------------

def _closed_form_irf(model: ModelSpec, y0: np.ndarray, h: int, delta: np.ndarray):
    """Exact IRF values where the model admits them, else None per horizon.

    Gaussian AR/VAR: the shock propagates linearly, giving rho^(h-1)*sigma*delta
    (resp. A^(h-1) D delta). DAR(1): at horizon 1 the response is
    delta*sqrt(alpha + beta*y0^2) because the conditional scale is fixed by y0.
    """
    if isinstance(model, GaussianAr1):
        return np.array([[model.rho ** (k - 1) * model.sigma * delta[0]] for k in range(1, h + 1)])
    if isinstance(model, GaussianVar1):
        p = model.params
        vals = np.empty((h, p.n))
        v = p.D @ delta
        for k in range(h):
            vals[k] = v
            v = p.A @ v
        return vals
    if isinstance(model, Dar1) and h == 1:
        p = model.params
        return np.array([[delta[0] * math.sqrt(p.alpha + p.beta * y0[0] ** 2)]])
    return None


def true_irf(
    model: ModelSpec,
    y0,
    h: int,
    delta,
    S: int = 10_000,
    seed: int = 0,
) -> IrfCurve:
    """Model-implied IRF(k, delta) for k = 1..h, conditional on the state y0.

    Uses the exact closed form when the model admits one (Gaussian AR/VAR
    at all horizons, DAR(1) at horizon 1) and common-random-number Monte
    Carlo over S paired paths otherwise; the per-horizon method is
    recorded in ``meta["method"]``.
    """
    if h < 1:
        raise ValueError(f"horizon must be >= 1, got {h}")
    if S < 1:
        raise ValueError(f"replication count must be >= 1, got {S}")
    y = _as_state(model, y0)
    d = np.atleast_1d(np.asarray(delta, dtype=float))
    if d.shape != (model.dim,):
        raise ValueError(f"delta must have shape ({model.dim},), got {d.shape}")
    if not np.isfinite(d).all():
        raise ValueError("delta contains non-finite values")

    horizons = np.arange(1, h + 1)
    exact = _closed_form_irf(model, y, h, d)
    if exact is not None:
        vals = exact if model.dim > 1 else exact[:, 0]
        return IrfCurve(
            horizons=horizons,
            values=vals,
            mc_se=np.zeros_like(exact[:, 0] if model.dim == 1 else exact),
            route="oracle",
            meta={"method": ["closed_form"] * h, "delta": d.tolist(), "y0": y.tolist(), "S": None},
        )

    rng = np.random.default_rng(seed)
    diffs = np.empty((S, h, model.dim))
    method = ["closed_form", *["monte_carlo"] * (h - 1)] if isinstance(model, Dar1) else ["monte_carlo"] * h
    for s in range(S):
        eps = rng.standard_normal((h, model.dim))
        yb = transition_g(model, y, eps[0])
        ys = transition_g(model, y, eps[0] + d)
        diffs[s, 0] = ys - yb
        for k in range(1, h):
            yb = transition_g(model, yb, eps[k])
            ys = transition_g(model, ys, eps[k])
            diffs[s, k] = ys - yb
    values = diffs.mean(axis=0)
    se = diffs.std(axis=0, ddof=1) / math.sqrt(S) if S > 1 else np.zeros_like(values)
    if isinstance(model, Dar1):
        # horizon 1 admits the exact value; Monte Carlo covers the rest
        values[0, 0] = d[0] * math.sqrt(model.params.alpha + model.params.beta * y[0] ** 2)
        se[0, 0] = 0.0
    if model.dim == 1:
        values, se = values[:, 0], se[:, 0]
    return IrfCurve(
        horizons=horizons,
        values=values,
        mc_se=se,
        route="oracle",
        meta={"method": method, "delta": d.tolist(), "y0": y.tolist(), "S": S, "seed": seed},
    )


# ---------------------------------------------------------------------------
# JSON round-trip
# ---------------------------------------------------------------------------

def model_to_json(model: ModelSpec) -> str:
    if isinstance(model, Dar1):
        p = model.params
        obj = {"variant": "dar1", "rho": p.rho, "alpha": p.alpha, "beta": p.beta}
    elif isinstance(model, GaussianAr1):
        obj = {"variant": "gaussian_ar1", "rho": model.rho, "sigma": model.sigma}
    elif isinstance(model, GaussianVar1):
        p = model.params
        obj = {"variant": "gaussian_var1", "A": p.A.tolist(), "D": p.D.tolist()}
    elif isinstance(model, CondGaussian):
        raise ValueError("conditionally Gaussian models with callable drift/scale are not JSON-serializable")
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")
    return json.dumps(obj)


_MODEL_KEYS = {
    "dar1": {"rho", "alpha", "beta"},
    "gaussian_ar1": {"rho", "sigma"},
    "gaussian_var1": {"A", "D"},
}


def model_from_json(text_or_obj) -> ModelSpec:
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else dict(text_or_obj)
    variant = obj.pop("variant", None)
    if variant not in _MODEL_KEYS:
        raise ValueError(f"unknown model variant: {variant!r}")
    extra = set(obj) - _MODEL_KEYS[variant]
    missing = _MODEL_KEYS[variant] - set(obj)
    if extra or missing:
        raise ValueError(
            f"model {variant!r}: unknown keys {sorted(extra)}, missing keys {sorted(missing)}"
        )
    if variant == "dar1":
        return Dar1(DarParams(**obj))
    if variant == "gaussian_ar1":
        return GaussianAr1(**obj)
    return GaussianVar1(VarParams(A=np.asarray(obj["A"]), D=np.asarray(obj["D"])))
