"""Quasi-arithmetic pooling: exposure averaging plus exposure inversion.

The pool of weighted forecasts is the forecast whose exposure equals
the weighted average of the input exposures (an equality in the
sum-zero space, i.e. modulo the all-ones direction).  Weights are
normalized internally, so scaling all weights leaves the pool fixed.

Inversion dispatch: quadratic and log invert in closed form (affine map
and softmax); neglog, power, hs, tsallis and spherical reduce to a
one-dimensional monotone root-find for the additive constant that the
all-ones quotient leaves free; a generic convex-minimization fallback
covers everything and doubles as a cross-check oracle.

The generalized pool drops the solvability requirement: it returns the
unique minimizer over the closed simplex of the weighted sum of Bregman
divergences from the candidate to each input, found by projected
gradient descent (the gradient of that objective is exactly
g(x) - average exposure).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DegenerateError,
    DomainError,
    ExposureRangeError,
    SolverError,
)
from .optim import projected_gradient
from .rules import (
    ExposureVector,
    Forecast,
    RuleSpec,
    as_forecast,
    _expected,
    _gradient,
    exposure,
)
from .simplex import canonicalize, project_simplex, project_simplex_floor, uniform_point

__all__ = [
    "WeightedForecast",
    "PoolResult",
    "as_weighted",
    "qa_pool",
    "invert_exposure",
    "tsallis_invert",
    "spherical_pool",
    "generalized_pool",
    "CLOSED_FORM",
    "ROOT_FIND",
    "CONVEX_MIN",
    "BREGMAN_MIN",
]

CLOSED_FORM = "closed_form"
ROOT_FIND = "root_find"
CONVEX_MIN = "convex_min"
BREGMAN_MIN = "bregman_min"

# scalar root-find: bracket halves until narrower than this (relative)
_BISECT_RTOL = 1e-14
_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class WeightedForecast:
    """A forecast together with a nonnegative reliability weight."""

    forecast: Forecast
    weight: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "forecast", as_forecast(self.forecast))
        w = float(self.weight)
        if not np.isfinite(w) or w < 0.0:
            raise ValueError(f"weight must be a finite nonnegative real, got {w!r}")
        object.__setattr__(self, "weight", w)


def as_weighted(value) -> WeightedForecast:
    """Coerce a WeightedForecast or a (forecast, weight) pair."""
    if isinstance(value, WeightedForecast):
        return value
    forecast, weight = value
    return WeightedForecast(as_forecast(forecast), float(weight))


@dataclass(frozen=True)
class PoolResult:
    """A pooled forecast plus solver diagnostics.

    residual is the Euclidean distance, in the sum-zero space, between
    the pool's exposure and the weighted average of input exposures.
    For every method except bregman_min it certifies the defining
    identity; for bregman_min a large residual signals that the
    minimizer sits on the boundary (no exact inverse exists).
    """

    pooled: Forecast
    total_weight: float
    residual: float
    method: str


# --------------------------------------------------------------------------
# shared input handling
# --------------------------------------------------------------------------

def _prepare(inputs) -> tuple[list[Forecast], np.ndarray, float]:
    """Validate, drop zero weights, normalize.  Returns (forecasts, w, total)."""
    wfs = [as_weighted(x) for x in inputs]
    if not wfs:
        raise DegenerateError("cannot pool an empty collection")
    total = float(sum(wf.weight for wf in wfs))
    kept = [wf for wf in wfs if wf.weight > 0.0]
    if not kept:
        raise DegenerateError("all weights are zero")
    n = kept[0].forecast.n
    if any(wf.forecast.n != n for wf in kept):
        raise ValueError("forecasts have different outcome counts")
    w = np.array([wf.weight for wf in kept], dtype=float)
    return [wf.forecast for wf in kept], w / w.sum(), total


def _all_equal(forecasts: list[Forecast]) -> bool:
    first = forecasts[0].probs
    return all(np.array_equal(f.probs, first) for f in forecasts[1:])


def _average_exposure(rule: RuleSpec, forecasts: list[Forecast], w: np.ndarray) -> np.ndarray:
    rows = np.stack([exposure(rule, f).coords for f in forecasts])
    return canonicalize(w @ rows)


def _residual(rule: RuleSpec, pooled: Forecast, target: np.ndarray) -> float:
    return float(np.linalg.norm(exposure(rule, pooled).coords - target))


# --------------------------------------------------------------------------
# scalar root-finding
# --------------------------------------------------------------------------

def _bisect(f, lo: float, hi: float) -> float:
    """Root of a monotone f on [lo, hi] with f(lo), f(hi) of opposite sign."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _BISECT_RTOL * max(1.0, abs(mid)):
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _expand_down(f, start: float, predicate) -> float:
    """Halve start until predicate(f(x)) holds; x stays positive."""
    x = start
    for _ in range(2000):
        if predicate(f(x)):
            return x
        x *= 0.5
    raise SolverError("bracket expansion toward zero failed")


def _expand_up(f, start: float, predicate) -> float:
    x = start
    for _ in range(2000):
        if predicate(f(x)):
            return x
        x *= 2.0
    raise SolverError("bracket expansion toward infinity failed")


# --------------------------------------------------------------------------
# per-family inversion of a canonical (sum-zero) exposure target
# --------------------------------------------------------------------------

def _invert_quadratic(t: np.ndarray) -> np.ndarray:
    x = 0.5 * t + 1.0 / t.size
    if x.min() < -1e-12:
        raise ExposureRangeError(
            "target exposure lies outside the quadratic rule's range"
        )
    x = np.maximum(x, 0.0)
    return x / x.sum()


def _invert_log(t: np.ndarray) -> np.ndarray:
    e = np.exp(t - t.max())
    return e / e.sum()


def _invert_neglog(t: np.ndarray) -> np.ndarray:
    # g = -1/x; solve sum_j 1/(u_j + d) = 1 with u_j = max(t) - t_j >= 0
    u = t.max() - t

    def h(d: float) -> float:
        return float((1.0 / (u + d)).sum())

    lo = 1.0  # h(1) >= 1/(u_min + 1) = 1
    hi = _expand_up(h, 2.0, lambda v: v < 1.0)
    d = _bisect(lambda v: h(v) - 1.0, lo, hi)
    x = 1.0 / (u + d)
    return x / x.sum()


def _invert_power(t: np.ndarray, gamma: float) -> np.ndarray:
    # g = sign * gamma * x^(gamma-1); x_j = ((u_j + d)/|gamma|)^(1/(gamma-1))
    u = t.max() - t
    ag = abs(gamma)
    expo = 1.0 / (gamma - 1.0)  # negative for both admissible ranges

    def h(d: float) -> float:
        return float(np.power((u + d) / ag, expo).sum())

    lo = _expand_down(h, 1.0, lambda v: v >= 1.0)
    hi = _expand_up(h, 2.0 * lo, lambda v: v < 1.0)
    d = _bisect(lambda v: 1.0 - h(v), lo, hi)
    x = np.power((u + d) / ag, expo)
    return x / x.sum()


def _invert_hs(t: np.ndarray) -> np.ndarray:
    # x_j proportional to 1/(u_j + d), with the geometric mean of
    # (u + d) pinned to 1/n so the gradient identity closes
    u = t.max() - t
    n = t.size

    def gm(d: float) -> float:
        return float(np.exp(np.log(u + d).mean()))

    target = 1.0 / n
    lo = _expand_down(gm, 1.0, lambda v: v <= target)
    hi = _expand_up(gm, 2.0 * lo, lambda v: v > target)
    d = _bisect(lambda v: gm(v) - target, lo, hi)
    x = 1.0 / (u + d)
    return x / x.sum()


def _invert_tsallis(t: np.ndarray, gamma: float, label: str) -> np.ndarray:
    # x_j = ((v_j + e)/gamma)^(1/(gamma-1)), v_j = t_j - min(t), e >= 0
    v = t - t.min()
    expo = 1.0 / (gamma - 1.0)

    def h(e: float) -> float:
        return float(np.power((v + e) / gamma, expo).sum())

    h0 = h(0.0)
    if h0 > 1.0 + 1e-12:
        raise ExposureRangeError(
            f"target exposure is not attainable for rule {label}: the "
            "root of the simplex constraint would need a negative power"
        )
    if h0 >= 1.0:
        e = 0.0
    else:
        hi = _expand_up(h, 1.0, lambda val: val >= 1.0)
        e = _bisect(lambda val: h(val) - 1.0, 0.0, hi)
    x = np.power((v + e) / gamma, expo)
    s = x.sum()
    if not np.isfinite(s) or s <= 0.0:
        raise SolverError("tsallis inversion produced a degenerate point")
    return x / s


def _invert_spherical(t: np.ndarray, alpha: float, label: str) -> np.ndarray:
    # lift t + e*1 onto the unit beta-sphere (beta = a/(a-1)), then pull
    # back through y -> y^(1/(a-1)) and normalize
    beta = alpha / (alpha - 1.0)
    v = t - t.min()

    def psi(e: float) -> float:
        return float(np.power(v + e, beta).sum())

    p0 = psi(0.0)
    if p0 > 1.0 + 1e-12:
        raise ExposureRangeError(
            f"target exposure is not attainable for rule {label}: it lies "
            "outside the unit sphere section swept by the exposure map"
        )
    if p0 >= 1.0:
        e = 0.0
    else:
        hi = _expand_up(psi, 1.0, lambda val: val >= 1.0)
        e = _bisect(lambda val: psi(val) - 1.0, 0.0, hi)
    y = np.power(v + e, 1.0 / (alpha - 1.0))
    return y / y.sum()


def _invert_fast(rule: RuleSpec, t: np.ndarray) -> tuple[np.ndarray, str]:
    fam = rule.family
    if fam == "quadratic":
        return _invert_quadratic(t), CLOSED_FORM
    if fam == "log":
        return _invert_log(t), CLOSED_FORM
    if fam == "neglog":
        return _invert_neglog(t), ROOT_FIND
    if fam == "power":
        return _invert_power(t, rule.param), ROOT_FIND
    if fam == "hs":
        return _invert_hs(t), ROOT_FIND
    if fam == "tsallis":
        return _invert_tsallis(t, rule.param, rule.label), ROOT_FIND
    if fam == "spherical":
        return _invert_spherical(t, rule.param, rule.label), ROOT_FIND
    raise AssertionError(fam)


# --------------------------------------------------------------------------
# generic convex-minimization path
# --------------------------------------------------------------------------

def _interior_floor(rule: RuleSpec, forecasts: list[Forecast] | None) -> float:
    """Working floor keeping solver iterates inside an open domain."""
    if rule.domain_kind != "open":
        return 0.0
    if forecasts:
        smallest = min(f.probs.min() for f in forecasts)
        return min(1e-12, 1e-3 * smallest)
    return 1e-12


def _minimize_tilted(
    rule: RuleSpec,
    t: np.ndarray,
    *,
    floor: float,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> tuple[np.ndarray, float, bool]:
    """Minimize G(x) - <t, x> over the floored simplex."""
    n = t.size
    if floor > 0.0:
        def project(y: np.ndarray) -> np.ndarray:
            return project_simplex_floor(y, floor)
    else:
        project = project_simplex

    def objective(x: np.ndarray) -> float:
        if floor <= 0.0 and rule.domain_kind == "open" and x.min() <= 0.0:
            return np.inf
        return _expected(rule, x) - float(np.dot(t, x))

    def gradient(x: np.ndarray) -> np.ndarray:
        return _gradient(rule, x) - t

    return projected_gradient(
        objective,
        gradient,
        uniform_point(n),
        project,
        lower=floor,
        tol=tol,
        max_iter=max_iter,
    )


def _scaled(tol: float, t: np.ndarray) -> float:
    # absolute tolerances widen proportionally once exposure magnitudes
    # leave the O(1) regime float64 can resolve them in
    return tol * max(1.0, float(np.linalg.norm(t)))


def _invert_generic(rule: RuleSpec, t: np.ndarray) -> np.ndarray:
    floor = _interior_floor(rule, None)
    # aim for the absolute tolerance; a spectral-step stall below the
    # scale-aware bound is accepted as float-optimal
    x, kkt, converged = _minimize_tilted(rule, t, floor=floor, tol=1e-8)
    if not converged and kkt > _scaled(1e-7, t):
        raise SolverError(
            f"exposure inversion for {rule.label} stalled at KKT residual {kkt:.3e}"
        )
    pooled = Forecast(x)
    # structural mismatches (minimizer pinned to a face) leave residuals
    # many orders of magnitude above solver noise, so the classification
    # threshold sits well above the first-order float64 resolution
    if _residual(rule, pooled, t) > _scaled(1e-6, t):
        raise ExposureRangeError(
            f"target exposure is not attainable for rule {rule.label}: the "
            "tilted-objective minimizer sits on a face with mismatched gradient"
        )
    return pooled.probs


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def invert_exposure(rule: RuleSpec, target, *, force_generic: bool = False) -> Forecast:
    """The forecast whose canonical exposure equals ``target``.

    Raises ExposureRangeError when no forecast attains the target (the
    failure mode of non-convex-exposure rules), SolverError when a
    numeric path fails to certify the identity to tolerance.
    """
    if not isinstance(target, ExposureVector):
        target = ExposureVector(np.asarray(target, dtype=float))
    t = target.coords
    if force_generic:
        return Forecast(_invert_generic(rule, t))
    x, _ = _invert_fast(rule, t)
    pooled = Forecast(x)
    res = _residual(rule, pooled, t)
    if res > _scaled(1e-8, t):
        raise SolverError(
            f"inversion for {rule.label} left residual {res:.3e} above tolerance"
        )
    return pooled


def qa_pool(rule: RuleSpec, inputs, *, force_generic: bool = False) -> PoolResult:
    """Pool weighted forecasts by averaging exposures and inverting.

    Inputs may be WeightedForecast instances or (forecast, weight)
    pairs.  Zero-weight entries are dropped; total_weight reports the
    sum of all supplied weights.
    """
    forecasts, w, total = _prepare(inputs)
    if _all_equal(forecasts):
        return PoolResult(forecasts[0], total, 0.0, CLOSED_FORM)
    t = _average_exposure(rule, forecasts, w)
    if force_generic:
        x, method = _invert_generic(rule, t), CONVEX_MIN
    else:
        x, method = _invert_fast(rule, t)
    pooled = Forecast(x)
    res = _residual(rule, pooled, t)
    if method != CONVEX_MIN and res > _scaled(1e-8, t):
        raise SolverError(
            f"pooling under {rule.label} left residual {res:.3e} above tolerance"
        )
    return PoolResult(pooled, total, res, method)


def tsallis_invert(gamma: float, v) -> Forecast:
    """Solve the tsallis simplex constraint for weighted power averages.

    Given v_j, the weighted average of the inputs' p_j^(gamma-1), finds
    the constant c with sum_j (v_j + c)^(1/(gamma-1)) = 1 and returns
    x_j = (v_j + c)^(1/(gamma-1)).  Raises ExposureRangeError when the
    constraint would force some v_j + c below zero (the failure mode of
    gamma > 2 with more than two outcomes).
    """
    if not gamma > 1.0:
        raise ConfigError("tsallis inversion requires gamma > 1")
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 2 or not np.all(np.isfinite(v)):
        raise ValueError("expected a finite vector of power averages")
    expo = 1.0 / (gamma - 1.0)

    def h(c: float) -> float:
        return float(np.power(v + c, expo).sum())

    lo = -float(v.min())  # smallest c keeping all bases nonnegative
    h0 = h(lo)
    if h0 > 1.0 + 1e-12:
        raise ExposureRangeError(
            "no admissible constant: the simplex constraint requires a "
            "negative base, so the average is outside the exposure range"
        )
    if h0 >= 1.0:
        c = lo
    else:
        hi = _expand_up(h, max(1.0, 2.0 * abs(lo)), lambda val: val >= 1.0)
        c = _bisect(lambda val: h(val) - 1.0, lo, hi)
    x = np.power(np.maximum(v + c, 0.0), expo)
    return Forecast(x / x.sum())


def spherical_pool(alpha: float, inputs) -> PoolResult:
    """Pool under the spherical rule by its sphere geometry.

    Steps: map each forecast to its raw exposure on the unit
    beta-sphere (beta = alpha/(alpha-1)); average; shift along the
    all-ones direction back onto the sphere; pull back through
    y -> y^(1/(alpha-1)) and normalize.
    """
    if not alpha > 1.0:
        raise ConfigError("spherical pooling requires alpha > 1")
    rule = RuleSpec.spherical(alpha)
    forecasts, w, total = _prepare(inputs)
    if _all_equal(forecasts):
        return PoolResult(forecasts[0], total, 0.0, CLOSED_FORM)
    beta = alpha / (alpha - 1.0)
    raw = np.stack([_gradient(rule, f.probs) for f in forecasts])
    v = w @ raw  # inside the unit beta-ball, nonnegative coordinates

    def psi(e: float) -> float:
        return float(np.power(v + e, beta).sum())

    p0 = psi(0.0)
    if p0 >= 1.0:
        shift = 0.0  # averages land inside the ball; equality up to rounding
    else:
        hi = _expand_up(psi, 1.0, lambda val: val >= 1.0)
        shift = _bisect(lambda val: psi(val) - 1.0, 0.0, hi)
    y = np.power(v + shift, 1.0 / (alpha - 1.0))
    pooled = Forecast(y / y.sum())
    res = _residual(rule, pooled, canonicalize(v))
    return PoolResult(pooled, total, res, ROOT_FIND)


def generalized_pool(
    rule: RuleSpec,
    inputs,
    *,
    floor: float | None = None,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> PoolResult:
    """Minimize the weighted sum of Bregman divergences to the inputs.

    Defined on the closed simplex, so it exists even when the exposure
    average has no exact inverse; whenever qa_pool succeeds the two
    agree.  Rules whose G itself diverges at the boundary (neglog,
    power with negative parameter) need an explicit interior ``floor``
    shrinking the feasible set to {x : x_j >= floor}.
    """
    forecasts, w, total = _prepare(inputs)
    unbounded = rule.family == "neglog" or (
        rule.family == "power" and rule.param < 0.0
    )
    if unbounded and (floor is None or floor <= 0.0):
        raise DomainError(
            f"rule {rule.label} has unbounded expected reward at the simplex "
            "boundary; supply a positive interior floor"
        )
    if floor is not None and not 0.0 <= floor * forecasts[0].n < 1.0:
        raise ValueError("floor must satisfy 0 <= n*floor < 1")
    if _all_equal(forecasts) and (floor is None or forecasts[0].probs.min() >= floor):
        return PoolResult(forecasts[0], total, 0.0, BREGMAN_MIN)
    t = _average_exposure(rule, forecasts, w)
    working_floor = floor if floor is not None else _interior_floor(rule, forecasts)
    x, kkt, converged = _minimize_tilted(
        rule, t, floor=working_floor, tol=tol, max_iter=max_iter
    )
    if not converged and kkt > _scaled(1e-7, t):
        raise SolverError(
            f"generalized pooling under {rule.label} stalled at KKT "
            f"residual {kkt:.3e}"
        )
    pooled = Forecast(x)
    return PoolResult(pooled, total, _residual(rule, pooled, t), BREGMAN_MIN)
