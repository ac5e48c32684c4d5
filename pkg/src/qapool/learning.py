"""Online learning of expert weights with no-regret guarantees.

At each step the learner pools the experts' forecasts with its current
weight vector, suffers the negative score of the pool at the realized
outcome, and takes a projected gradient step.  The loss is convex in
the weights (the pooled score is concave), its gradient in weights has
entries <g(p_i), pool - e_j>, and with step sizes 1/(M sqrt(m t)) the
cumulative regret against the best fixed weight vector in hindsight is
at most 3 sqrt(m) M sqrt(T), where M bounds the exposure norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SolverError
from .optim import projected_gradient
from .pooling import _invert_fast
from .rules import (
    Forecast,
    RuleSpec,
    as_forecast,
    exposure,
    exposure_norm_bound,
    _expected,
    _gradient,
)
from .simplex import canonicalize, project_simplex, uniform_point

__all__ = [
    "WeightVector",
    "LearningConfig",
    "RegretReport",
    "as_weight_vector",
    "weight_score",
    "loss_gradient",
    "project_to_simplex",
    "ogd_run",
    "offline_best_weights",
]


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Expert weights on the probability simplex (m >= 1)."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weight vector must be one-dimensional, m >= 1")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise ValueError("weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total!r}, not 1 within 1e-9")
        w = w / total
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.weights.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightVector):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __repr__(self) -> str:
        return f"WeightVector({np.array2string(self.weights, separator=', ')})"


def as_weight_vector(value) -> WeightVector:
    if isinstance(value, WeightVector):
        return value
    return WeightVector(np.asarray(value, dtype=float))


@dataclass(frozen=True)
class LearningConfig:
    """Configuration for an online weight-learning run.

    M must dominate the exposure norms of every stream forecast; for
    bounded rules it defaults to the analytic supremum over the
    simplex, for open-domain rules it must be supplied together with
    forecast_floor (a clamp keeping stream forecasts inside the shell
    where the supplied M is valid).
    """

    rule: RuleSpec
    m: int
    M: float | None = None
    seed: int = 0
    T: int | None = None
    forecast_floor: float | None = None

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ConfigError("need at least one expert")
        if self.M is not None and not self.M > 0.0:
            raise ConfigError("exposure bound M must be positive")
        if self.T is not None and self.T < 1:
            raise ConfigError("horizon T must be at least 1")
        if self.forecast_floor is not None and not 0.0 < self.forecast_floor:
            raise ConfigError("forecast_floor must be positive")


@dataclass(frozen=True)
class RegretReport:
    """Losses, hindsight baseline, and the regret bound for one run."""

    per_step_loss: np.ndarray
    comparator_loss: np.ndarray  # per-step losses of the best fixed weights
    best_weights: WeightVector
    best_fixed_loss: float
    cumulative_regret: float
    bound: float
    exposure_bound: float
    observed_exposure_sup: float
    exposure_bound_exceeded: bool
    final_weights: WeightVector | None = field(repr=False, default=None)

    @property
    def T(self) -> int:
        return self.per_step_loss.size

    def regret_curve(self) -> np.ndarray:
        """Cumulative regret against the final best fixed weights."""
        return np.cumsum(self.per_step_loss - self.comparator_loss)


# --------------------------------------------------------------------------
# stream handling and batched evaluation
# --------------------------------------------------------------------------

def _clamp(forecast: Forecast, floor: float) -> Forecast:
    p = np.maximum(forecast.probs, floor)
    return Forecast(p / p.sum())


def _normalize_stream(stream, floor: float | None = None):
    steps = []
    m = n = None
    for forecasts, j in stream:
        fs = [as_forecast(f) for f in forecasts]
        if floor is not None:
            fs = [_clamp(f, floor) for f in fs]
        if m is None:
            m, n = len(fs), fs[0].n
        if len(fs) != m or any(f.n != n for f in fs):
            raise ValueError("stream must keep expert and outcome counts constant")
        j = int(j)
        if not 1 <= j <= n:
            raise ValueError(f"outcome {j} out of range 1..{n}")
        steps.append((fs, j))
    if not steps:
        raise ValueError("stream is empty")
    return steps


class _StreamEvaluator:
    """Precomputed exposures for a recorded stream.

    Losses and weight-gradients reduce to array algebra: with E[t] the
    m x n matrix of canonical expert exposures at step t, the pool
    solves g(x) = w @ E[t] and the loss gradient in w is
    E[t] @ (x - e_j), up to an all-ones shift.
    """

    def __init__(self, rule: RuleSpec, steps) -> None:
        self.rule = rule
        self.T = len(steps)
        self.m = len(steps[0][0])
        self.n = steps[0][0][0].n
        self.E = np.empty((self.T, self.m, self.n))
        self.J = np.empty(self.T, dtype=int)
        for t, (fs, j) in enumerate(steps):
            for i, f in enumerate(fs):
                self.E[t, i] = exposure(rule, f).coords
            self.J[t] = j - 1

    def exposure_sup(self) -> float:
        return float(np.linalg.norm(self.E, axis=2).max())

    # -- single step ---------------------------------------------------

    def pool_probs(self, t: int, w: np.ndarray) -> np.ndarray:
        target = canonicalize(w @ self.E[t])
        x, _ = _invert_fast(self.rule, target)
        return x

    def step_loss(self, t: int, w: np.ndarray) -> float:
        return -_score_raw(self.rule, self.pool_probs(t, w), self.J[t])

    def step_loss_and_grad(self, t: int, w: np.ndarray) -> tuple[float, np.ndarray]:
        x = self.pool_probs(t, w)
        loss = -_score_raw(self.rule, x, self.J[t])
        d = x.copy()
        d[self.J[t]] -= 1.0
        return loss, canonicalize(self.E[t] @ d)

    # -- whole stream ----------------------------------------------------

    def _batch_pools(self, w: np.ndarray) -> np.ndarray:
        targets = np.einsum("m,tmn->tn", w, self.E)
        targets -= targets.mean(axis=1, keepdims=True)
        fam = self.rule.family
        if fam == "quadratic":
            return 0.5 * targets + 1.0 / self.n
        if fam == "log":
            z = np.exp(targets - targets.max(axis=1, keepdims=True))
            return z / z.sum(axis=1, keepdims=True)
        out = np.empty((self.T, self.n))
        for t in range(self.T):
            out[t], _ = _invert_fast(self.rule, targets[t])
        return out

    def per_step_losses(self, w: np.ndarray) -> np.ndarray:
        X = self._batch_pools(w)
        fam = self.rule.family
        rows = np.arange(self.T)
        if fam == "quadratic":
            scores = 2.0 * X[rows, self.J] - np.einsum("tn,tn->t", X, X)
        elif fam == "log":
            scores = np.log(X[rows, self.J])
        else:
            scores = np.array(
                [_score_raw(self.rule, X[t], self.J[t]) for t in range(self.T)]
            )
        return -scores

    def total_loss(self, w: np.ndarray) -> float:
        return float(self.per_step_losses(w).sum())

    def total_grad(self, w: np.ndarray) -> np.ndarray:
        X = self._batch_pools(w)
        D = X.copy()
        D[np.arange(self.T), self.J] -= 1.0
        return canonicalize(np.einsum("tmn,tn->m", self.E, D))


def _score_raw(rule: RuleSpec, probs: np.ndarray, j0: int) -> float:
    """Score with a 0-based outcome index, skipping Forecast wrapping."""
    g = canonicalize(_gradient(rule, probs))
    return _expected(rule, probs) + g[j0] - float(np.dot(g, probs))


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def weight_score(rule: RuleSpec, forecasts, w, j: int) -> float:
    """Score of the pool of ``forecasts`` under weights ``w`` at outcome j."""
    wv = as_weight_vector(w)
    fs = [as_forecast(f) for f in forecasts]
    if len(fs) != wv.m:
        raise ValueError("one weight per forecast required")
    ev = _StreamEvaluator(rule, [(fs, j)])
    return -ev.step_loss(0, wv.weights)


def loss_gradient(rule: RuleSpec, forecasts, w, j: int) -> np.ndarray:
    """Gradient in w of the loss -weight_score, canonicalized to sum zero."""
    wv = as_weight_vector(w)
    fs = [as_forecast(f) for f in forecasts]
    if len(fs) != wv.m:
        raise ValueError("one weight per forecast required")
    ev = _StreamEvaluator(rule, [(fs, j)])
    _, grad = ev.step_loss_and_grad(0, wv.weights)
    return grad


def project_to_simplex(y) -> WeightVector:
    """Euclidean-nearest point of the weight simplex."""
    return WeightVector(project_simplex(np.asarray(y, dtype=float)))


def _solve_offline(
    ev: _StreamEvaluator, tol: float = 1e-8, max_iter: int = 1_000_000
) -> tuple[np.ndarray, float]:
    # optimize the per-step mean so the first-order tolerances refer to
    # a T-independent scale
    inv_t = 1.0 / ev.T
    w, kkt, converged = projected_gradient(
        lambda w: ev.total_loss(w) * inv_t,
        lambda w: ev.total_grad(w) * inv_t,
        uniform_point(ev.m),
        project_simplex,
        tol=tol,
        max_iter=max_iter,
    )
    if not converged and kkt > 1e-6:
        raise SolverError(
            f"offline weight optimization stalled at KKT residual {kkt:.3e}"
        )
    return w, ev.total_loss(w)


def offline_best_weights(rule: RuleSpec, stream) -> tuple[WeightVector, float]:
    """Best fixed weights in hindsight and their total loss.

    Maximizes the summed pooled scores over the weight simplex; the
    objective is concave, so projected gradient with backtracking
    converges to the global optimum.
    """
    ev = _StreamEvaluator(rule, _normalize_stream(stream))
    w, loss = _solve_offline(ev)
    return WeightVector(w), loss


def ogd_run(config: LearningConfig, stream) -> RegretReport:
    """Run online gradient descent over expert weights on a stream.

    The stream is a sequence of (forecasts, outcome) pairs with 1-based
    outcomes.  Starts from uniform weights, steps with
    eta_t = 1/(M sqrt(m t)), and projects back onto the simplex.
    """
    rule = config.rule
    if rule.domain_kind == "open":
        if config.M is None or config.forecast_floor is None:
            raise ConfigError(
                f"rule {rule.label} has unbounded exposure: supply both M "
                "and forecast_floor in the learning config"
            )
    steps = _normalize_stream(stream, floor=config.forecast_floor)
    if len(steps[0][0]) != config.m:
        raise ConfigError(
            f"config expects {config.m} experts, stream has {len(steps[0][0])}"
        )
    T = config.T if config.T is not None else len(steps)
    if T > len(steps):
        raise ConfigError(f"horizon {T} exceeds stream length {len(steps)}")
    steps = steps[:T]
    n = steps[0][0][0].n
    M = config.M if config.M is not None else exposure_norm_bound(rule, n)

    ev = _StreamEvaluator(rule, steps)
    observed = ev.exposure_sup()
    m = config.m
    w = uniform_point(m)
    losses = np.empty(T)
    for t in range(T):
        loss, grad = ev.step_loss_and_grad(t, w)
        losses[t] = loss
        eta = 1.0 / (M * np.sqrt(m * (t + 1)))
        w = project_simplex(w - eta * grad)

    best_w, best_loss = _solve_offline(ev)
    comparator = ev.per_step_losses(best_w)
    return RegretReport(
        per_step_loss=losses,
        comparator_loss=comparator,
        best_weights=WeightVector(best_w),
        best_fixed_loss=best_loss,
        cumulative_regret=float(losses.sum() - best_loss),
        bound=float(3.0 * np.sqrt(m) * M * np.sqrt(T)),
        exposure_bound=float(M),
        observed_exposure_sup=observed,
        exposure_bound_exceeded=bool(observed > M),
        final_weights=WeightVector(w),
    )
