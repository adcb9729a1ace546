"""Gain models: how much a request is expected to earn under each action.

Three sources are provided:

* a synthetic power-law family ``value * cost**alpha`` with ``0 < alpha < 1``,
  which satisfies gain monotonicity and diminishing gain-per-cost exactly,
  row by row;
* a candidate-pool family where the gain of evaluating the first ``q``
  candidates is the sum of the top-k scores among them (monotone exactly;
  diminishing returns hold in expectation over candidate order);
* a per-action linear estimator trained from logged (features, action,
  realized gain) records.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .validation import as_float_array, check_costs, check_positive

GAIN_MODEL_FORMAT = "dynalloc-gain-model v1"


@dataclass(frozen=True)
class SyntheticGainParams:
    """Log-normal request values combined with a concave cost response.

    ``alpha`` must lie in (0, 1): the gain ``v * q**alpha`` then increases
    with the action while gain-per-cost ``v * q**(alpha-1)`` decreases.
    """

    mu: float = 0.0
    sigma: float = 1.0
    alpha: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")


def synthetic_gain(value: float, cost: float, alpha: float) -> float:
    """Gain of a request worth ``value`` under an action of cost ``cost``."""
    check_positive(value, "value")
    check_positive(cost, "cost")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return value * cost**alpha


def synthetic_values(params: SyntheticGainParams, n: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(params.seed) if rng is None else rng
    return rng.lognormal(params.mu, params.sigma, n)


def synthetic_rows(params: SyntheticGainParams, costs, n: int, rng=None) -> np.ndarray:
    """An ``(n, M)`` gain matrix from the power-law family."""
    costs = check_costs(costs)
    v = synthetic_values(params, n, rng)
    return v[:, None] * costs[None, :] ** params.alpha


@dataclass(frozen=True)
class AdScorePool:
    """Per-candidate scores for one request, in retrieval order."""

    scores: np.ndarray
    k: int = 1

    def __post_init__(self):
        scores = as_float_array(self.scores, "scores", ndim=1)
        if scores.size and np.any(scores < 0):
            raise ValueError("scores must be non-negative")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @property
    def size(self) -> int:
        return int(self.scores.shape[0])


def topk_pool_gain(pool: AdScorePool, j_evaluated: int) -> float:
    """Sum of the top ``min(k, j)`` scores among the first ``j`` candidates.

    ``j_evaluated`` counts how many candidates the ranking model scores;
    candidates keep their retrieval order, so evaluating more can only
    expose larger scores.
    """
    j = int(j_evaluated)
    if not (1 <= j <= pool.size):
        raise ValueError(f"j_evaluated must be in [1, {pool.size}], got {j_evaluated}")
    prefix = pool.scores[:j]
    kk = min(pool.k, j)
    return float(np.sort(prefix)[-kk:].sum())


def pool_gain_row(pool: AdScorePool, quotas) -> np.ndarray:
    """Gain row over integer evaluation quotas (clipped to the pool size)."""
    quotas = np.asarray(quotas)
    if quotas.ndim != 1 or quotas.size == 0:
        raise ValueError("quotas must be a non-empty 1-D sequence")
    out = np.empty(quotas.shape[0])
    for idx, q in enumerate(quotas):
        out[idx] = topk_pool_gain(pool, min(int(q), pool.size))
    return out


def sample_score_pool(rng, size: int, k: int, bid_sigma: float = 1.0) -> AdScorePool:
    """Draw one candidate pool; each score is click-rate times bid."""
    bids = rng.lognormal(0.0, bid_sigma, size)
    ctr = rng.uniform(0.005, 0.05, size)
    return AdScorePool(bids * ctr, k=k)


def monotonize_rows(gains) -> np.ndarray:
    """Running maximum along actions: never decreases any prediction and
    makes every row non-decreasing in the action index."""
    arr = np.asarray(gains, dtype=float)
    return np.maximum.accumulate(arr, axis=-1)


class LinearGainModel(BaseEstimator):
    """Per-action linear gain estimator with ridge regularization.

    One weight vector and intercept per action, fit on records of the
    action actually logged for each request. Predictions are clamped at
    zero and, by default, monotonized across actions with a running
    maximum so the allocator's structural requirement on gains holds.

    Parameters
    ----------
    n_actions:
        Number of actions in the space (one sub-model each).
    ridge:
        L2 penalty on the weights (not the intercept).
    monotonize:
        Apply the running-maximum pass in :meth:`predict_matrix`.
    """

    def __init__(self, n_actions: int = 1, ridge: float = 1e-8, monotonize: bool = True):
        self.n_actions = n_actions
        self.ridge = ridge
        self.monotonize = monotonize

    def fit(self, X, y, actions):
        """Fit per-action ridge regressions.

        ``X`` is ``(n, d)`` features, ``y`` the realized gains, ``actions``
        the logged action index per record. Actions with no records get
        zero weights and intercept, with a warning.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {X.shape}")
        y = np.asarray(y, dtype=float)
        actions = np.asarray(actions, dtype=np.int64)
        if y.shape[0] != X.shape[0] or actions.shape[0] != X.shape[0]:
            raise ValueError("X, y, and actions must have matching lengths")
        if self.n_actions < 1:
            raise ValueError("n_actions must be >= 1")
        if actions.size and (actions.min() < 0 or actions.max() >= self.n_actions):
            raise ValueError("actions contain an out-of-range index")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")

        d = X.shape[1]
        coef = np.zeros((self.n_actions, d))
        intercept = np.zeros(self.n_actions)
        missing = []
        for a in range(self.n_actions):
            mask = actions == a
            if not mask.any():
                missing.append(a)
                continue
            Xa, ya = X[mask], y[mask]
            x_mean = Xa.mean(axis=0) if d else np.zeros(0)
            y_mean = ya.mean()
            if d:
                Xc = Xa - x_mean
                lhs = Xc.T @ Xc + self.ridge * np.eye(d)
                coef[a] = np.linalg.solve(lhs, Xc.T @ (ya - y_mean))
            intercept[a] = y_mean - x_mean @ coef[a]
        if missing:
            warnings.warn(
                f"no training records for action(s) {missing}; "
                "their weights default to zero",
                stacklevel=2,
            )
        self.coef_ = coef
        self.intercept_ = intercept
        self.n_features_in_ = d
        return self

    def _check_features(self, X) -> np.ndarray:
        if not hasattr(self, "coef_"):
            raise ValueError("model is not fitted")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"feature dimension mismatch: model has {self.n_features_in_}, "
                f"input has {X.shape[1]}"
            )
        return X

    def predict(self, X, action: int | None = None) -> np.ndarray | float:
        """Predicted gain, clamped at zero.

        With ``action`` given, returns the prediction of that sub-model
        (a scalar for a single feature vector). Otherwise returns the full
        per-action matrix via :meth:`predict_matrix`.
        """
        if action is None:
            return self.predict_matrix(X)
        if not (0 <= int(action) < self.n_actions):
            raise ValueError(f"action index {action} out of range")
        single = np.asarray(X).ndim == 1
        Xv = self._check_features(X)
        raw = Xv @ self.coef_[int(action)] + self.intercept_[int(action)]
        out = np.maximum(raw, 0.0)
        return float(out[0]) if single else out

    def predict_matrix(self, X) -> np.ndarray:
        """Per-action predictions, clamped at zero, optionally monotonized."""
        Xv = self._check_features(X)
        raw = Xv @ self.coef_.T + self.intercept_[None, :]
        out = np.maximum(raw, 0.0)
        if self.monotonize:
            out = monotonize_rows(out)
        return out


def fit_linear(X, y, actions, n_actions: int, ridge: float = 1e-8) -> LinearGainModel:
    """Functional wrapper over :class:`LinearGainModel`."""
    return LinearGainModel(n_actions=n_actions, ridge=ridge).fit(X, y, actions)


def save_gain_model(model: LinearGainModel, path) -> None:
    """Write a fitted model as versioned flat text: action count and
    feature dimension, then one line per action (intercept, weights)."""
    if not hasattr(model, "coef_"):
        raise ValueError("model is not fitted")
    lines = [f"# {GAIN_MODEL_FORMAT}", f"{model.n_actions} {model.n_features_in_}"]
    for a in range(model.n_actions):
        row = [model.intercept_[a], *model.coef_[a]]
        lines.append(" ".join(repr(float(x)) for x in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_gain_model(path, monotonize: bool = True) -> LinearGainModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != f"# {GAIN_MODEL_FORMAT}":
        raise ValueError(f"unrecognized gain-model file (expected '{GAIN_MODEL_FORMAT}')")
    try:
        m, d = (int(tok) for tok in lines[1].split())
        rows = [[float(tok) for tok in line.split()] for line in lines[2 : 2 + m]]
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed gain-model file: {exc}") from exc
    if len(rows) != m or any(len(r) != d + 1 for r in rows):
        raise ValueError("malformed gain-model file: wrong row count or width")
    model = LinearGainModel(n_actions=m, monotonize=monotonize)
    arr = np.asarray(rows, dtype=float)
    model.intercept_ = arr[:, 0].copy()
    model.coef_ = arr[:, 1:].copy() if d else np.zeros((m, 0))
    model.n_features_in_ = d
    return model
