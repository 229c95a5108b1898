"""L2-regularized logistic regression fitted by gradient descent.

Loss is the mean log-loss plus ``0.5 * l2 * ||w||^2``; the bias is not
penalized.  Each step uses Armijo backtracking starting from twice the
previous accepted step.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ClassMissing, ConvergenceWarning, DimensionMismatch


@dataclass(frozen=True, eq=False)
class LogRegModel:
    weights: np.ndarray
    bias: float
    l2_penalty: float
    converged: bool
    iterations: int
    grad_norm: float


def loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float):
    """Return ``(loss, grad_w, grad_b)`` for labels in {0, 1}."""
    s = 2.0 * y - 1.0
    z = X @ w + b
    loss = np.logaddexp(0.0, -s * z).mean() + 0.5 * l2 * (w @ w)
    # d/dz log(1 + exp(-s z)) = -s * sigmoid(-s z)
    r = -s * np.exp(-np.logaddexp(0.0, s * z)) / X.shape[0]
    return float(loss), X.T @ r + l2 * w, float(r.sum())


def train_logreg(X, y, l2_penalty: float = 1e-3, max_iters: int = 5000, tol: float = 1e-6) -> LogRegModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).reshape(-1).astype(np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has shape {X.shape}, y has {y.shape[0]} labels")
    if X.shape[0] == 0 or (y == 0).all() or (y == 1).all():
        raise ClassMissing("training data needs both classes")

    w = np.zeros(X.shape[1])
    b = 0.0
    loss, gw, gb = loss_and_grad(w, b, X, y, l2_penalty)
    step = 1.0
    it = 0
    gnorm = float(np.sqrt(gw @ gw + gb * gb))
    while gnorm > tol and it < max_iters:
        g2 = gnorm * gnorm
        step *= 2.0
        while True:
            w_new, b_new = w - step * gw, b - step * gb
            loss_new, gw_new, gb_new = loss_and_grad(w_new, b_new, X, y, l2_penalty)
            if loss_new <= loss - 0.5 * step * g2 or step < 1e-20:
                break
            step *= 0.5
        w, b, loss, gw, gb = w_new, b_new, loss_new, gw_new, gb_new
        gnorm = float(np.sqrt(gw @ gw + gb * gb))
        it += 1

    converged = gnorm <= tol
    if not converged:
        warnings.warn(
            f"logistic regression stopped after {it} iterations, gradient norm {gnorm:.3g}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return LogRegModel(w, b, l2_penalty, converged, it, gnorm)


def logreg_decision(model: LogRegModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.weights.shape[0]:
        raise DimensionMismatch(f"model expects {model.weights.shape[0]} features, got {X.shape[1]}")
    return X @ model.weights + model.bias


def logreg_predict(model: LogRegModel, X) -> np.ndarray:
    return (logreg_decision(model, X) >= 0.0).astype(np.int64)


def majority_baseline(y) -> int:
    """Class predicted by the majority-class baseline (ties -> 0)."""
    y = np.asarray(y).reshape(-1)
    return int(2 * y.sum() > y.shape[0])
