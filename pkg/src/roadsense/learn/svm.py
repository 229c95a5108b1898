"""RBF-kernel SVM trained by sequential minimal optimization.

The dual is solved in minimization form

    min_a  0.5 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K_ij

with maximal-violating-pair working set selection using second-order
information for the second index.  Labels are {0, 1} in the public API and
{-1, +1} inside the solver.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ClassMissing, ConvergenceWarning, DimensionMismatch, InvalidConfig

DEFAULT_C = 250.0
DEFAULT_TOL = 1e-3
DEFAULT_MAX_PASSES = 200
SV_EPS = 1e-8
FULL_GRAM_LIMIT = 20_000
_TAU = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """``exp(-gamma * ||a - b||^2)`` for every row pair of A and B."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


class _RowKernel:
    """Gram rows computed on demand, for training sets too large to cache."""

    def __init__(self, X: np.ndarray, gamma: float):
        self.X = X
        self.gamma = gamma

    def row(self, i: int) -> np.ndarray:
        return rbf_kernel(self.X[i : i + 1], self.X, self.gamma)[0]

    def diag(self) -> np.ndarray:
        return np.ones(self.X.shape[0])


class _FullKernel:
    def __init__(self, K: np.ndarray):
        self.K = K

    def row(self, i: int) -> np.ndarray:
        return self.K[i]

    def diag(self) -> np.ndarray:
        return np.diag(self.K).copy()


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    converged: bool
    iterations: int
    gap: float


def _bias(alpha, y, G, C) -> float:
    yG = y * G
    upper = alpha >= C
    lower = alpha <= 0
    free = ~(upper | lower)
    if free.any():
        rho = float(yG[free].mean())
    else:
        # rho lies anywhere in [lb, ub]; take the midpoint
        ub_mask = (upper & (y < 0)) | (lower & (y > 0))
        lb_mask = (upper & (y > 0)) | (lower & (y < 0))
        ub = float(yG[ub_mask].min()) if ub_mask.any() else np.inf
        lb = float(yG[lb_mask].max()) if lb_mask.any() else -np.inf
        if np.isfinite(ub) and np.isfinite(lb):
            rho = 0.5 * (ub + lb)
        else:
            rho = ub if np.isfinite(ub) else lb
    return -rho


def smo_solve(K, y: np.ndarray, C: float, tol: float = DEFAULT_TOL, max_iter: int | None = None) -> SmoResult:
    """Solve the SVM dual for a kernel matrix (or row provider) and labels in {-1, +1}."""
    kern = K if isinstance(K, (_FullKernel, _RowKernel)) else _FullKernel(np.asarray(K, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if max_iter is None:
        max_iter = DEFAULT_MAX_PASSES * max(n, 1)
    alpha = np.zeros(n)
    G = -np.ones(n)
    Kd = kern.diag()
    pos = y > 0

    it = 0
    gap = np.inf
    converged = False
    while True:
        at_upper = alpha >= C
        at_lower = alpha <= 0
        in_up = np.where(pos, ~at_upper, ~at_lower)
        in_low = np.where(pos, ~at_lower, ~at_upper)
        score = -y * G
        up_scores = np.where(in_up, score, -np.inf)
        low_scores = np.where(in_low, score, np.inf)
        i = int(np.argmax(up_scores))
        m = up_scores[i]
        M = float(low_scores.min())
        gap = float(m - M)
        if gap < tol:
            converged = True
            break
        if it >= max_iter:
            break

        Ki = kern.row(i)
        # second index: largest objective decrease among violating partners
        b = m - score
        cand = in_low & (b > 0)
        a = Kd[i] + Kd - 2.0 * Ki
        a = np.where(a > 0, a, _TAU)
        gain = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(gain))
        Kj = kern.row(j)

        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        quad = Kd[i] + Kd[j] - 2.0 * Ki[j]
        if quad <= 0:
            quad = _TAU
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        # Q_ti = y_t y_i K_ti
        G += y * (yi * (ai - ai_old) * Ki + yj * (aj - aj_old) * Kj)
        it += 1

    return SmoResult(alpha, _bias(alpha, y, G, C), converged, it, gap)


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """``sum(a) - 0.5 * sum_ij a_i a_j y_i y_j K_ij`` (the quantity SMO maximizes)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def kkt_residuals(alpha: np.ndarray, y: np.ndarray, K: np.ndarray, bias: float, C: float) -> np.ndarray:
    """Per-point violation of the soft-margin KKT conditions (0 when satisfied)."""
    margin = y * (K @ (alpha * y) + bias)
    res = np.zeros_like(margin)
    lower = alpha <= SV_EPS
    upper = alpha >= C - SV_EPS * max(C, 1.0)
    free = ~(lower | upper)
    res[lower] = np.maximum(0.0, 1.0 - margin[lower])
    res[upper] = np.maximum(0.0, margin[upper] - 1.0)
    res[free] = np.abs(margin[free] - 1.0)
    return res


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    gamma: float
    C: float
    threshold: float = 0.0
    converged: bool = True
    iterations: int = 0

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def with_threshold(self, threshold: float) -> "SvmModel":
        return SvmModel(
            self.support_vectors, self.dual_coefs, self.bias, self.gamma, self.C,
            float(threshold), self.converged, self.iterations,
        )

    def to_dict(self) -> dict:
        return {
            "support_vectors": [[float(v) for v in row] for row in self.support_vectors],
            "dual_coefs": [float(v) for v in self.dual_coefs],
            "bias": float(self.bias),
            "gamma": float(self.gamma),
            "C": float(self.C),
            "threshold": float(self.threshold),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        coefs = np.asarray(d["dual_coefs"], dtype=np.float64).reshape(-1)
        svs = np.asarray(d["support_vectors"], dtype=np.float64)
        if svs.ndim != 2 or svs.shape[0] != coefs.shape[0]:
            if coefs.shape[0] == 0 and svs.size == 0:
                svs = svs.reshape(0, 0)
            else:
                raise ValueError("support_vectors and dual_coefs disagree in length")
        gamma, C = float(d["gamma"]), float(d["C"])
        if not gamma > 0 or not C > 0:
            raise ValueError("gamma and C must be positive")
        return cls(
            svs, coefs, float(d["bias"]), gamma, C, float(d.get("threshold", 0.0)),
            bool(d.get("converged", True)), int(d.get("iterations", 0)),
        )


def _check_training(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has shape {X.shape}, y has {y.shape[0]} labels")
    if not np.isin(y, (0, 1)).all():
        raise InvalidConfig("labels must be 0 or 1")
    if X.shape[0] < 2 or (y == 0).all() or (y == 1).all():
        raise ClassMissing("training data needs both classes")


def train_svm(
    X: np.ndarray,
    y: np.ndarray,
    C: float = DEFAULT_C,
    gamma: float | None = None,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
) -> SvmModel:
    """Fit an RBF SVM on ``X`` with labels ``y`` in {0, 1}.

    Rows are put in a canonical (lexicographic) order before solving, so the
    fitted model does not depend on the order of the training set.  ``gamma``
    defaults to ``1 / n_features``.  If the iteration cap of ``max_passes * n``
    pair updates is hit, the best solution so far is returned with
    ``converged=False`` and a :class:`ConvergenceWarning` is emitted.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64).reshape(-1)
    _check_training(X, y)
    if gamma is None:
        gamma = 1.0 / X.shape[1]
    if not C > 0 or not gamma > 0:
        raise InvalidConfig("C and gamma must be positive")

    order = np.lexsort(np.column_stack([X, y]).T[::-1])
    X, y = X[order], y[order]
    ys = np.where(y == 1, 1.0, -1.0)

    n = X.shape[0]
    kern = _FullKernel(rbf_kernel(X, X, gamma)) if n <= FULL_GRAM_LIMIT else _RowKernel(X, gamma)
    res = smo_solve(kern, ys, C, tol=tol, max_iter=max_passes * n)
    if not res.converged:
        warnings.warn(
            f"SMO stopped after {res.iterations} updates with KKT gap {res.gap:.3g} > tol {tol}",
            ConvergenceWarning,
            stacklevel=2,
        )
    sv = res.alpha > SV_EPS
    return SvmModel(
        support_vectors=X[sv],
        dual_coefs=res.alpha[sv] * ys[sv],
        bias=res.bias,
        gamma=float(gamma),
        C=float(C),
        converged=res.converged,
        iterations=res.iterations,
    )


def decision_values(model: SvmModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.support_vectors.shape[0] == 0:
        return np.full(X.shape[0], model.bias)
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, got {X.shape[1]}")
    return rbf_kernel(X, model.support_vectors, model.gamma) @ model.dual_coefs + model.bias


def predict(model: SvmModel, X: np.ndarray, threshold: float | None = None) -> np.ndarray:
    tau = model.threshold if threshold is None else threshold
    return (decision_values(model, X) >= tau).astype(np.int64)


def sweep_C(train, test, C_grid, gamma: float | None = None, tol: float = DEFAULT_TOL,
            max_passes: int = DEFAULT_MAX_PASSES) -> list[tuple[float, float, float]]:
    """Train one SVM per C; returns ``(C, train_error, test_error)`` in grid order.

    ``train`` and ``test`` are ``(X, y)`` pairs.
    """
    grid = [float(c) for c in C_grid]
    if not grid or any(not c > 0 for c in grid):
        raise InvalidConfig("C grid must be a non-empty list of positive values")
    (Xtr, ytr), (Xte, yte) = train, test
    out = []
    for c in grid:
        model = train_svm(Xtr, ytr, C=c, gamma=gamma, tol=tol, max_passes=max_passes)
        tr_err = float(np.mean(predict(model, Xtr) != np.asarray(ytr)))
        te_err = float(np.mean(predict(model, Xte) != np.asarray(yte)))
        out.append((c, tr_err, te_err))
    return out


def cross_val_decision_values(X, y, folds: int = 5, seed: int = 0, **svm_kwargs) -> np.ndarray:
    """Out-of-fold decision values from stratified ``folds``-fold training.

    Scores from held-out rows, unlike in-sample scores of a tight fit, are
    usable for picking a decision threshold.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).reshape(-1).astype(np.int64)
    _check_training(X, y)
    rng = np.random.default_rng(seed)
    fold = np.empty(y.shape[0], dtype=np.int64)
    for cls in (0, 1):
        idx = rng.permutation(np.flatnonzero(y == cls))
        fold[idx] = np.arange(idx.size) % folds
    out = np.empty(y.shape[0])
    for f in range(folds):
        held = fold == f
        if not held.any():
            continue
        model = train_svm(X[~held], y[~held], **svm_kwargs)
        out[held] = decision_values(model, X[held])
    return out
